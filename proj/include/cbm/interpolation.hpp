// The adaptive path interpolation experiment.
//
// A (t, s)-indexed family of ensembles connects the censored block model
// (t = 1, s = 0) to a fully decoupled field model (t = T, s = 1). Each
// ensemble member is still an exact GF(2) system: half-edges and
// perturbation fields contribute singleton rows, factors contribute K-rows.
// Two builders are provided:
//
//   build_ts_instance   the literal per-block construction (half-edge
//                       counts e_i^{(t')} ~ Poi(alpha K/T), current block
//                       ~ Poi(alpha K s/T), factor block
//                       ~ Poi(alpha n (T-t+1-s)/T))
//   build_ts_collapsed  the equal-in-distribution form with one
//                       Bernoulli(eps_bar) forcing flag per variable,
//                       eps_bar = 1 - (1-eps)(1-delta n^-theta)
//                                 exp(-(alpha K/T)(s r~_t + sum_{t'<t} r~_t')).
//
// The collapsed form is what production sweeps use (it costs O(n) per
// instance independent of t); the unit tests hold the two builders to a
// two-sample KS test.

#pragma once

#include "cbm/channel.hpp"
#include "cbm/gf2.hpp"
#include "cbm/model.hpp"
#include "cbm/replica.hpp"
#include "cbm/rng.hpp"
#include "cbm/stats.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cbm {

struct InterpParams {
    ModelParams model;
    std::size_t T = 1;
    double eps = 0.0;
    double delta = 0.0;
    double theta = 0.2;

    void validate() const;
    double htilde_prob() const; // delta * n^-theta
};

struct InterpPath {
    std::vector<double> r;       // revealed weights r^{(1..T)}
    std::vector<double> tilde_r; // bp_update_prob per step

    static InterpPath constant(double r, const InterpParams& params);
    static InterpPath from_weights(std::vector<double> r, const InterpParams& params);
};

struct TsInstance {
    explicit TsInstance(std::size_t n) : gf2(n) {}

    int t = 1;
    double s = 0.0;
    std::vector<std::uint8_t> base_forced; // H_i = inf or some inf half-edge
    std::vector<std::uint8_t> htilde_inf;  // H~_i = inf
    std::vector<std::vector<std::uint32_t>> factors;
    std::vector<Coupling> couplings;
    // literal-builder detail; empty in collapsed mode
    std::vector<std::vector<std::uint32_t>> half_edge_counts; // [i][block], blocks t'=1..t-1 then the s-block
    std::vector<std::vector<Coupling>> half_edge_values;      // [i], flat, aligned with counts
    Gf2System gf2;
};

TsInstance build_ts_instance(const InterpParams& params, const InterpPath& path, int t, double s,
                             RandomSource& rng);
TsInstance build_ts_collapsed(const InterpParams& params, const InterpPath& path, int t, double s,
                              RandomSource& rng);

enum class BuildMode { full, collapsed };

// Monte Carlo estimate of h_{t,s;eps,delta} = (1/n) E ln Z over fresh
// TsInstances; per-trial seeds derive from `seed`, so results are
// independent of thread count.
MeanSE ts_free_entropy(const InterpParams& params, const InterpPath& path, int t, double s,
                       std::size_t trials, std::uint64_t seed, BuildMode mode = BuildMode::collapsed,
                       unsigned threads = 0);

// (1/n) E_{H~} ln Z for one fixed instance skeleton: exact enumeration over
// H~ patterns when at most `exact_cap` variables can matter, Monte Carlo
// over `mc_trials` patterns otherwise.
struct PartialAverage {
    double value = 0.0;
    double se = 0.0;  // zero in exact mode
    bool exact = false;
};
PartialAverage partially_averaged_free_entropy(const TsInstance& ts, const InterpParams& params,
                                               std::size_t mc_trials, RandomSource& rng,
                                               unsigned exact_cap = 20);

// Moment-matched path: r^{(t)} is set sequentially to the Monte Carlo
// estimate of E<Q_1> at (t, 0) with delta = 0, using only r^{(1..t-1)}.
struct AdaptivePathResult {
    InterpPath path;
    std::vector<double> step_se; // SE of each r^{(t)} estimate
};
AdaptivePathResult adaptive_path(const InterpParams& params, std::size_t trials_per_step,
                                 std::uint64_t seed, BuildMode mode = BuildMode::collapsed,
                                 unsigned threads = 0);

// R_{t,s;eps,delta} = (1-q) ln2 E[ <Q_1^K> - K q1^{K-1} (<Q_1> - q1) - q1^K ],
// q1 = r^{(t)}; overlap moments are exact per instance (coset classes).
MeanSE remainder_estimate(const InterpParams& params, const InterpPath& path, int t, double s,
                          std::size_t trials, std::uint64_t seed, BuildMode mode = BuildMode::collapsed,
                          unsigned threads = 0);

struct SumRuleReport {
    MeanSE lhs;                 // h_{1,0;eps,delta}
    double generalized = 0.0;   // closed-form tilde h_{eps,delta}(path)
    double remainder_integral = 0.0;
    double remainder_se = 0.0;
    double residual = 0.0;      // lhs - generalized - remainder
    double residual_se = 0.0;
    std::vector<double> grid_s;
    std::size_t trials_per_point = 0;
    std::size_t lhs_trials = 0;
};

SumRuleReport sum_rule_check(const InterpParams& params, const InterpPath& path,
                             std::span<const double> grid_s, std::size_t trials_per_point,
                             std::size_t lhs_trials, std::uint64_t seed,
                             BuildMode mode = BuildMode::collapsed, unsigned threads = 0);

// Central finite difference of h_{t,s;eps,delta} in delta against
// -(ln2) (1 - E<Q_1>) / (n^theta (1 - delta n^-theta)). Exact (enumeration
// over field patterns per skeleton) for small n, coupled Monte Carlo
// otherwise.
struct DeltaDerivativeReport {
    double finite_difference = 0.0;
    double formula = 0.0;
    double max_rel_error = 0.0;
    double combined_se = 0.0;
    bool exact = false;
    bool step_too_small = false; // MC mode: noise dominates the difference
};
DeltaDerivativeReport delta_derivative_check(const InterpParams& params, const InterpPath& path,
                                             int t, double s, std::size_t trials, double step,
                                             std::uint64_t seed);

struct ConcentrationRow {
    std::size_t n = 0;
    double eps_lo = 0.0, eps_hi = 0.0;
    double thermal_integral = 0.0; // estimate of int_{eps window} E<(Q_1 - <Q_1>)^2>
    double thermal_se = 0.0;
    double thermal_bound = 0.0;    // 3/n
    double overlap_disorder_var = 0.0;
    double fe_variance = 0.0;      // across instances, H~-averaged free entropy
    double fe_variance_times_n = 0.0;
    std::size_t trials = 0;
};

// Evaluated at (t, s) = (1, 0). eps_window empty selects the default
// [n^-1/2, 2 n^-1/2] per n.
std::vector<ConcentrationRow> concentration_report(const InterpParams& params,
                                                   std::span<const std::size_t> n_list,
                                                   std::span<const double> eps_window,
                                                   std::size_t trials, std::uint64_t seed,
                                                   unsigned threads = 0);

// Exact per-instance thermal variance <(Q_1 - <Q_1>)^2> =
// (1/n^2) sum_{classes c != zero} size_c^2.
double thermal_overlap_variance(const Gf2System& system);

} // namespace cbm
