#include "cbm/interpolation.hpp"

#include "cbm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cbm {

namespace {
constexpr double kLn2 = std::numbers::ln2;
}

void InterpParams::validate() const {
    model.validate();
    if (T < 1) throw std::invalid_argument("InterpParams: T must be >= 1");
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("InterpParams: eps must be in [0,1]");
    if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("InterpParams: delta must be in [0,1]");
    if (!(theta > 0.0 && theta <= 0.2)) throw std::invalid_argument("InterpParams: theta must be in (0, 1/5]");
}

double InterpParams::htilde_prob() const {
    return delta * std::pow(static_cast<double>(model.n), -theta);
}

InterpPath InterpPath::from_weights(std::vector<double> r, const InterpParams& params) {
    params.validate();
    if (r.size() != params.T) throw std::invalid_argument("InterpPath: path length must equal T");
    InterpPath path;
    path.tilde_r.reserve(r.size());
    const BecChannel channel(params.model.q);
    for (double w : r) path.tilde_r.push_back(bp_update_prob(channel, w, params.model.K));
    path.r = std::move(r);
    return path;
}

InterpPath InterpPath::constant(double r, const InterpParams& params) {
    return from_weights(std::vector<double>(params.T, r), params);
}

namespace {

void check_coordinates(const InterpParams& params, const InterpPath& path, int t, double s) {
    params.validate();
    if (path.r.size() != params.T) throw std::invalid_argument("interpolation: path length must equal T");
    if (t < 1 || static_cast<std::size_t>(t) > params.T)
        throw std::invalid_argument("interpolation: t out of range");
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("interpolation: s out of range");
}

// factor block shared by both builders: m_s^{(t)} ~ Poi(alpha n (T-t+1-s)/T)
void draw_factor_block(const InterpParams& params, int t, double s, RandomSource& rng,
                       TsInstance& out) {
    const auto& mp = params.model;
    const double rate = mp.alpha * static_cast<double>(mp.n) *
                        (static_cast<double>(params.T) - t + 1.0 - s) / static_cast<double>(params.T);
    const auto m = rng.poisson(rate);
    const BecChannel channel(mp.q);
    out.factors.reserve(m);
    out.couplings.reserve(m);
    for (std::uint64_t a = 0; a < m; ++a) {
        out.factors.push_back(rng.k_subset(static_cast<std::uint32_t>(mp.n), mp.K));
        out.couplings.push_back(sample_coupling(channel, rng));
    }
}

void assemble_gf2(TsInstance& ts) {
    const auto n = ts.base_forced.size();
    for (std::uint32_t i = 0; i < n; ++i)
        if (ts.base_forced[i] || ts.htilde_inf[i]) ts.gf2.add_singleton(i);
    for (std::size_t a = 0; a < ts.factors.size(); ++a)
        if (ts.couplings[a] == Coupling::inf) ts.gf2.add_row(ts.factors[a]);
}

} // namespace

TsInstance build_ts_instance(const InterpParams& params, const InterpPath& path, int t, double s,
                             RandomSource& rng) {
    check_coordinates(params, path, t, s);
    const auto& mp = params.model;
    TsInstance ts(mp.n);
    ts.t = t;
    ts.s = s;
    ts.base_forced.assign(mp.n, 0);
    ts.htilde_inf.assign(mp.n, 0);
    ts.half_edge_counts.assign(mp.n, {});
    ts.half_edge_values.assign(mp.n, {});
    const double block_rate = mp.alpha * mp.K / static_cast<double>(params.T);
    const double ht_prob = params.htilde_prob();
    for (std::uint32_t i = 0; i < mp.n; ++i) {
        auto& counts = ts.half_edge_counts[i];
        auto& values = ts.half_edge_values[i];
        counts.reserve(static_cast<std::size_t>(t));
        for (int tp = 1; tp < t; ++tp) {
            const auto e = rng.poisson(block_rate);
            counts.push_back(static_cast<std::uint32_t>(e));
            for (std::uint64_t b = 0; b < e; ++b) {
                const bool inf = rng.bernoulli(path.tilde_r[static_cast<std::size_t>(tp - 1)]);
                values.push_back(inf ? Coupling::inf : Coupling::zero);
                if (inf) ts.base_forced[i] = 1;
            }
        }
        const auto es = rng.poisson(block_rate * s);
        counts.push_back(static_cast<std::uint32_t>(es));
        for (std::uint64_t b = 0; b < es; ++b) {
            const bool inf = rng.bernoulli(path.tilde_r[static_cast<std::size_t>(t - 1)]);
            values.push_back(inf ? Coupling::inf : Coupling::zero);
            if (inf) ts.base_forced[i] = 1;
        }
        if (rng.bernoulli(params.eps)) ts.base_forced[i] = 1; // H_i
        if (rng.bernoulli(ht_prob)) ts.htilde_inf[i] = 1;     // H~_i
    }
    draw_factor_block(params, t, s, rng, ts);
    assemble_gf2(ts);
    return ts;
}

TsInstance build_ts_collapsed(const InterpParams& params, const InterpPath& path, int t, double s,
                              RandomSource& rng) {
    check_coordinates(params, path, t, s);
    const auto& mp = params.model;
    TsInstance ts(mp.n);
    ts.t = t;
    ts.s = s;
    ts.base_forced.assign(mp.n, 0);
    ts.htilde_inf.assign(mp.n, 0);
    double exponent = s * path.tilde_r[static_cast<std::size_t>(t - 1)];
    for (int tp = 1; tp < t; ++tp) exponent += path.tilde_r[static_cast<std::size_t>(tp - 1)];
    const double p_base =
        1.0 - (1.0 - params.eps) * std::exp(-mp.alpha * mp.K / static_cast<double>(params.T) * exponent);
    const double ht_prob = params.htilde_prob();
    for (std::uint32_t i = 0; i < mp.n; ++i) {
        if (rng.bernoulli(p_base)) ts.base_forced[i] = 1;
        if (rng.bernoulli(ht_prob)) ts.htilde_inf[i] = 1;
    }
    draw_factor_block(params, t, s, rng, ts);
    assemble_gf2(ts);
    return ts;
}

namespace {

TsInstance build(const InterpParams& params, const InterpPath& path, int t, double s,
                 RandomSource& rng, BuildMode mode) {
    return mode == BuildMode::full ? build_ts_instance(params, path, t, s, rng)
                                   : build_ts_collapsed(params, path, t, s, rng);
}

// Deterministic parallel Monte Carlo: slot i uses child stream i, results
// are reduced in slot order.
template <typename PerTrial>
MeanSE monte_carlo(std::size_t trials, std::uint64_t seed, unsigned threads, PerTrial&& per_trial) {
    std::vector<double> values(trials);
    const RandomSource parent(seed);
    parallel_for_index(
        trials,
        [&](std::size_t i) {
            RandomSource rng = parent.child(i);
            values[i] = per_trial(rng);
        },
        threads);
    RunningStat stat;
    for (double v : values) stat.add(v);
    return stat.result();
}

} // namespace

MeanSE ts_free_entropy(const InterpParams& params, const InterpPath& path, int t, double s,
                       std::size_t trials, std::uint64_t seed, BuildMode mode, unsigned threads) {
    check_coordinates(params, path, t, s);
    if (trials < 1) throw std::invalid_argument("ts_free_entropy: trials must be >= 1");
    return monte_carlo(trials, seed, threads, [&](RandomSource& rng) {
        return free_entropy(build(params, path, t, s, rng, mode).gf2);
    });
}

PartialAverage partially_averaged_free_entropy(const TsInstance& ts, const InterpParams& params,
                                               std::size_t mc_trials, RandomSource& rng,
                                               unsigned exact_cap) {
    const auto& mp = params.model;
    const double ht_prob = params.htilde_prob();
    // base system: everything except the H~ singletons
    Gf2System base(mp.n);
    for (std::uint32_t i = 0; i < mp.n; ++i)
        if (ts.base_forced[i]) base.add_singleton(i);
    for (std::size_t a = 0; a < ts.factors.size(); ++a)
        if (ts.couplings[a] == Coupling::inf) base.add_row(ts.factors[a]);

    // only free variables whose singleton is not already in the span can
    // change the rank
    std::vector<std::uint32_t> candidates;
    for (std::uint32_t i = 0; i < mp.n; ++i)
        if (!ts.base_forced[i] && !base.singleton_in_row_space(i)) candidates.push_back(i);

    if (ht_prob == 0.0 || candidates.empty()) {
        return {free_entropy(base), 0.0, true};
    }

    if (candidates.size() <= exact_cap) {
        // depth-first enumeration over candidate H~ patterns; leaf value
        // depends only on the resulting rank
        double total = 0.0;
        auto dfs = [&](auto&& self, const Gf2System& sys, std::size_t pos, double weight) -> void {
            if (pos == candidates.size()) {
                total += weight * free_entropy(sys);
                return;
            }
            self(self, sys, pos + 1, weight * (1.0 - ht_prob));
            Gf2System with = sys;
            with.add_singleton(candidates[pos]);
            self(self, with, pos + 1, weight * ht_prob);
        };
        dfs(dfs, base, 0, 1.0);
        return {total, 0.0, true};
    }

    if (mc_trials < 1) throw std::invalid_argument("partially_averaged_free_entropy: mc_trials must be >= 1");
    RunningStat stat;
    for (std::size_t trial = 0; trial < mc_trials; ++trial) {
        Gf2System sys = base;
        for (auto i : candidates)
            if (rng.bernoulli(ht_prob)) sys.add_singleton(i);
        stat.add(free_entropy(sys));
    }
    const auto res = stat.result();
    return {res.mean, res.se, false};
}

AdaptivePathResult adaptive_path(const InterpParams& params, std::size_t trials_per_step,
                                 std::uint64_t seed, BuildMode mode, unsigned threads) {
    params.validate();
    if (trials_per_step < 1) throw std::invalid_argument("adaptive_path: trials_per_step must be >= 1");
    InterpParams delta0 = params;
    delta0.delta = 0.0; // moment matching evaluates the Gibbs bracket at delta = 0
    AdaptivePathResult result;
    result.path = InterpPath::constant(0.0, params);
    result.step_se.assign(params.T, 0.0);
    const RandomSource parent(seed);
    const BecChannel channel(params.model.q);
    // hard sequential ordering: step t uses only r^{(1..t-1)}
    for (std::size_t t = 1; t <= params.T; ++t) {
        const auto est = monte_carlo(trials_per_step, parent.child(t).seed(), threads, [&](RandomSource& rng) {
            return mean_overlap(build(delta0, result.path, static_cast<int>(t), 0.0, rng, mode).gf2);
        });
        result.path.r[t - 1] = est.mean;
        result.path.tilde_r[t - 1] = bp_update_prob(channel, est.mean, params.model.K);
        result.step_se[t - 1] = est.se;
    }
    return result;
}

MeanSE remainder_estimate(const InterpParams& params, const InterpPath& path, int t, double s,
                          std::size_t trials, std::uint64_t seed, BuildMode mode, unsigned threads) {
    check_coordinates(params, path, t, s);
    if (trials < 1) throw std::invalid_argument("remainder_estimate: trials must be >= 1");
    const auto& mp = params.model;
    const double q1 = path.r[static_cast<std::size_t>(t - 1)];
    const double q1_km1 = std::pow(q1, static_cast<double>(mp.K - 1));
    return monte_carlo(trials, seed, threads, [&](RandomSource& rng) {
        const auto ts = build(params, path, t, s, rng, mode);
        const auto classes = ts.gf2.coset_classes();
        const double n = static_cast<double>(mp.n);
        const double q1_inst =
            classes.zero_class >= 0
                ? static_cast<double>(classes.sizes[static_cast<std::size_t>(classes.zero_class)]) / n
                : 0.0;
        const auto qk = overlap_power_moment_classes(classes, mp.n, mp.K);
        double qk_inst;
        if (qk) {
            qk_inst = *qk;
        } else {
            qk_inst = overlap_power_moment(ts.gf2, mp.K, 4096, rng);
        }
        return (1.0 - mp.q) * kLn2 *
               (qk_inst - mp.K * q1_km1 * (q1_inst - q1) - q1_km1 * q1);
    });
}

SumRuleReport sum_rule_check(const InterpParams& params, const InterpPath& path,
                             std::span<const double> grid_s, std::size_t trials_per_point,
                             std::size_t lhs_trials, std::uint64_t seed, BuildMode mode,
                             unsigned threads) {
    params.validate();
    if (grid_s.size() < 2) throw std::invalid_argument("sum_rule_check: need at least 2 s-grid points");
    for (std::size_t i = 1; i < grid_s.size(); ++i)
        if (!(grid_s[i] > grid_s[i - 1]))
            throw std::invalid_argument("sum_rule_check: s grid must be increasing");
    if (!(grid_s.front() == 0.0 && grid_s.back() == 1.0))
        throw std::invalid_argument("sum_rule_check: s grid must span [0,1]");

    SumRuleReport report;
    report.grid_s.assign(grid_s.begin(), grid_s.end());
    report.trials_per_point = trials_per_point;
    report.lhs_trials = lhs_trials;

    const RandomSource parent(seed);
    report.lhs = ts_free_entropy(params, path, 1, 0.0, lhs_trials, parent.child(0).seed(), mode, threads);

    GeneralizedParams gp;
    gp.path = path.r;
    gp.eps = params.eps;
    gp.delta = params.delta;
    gp.theta = params.theta;
    gp.n = params.model.n;
    report.generalized = generalized_free_entropy(gp, params.model.K, params.model.alpha, params.model.q);

    // trapezoid weights on the s grid
    std::vector<double> weights(grid_s.size(), 0.0);
    for (std::size_t i = 0; i + 1 < grid_s.size(); ++i) {
        const double half = 0.5 * (grid_s[i + 1] - grid_s[i]);
        weights[i] += half;
        weights[i + 1] += half;
    }

    KahanSum integral;
    KahanSum variance;
    const double scale = params.model.alpha / static_cast<double>(params.T);
    for (std::size_t t = 1; t <= params.T; ++t) {
        for (std::size_t si = 0; si < grid_s.size(); ++si) {
            const auto est = remainder_estimate(params, path, static_cast<int>(t), grid_s[si],
                                                trials_per_point,
                                                parent.child(t * 8192 + si + 1).seed(), mode, threads);
            integral.add(scale * weights[si] * est.mean);
            variance.add(scale * scale * weights[si] * weights[si] * est.se * est.se);
        }
    }
    report.remainder_integral = integral.value();
    report.remainder_se = std::sqrt(variance.value());
    report.residual = report.lhs.mean - report.generalized - report.remainder_integral;
    report.residual_se = std::sqrt(report.lhs.se * report.lhs.se + variance.value());
    return report;
}

namespace {

// Exact field-pattern statistics of one skeleton: A[k] = sum over
// candidate subsets of size k of (n - rank), B[k] same for the determined
// count. Free entropy and E<Q_1> at any forcing probability follow by
// binomial reweighting.
struct SkeletonTables {
    std::vector<double> free_dims; // A[k]
    std::vector<double> determined; // B[k]
    std::size_t candidates = 0;
    std::size_t always_determined = 0; // zero-rep variables of the base system
};

SkeletonTables enumerate_skeleton(const Gf2System& base, const std::vector<std::uint32_t>& candidates,
                                  std::size_t n) {
    SkeletonTables tables;
    tables.candidates = candidates.size();
    tables.free_dims.assign(candidates.size() + 1, 0.0);
    tables.determined.assign(candidates.size() + 1, 0.0);
    auto dfs = [&](auto&& self, const Gf2System& sys, std::size_t pos, std::size_t forced) -> void {
        if (pos == candidates.size()) {
            tables.free_dims[forced] += static_cast<double>(n - sys.rank());
            tables.determined[forced] += static_cast<double>(sys.determined_count());
            return;
        }
        self(self, sys, pos + 1, forced);
        Gf2System with = sys;
        with.add_singleton(candidates[pos]);
        self(self, with, pos + 1, forced + 1);
    };
    dfs(dfs, base, 0, 0);
    return tables;
}

double binomial_mixture(const std::vector<double>& table, std::size_t c, double p) {
    // sum_k p^k (1-p)^{c-k} table[k]; table[k] already sums over subsets
    double total = 0.0;
    for (std::size_t k = 0; k <= c; ++k)
        total += std::pow(p, static_cast<double>(k)) * std::pow(1.0 - p, static_cast<double>(c - k)) * table[k];
    return total;
}

} // namespace

DeltaDerivativeReport delta_derivative_check(const InterpParams& params, const InterpPath& path,
                                             int t, double s, std::size_t trials, double step,
                                             std::uint64_t seed) {
    check_coordinates(params, path, t, s);
    if (!(step > 0.0)) throw std::invalid_argument("delta_derivative_check: step must be positive");
    if (!(params.delta - step >= 0.0 && params.delta + step <= 1.0))
        throw std::invalid_argument("delta_derivative_check: delta +- step must stay inside [0,1]");
    const auto& mp = params.model;
    const double n = static_cast<double>(mp.n);
    const double ntheta = std::pow(n, params.theta);
    const RandomSource parent(seed);

    DeltaDerivativeReport report;
    if (mp.n <= 20) {
        report.exact = true;
        // forcing probability of a free variable as a function of delta
        auto rho = [&](double d) { return 1.0 - (1.0 - params.eps) * (1.0 - d / ntheta); };
        for (std::size_t trial = 0; trial < trials; ++trial) {
            RandomSource rng = parent.child(trial);
            // skeleton: half-edge pre-forcing (without the H/H~ fields) plus
            // the factor block
            double exponent = s * path.tilde_r[static_cast<std::size_t>(t - 1)];
            for (int tp = 1; tp < t; ++tp) exponent += path.tilde_r[static_cast<std::size_t>(tp - 1)];
            const double p_edge = 1.0 - std::exp(-mp.alpha * mp.K / static_cast<double>(params.T) * exponent);
            Gf2System base(mp.n);
            std::vector<std::uint8_t> pre_forced(mp.n, 0);
            for (std::uint32_t i = 0; i < mp.n; ++i) {
                if (rng.bernoulli(p_edge)) {
                    pre_forced[i] = 1;
                    base.add_singleton(i);
                }
            }
            const BecChannel channel(mp.q);
            const double rate = mp.alpha * n * (static_cast<double>(params.T) - t + 1.0 - s) /
                                static_cast<double>(params.T);
            const auto m = rng.poisson(rate);
            for (std::uint64_t a = 0; a < m; ++a) {
                const auto subset = rng.k_subset(static_cast<std::uint32_t>(mp.n), mp.K);
                if (sample_coupling(channel, rng) == Coupling::inf) base.add_row(subset);
            }
            std::vector<std::uint32_t> candidates;
            for (std::uint32_t i = 0; i < mp.n; ++i)
                if (!pre_forced[i] && !base.singleton_in_row_space(i)) candidates.push_back(i);
            const auto tables = enumerate_skeleton(base, candidates, mp.n);
            const std::size_t c = candidates.size();
            auto h_of = [&](double d) {
                return kLn2 / n * binomial_mixture(tables.free_dims, c, rho(d));
            };
            const double fd = (h_of(params.delta + step) - h_of(params.delta - step)) / (2.0 * step);
            const double mean_q1 = binomial_mixture(tables.determined, c, rho(params.delta)) / n;
            const double formula =
                -kLn2 * (1.0 - mean_q1) / (ntheta * (1.0 - params.delta / ntheta));
            const double scale = std::max({std::abs(formula), std::abs(fd), 1e-300});
            report.max_rel_error = std::max(report.max_rel_error, std::abs(fd - formula) / scale);
            report.finite_difference += fd / static_cast<double>(trials);
            report.formula += formula / static_cast<double>(trials);
        }
        return report;
    }

    // Monte Carlo mode with common random numbers: each trial reuses one
    // uniform per variable for the coupled H~ draws at delta +- step.
    InterpParams lo = params, hi = params, mid = params;
    lo.delta = params.delta - step;
    hi.delta = params.delta + step;
    RunningStat diff_stat, q1_stat;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        RandomSource rng = parent.child(trial);
        TsInstance ts = build_ts_collapsed(mid, path, t, s, rng);
        // strip the H~ rows and re-add under coupled thresholds
        Gf2System base(mp.n);
        for (std::uint32_t i = 0; i < mp.n; ++i)
            if (ts.base_forced[i]) base.add_singleton(i);
        for (std::size_t a = 0; a < ts.factors.size(); ++a)
            if (ts.couplings[a] == Coupling::inf) base.add_row(ts.factors[a]);
        Gf2System sys_lo = base, sys_hi = base, sys_mid = base;
        for (std::uint32_t i = 0; i < mp.n; ++i) {
            const double u = rng.uniform01();
            if (u < lo.htilde_prob()) sys_lo.add_singleton(i);
            if (u < hi.htilde_prob()) sys_hi.add_singleton(i);
            if (u < mid.htilde_prob()) sys_mid.add_singleton(i);
        }
        diff_stat.add((free_entropy(sys_hi) - free_entropy(sys_lo)) / (2.0 * step));
        q1_stat.add(mean_overlap(sys_mid));
    }
    report.finite_difference = diff_stat.mean();
    report.formula = -kLn2 * (1.0 - q1_stat.mean()) / (ntheta * (1.0 - params.delta / ntheta));
    report.combined_se = std::sqrt(diff_stat.se() * diff_stat.se() +
                                   std::pow(kLn2 * q1_stat.se() / (ntheta * (1.0 - params.delta / ntheta)), 2));
    const double scale = std::max({std::abs(report.formula), std::abs(report.finite_difference), 1e-300});
    report.max_rel_error = std::abs(report.finite_difference - report.formula) / scale;
    report.step_too_small = diff_stat.se() > std::abs(report.formula);
    return report;
}

double thermal_overlap_variance(const Gf2System& system) {
    const auto classes = system.coset_classes();
    const double n = static_cast<double>(system.n());
    double total = 0.0;
    for (std::size_t c = 0; c < classes.sizes.size(); ++c) {
        if (static_cast<std::ptrdiff_t>(c) == classes.zero_class) continue;
        const double sz = static_cast<double>(classes.sizes[c]);
        total += sz * sz;
    }
    return total / (n * n);
}

std::vector<ConcentrationRow> concentration_report(const InterpParams& params,
                                                   std::span<const std::size_t> n_list,
                                                   std::span<const double> eps_window,
                                                   std::size_t trials, std::uint64_t seed,
                                                   unsigned threads) {
    if (n_list.empty()) throw std::invalid_argument("concentration_report: n_list must be nonempty");
    if (trials < 2) throw std::invalid_argument("concentration_report: need at least 2 trials");
    std::vector<ConcentrationRow> rows;
    rows.reserve(n_list.size());
    const RandomSource parent(seed);
    constexpr std::size_t kEpsPoints = 5;
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        const std::size_t n = n_list[ni];
        InterpParams p = params;
        p.model.n = n;
        p.validate();
        const InterpPath path = InterpPath::constant(0.0, p); // t = 1: path never enters
        ConcentrationRow row;
        row.n = n;
        row.trials = trials;
        if (eps_window.size() == 2) {
            row.eps_lo = eps_window[0];
            row.eps_hi = eps_window[1];
        } else {
            row.eps_lo = std::pow(static_cast<double>(n), -0.5);
            row.eps_hi = 2.0 * row.eps_lo;
        }
        row.thermal_bound = 3.0 / static_cast<double>(n);

        // (a) eps-integrated thermal variance, trapezoid over the window
        std::vector<double> means(kEpsPoints), ses(kEpsPoints);
        for (std::size_t gi = 0; gi < kEpsPoints; ++gi) {
            InterpParams pe = p;
            pe.eps = row.eps_lo +
                     (row.eps_hi - row.eps_lo) * static_cast<double>(gi) / (kEpsPoints - 1);
            const auto est = monte_carlo(trials, parent.child((ni << 32) | gi).seed(), threads,
                                         [&](RandomSource& rng) {
                                             return thermal_overlap_variance(
                                                 build_ts_collapsed(pe, path, 1, 0.0, rng).gf2);
                                         });
            means[gi] = est.mean;
            ses[gi] = est.se;
        }
        const double h = (row.eps_hi - row.eps_lo) / (kEpsPoints - 1);
        double integral = 0.0, var = 0.0;
        for (std::size_t gi = 0; gi < kEpsPoints; ++gi) {
            const double w = (gi == 0 || gi == kEpsPoints - 1) ? 0.5 * h : h;
            integral += w * means[gi];
            var += w * w * ses[gi] * ses[gi];
        }
        row.thermal_integral = integral;
        row.thermal_se = std::sqrt(var);

        // (b) disorder variance of <Q_1> and (c) variance of the
        // H~-averaged per-instance free entropy, both at the window midpoint
        InterpParams pm = p;
        pm.eps = 0.5 * (row.eps_lo + row.eps_hi);
        std::vector<double> overlaps(trials), fes(trials);
        parallel_for_index(
            trials,
            [&](std::size_t i) {
                RandomSource rng = parent.child((ni << 32) | (std::uint64_t{1} << 20) | i);
                const auto ts = build_ts_collapsed(pm, path, 1, 0.0, rng);
                overlaps[i] = mean_overlap(ts.gf2);
                fes[i] = partially_averaged_free_entropy(ts, pm, 8, rng).value;
            },
            threads);
        RunningStat ostat, fstat;
        for (double v : overlaps) ostat.add(v);
        for (double v : fes) fstat.add(v);
        row.overlap_disorder_var = ostat.variance();
        row.fe_variance = fstat.variance();
        row.fe_variance_times_n = row.fe_variance * static_cast<double>(n);
        rows.push_back(row);
    }
    return rows;
}

} // namespace cbm
