// Censored block model ensemble over the binary erasure channel.
//
// After gauge fixing (planted vector all-ones) the posterior is the uniform
// measure on the solution set of a GF(2) parity system with one row per
// revealed factor, so free entropy, marginals and overlaps are exact
// combinatorial quantities:
//
//   Z = 2^{n - rank},  <sigma_S> = 1[S in row space] in {0,1}.

#pragma once

#include "cbm/channel.hpp"
#include "cbm/gf2.hpp"
#include "cbm/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cbm {

struct ModelParams {
    std::size_t n = 0;   // variable count
    unsigned K = 3;      // factor degree
    double alpha = 0.0;  // measurement fraction, m ~ Poi(alpha n)
    double q = 0.0;      // erasure probability

    void validate() const;
};

struct Instance {
    ModelParams params;
    std::vector<std::vector<std::uint32_t>> factors; // K-subsets, one per measurement
    std::vector<Coupling> couplings;                 // revealed (inf) or erased (zero)
    std::vector<std::int8_t> planted;                // +-1 per variable; empty = gauge-fixed all-ones
    std::uint64_t seed = 0;

    std::size_t m() const { return factors.size(); }
    bool gauge_fixed() const;
    // Product of planted spins over a subset (+1 when gauge-fixed).
    int planted_sign(std::span<const std::uint32_t> subset) const;
};

// Gauge-fixed ensemble draw: m ~ Poi(alpha n), uniform K-subsets,
// couplings revealed with probability 1-q.
Instance generate_instance(const ModelParams& params, std::uint64_t seed);

// Planted variant, retained for gauge-invariance tests.
Instance generate_instance_planted(const ModelParams& params, std::span<const std::int8_t> planted,
                                   std::uint64_t seed);

// One parity row per revealed factor; erased factors contribute nothing.
// Requires a gauge-fixed instance.
Gf2System to_gf2(const Instance& instance);

// (1 - rank/n) ln 2, exactly (1/n) ln Z for the BEC.
double free_entropy(const Gf2System& system);
double free_entropy(const Instance& instance);

// <sigma_S>: 1 iff the indicator of S lies in the constraint row space.
int marginal(const Gf2System& system, std::span<const std::uint32_t> subset);
int marginal(const Instance& instance, std::span<const std::uint32_t> subset);

// <Q_1>: fraction of determined variables.
double mean_overlap(const Gf2System& system);
double mean_overlap(const Instance& instance);

// <Q_1^k> = P(xor of k uniform coset reps is zero). Evaluated exactly
// through the coset-class partition whenever the convolution support stays
// below support_cap (this covers every n^k <= 1e6 case and far beyond);
// falls back to Monte Carlo over `samples` index k-tuples drawn with
// replacement otherwise.
double overlap_power_moment(const Gf2System& system, unsigned k, std::size_t samples,
                            RandomSource& rng, std::size_t support_cap = 1u << 20);
double overlap_power_moment(const Instance& instance, unsigned k, std::size_t samples, RandomSource& rng);

// Exact moment straight from a precomputed class partition; empty optional
// if the convolution support would exceed the cap.
std::optional<double> overlap_power_moment_classes(const Gf2System::CosetClasses& classes,
                                                   std::size_t n, unsigned k,
                                                   std::size_t support_cap = 1u << 20);

// Exact <Q_1^k> by direct summation over all n^k tuples; test oracle.
double overlap_power_moment_exhaustive(const Gf2System& system, unsigned k);

// JSON round-trip: {n, K, alpha, q, seed, factors, couplings, [planted]}.
std::string instance_to_json(const Instance& instance);
Instance instance_from_json(const std::string& text);

} // namespace cbm
