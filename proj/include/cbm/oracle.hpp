// Exhaustive small-n ground truth. Everything here sums over all 2^n spin
// configurations (and, for disorder averages, all 2^m erasure patterns)
// with integer bracket arithmetic, independently of the GF(2) fast path it
// is used to verify. Caps are hard errors: the oracle never silently
// approximates.

#pragma once

#include "cbm/model.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cbm {

using Subset = std::vector<std::uint32_t>;
using SubsetCollection = std::vector<Subset>;

struct GibbsReport {
    double logZ = 0.0;                    // nats
    std::uint64_t solution_count = 0;     // Z as an integer (a power of two for the BEC)
    std::vector<double> brackets;         // <sigma_S> per requested subset
    std::vector<double> replica_overlaps; // <Q_p> = (1/n) sum_i <sigma_i>^p, p = 1..max_p
};

// Exact Gibbs sums; handles planted (signed) instances. n <= 20.
GibbsReport enumerate_gibbs(const Instance& instance, std::span<const Subset> subsets,
                            unsigned max_p = 0);

// Exact average over the 2^m erasure patterns of a fixed factor graph,
// weighted by q^{#erased} (1-q)^{#revealed}. m <= 20.
double exact_disorder_average(const ModelParams& params,
                              const std::vector<Subset>& factors,
                              const std::function<double(const Instance&)>& observable);

// Largest |E[prod <sigma_S>] - E[<sigma_{xor C}> prod <sigma_S>]| over the
// given subset collections, under the exact disorder average.
double nishimori_check(const ModelParams& params, const std::vector<Subset>& factors,
                       const std::vector<SubsetCollection>& collections);

// First and second Griffiths-Kelly-Sherman inequalities on the requested
// (S, T) pairs, decided by exact integer comparison.
bool gks_check(const Instance& instance, std::span<const std::pair<Subset, Subset>> pairs);

// True iff log Z of the planted system equals log Z of its gauge-fixed
// image for every one of the 2^m erasure patterns.
bool gauge_invariance_check(const ModelParams& params, const std::vector<Subset>& factors,
                            std::span<const std::int8_t> planted);

} // namespace cbm
