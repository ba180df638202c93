#include "cbm/oracle.hpp"

#include "cbm/stats.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace cbm {

namespace {

// Per-configuration posterior weight is an indicator: a revealed factor
// pins sigma_A to its planted sign, an erased factor is free. Z is a
// solution count.
struct ExactGibbs {
    std::uint64_t z = 0;
    std::vector<std::int64_t> spin_sums;          // sum over solutions of sigma_i
    std::vector<std::int64_t> subset_sums;        // sum over solutions of sigma_S

    static ExactGibbs run(const Instance& inst, std::span<const Subset> subsets) {
        const std::size_t n = inst.params.n;
        if (n > 20) throw std::invalid_argument("enumerate_gibbs: n must be <= 20");
        std::vector<std::uint32_t> factor_masks;
        std::vector<unsigned> required_parity; // 1 if revealed factor pins sigma_A = -1
        factor_masks.reserve(inst.m());
        for (std::size_t a = 0; a < inst.m(); ++a) {
            if (inst.couplings[a] != Coupling::inf) continue;
            std::uint32_t mask = 0;
            for (auto idx : inst.factors[a]) mask ^= 1u << idx;
            factor_masks.push_back(mask);
            required_parity.push_back(inst.planted_sign(inst.factors[a]) == 1 ? 0u : 1u);
        }
        std::vector<std::uint32_t> subset_masks;
        subset_masks.reserve(subsets.size());
        for (const auto& s : subsets) {
            std::uint32_t mask = 0;
            for (auto idx : s) {
                if (idx >= n) throw std::out_of_range("enumerate_gibbs: subset index out of range");
                mask ^= 1u << idx;
            }
            subset_masks.push_back(mask);
        }

        ExactGibbs out;
        out.spin_sums.assign(n, 0);
        out.subset_sums.assign(subsets.size(), 0);
        const std::uint64_t total = std::uint64_t{1} << n;
        for (std::uint64_t cfg = 0; cfg < total; ++cfg) {
            // bit b set  <=>  sigma_b = -1
            bool ok = true;
            for (std::size_t a = 0; a < factor_masks.size(); ++a) {
                const unsigned parity = std::popcount(static_cast<std::uint32_t>(cfg) & factor_masks[a]) & 1u;
                if (parity != required_parity[a]) { ok = false; break; }
            }
            if (!ok) continue;
            ++out.z;
            for (std::size_t i = 0; i < n; ++i)
                out.spin_sums[i] += (cfg >> i) & 1u ? -1 : 1;
            for (std::size_t s = 0; s < subset_masks.size(); ++s)
                out.subset_sums[s] += std::popcount(static_cast<std::uint32_t>(cfg) & subset_masks[s]) & 1u ? -1 : 1;
        }
        if (out.z == 0) throw std::runtime_error("enumerate_gibbs: inconsistent constraints");
        return out;
    }
};

} // namespace

GibbsReport enumerate_gibbs(const Instance& instance, std::span<const Subset> subsets, unsigned max_p) {
    const auto gibbs = ExactGibbs::run(instance, subsets);
    GibbsReport report;
    report.solution_count = gibbs.z;
    // the BEC solution set is an affine subspace, so Z is a power of two
    if (std::popcount(gibbs.z) != 1) throw std::runtime_error("enumerate_gibbs: Z is not a power of two");
    report.logZ = static_cast<double>(std::countr_zero(gibbs.z)) * std::numbers::ln2;
    report.brackets.reserve(subsets.size());
    const double z = static_cast<double>(gibbs.z);
    for (auto sum : gibbs.subset_sums) report.brackets.push_back(static_cast<double>(sum) / z);
    if (max_p > 0) {
        report.replica_overlaps.assign(max_p, 0.0);
        const double n = static_cast<double>(instance.params.n);
        for (auto sum : gibbs.spin_sums) {
            const double mi = static_cast<double>(sum) / z;
            double power = 1.0;
            for (unsigned p = 0; p < max_p; ++p) {
                power *= mi;
                report.replica_overlaps[p] += power / n;
            }
        }
    }
    return report;
}

double exact_disorder_average(const ModelParams& params, const std::vector<Subset>& factors,
                              const std::function<double(const Instance&)>& observable) {
    params.validate();
    const std::size_t m = factors.size();
    if (m > 20) throw std::invalid_argument("exact_disorder_average: m must be <= 20");
    Instance inst;
    inst.params = params;
    inst.factors = factors;
    inst.couplings.assign(m, Coupling::zero);
    KahanSum total;
    const std::uint64_t patterns = std::uint64_t{1} << m;
    for (std::uint64_t pat = 0; pat < patterns; ++pat) {
        double weight = 1.0;
        for (std::size_t a = 0; a < m; ++a) {
            const bool revealed = (pat >> a) & 1u;
            inst.couplings[a] = revealed ? Coupling::inf : Coupling::zero;
            weight *= revealed ? (1.0 - params.q) : params.q;
        }
        if (weight == 0.0) continue;
        total.add(weight * observable(inst));
    }
    return total.value();
}

double nishimori_check(const ModelParams& params, const std::vector<Subset>& factors,
                       const std::vector<SubsetCollection>& collections) {
    double worst = 0.0;
    for (const auto& collection : collections) {
        // xor of the collection: sigma products square away repeated indices
        Subset xored;
        {
            std::vector<std::uint8_t> flags(params.n, 0);
            for (const auto& s : collection)
                for (auto idx : s) flags[idx] ^= 1u;
            for (std::uint32_t i = 0; i < params.n; ++i)
                if (flags[i]) xored.push_back(i);
        }
        std::vector<Subset> queries(collection.begin(), collection.end());
        queries.push_back(xored);

        const auto lhs = exact_disorder_average(params, factors, [&](const Instance& inst) {
            const auto rep = enumerate_gibbs(inst, std::span(queries.data(), collection.size()));
            double prod = 1.0;
            for (auto b : rep.brackets) prod *= b;
            return prod;
        });
        const auto rhs = exact_disorder_average(params, factors, [&](const Instance& inst) {
            const auto rep = enumerate_gibbs(inst, queries);
            double prod = rep.brackets.back();
            for (std::size_t s = 0; s < collection.size(); ++s) prod *= rep.brackets[s];
            return prod;
        });
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

bool gks_check(const Instance& instance, std::span<const std::pair<Subset, Subset>> pairs) {
    const std::size_t n = instance.params.n;
    for (const auto& [s, t] : pairs) {
        Subset st;
        {
            std::vector<std::uint8_t> flags(n, 0);
            for (auto idx : s) flags[idx] ^= 1u;
            for (auto idx : t) flags[idx] ^= 1u;
            for (std::uint32_t i = 0; i < n; ++i)
                if (flags[i]) st.push_back(i);
        }
        const Subset queries[3] = {s, t, st};
        const auto gibbs = ExactGibbs::run(instance, queries);
        const auto z = static_cast<std::int64_t>(gibbs.z);
        const std::int64_t sum_s = gibbs.subset_sums[0];
        const std::int64_t sum_t = gibbs.subset_sums[1];
        const std::int64_t sum_st = gibbs.subset_sums[2];
        // <sigma_S> >= 0  and  Z <sigma_S sigma_T> - Z <sigma_S><sigma_T> >= 0,
        // cross-multiplied to stay in integers
        if (sum_s < 0) return false;
        if (z * sum_st - sum_s * sum_t < 0) return false;
    }
    return true;
}

bool gauge_invariance_check(const ModelParams& params, const std::vector<Subset>& factors,
                            std::span<const std::int8_t> planted) {
    params.validate();
    if (planted.size() != params.n)
        throw std::invalid_argument("gauge_invariance_check: planted length mismatch");
    const std::size_t m = factors.size();
    if (m > 20) throw std::invalid_argument("gauge_invariance_check: m must be <= 20");
    Instance with_plant;
    with_plant.params = params;
    with_plant.factors = factors;
    with_plant.planted.assign(planted.begin(), planted.end());
    Instance gauged = with_plant;
    gauged.planted.clear();

    const std::uint64_t patterns = std::uint64_t{1} << m;
    for (std::uint64_t pat = 0; pat < patterns; ++pat) {
        std::vector<Coupling> couplings(m, Coupling::zero);
        for (std::size_t a = 0; a < m; ++a)
            if ((pat >> a) & 1u) couplings[a] = Coupling::inf;
        with_plant.couplings = couplings;
        gauged.couplings = couplings;
        const auto zp = enumerate_gibbs(with_plant, {}).solution_count;
        const auto zg = enumerate_gibbs(gauged, {}).solution_count;
        if (zp != zg) return false;
    }
    return true;
}

} // namespace cbm
