#include "cbm/model.hpp"
#include "cbm/oracle.hpp"
#include "cbm/rng.hpp"
#include "cbm/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

namespace {
constexpr double kLn2 = std::numbers::ln2;
}

TEST_SUITE_BEGIN("oracle");

TEST_CASE("uniform measure: nonempty brackets vanish, logZ = n ln 2") {
    cbm::Instance inst;
    inst.params = {5, 3, 0.0, 0.5};
    const cbm::Subset queries[] = {{0}, {1, 2}, {0, 3, 4}};
    const auto report = cbm::enumerate_gibbs(inst, queries, 3);
    CHECK(report.logZ == doctest::Approx(5.0 * kLn2));
    for (auto b : report.brackets) CHECK(b == 0.0);
    for (auto qp : report.replica_overlaps) CHECK(qp == 0.0);
}

TEST_CASE("single revealed factor pins its own product") {
    cbm::Instance inst;
    inst.params = {3, 3, 1.0, 0.0};
    inst.factors = {{0, 1, 2}};
    inst.couplings = {cbm::Coupling::inf};
    const cbm::Subset queries[] = {{0, 1, 2}, {0}};
    const auto report = cbm::enumerate_gibbs(inst, queries);
    CHECK(report.brackets[0] == 1.0);
    CHECK(report.brackets[1] == 0.0);
    CHECK(report.solution_count == 4);
}

TEST_CASE("reference three-factor instance has logZ = ln 2") {
    cbm::Instance inst;
    inst.params = {4, 3, 1.0, 0.0};
    inst.factors = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}};
    inst.couplings.assign(3, cbm::Coupling::inf);
    const auto report = cbm::enumerate_gibbs(inst, {}, 2);
    CHECK(report.logZ == doctest::Approx(kLn2));
    // <Q_p> = (1/n) sum_i <sigma_i>^p with only sigma_0 determined
    CHECK(report.replica_overlaps[0] == doctest::Approx(0.25));
    CHECK(report.replica_overlaps[1] == doctest::Approx(0.25));
}

TEST_CASE("every enumerated bracket is exactly 0 or 1 on gauge-fixed instances") {
    cbm::RandomSource rng(2024);
    std::size_t queries_done = 0;
    while (queries_done < 20000) {
        const std::size_t n = 6 + rng.below(4); // 6..9
        cbm::ModelParams mp{n, 3, 1.0, 0.5};
        const auto inst = cbm::generate_instance(mp, rng.next_u64());
        std::vector<cbm::Subset> subsets;
        for (int s = 0; s < 40; ++s)
            subsets.push_back(rng.k_subset(static_cast<std::uint32_t>(n),
                                           1 + static_cast<std::uint32_t>(rng.below(4))));
        const auto report = cbm::enumerate_gibbs(inst, subsets);
        for (auto b : report.brackets) {
            CHECK((b == 0.0 || b == 1.0));
        }
        // and the gf2 fast path agrees bracket by bracket
        const auto sys = cbm::to_gf2(inst);
        for (std::size_t s = 0; s < subsets.size(); ++s)
            CHECK(static_cast<double>(cbm::marginal(sys, subsets[s])) == report.brackets[s]);
        queries_done += subsets.size();
    }
}

TEST_CASE("disorder average: q = 1 collapses to the free measure") {
    cbm::ModelParams mp{4, 3, 1.0, 1.0};
    const std::vector<cbm::Subset> factors = {{0, 1, 2}, {1, 2, 3}};
    const auto value = cbm::exact_disorder_average(
        mp, factors, [](const cbm::Instance& inst) { return cbm::enumerate_gibbs(inst, {}).logZ; });
    CHECK(value == doctest::Approx(4.0 * kLn2));
}

TEST_CASE("disorder average of a single-factor bracket is 1 - q") {
    for (double q : {0.0, 0.25, 0.8}) {
        cbm::ModelParams mp{4, 3, 1.0, q};
        const std::vector<cbm::Subset> factors = {{0, 1, 2}};
        const auto value = cbm::exact_disorder_average(mp, factors, [&](const cbm::Instance& inst) {
            const cbm::Subset s[] = {{0, 1, 2}};
            return cbm::enumerate_gibbs(inst, s).brackets[0];
        });
        CHECK(value == doctest::Approx(1.0 - q).epsilon(1e-12));
    }
}

TEST_CASE("disorder average matches monte carlo over sampled erasure patterns") {
    cbm::ModelParams mp{6, 3, 0.5, 0.45};
    cbm::RandomSource rng(5);
    std::vector<cbm::Subset> factors;
    for (int a = 0; a < 3; ++a) factors.push_back(rng.k_subset(6, 3));
    auto observable = [&](const cbm::Instance& inst) { return cbm::enumerate_gibbs(inst, {}).logZ; };
    const double exact = cbm::exact_disorder_average(mp, factors, observable);
    cbm::RunningStat stat;
    cbm::Instance inst;
    inst.params = mp;
    inst.factors = factors;
    for (int trial = 0; trial < 100000; ++trial) {
        inst.couplings.assign(factors.size(), cbm::Coupling::zero);
        for (auto& cpl : inst.couplings)
            if (rng.bernoulli(1.0 - mp.q)) cpl = cbm::Coupling::inf;
        stat.add(observable(inst));
    }
    CHECK(std::abs(stat.mean() - exact) <= 3.0 * stat.se());
}

TEST_CASE("nishimori identity: trivial and random collections") {
    cbm::RandomSource rng(99);
    // single factor: both sides are 1 - q
    {
        cbm::ModelParams mp{4, 3, 1.0, 0.35};
        const std::vector<cbm::Subset> factors = {{0, 1, 2}};
        CHECK(cbm::nishimori_check(mp, factors, {{{0, 1, 2}}}) <= 1e-15);
    }
    // duplicated subset: E<s>^2 pattern vs E<s>^3
    {
        cbm::ModelParams mp{6, 3, 1.0, 0.4};
        std::vector<cbm::Subset> factors;
        for (int a = 0; a < 4; ++a) factors.push_back(rng.k_subset(6, 3));
        const cbm::Subset s = rng.k_subset(6, 3);
        CHECK(cbm::nishimori_check(mp, factors, {{s, s}}) <= 1e-12);
    }
    // random collections on n = 6, m = 4
    for (int trial = 0; trial < 10; ++trial) {
        cbm::ModelParams mp{6, 3, 1.0, 0.3 + 0.05 * trial};
        std::vector<cbm::Subset> factors;
        for (int a = 0; a < 4; ++a) factors.push_back(rng.k_subset(6, 3));
        std::vector<cbm::SubsetCollection> collections;
        cbm::SubsetCollection coll;
        for (int s = 0; s < 3; ++s)
            coll.push_back(rng.k_subset(6, 1 + static_cast<std::uint32_t>(rng.below(3))));
        collections.push_back(coll);
        CHECK(cbm::nishimori_check(mp, factors, collections) <= 1e-12);
    }
}

TEST_CASE("nishimori special case: E<s_A> = E<s_A^2>") {
    cbm::RandomSource rng(123);
    for (int trial = 0; trial < 5; ++trial) {
        cbm::ModelParams mp{6, 3, 1.0, 0.5};
        std::vector<cbm::Subset> factors;
        for (int a = 0; a < 4; ++a) factors.push_back(rng.k_subset(6, 3));
        const cbm::Subset s = rng.k_subset(6, 1 + static_cast<std::uint32_t>(rng.below(3)));
        auto bracket = [&](const cbm::Instance& inst, int power) {
            const cbm::Subset qs[] = {s};
            const double b = cbm::enumerate_gibbs(inst, qs).brackets[0];
            return power == 1 ? b : b * b;
        };
        const double lhs = cbm::exact_disorder_average(
            mp, factors, [&](const cbm::Instance& inst) { return bracket(inst, 1); });
        const double rhs = cbm::exact_disorder_average(
            mp, factors, [&](const cbm::Instance& inst) { return bracket(inst, 2); });
        CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
}

TEST_CASE("gks inequalities hold on uniform, pinned, and random instances") {
    // uniform
    {
        cbm::Instance inst;
        inst.params = {6, 3, 0.0, 0.5};
        std::vector<std::pair<cbm::Subset, cbm::Subset>> pairs = {{{0}, {1}}, {{0, 1}, {2, 3}}};
        CHECK(cbm::gks_check(inst, pairs));
    }
    // random sweep
    cbm::RandomSource rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 4 + rng.below(7); // 4..10
        cbm::ModelParams mp{n, std::min<unsigned>(3, static_cast<unsigned>(n)), 1.0, 0.4};
        const auto inst = cbm::generate_instance(mp, rng.next_u64());
        std::vector<std::pair<cbm::Subset, cbm::Subset>> pairs;
        for (int p = 0; p < 5; ++p)
            pairs.emplace_back(rng.k_subset(static_cast<std::uint32_t>(n),
                                            1 + static_cast<std::uint32_t>(rng.below(3))),
                               rng.k_subset(static_cast<std::uint32_t>(n),
                                            1 + static_cast<std::uint32_t>(rng.below(3))));
        CHECK(cbm::gks_check(inst, pairs));
    }
}

TEST_CASE("gauge invariance: all-ones, alternating, and random planted vectors") {
    cbm::RandomSource rng(31);
    {
        cbm::ModelParams mp{4, 3, 1.0, 0.5};
        const std::vector<cbm::Subset> factors = {{0, 1, 2}};
        const std::vector<std::int8_t> ones(4, 1);
        CHECK(cbm::gauge_invariance_check(mp, factors, ones));
        const std::vector<std::int8_t> alternating = {1, -1, 1, -1};
        CHECK(cbm::gauge_invariance_check(mp, factors, alternating));
    }
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 4 + rng.below(3);
        cbm::ModelParams mp{n, 3, 1.0, 0.4};
        std::vector<cbm::Subset> factors;
        for (int a = 0; a < 3; ++a) factors.push_back(rng.k_subset(static_cast<std::uint32_t>(n), 3));
        std::vector<std::int8_t> planted(n);
        for (auto& s : planted) s = rng.bernoulli(0.5) ? 1 : -1;
        CHECK(cbm::gauge_invariance_check(mp, factors, planted));
    }
}

TEST_CASE("oracle caps are hard errors") {
    cbm::Instance big;
    big.params = {21, 3, 0.0, 0.5};
    CHECK_THROWS_AS(cbm::enumerate_gibbs(big, {}), std::invalid_argument);
    cbm::ModelParams mp{4, 3, 1.0, 0.5};
    std::vector<cbm::Subset> factors(21, cbm::Subset{0, 1, 2});
    CHECK_THROWS_AS(cbm::exact_disorder_average(mp, factors, [](const cbm::Instance&) { return 0.0; }),
                    std::invalid_argument);
}

TEST_SUITE_END();
