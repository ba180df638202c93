#include "cbm/model.hpp"
#include "cbm/oracle.hpp"
#include "cbm/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

namespace {
constexpr double kLn2 = std::numbers::ln2;

cbm::Instance reference_instance() {
    // n = 4, revealed factors {0,1,2}, {0,1,3}, {0,2,3}
    cbm::Instance inst;
    inst.params = {4, 3, 1.0, 0.0};
    inst.factors = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}};
    inst.couplings = {cbm::Coupling::inf, cbm::Coupling::inf, cbm::Coupling::inf};
    return inst;
}
} // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("alpha = 0 always yields zero factors; q = 1 yields all-zero couplings") {
    cbm::ModelParams no_factors{64, 3, 0.0, 0.5};
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        CHECK(cbm::generate_instance(no_factors, seed).m() == 0);
    cbm::ModelParams erased{64, 3, 0.5, 1.0};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = cbm::generate_instance(erased, seed);
        for (auto c : inst.couplings) CHECK(c == cbm::Coupling::zero);
    }
}

TEST_CASE("factor count is Poisson(alpha n) on average") {
    cbm::ModelParams mp{1000, 3, 0.2, 0.5};
    cbm::RunningStat stat;
    const std::size_t instances = 10000;
    for (std::uint64_t seed = 0; seed < instances; ++seed)
        stat.add(static_cast<double>(cbm::generate_instance(mp, seed).m()));
    // mean 200, sd sqrt(200): the sample mean must sit within 3 SE
    CHECK(std::abs(stat.mean() - 200.0) < 3.0 * stat.se());
}

TEST_CASE("factors are K distinct in-range indices; generation is seed-reproducible") {
    cbm::ModelParams mp{50, 4, 0.5, 0.3};
    const auto a = cbm::generate_instance(mp, 99);
    const auto b = cbm::generate_instance(mp, 99);
    CHECK(a.factors == b.factors);
    CHECK(a.couplings == b.couplings);
    for (const auto& f : a.factors) {
        REQUIRE(f.size() == 4);
        for (std::size_t i = 0; i < f.size(); ++i) {
            CHECK(f[i] < 50);
            if (i) CHECK(f[i] > f[i - 1]);
        }
    }
}

TEST_CASE("to_gf2 keeps revealed factors only") {
    cbm::Instance inst;
    inst.params = {3, 3, 1.0, 0.0};
    SUBCASE("all erased -> empty system") {
        inst.factors = {{0, 1, 2}, {0, 1, 2}};
        inst.couplings = {cbm::Coupling::zero, cbm::Coupling::zero};
        CHECK(cbm::to_gf2(inst).rank() == 0);
        CHECK(cbm::free_entropy(inst) == doctest::Approx(kLn2));
    }
    SUBCASE("single revealed factor") {
        inst.factors = {{0, 1, 2}};
        inst.couplings = {cbm::Coupling::inf};
        CHECK(cbm::to_gf2(inst).rank() == 1);
        CHECK(cbm::free_entropy(inst) == doctest::Approx(2.0 / 3.0 * kLn2));
    }
    SUBCASE("duplicate revealed factor counts once") {
        inst.factors = {{0, 1, 2}, {0, 1, 2}};
        inst.couplings = {cbm::Coupling::inf, cbm::Coupling::inf};
        CHECK(cbm::to_gf2(inst).rank() == 1);
    }
}

TEST_CASE("reference instance: free entropy, marginals, overlaps") {
    const auto inst = reference_instance();
    CHECK(cbm::free_entropy(inst) == doctest::Approx(0.25 * kLn2));
    const auto sys = cbm::to_gf2(inst);
    CHECK(cbm::marginal(sys, std::vector<std::uint32_t>{}) == 1);
    CHECK(cbm::marginal(sys, std::vector<std::uint32_t>{0}) == 1);
    CHECK(cbm::marginal(sys, std::vector<std::uint32_t>{1}) == 0);
    CHECK(cbm::mean_overlap(sys) == doctest::Approx(0.25));
    // exhaustive <Q_1^2> = 10/16 (frozen from enumeration of the 16 pairs
    // against the 8-element row space)
    CHECK(cbm::overlap_power_moment_exhaustive(sys, 2) == doctest::Approx(10.0 / 16.0));
    cbm::RandomSource rng(1);
    CHECK(cbm::overlap_power_moment(sys, 2, 1, rng) == doctest::Approx(10.0 / 16.0));
    CHECK(cbm::overlap_power_moment(sys, 1, 1, rng) == doctest::Approx(cbm::mean_overlap(sys)));
}

TEST_CASE("fully constrained system: overlap 1 for every power") {
    cbm::Instance inst;
    inst.params = {5, 2, 1.0, 0.0};
    inst.factors = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
    inst.couplings.assign(4, cbm::Coupling::inf);
    auto sys = cbm::to_gf2(inst);
    sys.add_singleton(0); // pin the remaining degree of freedom
    CHECK(sys.rank() == 5);
    CHECK(cbm::mean_overlap(sys) == 1.0);
    cbm::RandomSource rng(2);
    for (unsigned k : {1u, 2u, 3u, 5u}) CHECK(cbm::overlap_power_moment(sys, k, 1, rng) == 1.0);
}

TEST_CASE("class-based overlap moment equals exhaustive enumeration on random instances") {
    cbm::RandomSource rng(404);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 5 + rng.below(5); // 5..9
        cbm::ModelParams mp{n, 3, 1.2, 0.4};
        const auto inst = cbm::generate_instance(mp, rng.next_u64());
        const auto sys = cbm::to_gf2(inst);
        for (unsigned k : {2u, 3u, 4u}) {
            const auto exact = cbm::overlap_power_moment(sys, k, 1, rng);
            const auto brute = cbm::overlap_power_moment_exhaustive(sys, k);
            CHECK(exact == doctest::Approx(brute).epsilon(1e-12));
        }
    }
}

TEST_CASE("monte carlo overlap moment converges to the exact value") {
    cbm::ModelParams mp{40, 3, 1.0, 0.3};
    const auto inst = cbm::generate_instance(mp, 7);
    const auto sys = cbm::to_gf2(inst);
    cbm::RandomSource rng(8);
    const auto exact = cbm::overlap_power_moment(sys, 3, 1, rng);
    // force the MC path with a zero support cap
    const auto mc = cbm::overlap_power_moment(sys, 3, 200000, rng, 0);
    CHECK(mc == doctest::Approx(exact).epsilon(0.05));
}

TEST_CASE("free entropy from rank equals enumerated log Z exactly for n <= 14") {
    cbm::RandomSource rng(606);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 4 + rng.below(11); // 4..14
        cbm::ModelParams mp{n, 3, 1.0, 0.5};
        const auto inst = cbm::generate_instance(mp, rng.next_u64());
        const auto sys = cbm::to_gf2(inst);
        const auto report = cbm::enumerate_gibbs(inst, {});
        CHECK(report.solution_count == (std::uint64_t{1} << (n - sys.rank())));
        CHECK(cbm::free_entropy(sys) == report.logZ / static_cast<double>(n));
    }
}

TEST_CASE("revelation monotonicity: extra revealed factor never lowers marginals or raises entropy") {
    cbm::RandomSource rng(321);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 10;
        cbm::ModelParams mp{n, 3, 0.8, 0.5};
        auto inst = cbm::generate_instance(mp, rng.next_u64());
        auto before = cbm::to_gf2(inst);
        std::vector<std::vector<std::uint32_t>> subsets;
        for (int s = 0; s < 10; ++s)
            subsets.push_back(rng.k_subset(n, 1 + static_cast<std::uint32_t>(rng.below(3))));
        inst.factors.push_back(rng.k_subset(n, 3));
        inst.couplings.push_back(cbm::Coupling::inf);
        auto after = cbm::to_gf2(inst);
        CHECK(cbm::free_entropy(after) <= cbm::free_entropy(before));
        for (const auto& s : subsets) CHECK(cbm::marginal(after, s) >= cbm::marginal(before, s));
    }
}

TEST_CASE("determined variable count never exceeds the rank") {
    cbm::RandomSource rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        cbm::ModelParams mp{12, 3, 1.0, 0.4};
        const auto sys = cbm::to_gf2(cbm::generate_instance(mp, rng.next_u64()));
        CHECK(sys.determined_count() <= sys.rank());
    }
}

TEST_CASE("instance json round-trip") {
    const auto inst = cbm::generate_instance({30, 3, 0.5, 0.4}, 1234);
    const auto text = cbm::instance_to_json(inst);
    const auto back = cbm::instance_from_json(text);
    CHECK(back.params.n == inst.params.n);
    CHECK(back.params.K == inst.params.K);
    CHECK(back.params.alpha == inst.params.alpha);
    CHECK(back.params.q == inst.params.q);
    CHECK(back.seed == inst.seed);
    CHECK(back.factors == inst.factors);
    CHECK(back.couplings == inst.couplings);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(cbm::ModelParams({0, 3, 0.5, 0.5}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(cbm::ModelParams({2, 3, 0.5, 0.5}).validate(), std::invalid_argument); // K > n
    CHECK_THROWS_AS(cbm::ModelParams({8, 1, 0.5, 0.5}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(cbm::ModelParams({8, 3, 0.5, 1.5}).validate(), std::invalid_argument);
}

TEST_SUITE_END();
