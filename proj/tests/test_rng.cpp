#include "cbm/rng.hpp"
#include "cbm/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

TEST_SUITE_BEGIN("rng");

TEST_CASE("identical seed gives identical draw sequence") {
    cbm::RandomSource a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    cbm::RandomSource c(43);
    bool all_equal = true;
    cbm::RandomSource a2(42);
    for (int i = 0; i < 16; ++i) all_equal = all_equal && (a2.next_u64() == c.next_u64());
    CHECK_FALSE(all_equal);
}

TEST_CASE("child streams are reproducible and distinct") {
    cbm::RandomSource parent(7);
    auto c1 = parent.child(3), c2 = parent.child(3), c3 = parent.child(4);
    CHECK(c1.next_u64() == c2.next_u64());
    CHECK(c1.next_u64() != c3.next_u64());
}

TEST_CASE("poisson matches mean and variance, small and chunked means") {
    for (double mu : {0.3, 4.0, 40.0, 800.0}) {
        cbm::RandomSource rng(11);
        cbm::RunningStat stat;
        const int samples = mu > 100 ? 4000 : 20000;
        for (int i = 0; i < samples; ++i) stat.add(static_cast<double>(rng.poisson(mu)));
        CHECK(stat.mean() == doctest::Approx(mu).epsilon(0.05));
        CHECK(stat.variance() == doctest::Approx(mu).epsilon(0.10));
    }
    cbm::RandomSource rng(1);
    CHECK(rng.poisson(0.0) == 0);
}

TEST_CASE("k_subset is sorted, distinct, in range") {
    cbm::RandomSource rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const auto s = rng.k_subset(37, 5);
        REQUIRE(s.size() == 5);
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(s[i] < 37);
            if (i > 0) CHECK(s[i] > s[i - 1]);
        }
    }
    // frequency sanity: element 0 appears with probability K/n
    int hits = 0;
    const int trials = 20000;
    for (int trial = 0; trial < trials; ++trial) {
        const auto s = rng.k_subset(10, 3);
        if (s[0] == 0) ++hits;
    }
    CHECK(static_cast<double>(hits) / trials == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("below is unbiased over small bounds") {
    cbm::RandomSource rng(9);
    std::vector<int> counts(7, 0);
    const int trials = 70000;
    for (int i = 0; i < trials; ++i) ++counts[rng.below(7)];
    for (int c : counts) CHECK(static_cast<double>(c) == doctest::Approx(trials / 7.0).epsilon(0.05));
}

TEST_SUITE_END();
