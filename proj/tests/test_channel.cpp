#include "cbm/channel.hpp"
#include "cbm/rng.hpp"

#include <doctest.h>

#include <cmath>

TEST_SUITE_BEGIN("channel");

TEST_CASE("degenerate channels") {
    cbm::RandomSource rng(3);
    cbm::BecChannel erased(1.0), clean(0.0);
    for (int i = 0; i < 200; ++i) {
        CHECK(cbm::sample_coupling(erased, rng) == cbm::Coupling::zero);
        CHECK(cbm::sample_coupling(clean, rng) == cbm::Coupling::inf);
    }
}

TEST_CASE("revealed fraction matches 1 - q at q = 0.5") {
    cbm::RandomSource rng(17);
    cbm::BecChannel channel(0.5);
    std::size_t revealed = 0;
    const std::size_t draws = 1000000;
    for (std::size_t i = 0; i < draws; ++i)
        if (cbm::sample_coupling(channel, rng) == cbm::Coupling::inf) ++revealed;
    const double frac = static_cast<double>(revealed) / static_cast<double>(draws);
    CHECK(std::abs(frac - 0.5) < 0.002);
}

TEST_CASE("tanh moments of sampled couplings equal 1 - q for every power") {
    // tanh of a coupling is 0 or 1, so every p-th empirical moment is the
    // revealed fraction
    cbm::RandomSource rng(19);
    for (double q : {0.2, 0.7}) {
        cbm::BecChannel channel(q);
        std::size_t revealed = 0;
        const std::size_t draws = 200000;
        for (std::size_t i = 0; i < draws; ++i)
            if (cbm::sample_coupling(channel, rng) == cbm::Coupling::inf) ++revealed;
        const double moment = static_cast<double>(revealed) / static_cast<double>(draws);
        CHECK(moment == doctest::Approx(1.0 - q).epsilon(0.02));
    }
}

TEST_CASE("bp update: closed values") {
    cbm::BecChannel channel(0.3);
    CHECK(cbm::bp_update_prob(channel, 1.0, 4) == doctest::Approx(0.7));
    CHECK(cbm::bp_update_prob(channel, 0.0, 3) == 0.0);
    CHECK(cbm::bp_update_prob(channel, 0.5, 3) == doctest::Approx(0.175));
    CHECK_THROWS_AS(cbm::bp_update_prob(channel, 0.5, 1), std::invalid_argument);
}

TEST_CASE("bp update monotone in r, antitone in q") {
    for (unsigned K : {2u, 3u, 5u}) {
        double prev = -1.0;
        for (double r = 0.0; r <= 1.0; r += 0.05) {
            const double u = cbm::bp_update_prob(cbm::BecChannel(0.4), r, K);
            CHECK(u >= prev);
            prev = u;
        }
        double prev_q = 2.0;
        for (double q = 0.0; q <= 1.0; q += 0.05) {
            const double u = cbm::bp_update_prob(cbm::BecChannel(q), 0.6, K);
            CHECK(u <= prev_q);
            prev_q = u;
        }
    }
}

TEST_CASE("symmetry moments hold exactly on the two-point family") {
    CHECK(cbm::check_symmetry_moments(cbm::PointMassMix(0.0), 6));
    CHECK(cbm::check_symmetry_moments(cbm::PointMassMix(1.0), 6));
    CHECK(cbm::check_symmetry_moments(cbm::PointMassMix(0.37), 8));
    CHECK(cbm::PointMassMix(0.37).tanh_moment(5) == 0.37);
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(cbm::BecChannel(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(cbm::BecChannel(1.1), std::invalid_argument);
    CHECK_THROWS_AS(cbm::PointMassMix(1.5), std::invalid_argument);
}

TEST_SUITE_END();
