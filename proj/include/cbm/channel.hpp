// Binary erasure channel and the two-point family of symmetric
// half-log-likelihood distributions supported on {0, +inf}.
//
// Couplings are a two-valued enum, never floating +-inf: the erasure-channel
// posterior is purely combinatorial and the code keeps it that way.

#pragma once

#include "cbm/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace cbm {

enum class Coupling : std::uint8_t { zero, inf };

struct BecChannel {
    double q = 0.0; // erasure probability

    explicit BecChannel(double erasure) : q(erasure) {
        if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("BecChannel: q must be in [0,1]");
    }
};

// Element of the two-point family: mass r_inf at Delta_inf (revealed),
// 1 - r_inf at Delta_0 (erased). Every tanh-moment of order p >= 1 equals
// r_inf, which is what makes the whole interpolation scalar.
struct PointMassMix {
    double r_inf = 0.0;

    explicit PointMassMix(double revealed) : r_inf(revealed) {
        if (!(r_inf >= 0.0 && r_inf <= 1.0))
            throw std::invalid_argument("PointMassMix: revealed weight must be in [0,1]");
    }

    double erased() const { return 1.0 - r_inf; }
    // int (tanh h)^p x(dh); p = 0 gives total mass.
    double tanh_moment(unsigned p) const { return p == 0 ? 1.0 : r_inf; }
};

inline Coupling sample_coupling(const BecChannel& channel, RandomSource& rng) {
    return rng.bernoulli(1.0 - channel.q) ? Coupling::inf : Coupling::zero;
}

// Revealed weight of the BP message U given revealed weight r of the
// incoming messages: (1-q) r^{K-1}.
inline double bp_update_prob(const BecChannel& channel, double r, unsigned K) {
    if (K < 2) throw std::invalid_argument("bp_update_prob: factor degree must be >= 2");
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("bp_update_prob: r must be in [0,1]");
    return (1.0 - channel.q) * std::pow(r, static_cast<double>(K - 1));
}

// Channel-symmetry identity: odd and even tanh-moments agree.
inline bool check_symmetry_moments(const PointMassMix& dist, unsigned k_max) {
    if (k_max < 1) throw std::invalid_argument("check_symmetry_moments: k_max must be >= 1");
    for (unsigned k = 1; k <= k_max; ++k) {
        if (dist.tanh_moment(2 * k - 1) != dist.tanh_moment(2 * k)) return false;
    }
    return true;
}

} // namespace cbm
