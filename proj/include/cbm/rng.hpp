// Seeded random source used everywhere in the library.
//
// All samplers are hand-rolled on top of xoshiro256++ so that a given
// master seed produces the same draw sequence on every platform and
// toolchain. std::<random> distributions are implementation-defined and
// would break bit-identical reruns.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cbm {

// SplitMix64; used for seeding and for deriving child streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : seed_(seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t seed() const { return seed_; }

    // Derived stream: deterministic function of (parent seed, tag).
    // Used to hand one independent stream to each trial/worker so that
    // parallel scheduling never changes results.
    RandomSource child(std::uint64_t tag) const {
        std::uint64_t sm = seed_ ^ 0x5851f42d4c957f2dULL;
        std::uint64_t a = splitmix64(sm);
        sm ^= tag * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL;
        std::uint64_t b = splitmix64(sm);
        return RandomSource(a ^ (b + 0x9e3779b97f4a7c15ULL));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform integer in [0, bound); Lemire's method, unbiased.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("below: bound must be positive");
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t t = (0 - bound) % bound;
            while (lo < t) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Knuth's product-of-uniforms Poisson; means above 256 are split into
    // chunks so exp(-mu) never underflows. Exact for all mu >= 0.
    std::uint64_t poisson(double mu) {
        if (mu < 0 || !std::isfinite(mu)) throw std::invalid_argument("poisson: bad mean");
        std::uint64_t total = 0;
        while (mu > 256.0) {
            total += poisson_small(256.0);
            mu -= 256.0;
        }
        return total + poisson_small(mu);
    }

    // Uniform K-subset of {0,...,n-1} via Floyd's algorithm; returned sorted.
    std::vector<std::uint32_t> k_subset(std::uint32_t n, std::uint32_t k) {
        if (k > n) throw std::invalid_argument("k_subset: k exceeds n");
        std::vector<std::uint32_t> out;
        out.reserve(k);
        for (std::uint32_t j = n - k; j < n; ++j) {
            auto t = static_cast<std::uint32_t>(below(j + 1));
            bool seen = false;
            for (auto v : out) {
                if (v == t) { seen = true; break; }
            }
            out.push_back(seen ? j : t);
        }
        // insertion sort; k is small
        for (std::size_t i = 1; i < out.size(); ++i) {
            auto v = out[i];
            std::size_t j = i;
            for (; j > 0 && out[j - 1] > v; --j) out[j] = out[j - 1];
            out[j] = v;
        }
        return out;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t poisson_small(double mu) {
        if (mu <= 0.0) return 0;
        const double limit = std::exp(-mu);
        std::uint64_t k = 0;
        double prod = uniform01();
        while (prod > limit) {
            ++k;
            prod *= uniform01();
        }
        return k;
    }

    std::uint64_t seed_;
    std::array<std::uint64_t, 4> s_{};
};

} // namespace cbm
