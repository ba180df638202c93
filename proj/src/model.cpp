#include "cbm/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <unordered_map>

namespace cbm {

namespace {
constexpr double kLn2 = std::numbers::ln2;
}

void ModelParams::validate() const {
    if (n < 1) throw std::invalid_argument("ModelParams: n must be >= 1");
    if (K < 2) throw std::invalid_argument("ModelParams: K must be >= 2");
    if (K > n) throw std::invalid_argument("ModelParams: K exceeds n, no K-subset exists");
    if (!(alpha >= 0.0)) throw std::invalid_argument("ModelParams: alpha must be >= 0");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("ModelParams: q must be in [0,1]");
}

bool Instance::gauge_fixed() const {
    for (auto s : planted)
        if (s != 1) return false;
    return true;
}

int Instance::planted_sign(std::span<const std::uint32_t> subset) const {
    if (planted.empty()) return 1;
    int sign = 1;
    for (auto idx : subset) sign *= planted[idx];
    return sign;
}

Instance generate_instance(const ModelParams& params, std::uint64_t seed) {
    params.validate();
    RandomSource rng(seed);
    Instance inst;
    inst.params = params;
    inst.seed = seed;
    const BecChannel channel(params.q);
    const auto m = rng.poisson(params.alpha * static_cast<double>(params.n));
    inst.factors.reserve(m);
    inst.couplings.reserve(m);
    for (std::uint64_t a = 0; a < m; ++a) {
        inst.factors.push_back(rng.k_subset(static_cast<std::uint32_t>(params.n), params.K));
        inst.couplings.push_back(sample_coupling(channel, rng));
    }
    return inst;
}

Instance generate_instance_planted(const ModelParams& params, std::span<const std::int8_t> planted,
                                   std::uint64_t seed) {
    if (planted.size() != params.n)
        throw std::invalid_argument("generate_instance_planted: planted length mismatch");
    for (auto s : planted)
        if (s != 1 && s != -1) throw std::invalid_argument("generate_instance_planted: spins must be +-1");
    Instance inst = generate_instance(params, seed);
    inst.planted.assign(planted.begin(), planted.end());
    return inst;
}

Gf2System to_gf2(const Instance& instance) {
    if (!instance.gauge_fixed()) throw std::invalid_argument("to_gf2: instance must be gauge-fixed");
    Gf2System system(instance.params.n);
    for (std::size_t a = 0; a < instance.factors.size(); ++a) {
        if (instance.couplings[a] == Coupling::inf) system.add_row(instance.factors[a]);
    }
    return system;
}

double free_entropy(const Gf2System& system) {
    const auto free_dims = static_cast<double>(system.n() - system.rank());
    return free_dims * kLn2 / static_cast<double>(system.n());
}

double free_entropy(const Instance& instance) { return free_entropy(to_gf2(instance)); }

int marginal(const Gf2System& system, std::span<const std::uint32_t> subset) {
    return system.in_row_space(subset) ? 1 : 0;
}

int marginal(const Instance& instance, std::span<const std::uint32_t> subset) {
    return marginal(to_gf2(instance), subset);
}

double mean_overlap(const Gf2System& system) {
    return static_cast<double>(system.determined_count()) / static_cast<double>(system.n());
}

double mean_overlap(const Instance& instance) { return mean_overlap(to_gf2(instance)); }

namespace {

struct WordVecHash {
    std::size_t operator()(const std::vector<std::uint64_t>& v) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (auto w : v) {
            h ^= w;
            h *= 0x100000001b3ULL;
            h ^= h >> 29;
        }
        return static_cast<std::size_t>(h);
    }
};

using RepDistribution = std::unordered_map<std::vector<std::uint64_t>, double, WordVecHash>;

// Distribution of the XOR of one more uniform coset representative.
bool convolve_once(const RepDistribution& d, const Gf2System::CosetClasses& classes, double n,
                   std::size_t support_cap, RepDistribution& out) {
    out.clear();
    out.reserve(std::min(support_cap + 1, d.size() * classes.reps.size() / 2 + 1));
    std::vector<std::uint64_t> key;
    for (const auto& [rep, prob] : d) {
        for (std::size_t c = 0; c < classes.reps.size(); ++c) {
            key = rep;
            const auto& crep = classes.reps[c];
            for (std::size_t w = 0; w < key.size(); ++w) key[w] ^= crep[w];
            out[key] += prob * (static_cast<double>(classes.sizes[c]) / n);
            if (out.size() > support_cap) return false;
        }
    }
    return true;
}

} // namespace

std::optional<double> overlap_power_moment_classes(const Gf2System::CosetClasses& classes,
                                                   std::size_t n_vars, unsigned k,
                                                   std::size_t support_cap) {
    if (k < 1) throw std::invalid_argument("overlap_power_moment_classes: k must be >= 1");
    const double n = static_cast<double>(n_vars);
    if (k == 1) {
        return classes.zero_class >= 0
                   ? static_cast<double>(classes.sizes[static_cast<std::size_t>(classes.zero_class)]) / n
                   : 0.0;
    }

    RepDistribution d1;
    d1.reserve(classes.reps.size());
    for (std::size_t c = 0; c < classes.reps.size(); ++c)
        d1[classes.reps[c]] = static_cast<double>(classes.sizes[c]) / n;

    // <Q_1^k> = P(xor of k reps = 0) = sum_v D_a(v) D_b(v), a = floor(k/2)
    const unsigned a = k / 2, b = k - a;
    RepDistribution da = d1, scratch;
    for (unsigned step = 1; step < a; ++step) {
        if (!convolve_once(da, classes, n, support_cap, scratch)) return std::nullopt;
        da.swap(scratch);
    }
    RepDistribution db = da;
    if (b > a) {
        if (!convolve_once(da, classes, n, support_cap, scratch)) return std::nullopt;
        db.swap(scratch);
    }
    double total = 0.0, comp = 0.0;
    for (const auto& [rep, pa] : da) {
        const auto it = db.find(rep);
        if (it == db.end()) continue;
        const double term = pa * it->second - comp;
        const double t = total + term;
        comp = (t - total) - term;
        total = t;
    }
    return total;
}

double overlap_power_moment(const Gf2System& system, unsigned k, std::size_t samples,
                            RandomSource& rng, std::size_t support_cap) {
    if (k < 1) throw std::invalid_argument("overlap_power_moment: k must be >= 1");
    if (k == 1) return mean_overlap(system);

    const auto exact = overlap_power_moment_classes(system.coset_classes(), system.n(), k, support_cap);
    if (exact) return *exact;

    // Monte Carlo over k-tuples with replacement
    if (samples == 0) throw std::invalid_argument("overlap_power_moment: samples must be >= 1");
    std::size_t hits = 0;
    std::vector<std::uint32_t> tuple(k);
    for (std::size_t s = 0; s < samples; ++s) {
        for (auto& idx : tuple) idx = static_cast<std::uint32_t>(rng.below(system.n()));
        if (system.in_row_space(tuple)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(samples);
}

double overlap_power_moment(const Instance& instance, unsigned k, std::size_t samples, RandomSource& rng) {
    return overlap_power_moment(to_gf2(instance), k, samples, rng);
}

double overlap_power_moment_exhaustive(const Gf2System& system, unsigned k) {
    if (k < 1) throw std::invalid_argument("overlap_power_moment_exhaustive: k must be >= 1");
    const std::size_t n = system.n();
    double total_tuples = std::pow(static_cast<double>(n), static_cast<double>(k));
    if (total_tuples > 1e6 + 0.5)
        throw std::invalid_argument("overlap_power_moment_exhaustive: n^k too large");
    std::vector<std::uint32_t> tuple(k, 0);
    std::uint64_t hits = 0, count = 0;
    for (;;) {
        if (system.in_row_space(tuple)) ++hits;
        ++count;
        unsigned pos = 0;
        while (pos < k) {
            if (++tuple[pos] < n) break;
            tuple[pos] = 0;
            ++pos;
        }
        if (pos == k) break;
    }
    return static_cast<double>(hits) / static_cast<double>(count);
}

std::string instance_to_json(const Instance& instance) {
    nlohmann::json j;
    j["n"] = instance.params.n;
    j["K"] = instance.params.K;
    j["alpha"] = instance.params.alpha;
    j["q"] = instance.params.q;
    j["seed"] = instance.seed;
    j["factors"] = instance.factors;
    auto& couplings = j["couplings"] = nlohmann::json::array();
    for (auto c : instance.couplings) couplings.push_back(c == Coupling::inf ? "inf" : "zero");
    if (!instance.planted.empty()) j["planted"] = instance.planted;
    return j.dump();
}

Instance instance_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    Instance inst;
    inst.params.n = j.at("n").get<std::size_t>();
    inst.params.K = j.at("K").get<unsigned>();
    inst.params.alpha = j.at("alpha").get<double>();
    inst.params.q = j.at("q").get<double>();
    inst.seed = j.at("seed").get<std::uint64_t>();
    inst.factors = j.at("factors").get<std::vector<std::vector<std::uint32_t>>>();
    for (const auto& c : j.at("couplings")) {
        const auto s = c.get<std::string>();
        if (s == "inf")
            inst.couplings.push_back(Coupling::inf);
        else if (s == "zero")
            inst.couplings.push_back(Coupling::zero);
        else
            throw std::invalid_argument("instance_from_json: bad coupling value");
    }
    if (j.contains("planted")) inst.planted = j.at("planted").get<std::vector<std::int8_t>>();
    if (inst.couplings.size() != inst.factors.size())
        throw std::invalid_argument("instance_from_json: factors/couplings length mismatch");
    inst.params.validate();
    return inst;
}

} // namespace cbm
