#include "cbm/replica.hpp"

#include "cbm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cbm {

namespace {
constexpr double kLn2 = std::numbers::ln2;

void check_xq(double x, double q) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("replica: x must be in [0,1]");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("replica: q must be in [0,1]");
}
} // namespace

double h_rs_scalar(double x, unsigned K, double alpha, double q) {
    check_xq(x, q);
    if (K < 2) throw std::invalid_argument("h_rs_scalar: K must be >= 2");
    const double A = alpha * K * (1.0 - q);
    const double w = std::pow(1.0 - x, static_cast<double>(K - 1));
    return kLn2 * (std::exp(-A * w) + A * w - alpha * (K - 1) * (1.0 - q) * w * (1.0 - x) -
                   alpha * (1.0 - q));
}

double h_rs_derivative(double x, unsigned K, double alpha, double q) {
    check_xq(x, q);
    const double A = alpha * K * (1.0 - q);
    const double u = std::pow(1.0 - x, static_cast<double>(K - 2));
    return kLn2 * A * (K - 1) * u * (std::exp(-A * u * (1.0 - x)) - x);
}

MeanSE mc_replica_functional(unsigned K, double alpha, double q, double x, std::size_t samples,
                             RandomSource& rng) {
    check_xq(x, q);
    if (samples < 1) throw std::invalid_argument("mc_replica_functional: samples must be >= 1");
    const double r = 1.0 - x; // revealed weight of V
    RunningStat stat;
    for (std::size_t s = 0; s < samples; ++s) {
        double value = 0.0;
        // ln( prod_B (1 + tanh U_B) + prod_B (1 - tanh U_B) ), l ~ Poi(alpha K)
        const auto l = rng.poisson(alpha * K);
        std::uint64_t revealed = 0;
        for (std::uint64_t b = 0; b < l; ++b) {
            bool u_inf = rng.bernoulli(1.0 - q);
            for (unsigned i = 0; i + 1 < K && u_inf; ++i) u_inf = rng.bernoulli(r);
            if (u_inf) ++revealed;
        }
        value += revealed > 0 ? static_cast<double>(revealed) * kLn2 : kLn2;
        // - alpha (K-1) ln(1 + tanh J prod_{i<=K} tanh V_i)
        {
            bool all_inf = rng.bernoulli(1.0 - q);
            for (unsigned i = 0; i < K && all_inf; ++i) all_inf = rng.bernoulli(r);
            if (all_inf) value -= alpha * (K - 1) * kLn2;
        }
        // - alpha ln(1 + tanh J)
        if (rng.bernoulli(1.0 - q)) value -= alpha * kLn2;
        stat.add(value);
    }
    return stat.result();
}

namespace {

// Golden-section maximization on [lo, hi]; assumes quasi-unimodality there.
SupResult golden_section(unsigned K, double alpha, double q, double lo, double hi, double tol) {
    constexpr double phi = 0.6180339887498949; // (sqrt(5)-1)/2
    double a = lo, b = hi;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = h_rs_scalar(c, K, alpha, q);
    double fd = h_rs_scalar(d, K, alpha, q);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = h_rs_scalar(c, K, alpha, q);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = h_rs_scalar(d, K, alpha, q);
        }
    }
    const double xm = 0.5 * (a + b);
    return {xm, h_rs_scalar(xm, K, alpha, q)};
}

} // namespace

SupResult sup_h_rs(unsigned K, double alpha, double q, std::size_t grid_points, double refine_tol) {
    if (grid_points < 3) throw std::invalid_argument("sup_h_rs: need at least 3 grid points");
    const double step = 1.0 / static_cast<double>(grid_points - 1);
    double best_h = -1e300;
    std::size_t best_i = grid_points - 1;
    // scan from x = 1 downward so ties resolve to the larger-x branch
    for (std::size_t j = 0; j < grid_points; ++j) {
        const std::size_t i = grid_points - 1 - j;
        const double x = static_cast<double>(i) * step;
        const double h = h_rs_scalar(x, K, alpha, q);
        if (h > best_h) {
            best_h = h;
            best_i = i;
        }
    }
    const double lo = best_i == 0 ? 0.0 : (static_cast<double>(best_i - 1) * step);
    const double hi = best_i + 1 >= grid_points ? 1.0 : (static_cast<double>(best_i + 1) * step);
    SupResult refined = golden_section(K, alpha, q, lo, hi, refine_tol);

    // polish an interior maximizer onto the stationary point of the closed
    // derivative (bisection on the sign factor inside the refined cell)
    if (refined.x_star > 0.0 && refined.x_star < 1.0) {
        double a = std::max(lo, refined.x_star - 64.0 * refine_tol);
        double b = std::min(hi, refined.x_star + 64.0 * refine_tol);
        double ga = h_rs_derivative(a, K, alpha, q);
        double gb = h_rs_derivative(b, K, alpha, q);
        if (ga > 0.0 && gb < 0.0) {
            for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
                const double mid = 0.5 * (a + b);
                const double gm = h_rs_derivative(mid, K, alpha, q);
                (gm > 0.0 ? a : b) = mid;
            }
            const double xs = 0.5 * (a + b);
            const double hs = h_rs_scalar(xs, K, alpha, q);
            if (hs >= refined.h_star) refined = {xs, hs};
        }
    }

    // never report worse than the grid scan itself
    const double grid_x = static_cast<double>(best_i) * step;
    if (best_h > refined.h_star) refined = {grid_x, best_h};
    return refined;
}

double de_map(double z, unsigned K, double alpha, double q) {
    check_xq(z, q);
    const double A = alpha * K * (1.0 - q);
    return std::exp(-A * std::pow(1.0 - z, static_cast<double>(K - 1)));
}

double de_map_derivative(double z, unsigned K, double alpha, double q) {
    const double A = alpha * K * (1.0 - q);
    const double u = std::pow(1.0 - z, static_cast<double>(K - 2));
    return A * (K - 1) * u * std::exp(-A * u * (1.0 - z));
}

namespace {

void push_fixed_point(std::vector<DeFixedPoint>& out, DeFixedPoint fp, double tol) {
    for (auto& existing : out) {
        if (std::abs(existing.z - fp.z) <= std::max(tol * 16.0, 1e-9)) {
            existing.reached_from_zero |= fp.reached_from_zero;
            existing.reached_from_one |= fp.reached_from_one;
            existing.converged &= fp.converged;
            return;
        }
    }
    out.push_back(fp);
}

} // namespace

std::vector<DeFixedPoint> de_fixed_points(unsigned K, double alpha, double q, double tol,
                                          std::size_t max_iters, std::size_t scan_points) {
    if (!(tol > 0.0)) throw std::invalid_argument("de_fixed_points: tol must be positive");
    std::vector<DeFixedPoint> out;
    for (const double z0 : {0.0, 1.0}) {
        double z = z0;
        bool converged = false;
        for (std::size_t it = 0; it < max_iters; ++it) {
            const double next = de_map(z, K, alpha, q);
            if (std::abs(next - z) <= tol) {
                z = next;
                converged = true;
                break;
            }
            z = next;
        }
        DeFixedPoint fp;
        fp.z = z;
        fp.residual = std::abs(z - de_map(z, K, alpha, q));
        fp.stable = std::abs(de_map_derivative(z, K, alpha, q)) < 1.0;
        fp.reached_from_zero = z0 == 0.0;
        fp.reached_from_one = z0 == 1.0;
        fp.converged = converged;
        push_fixed_point(out, fp, tol);
    }
    // sign-change scan of g(z) = z - de_map(z), bisected to tolerance
    auto g = [&](double z) { return z - de_map(z, K, alpha, q); };
    const double step = 1.0 / static_cast<double>(scan_points);
    double prev = g(0.0);
    for (std::size_t i = 1; i <= scan_points; ++i) {
        const double z = static_cast<double>(i) * step;
        const double cur = g(z);
        if ((prev < 0.0 && cur > 0.0) || (prev > 0.0 && cur < 0.0)) {
            double a = z - step, b = z;
            double ga = prev;
            while (b - a > tol * 0.5) {
                const double mid = 0.5 * (a + b);
                const double gm = g(mid);
                if ((ga < 0.0) == (gm < 0.0)) {
                    a = mid;
                    ga = gm;
                } else {
                    b = mid;
                }
            }
            DeFixedPoint fp;
            fp.z = 0.5 * (a + b);
            fp.residual = std::abs(g(fp.z));
            fp.stable = std::abs(de_map_derivative(fp.z, K, alpha, q)) < 1.0;
            push_fixed_point(out, fp, tol);
        }
        prev = cur;
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.z < b.z; });
    return out;
}

void GeneralizedParams::validate() const {
    if (path.empty()) throw std::invalid_argument("GeneralizedParams: empty path");
    for (double r : path)
        if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("GeneralizedParams: path entries must be in [0,1]");
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("GeneralizedParams: eps must be in [0,1]");
    if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("GeneralizedParams: delta must be in [0,1]");
    if (!(theta > 0.0 && theta <= 0.2)) throw std::invalid_argument("GeneralizedParams: theta must be in (0, 1/5]");
    if (n < 1) throw std::invalid_argument("GeneralizedParams: n must be >= 1");
    const double scaled = delta * std::pow(static_cast<double>(n), -theta);
    if (!(scaled >= 0.0 && scaled <= 1.0))
        throw std::invalid_argument("GeneralizedParams: delta n^-theta out of range");
}

double GeneralizedParams::field_keep_prob() const {
    return (1.0 - eps) * (1.0 - delta * std::pow(static_cast<double>(n), -theta));
}

double generalized_free_entropy(const GeneralizedParams& gp, unsigned K, double alpha, double q) {
    gp.validate();
    const auto T = static_cast<double>(gp.path.size());
    KahanSum s1, s2;
    for (double r : gp.path) {
        const double rk1 = std::pow(r, static_cast<double>(K - 1));
        s1.add(rk1);
        s2.add(rk1 * r);
    }
    const double c = alpha * K * (1.0 - q) / T;
    return kLn2 * (c * s1.value() + gp.field_keep_prob() * std::exp(-c * s1.value()) -
                   alpha * (K - 1) * (1.0 - q) / T * s2.value() - alpha * (1.0 - q));
}

MeanSE mc_generalized_free_entropy(const GeneralizedParams& gp, unsigned K, double alpha, double q,
                                   std::size_t samples, RandomSource& rng) {
    gp.validate();
    if (samples < 1) throw std::invalid_argument("mc_generalized_free_entropy: samples must be >= 1");
    const std::size_t T = gp.path.size();
    const double rate = alpha * K / static_cast<double>(T);
    const double p_tilde_field = gp.delta * std::pow(static_cast<double>(gp.n), -gp.theta);
    RunningStat stat;
    for (std::size_t s = 0; s < samples; ++s) {
        double value = 0.0;
        std::uint64_t revealed = 0;
        for (std::size_t t = 0; t < T; ++t) {
            const auto l = rng.poisson(rate);
            for (std::uint64_t b = 0; b < l; ++b) {
                bool u_inf = rng.bernoulli(1.0 - q);
                for (unsigned i = 0; i + 1 < K && u_inf; ++i) u_inf = rng.bernoulli(gp.path[t]);
                if (u_inf) ++revealed;
            }
        }
        const bool h_zero = !rng.bernoulli(gp.eps);
        const bool ht_zero = !rng.bernoulli(p_tilde_field);
        if (revealed > 0)
            value += static_cast<double>(revealed) * kLn2;
        else if (h_zero && ht_zero)
            value += kLn2;
        for (std::size_t t = 0; t < T; ++t) {
            bool all_inf = rng.bernoulli(1.0 - q);
            for (unsigned i = 0; i < K && all_inf; ++i) all_inf = rng.bernoulli(gp.path[t]);
            if (all_inf) value -= alpha * (K - 1) / static_cast<double>(T) * kLn2;
        }
        if (rng.bernoulli(1.0 - q)) value -= alpha * kLn2;
        stat.add(value);
    }
    return stat.result();
}

bool perturbation_bound_check(const GeneralizedParams& gp, unsigned K, double alpha, double q) {
    GeneralizedParams unperturbed = gp;
    unperturbed.eps = 0.0;
    unperturbed.delta = 0.0;
    const double diff = std::abs(generalized_free_entropy(gp, K, alpha, q) -
                                 generalized_free_entropy(unperturbed, K, alpha, q));
    const double bound =
        (gp.eps + gp.delta * std::pow(static_cast<double>(gp.n), -gp.theta)) * kLn2;
    return diff <= bound + 1e-12;
}

ReplicaCurve rs_curve(unsigned K, double alpha, double q, std::size_t points) {
    if (points < 2) throw std::invalid_argument("rs_curve: need at least 2 points");
    ReplicaCurve curve;
    curve.K = K;
    curve.alpha = alpha;
    curve.q = q;
    curve.x.reserve(points);
    curve.h.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(points - 1);
        curve.x.push_back(x);
        curve.h.push_back(h_rs_scalar(x, K, alpha, q));
    }
    const auto sup = sup_h_rs(K, alpha, q);
    curve.argmax_x = sup.x_star;
    curve.argmax_h = sup.h_star;
    return curve;
}

PhaseScanResult phase_scan(unsigned K, double alpha, std::span<const double> q_grid,
                           std::size_t grid_points, double refine_tol) {
    if (q_grid.empty()) throw std::invalid_argument("phase_scan: empty q grid");
    for (std::size_t i = 1; i < q_grid.size(); ++i)
        if (!(q_grid[i] > q_grid[i - 1])) throw std::invalid_argument("phase_scan: q grid must be increasing");
    PhaseScanResult result;
    result.points.reserve(q_grid.size());
    for (double q : q_grid) {
        const auto sup = sup_h_rs(K, alpha, q, grid_points, refine_tol);
        result.points.push_back({q, sup.x_star, sup.h_star});
    }
    for (std::size_t i = 1; i < result.points.size(); ++i) {
        const double jump = std::abs(result.points[i].x_star - result.points[i - 1].x_star);
        if (jump > result.max_jump) {
            result.max_jump = jump;
            result.jump_q_lo = result.points[i - 1].q;
            result.jump_q_hi = result.points[i].q;
        }
    }
    return result;
}

JumpLocation locate_jump(unsigned K, double alpha, double q_min, double q_max, double cell_width,
                         std::size_t coarse_cells) {
    if (!(cell_width > 0.0)) throw std::invalid_argument("locate_jump: cell width must be positive");
    double lo = q_min, hi = q_max;
    auto xstar = [&](double q) { return sup_h_rs(K, alpha, q).x_star; };
    // coarse pass: find the adjacent cell with the largest jump
    {
        std::vector<double> grid(coarse_cells + 1);
        for (std::size_t i = 0; i <= coarse_cells; ++i)
            grid[i] = q_min + (q_max - q_min) * static_cast<double>(i) / static_cast<double>(coarse_cells);
        double best = -1.0;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            const double jump = std::abs(xstar(grid[i + 1]) - xstar(grid[i]));
            if (jump > best) {
                best = jump;
                lo = grid[i];
                hi = grid[i + 1];
            }
        }
    }
    double x_lo = xstar(lo), x_hi = xstar(hi);
    while (hi - lo > cell_width) {
        const double mid = 0.5 * (lo + hi);
        const double x_mid = xstar(mid);
        // keep the half with the larger change
        if (std::abs(x_mid - x_lo) >= std::abs(x_hi - x_mid)) {
            hi = mid;
            x_hi = x_mid;
        } else {
            lo = mid;
            x_lo = x_mid;
        }
    }
    return {lo, hi, x_lo, x_hi, std::abs(x_hi - x_lo)};
}

} // namespace cbm
