// Replica-symmetric prediction on the two-point family: scalar free
// entropy, its supremum, density evolution, the generalized functional
// over length-T paths, and the phase diagram.
//
// Throughout, x denotes the erased mass of the message distribution
// (x = 1 - r with r the revealed weight used by the interpolation module).

#pragma once

#include "cbm/rng.hpp"
#include "cbm/stats.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cbm {

// h_RS(x) = ln2 [ e^{-A w} + A w - alpha (K-1)(1-q)(1-x)^K - alpha (1-q) ],
// A = alpha K (1-q), w = (1-x)^{K-1}.
double h_rs_scalar(double x, unsigned K, double alpha, double q);

// d h_RS / dx = ln2 A (K-1)(1-x)^{K-2} ( e^{-A(1-x)^{K-1}} - x ).
double h_rs_derivative(double x, unsigned K, double alpha, double q);

// Direct Monte Carlo of the defining expectation (Poisson degree, sampled
// couplings and messages); the independent oracle for h_rs_scalar.
MeanSE mc_replica_functional(unsigned K, double alpha, double q, double x, std::size_t samples,
                             RandomSource& rng);

struct SupResult {
    double x_star = 1.0;
    double h_star = 0.0;
};

// Dense grid scan on [0,1] followed by golden-section refinement around the
// best grid cell; ties break toward larger x.
SupResult sup_h_rs(unsigned K, double alpha, double q, std::size_t grid_points = 2001,
                   double refine_tol = 1e-10);

// One density-evolution step on the erased mass:
// z -> exp(-alpha K (1-q) (1-z)^{K-1}). Interior stationary points of
// h_rs_scalar are exactly its fixed points.
double de_map(double z, unsigned K, double alpha, double q);
double de_map_derivative(double z, unsigned K, double alpha, double q);

struct DeFixedPoint {
    double z = 0.0;
    double residual = 0.0;
    bool stable = false;
    bool reached_from_zero = false;
    bool reached_from_one = false;
    bool converged = true;
};

// Fixed points from iteration started at z = 0 and z = 1 plus bisection on
// every sign change of z - de_map(z) over a dense scan.
std::vector<DeFixedPoint> de_fixed_points(unsigned K, double alpha, double q, double tol,
                                          std::size_t max_iters, std::size_t scan_points = 4096);

// Interpolating-path parameters for the generalized functional. The path
// holds revealed weights r^(1..T); the perturbations enter through
// (1-eps)(1-delta n^-theta).
struct GeneralizedParams {
    std::vector<double> path; // revealed weights r^{(t)}
    double eps = 0.0;
    double delta = 0.0;
    double theta = 0.2;
    std::size_t n = 1;

    void validate() const;
    double field_keep_prob() const; // (1-eps)(1-delta n^-theta)
};

// Closed scalar form on the two-point family, gated by the MC oracle below:
// ln2 [ c S1 + (1-eps)(1-delta n^-theta) e^{-c S1}
//       - (alpha (K-1)(1-q)/T) S2 - alpha (1-q) ],
// c = alpha K (1-q)/T, S1 = sum_t r_t^{K-1}, S2 = sum_t r_t^K.
double generalized_free_entropy(const GeneralizedParams& gp, unsigned K, double alpha, double q);

// Direct Monte Carlo of the defining expectation.
MeanSE mc_generalized_free_entropy(const GeneralizedParams& gp, unsigned K, double alpha, double q,
                                   std::size_t samples, RandomSource& rng);

// |h(eps,delta) - h(0,0)| <= (eps + delta n^-theta) ln 2.
bool perturbation_bound_check(const GeneralizedParams& gp, unsigned K, double alpha, double q);

struct ReplicaCurve {
    std::vector<double> x;
    std::vector<double> h;
    double argmax_x = 1.0;
    double argmax_h = 0.0;
    unsigned K = 3;
    double alpha = 0.0;
    double q = 0.0;
};

ReplicaCurve rs_curve(unsigned K, double alpha, double q, std::size_t points = 512);

struct PhasePoint {
    double q = 0.0;
    double x_star = 1.0;
    double h_star = 0.0;
};

struct PhaseScanResult {
    std::vector<PhasePoint> points;
    double max_jump = 0.0; // largest |x*(q_{i+1}) - x*(q_i)|
    double jump_q_lo = 0.0;
    double jump_q_hi = 0.0;
};

// sup_h_rs per q on a monotone grid, with the largest adjacent jump in x*
// reported as the transition candidate.
PhaseScanResult phase_scan(unsigned K, double alpha, std::span<const double> q_grid,
                           std::size_t grid_points = 2001, double refine_tol = 1e-10);

// Bisects the largest-jump interval of a coarse scan down to the requested
// width; returns the bracketing cell and the maximizers on its two sides.
struct JumpLocation {
    double q_lo = 0.0, q_hi = 0.0;
    double x_lo = 1.0, x_hi = 1.0;
    double jump = 0.0;
};
JumpLocation locate_jump(unsigned K, double alpha, double q_min, double q_max, double cell_width,
                         std::size_t coarse_cells = 64);

} // namespace cbm
