#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "proxmcmc/common.hpp"

namespace proxmcmc::oracle {

/// Golden-section maximization of a unimodal function on [a, b]. Ties
/// shrink from the right, so callers must pick brackets on which the
/// function is finite (restrict to the support for indicator objectives).
double golden_section_max(const std::function<double(double)>& f, double a,
                          double b, double tol = 1e-12, int max_iters = 200);

/// Brute-force 1-D prox: maximize g(u) - (u - x)^2 / (2 lam) over a bracket
/// containing both x and the origin (all benchmark modes sit at 0).
double prox_1d(const std::function<double(double)>& g, double x, double lam);

/// Cyclic coordinate ascent with per-coordinate golden-section line search.
/// Good enough to certify small smooth concave objectives to ~1e-4.
Vec coordinate_ascent_max(const std::function<double(const Vec&)>& f, Vec x0,
                          int sweeps, double radius, double line_tol = 1e-10);

/// Exact prox of the 2x2 anisotropic TV objective
///   argmin_u |u - x|^2/2 + lam*alpha*(|u01-u00|+|u11-u10|+|u10-u00|+|u11-u01|)
/// by enumerating the 3^4 difference-sign patterns; each pattern yields a
/// closed-form candidate and the true objective picks the winner.
Image prox_tv_2x2_exact(const Image& x, double lam, double alpha);

/// Eigenvalues of a symmetric 3x3 matrix, descending, via the trigonometric
/// closed form. Deliberately independent of LAPACK.
std::array<double, 3> sym3_eigenvalues(const std::array<double, 6>& a);
// a packs the upper triangle: (a00, a01, a02, a11, a12, a22)

/// Singular values of a 3x3 matrix, descending: the dominant value from
/// sym3_eigenvalues of u^T u, the other two deflated through the trace and
/// the exact determinant so near-zero values keep full accuracy.
/// Deliberately independent of LAPACK.
std::array<double, 3> singular_values_3x3(const Image& u);

/// Prox objective -alpha |u|_* - |u - x|^2 / (2 lam) of a candidate u,
/// evaluated through singular_values_3x3.
double nuclear_prox_value_3x3(const Image& x, const Image& u, double lam,
                              double alpha);

/// Exact maximum of the nuclear prox objective: singular values of x pass
/// through the scalar shrinkage max(s - alpha*lam, 0) and the value follows
/// from the separable reduction. Since the objective is 1/lam-strongly
/// concave, any candidate whose value matches this to eps lies within
/// sqrt(2 lam eps) of the true prox point.
double nuclear_prox_optimal_value_3x3(const Image& x, double lam, double alpha);

/// Nuclear norm of a 3x3 matrix from sym3_eigenvalues of u^T u, smoothed as
/// sum_i sqrt(eig_i + eps^2) so coordinate ascent sees a differentiable
/// objective.
double nuclear_norm_3x3_smoothed(const Image& u, double smooth_eps);

/// Coordinate-ascent maximizer of the smoothed nuclear prox objective. Near
/// the true prox the unsmoothed objective is flat along coupled directions,
/// so this stalls short of the maximizer; it serves as a feasible witness
/// whose value must stay below nuclear_prox_optimal_value_3x3.
Image prox_nuclear_3x3(const Image& x, double lam, double alpha,
                       double smooth_eps = 1e-6, int sweeps = 80);

/// Result of one randomized prox-vs-oracle suite.
struct SuiteResult {
  std::string op;
  int cases = 0;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Runs the randomized closed-form prox suites (soft threshold, quadratic,
/// quartic, box projection, nuclear SVT, 2x2 TV) against the brute-force
/// oracles above. Shared by the prox-check command and the acceptance suite.
std::vector<SuiteResult> run_prox_suites(int cases, std::uint64_t seed);

}  // namespace proxmcmc::oracle
