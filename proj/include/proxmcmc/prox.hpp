#pragma once

#include <functional>
#include <string>

#include "proxmcmc/common.hpp"
#include "proxmcmc/linalg.hpp"
#include "proxmcmc/rng.hpp"

namespace proxmcmc {

/// Inner-solver settings for iterative proxes.
struct IterativeParams {
  int max_iters = 50;
  double tolerance = 1e-5;  // relative dual-variable change
  bool hot_start = true;
};

/// Describes how prox^lam is computed for a target.
struct ProxStrategy {
  enum class Kind { ClosedForm, Iterative, ForwardBackwardSplit };
  Kind kind = Kind::ClosedForm;
  std::string name;       // operator id, e.g. "soft_threshold", "tv_dual_projection"
  IterativeParams inner;  // meaningful for Iterative / ForwardBackwardSplit
};

/// Scratch state threaded through prox calls: hot-start data for iterative
/// solvers plus counters the chain driver reports. Every prox implementation
/// that receives a workspace sets last_* for the call just made.
struct ProxWorkspace {
  GradField tv_dual;
  bool has_tv_dual = false;
  int last_iters = 0;
  double last_residual = 0.0;
  bool last_converged = true;
  long n_evals = 0;
  long n_nonconverged = 0;
};

using LogDensityFn = std::function<double(const Vec&)>;
using GradientFn = std::function<Vec(const Vec&)>;
using ProxFn = std::function<Vec(const Vec&, double, ProxWorkspace*)>;

/// A log-concave target known up to its normalizing constant. log_density
/// returns -inf outside the support; gradient is empty when log pi is not
/// C^1; curvature_1d backs the 1-D manifold proposal and is usually empty.
struct TargetDensity {
  int dim = 1;
  LogDensityFn log_density;
  GradientFn gradient;
  std::function<double(double)> curvature_1d;
  ProxStrategy strategy;
  ProxFn prox;
  bool verify_concavity = false;
};

/// One Moreau-approximation evaluation at x:
/// log_density_unnorm = g(prox) - |prox - x|^2 / (2 lam),
/// log_gradient = (prox - x) / lam.
struct MoreauEval {
  Vec prox_point;
  double log_density_unnorm = 0.0;
  Vec log_gradient;
};

Vec prox_soft_threshold(const Vec& x, double lam, double alpha);
Vec prox_quadratic(const Vec& x, double lam, double gamma);

/// Unique real root of 4*lam*u^3 + u - x = 0 (Newton with a bisection
/// safeguard on [0, x]); |result| <= |x| and sign(result) = sign(x).
double prox_quartic_1d(double x, double lam);

Vec prox_box_projection(const Vec& x, const Vec& lo, const Vec& hi);

struct TvProxResult {
  Image u;
  int iters = 0;
  double residual = 0.0;
  bool converged = true;
};

/// Approximate maximizer of -alpha*|grad u|_1 - |u - x|^2 / (2 lam) via the
/// fixed-point dual projection iteration (step 0.248). Stops at relative
/// dual change below params.tolerance or params.max_iters, whichever first;
/// hot_dual, when given, seeds and receives the dual variable.
TvProxResult prox_tv(const Image& x, double lam, double alpha,
                     const IterativeParams& params = {},
                     GradField* hot_dual = nullptr);

/// Singular value soft-thresholding: U * diag(max(s - tau, 0)) * V^T.
Image prox_nuclear_svt(const Image& x, double tau);

/// Composite target split g = g1 + g2 with g1 differentiable.
struct ForwardBackwardSplit {
  GradientFn grad_g1;
  ProxFn prox_g2;
};

/// Approximate prox of g1 + g2: prox^lam_{g2}(x + lam * grad g1(x)); exact
/// whenever g1 is affine.
Vec prox_forward_backward(const Vec& x, double lam,
                          const ForwardBackwardSplit& split,
                          ProxWorkspace* ws = nullptr);

/// Calls target.prox and maintains the workspace counters.
Vec eval_prox(const TargetDensity& target, const Vec& x, double lam,
              ProxWorkspace* ws);

MoreauEval moreau_eval(const TargetDensity& target, const Vec& x, double lam,
                       ProxWorkspace* ws = nullptr);

/// Midpoint-concavity spot check on pairs sampled uniformly from
/// [-radius, radius]^dim: g((a+b)/2) >= (g(a)+g(b))/2 - tol.
bool check_midpoint_concavity(const TargetDensity& target, RngStream& rng,
                              int n_pairs, double radius, double tol);

}  // namespace proxmcmc
