#pragma once

#include <memory>
#include <string>
#include <vector>

#include "proxmcmc/common.hpp"
#include "proxmcmc/linalg.hpp"
#include "proxmcmc/prox.hpp"
#include "proxmcmc/rng.hpp"

namespace proxmcmc {

/// Scalar benchmark densities pi(x) proportional to exp(g(x)) with
/// g = -gamma|x|, -gamma x^2, -gamma x^4, or the indicator of [-w, w].
struct Benchmark1D {
  enum class Kind { Laplace, Gaussian, Quartic, UniformBox };
  Kind kind = Kind::Gaussian;
  double gamma = 1.0;
  double box_halfwidth = 1.0;  // UniformBox support half-width w
};

/// Parses "laplace" | "gaussian" | "quartic" | "uniform".
Benchmark1D::Kind benchmark_kind(const std::string& name);
std::string benchmark_kind_name(Benchmark1D::Kind kind);

/// The scalar benchmark (dim = 1) or its iid product extension: log-density
/// sums coordinatewise and the prox acts componentwise. The gradient is
/// non-finite where log pi is not differentiable (Laplace at 0, the box
/// boundary and exterior); curvature_1d is provided for dim = 1.
TargetDensity benchmark_target(const Benchmark1D& spec, int dim = 1);

/// Observation model y = Hx + w for circular blur H, iid Gaussian noise of
/// variance sigma2 and an anisotropic TV prior with weight alpha.
struct DeconvModel {
  std::shared_ptr<const CircularConvolution> blur;
  Vec y;
  int rows = 0;
  int cols = 0;
  double sigma2 = 1.0;
  double alpha = 1.0;
};

/// log pi(x|y) = -|y - Hx|^2/(2 sigma2) - alpha |grad_d x|_1 up to a
/// constant. The gradient field covers the smooth data term only,
/// H^T(y - Hx)/sigma2; the prox is the forward-backward approximation
/// prox_tv(x + lam * grad g1(x)) with a hot-started dual variable.
TargetDensity deconv_target(const DeconvModel& model,
                            const IterativeParams& tv_inner = {});

/// Observation model y = x + w with a nuclear-norm prior.
struct LowRankModel {
  Vec y;
  int rows = 0;
  int cols = 0;
  double sigma2 = 0.01;
  double alpha = 115.0;
};

/// log pi(x|y) = -|y - x|^2/(2 sigma2) - alpha |x|_*. The prox is exact:
/// SVT[(lam y + sigma2 x)/(lam + sigma2), alpha lam sigma2/(lam + sigma2)].
TargetDensity lowrank_target(const LowRankModel& model);

struct MapResult {
  Vec x;
  double objective = 0.0;  // log-density at x (same additive constant as the target)
  int iters = 0;
  bool hit_cap = false;
};

/// Exact one-shot MAP of the low-rank posterior: SVT(y, alpha * sigma2).
MapResult map_lowrank(const LowRankModel& model);

struct MapParams {
  double rel_tol = 1e-8;
  int max_iters = 300;
};

/// Forward-backward ascent on the deconvolution log-posterior from x = y
/// with step 0.9 sigma2 / max|transfer|^2. The objective never decreases: a
/// non-improving step is retried with a tighter inner TV solve, and the
/// ascent stops at the previous iterate if that still fails.
MapResult map_deconv(const DeconvModel& model,
                     const IterativeParams& tv_inner = {},
                     const MapParams& params = {});

/// Posterior predictive draws y_rep = samples[idx] + sigma * z, one per
/// selected stored-sample index (0-based).
std::vector<Vec> posterior_predictive_replicas(const std::vector<Vec>& samples,
                                               const std::vector<int>& indices,
                                               double sigma2, RngStream& rng);

struct NoiseSpec {
  enum class Kind { Sigma2, BsnrDb, SnrDb };
  Kind kind = Kind::Sigma2;
  double value = 0.01;
};

struct Observation {
  Vec y;
  double sigma2 = 0.0;
};

/// y = Hx0 + w (x0 + w when blur is null). sigma2 is taken directly or
/// back-solved from BSNR = 10 log10(var(Hx0)/sigma2) or
/// SNR = 10 log10(|x0|^2/(n sigma2)), n the entry count.
Observation synthesize_observation(const Vec& truth,
                                   const CircularConvolution* blur,
                                   const NoiseSpec& noise, RngStream& rng);

/// Constant mass-1 blur kernel.
Image uniform_kernel(int rows, int cols);

/// Rank-2 checkerboard test image with 8-pixel tiles and three grey levels:
/// bright tiles are 1.0 in the left half and 0.7 in the right half.
Image checkerboard_image(int n = 64);

/// Piecewise-constant scene (rectangle, disk, bar, strip on a flat
/// background); shapes scale with n from the reference 64x64 layout.
Image phantom_image(int n = 64);

}  // namespace proxmcmc
