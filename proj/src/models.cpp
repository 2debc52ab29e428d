#include "proxmcmc/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "proxmcmc/kernels.hpp"

namespace proxmcmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Image to_image(int rows, int cols, Vec v) {
  Image img(rows, cols);
  if (v.size() != img.size()) throw ParameterError("image data size mismatch");
  img.data = std::move(v);
  return img;
}

double tv_seminorm(const Image& x) {
  const GradField g = discrete_gradient(x);
  double s = 0.0;
  for (double v : g.data) s += std::abs(v);
  return s;
}

void validate_benchmark(const Benchmark1D& spec, int dim) {
  if (dim < 1) throw ParameterError("benchmark_target: dim must be positive");
  if (spec.kind == Benchmark1D::Kind::UniformBox) {
    if (!(spec.box_halfwidth > 0.0))
      throw ParameterError("benchmark_target: box_halfwidth must be positive");
  } else if (!(spec.gamma > 0.0)) {
    throw ParameterError("benchmark_target: gamma must be positive");
  }
}

}  // namespace

Benchmark1D::Kind benchmark_kind(const std::string& name) {
  if (name == "laplace") return Benchmark1D::Kind::Laplace;
  if (name == "gaussian") return Benchmark1D::Kind::Gaussian;
  if (name == "quartic") return Benchmark1D::Kind::Quartic;
  if (name == "uniform") return Benchmark1D::Kind::UniformBox;
  throw ParameterError("unknown benchmark kind: " + name);
}

std::string benchmark_kind_name(Benchmark1D::Kind kind) {
  switch (kind) {
    case Benchmark1D::Kind::Laplace: return "laplace";
    case Benchmark1D::Kind::Gaussian: return "gaussian";
    case Benchmark1D::Kind::Quartic: return "quartic";
    case Benchmark1D::Kind::UniformBox: return "uniform";
  }
  throw ParameterError("unknown benchmark kind");
}

TargetDensity benchmark_target(const Benchmark1D& spec, int dim) {
  validate_benchmark(spec, dim);
  const double gamma = spec.gamma;
  const double w = spec.box_halfwidth;
  const Benchmark1D::Kind kind = spec.kind;

  auto g1 = [kind, gamma, w](double x) -> double {
    switch (kind) {
      case Benchmark1D::Kind::Laplace: return -gamma * std::abs(x);
      case Benchmark1D::Kind::Gaussian: return -gamma * x * x;
      case Benchmark1D::Kind::Quartic: return -gamma * x * x * x * x;
      case Benchmark1D::Kind::UniformBox: return std::abs(x) <= w ? 0.0 : -kInf;
    }
    return -kInf;
  };
  auto grad1 = [kind, gamma, w](double x) -> double {
    switch (kind) {
      case Benchmark1D::Kind::Laplace:
        return x == 0.0 ? kNan : -gamma * (x > 0.0 ? 1.0 : -1.0);
      case Benchmark1D::Kind::Gaussian: return -2.0 * gamma * x;
      case Benchmark1D::Kind::Quartic: return -4.0 * gamma * x * x * x;
      case Benchmark1D::Kind::UniformBox: return std::abs(x) < w ? 0.0 : kNan;
    }
    return kNan;
  };

  TargetDensity t;
  t.dim = dim;
  t.verify_concavity = true;
  t.log_density = [g1](const Vec& x) {
    double s = 0.0;
    for (double xi : x) s += g1(xi);
    return s;
  };
  t.gradient = [grad1](const Vec& x) {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = grad1(x[i]);
    return g;
  };
  if (dim == 1) {
    t.curvature_1d = [kind, gamma](double x) -> double {
      switch (kind) {
        case Benchmark1D::Kind::Laplace: return 0.0;
        case Benchmark1D::Kind::Gaussian: return 2.0 * gamma;
        case Benchmark1D::Kind::Quartic: return 12.0 * gamma * x * x;
        case Benchmark1D::Kind::UniformBox: return 0.0;
      }
      return 0.0;
    };
  }

  t.strategy.kind = ProxStrategy::Kind::ClosedForm;
  switch (kind) {
    case Benchmark1D::Kind::Laplace:
      t.strategy.name = "soft_threshold";
      t.prox = [gamma](const Vec& x, double lam, ProxWorkspace*) {
        return prox_soft_threshold(x, lam, gamma);
      };
      break;
    case Benchmark1D::Kind::Gaussian:
      t.strategy.name = "quadratic_shrinkage";
      t.prox = [gamma](const Vec& x, double lam, ProxWorkspace*) {
        return prox_quadratic(x, lam, gamma);
      };
      break;
    case Benchmark1D::Kind::Quartic:
      t.strategy.name = "quartic_root";
      t.prox = [gamma](const Vec& x, double lam, ProxWorkspace*) {
        Vec z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
          z[i] = prox_quartic_1d(x[i], gamma * lam);
        return z;
      };
      break;
    case Benchmark1D::Kind::UniformBox:
      t.strategy.name = "box_projection";
      t.prox = [w, dim](const Vec& x, double, ProxWorkspace*) {
        const Vec lo(static_cast<std::size_t>(dim), -w);
        const Vec hi(static_cast<std::size_t>(dim), w);
        return prox_box_projection(x, lo, hi);
      };
      break;
  }
  return t;
}

TargetDensity deconv_target(const DeconvModel& model, const IterativeParams& tv_inner) {
  if (!model.blur) throw ParameterError("deconv_target: missing blur operator");
  if (model.rows < 2 || model.cols < 2)
    throw ParameterError("deconv_target: image must be at least 2x2");
  if (model.blur->rows() != model.rows || model.blur->cols() != model.cols)
    throw ParameterError("deconv_target: blur operator shape mismatch");
  const std::size_t n = static_cast<std::size_t>(model.rows) * model.cols;
  if (model.y.size() != n) throw ParameterError("deconv_target: observation size mismatch");
  if (!(model.sigma2 > 0.0)) throw ParameterError("deconv_target: sigma2 must be positive");
  if (!(model.alpha > 0.0)) throw ParameterError("deconv_target: alpha must be positive");

  {
    const Image ones(model.rows, model.cols, 1.0);
    const Image h1 = model.blur->forward(ones);
    for (double v : h1.data)
      if (std::abs(v - 1.0) > 1e-8)
        throw ParameterError("deconv_target: blur kernel must have unit mass");
  }

  const auto blur = model.blur;
  const Vec y = model.y;
  const int rows = model.rows;
  const int cols = model.cols;
  const double sigma2 = model.sigma2;
  const double alpha = model.alpha;

  auto grad_g1 = [blur, y, rows, cols, sigma2](const Vec& x) {
    const Image hx = blur->forward(to_image(rows, cols, x));
    Vec r(y.size());
    kernels::axpby(1.0, y.data(), -1.0, hx.data.data(), r.data(), y.size());
    Image g = blur->adjoint(to_image(rows, cols, std::move(r)));
    kernels::scale_shift(1.0 / sigma2, g.data.data(), 0.0, g.data.data(), g.size());
    return std::move(g.data);
  };

  TargetDensity t;
  t.dim = static_cast<int>(n);
  t.log_density = [blur, y, rows, cols, sigma2, alpha](const Vec& x) {
    const Image xi = to_image(rows, cols, x);
    const Image hx = blur->forward(xi);
    return -sq_dist(y, hx.data) / (2.0 * sigma2) - alpha * tv_seminorm(xi);
  };
  t.gradient = grad_g1;
  t.prox = [grad_g1, rows, cols, alpha, tv_inner](const Vec& x, double lam,
                                                  ProxWorkspace* ws) {
    const Vec g = grad_g1(x);
    Vec step(x.size());
    kernels::axpby(1.0, x.data(), lam, g.data(), step.data(), x.size());
    GradField* hot = ws != nullptr ? &ws->tv_dual : nullptr;
    TvProxResult r = prox_tv(to_image(rows, cols, std::move(step)), lam, alpha,
                             tv_inner, hot);
    if (ws != nullptr) {
      ws->has_tv_dual = true;
      ws->last_iters = r.iters;
      ws->last_residual = r.residual;
      ws->last_converged = r.converged;
    }
    return std::move(r.u.data);
  };
  t.strategy.kind = ProxStrategy::Kind::ForwardBackwardSplit;
  t.strategy.name = "tv_forward_backward";
  t.strategy.inner = tv_inner;
  return t;
}

TargetDensity lowrank_target(const LowRankModel& model) {
  if (model.rows < 1 || model.cols < 1)
    throw ParameterError("lowrank_target: dimensions must be positive");
  const std::size_t n = static_cast<std::size_t>(model.rows) * model.cols;
  if (model.y.size() != n) throw ParameterError("lowrank_target: observation size mismatch");
  if (!(model.sigma2 > 0.0)) throw ParameterError("lowrank_target: sigma2 must be positive");
  if (!(model.alpha > 0.0)) throw ParameterError("lowrank_target: alpha must be positive");

  const Vec y = model.y;
  const int rows = model.rows;
  const int cols = model.cols;
  const double sigma2 = model.sigma2;
  const double alpha = model.alpha;

  TargetDensity t;
  t.dim = static_cast<int>(n);
  t.log_density = [y, rows, cols, sigma2, alpha](const Vec& x) {
    const Vec s = singular_values(to_image(rows, cols, x));
    double nuclear = 0.0;
    for (double v : s) nuclear += v;
    return -sq_dist(y, x) / (2.0 * sigma2) - alpha * nuclear;
  };
  t.prox = [y, rows, cols, sigma2, alpha](const Vec& x, double lam, ProxWorkspace*) {
    Vec blend(x.size());
    const double denom = lam + sigma2;
    kernels::axpby(lam / denom, y.data(), sigma2 / denom, x.data(), blend.data(),
                   x.size());
    const double tau = alpha * lam * sigma2 / denom;
    Image p = prox_nuclear_svt(to_image(rows, cols, std::move(blend)), tau);
    return std::move(p.data);
  };
  t.strategy.kind = ProxStrategy::Kind::ClosedForm;
  t.strategy.name = "nuclear_svt_blend";
  return t;
}

MapResult map_lowrank(const LowRankModel& model) {
  const TargetDensity t = lowrank_target(model);
  Image x = prox_nuclear_svt(to_image(model.rows, model.cols, model.y),
                             model.alpha * model.sigma2);
  MapResult r;
  r.objective = t.log_density(x.data);
  r.x = std::move(x.data);
  r.iters = 1;
  return r;
}

MapResult map_deconv(const DeconvModel& model, const IterativeParams& tv_inner,
                     const MapParams& params) {
  if (params.max_iters < 1) throw ParameterError("map_deconv: max_iters must be positive");
  const TargetDensity t = deconv_target(model, tv_inner);
  const double hmax = model.blur->max_abs_transfer();
  const double step = 0.9 * model.sigma2 / (hmax * hmax);

  IterativeParams tight = tv_inner;
  tight.max_iters = std::max(tv_inner.max_iters * 10, 500);
  tight.tolerance = tv_inner.tolerance * 1e-3;
  const TargetDensity t_tight = deconv_target(model, tight);

  MapResult r;
  r.x = model.y;
  r.objective = t.log_density(r.x);
  ProxWorkspace ws;
  for (int it = 1; it <= params.max_iters; ++it) {
    Vec next = eval_prox(t, r.x, step, &ws);
    double obj_next = t.log_density(next);
    if (!(obj_next >= r.objective)) {
      next = eval_prox(t_tight, r.x, step, &ws);
      obj_next = t.log_density(next);
      if (!(obj_next >= r.objective)) break;
    }
    const double rel = std::abs(obj_next - r.objective) / std::max(1.0, std::abs(obj_next));
    r.x = std::move(next);
    r.objective = obj_next;
    r.iters = it;
    if (rel < params.rel_tol) return r;
  }
  r.hit_cap = r.iters == params.max_iters;
  return r;
}

std::vector<Vec> posterior_predictive_replicas(const std::vector<Vec>& samples,
                                               const std::vector<int>& indices,
                                               double sigma2, RngStream& rng) {
  if (!(sigma2 >= 0.0))
    throw ParameterError("posterior_predictive_replicas: sigma2 must be nonnegative");
  const double sigma = std::sqrt(sigma2);
  std::vector<Vec> replicas;
  replicas.reserve(indices.size());
  for (int idx : indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= samples.size())
      throw ParameterError("posterior_predictive_replicas: index out of range");
    Vec rep = samples[static_cast<std::size_t>(idx)];
    for (double& v : rep) v += sigma * rng.normal();
    replicas.push_back(std::move(rep));
  }
  return replicas;
}

Observation synthesize_observation(const Vec& truth,
                                   const CircularConvolution* blur,
                                   const NoiseSpec& noise, RngStream& rng) {
  if (truth.empty()) throw ParameterError("synthesize_observation: empty truth");
  Vec clean = truth;
  if (blur != nullptr) {
    const std::size_t n = static_cast<std::size_t>(blur->rows()) * blur->cols();
    if (truth.size() != n)
      throw ParameterError("synthesize_observation: truth does not match blur shape");
    clean = blur->forward(to_image(blur->rows(), blur->cols(), truth)).data;
  }

  Observation obs;
  const double n = static_cast<double>(clean.size());
  switch (noise.kind) {
    case NoiseSpec::Kind::Sigma2:
      if (!(noise.value >= 0.0))
        throw ParameterError("synthesize_observation: sigma2 must be nonnegative");
      obs.sigma2 = noise.value;
      break;
    case NoiseSpec::Kind::BsnrDb: {
      double mean = 0.0;
      for (double v : clean) mean += v;
      mean /= n;
      double var = 0.0;
      for (double v : clean) var += (v - mean) * (v - mean);
      var /= n;
      if (!(var > 0.0))
        throw ParameterError("synthesize_observation: BSNR needs a non-constant blurred truth");
      obs.sigma2 = var * std::pow(10.0, -noise.value / 10.0);
      break;
    }
    case NoiseSpec::Kind::SnrDb:
      if (!(sq_norm(clean) > 0.0))
        throw ParameterError("synthesize_observation: SNR needs a nonzero truth");
      obs.sigma2 = sq_norm(clean) / (n * std::pow(10.0, noise.value / 10.0));
      break;
  }

  const double sigma = std::sqrt(obs.sigma2);
  obs.y = std::move(clean);
  for (double& v : obs.y) v += sigma * rng.normal();
  return obs;
}

Image uniform_kernel(int rows, int cols) {
  if (rows < 1 || cols < 1)
    throw ParameterError("uniform_kernel: dimensions must be positive");
  return Image(rows, cols, 1.0 / (static_cast<double>(rows) * cols));
}

Image checkerboard_image(int n) {
  if (n < 2) throw ParameterError("checkerboard_image: n must be at least 2");
  Image img(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if ((i / 8 + j / 8) % 2 == 1) img.at(i, j) = j < n / 2 ? 1.0 : 0.7;
  return img;
}

Image phantom_image(int n) {
  if (n < 2) throw ParameterError("phantom_image: n must be at least 2");
  Image img(n, n, 0.2);
  const double s = 64.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = s * i;
      const double v = s * j;
      if (u >= 8 && u < 28 && v >= 10 && v < 30) img.at(i, j) = 0.8;
      const double du = u - 44.0;
      const double dv = v - 20.0;
      if (du * du + dv * dv <= 144.0) img.at(i, j) = 0.55;
      if (u >= 14 && u < 50 && v >= 44 && v < 52) img.at(i, j) = 1.0;
      if (u >= 54 && u < 60 && v >= 6 && v < 58) img.at(i, j) = 0.05;
    }
  }
  return img;
}

}  // namespace proxmcmc
