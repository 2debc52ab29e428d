#include "proxmcmc/prox.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "proxmcmc/kernels.hpp"

namespace proxmcmc {

Vec prox_soft_threshold(const Vec& x, double lam, double alpha) {
  if (!(lam > 0.0)) throw ParameterError("prox_soft_threshold: lam must be positive");
  if (!(alpha >= 0.0)) throw ParameterError("prox_soft_threshold: alpha must be nonnegative");
  Vec z(x.size());
  kernels::soft_threshold(x.data(), z.data(), x.size(), lam * alpha);
  return z;
}

Vec prox_quadratic(const Vec& x, double lam, double gamma) {
  if (!(lam > 0.0)) throw ParameterError("prox_quadratic: lam must be positive");
  if (!(gamma >= 0.0)) throw ParameterError("prox_quadratic: gamma must be nonnegative");
  Vec z(x.size());
  kernels::scale_shift(1.0 / (1.0 + 2.0 * gamma * lam), x.data(), 0.0, z.data(), x.size());
  return z;
}

double prox_quartic_1d(double x, double lam) {
  if (!(lam > 0.0)) throw ParameterError("prox_quartic_1d: lam must be positive");
  if (x == 0.0) return 0.0;
  // The root of f(u) = 4*lam*u^3 + u - x lies strictly between 0 and x and
  // f is increasing, so Newton steps can fall back on bisection of [lo, hi].
  double lo = std::min(0.0, x);
  double hi = std::max(0.0, x);
  double u = x / (1.0 + 4.0 * lam * x * x);
  const double tol = 1e-12 * std::max(1.0, std::abs(x));
  for (int it = 0; it < 100; ++it) {
    const double f = 4.0 * lam * u * u * u + u - x;
    if (std::abs(f) < tol) break;
    if (f > 0.0) {
      hi = u;
    } else {
      lo = u;
    }
    const double fprime = 12.0 * lam * u * u + 1.0;
    double next = u - f / fprime;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    u = next;
  }
  return u;
}

Vec prox_box_projection(const Vec& x, const Vec& lo, const Vec& hi) {
  if (lo.size() != x.size() || hi.size() != x.size())
    throw ParameterError("prox_box_projection: bound sizes must match x");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(lo[i] <= hi[i]))
      throw ParameterError("prox_box_projection: requires lo <= hi componentwise");
  Vec z(x.size());
  kernels::clamp_box(x.data(), lo.data(), hi.data(), z.data(), x.size());
  return z;
}

TvProxResult prox_tv(const Image& x, double lam, double alpha,
                     const IterativeParams& params, GradField* hot_dual) {
  if (!(lam > 0.0)) throw ParameterError("prox_tv: lam must be positive");
  if (!(alpha >= 0.0)) throw ParameterError("prox_tv: alpha must be nonnegative");
  if (params.max_iters < 1) throw ParameterError("prox_tv: max_iters must be positive");
  if (!(params.tolerance >= 0.0)) throw ParameterError("prox_tv: tolerance must be nonnegative");

  TvProxResult result;
  result.u = x;
  const double mu = lam * alpha;
  if (mu == 0.0) return result;
  if (x.rows < 2 || x.cols < 2)
    throw ParameterError("prox_tv: image must be at least 2x2");

  const std::size_t n = x.size();
  GradField p(x.rows, x.cols);
  if (hot_dual != nullptr && params.hot_start && hot_dual->rows == x.rows &&
      hot_dual->cols == x.cols) {
    p = *hot_dual;
  }
  GradField p_next(x.rows, x.cols);
  GradField w(x.rows, x.cols);
  Vec div_p(n);
  Vec u_work(n);

  const double tau = 0.248;
  result.converged = false;
  for (int it = 1; it <= params.max_iters; ++it) {
    kernels::divergence(p.h(), p.v(), x.rows, x.cols, div_p.data());
    kernels::axpby(1.0, div_p.data(), 1.0 / mu, x.data.data(), u_work.data(), n);
    kernels::gradient_forward(u_work.data(), x.rows, x.cols, w.h(), w.v());
    kernels::tv_dual_update(p.data.data(), w.data.data(), p_next.data.data(),
                            p.data.size(), tau);
    const double change = kernels::max_abs_diff(p.data.data(), p_next.data.data(),
                                                p.data.size());
    const double scale = std::max(1.0, kernels::max_abs(p_next.data.data(),
                                                        p_next.data.size()));
    std::swap(p, p_next);
    result.iters = it;
    result.residual = change / scale;
    if (result.residual < params.tolerance) {
      result.converged = true;
      break;
    }
  }

  kernels::divergence(p.h(), p.v(), x.rows, x.cols, div_p.data());
  kernels::axpby(mu, div_p.data(), 1.0, x.data.data(), result.u.data.data(), n);
  if (hot_dual != nullptr) *hot_dual = p;
  return result;
}

Image prox_nuclear_svt(const Image& x, double tau) {
  if (!(tau >= 0.0)) throw ParameterError("prox_nuclear_svt: tau must be nonnegative");
  SvdResult svd_x = svd(x);
  const int m = x.rows;
  const int n = x.cols;
  const int k = static_cast<int>(svd_x.s.size());
  Image out(m, n);
  for (int l = 0; l < k; ++l) {
    const double s = svd_x.s[static_cast<std::size_t>(l)] - tau;
    if (s <= 0.0) continue;
    for (int i = 0; i < m; ++i) {
      const double us = svd_x.U.at(i, l) * s;
      for (int j = 0; j < n; ++j) out.at(i, j) += us * svd_x.V.at(j, l);
    }
  }
  return out;
}

Vec prox_forward_backward(const Vec& x, double lam,
                          const ForwardBackwardSplit& split, ProxWorkspace* ws) {
  if (!(lam > 0.0)) throw ParameterError("prox_forward_backward: lam must be positive");
  if (!split.grad_g1 || !split.prox_g2)
    throw ParameterError("prox_forward_backward: split is incomplete");
  const Vec grad = split.grad_g1(x);
  if (grad.size() != x.size())
    throw ParameterError("prox_forward_backward: gradient size mismatch");
  Vec y(x.size());
  kernels::axpby(1.0, x.data(), lam, grad.data(), y.data(), x.size());
  return split.prox_g2(y, lam, ws);
}

Vec eval_prox(const TargetDensity& target, const Vec& x, double lam,
              ProxWorkspace* ws) {
  if (!target.prox) throw ParameterError("eval_prox: target has no proximity mapping");
  if (!(lam > 0.0)) throw ParameterError("eval_prox: lam must be positive");
  if (static_cast<int>(x.size()) != target.dim)
    throw ParameterError("eval_prox: point dimension mismatch");
  if (ws != nullptr) {
    ws->last_iters = 0;
    ws->last_residual = 0.0;
    ws->last_converged = true;
  }
  Vec p = target.prox(x, lam, ws);
  if (ws != nullptr) {
    ++ws->n_evals;
    if (!ws->last_converged) ++ws->n_nonconverged;
  }
  return p;
}

MoreauEval moreau_eval(const TargetDensity& target, const Vec& x, double lam,
                       ProxWorkspace* ws) {
  MoreauEval out;
  out.prox_point = eval_prox(target, x, lam, ws);
  const double gp = target.log_density(out.prox_point);
  out.log_density_unnorm = gp - sq_dist(out.prox_point, x) / (2.0 * lam);
  out.log_gradient.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out.log_gradient[i] = (out.prox_point[i] - x[i]) / lam;
  return out;
}

bool check_midpoint_concavity(const TargetDensity& target, RngStream& rng,
                              int n_pairs, double radius, double tol) {
  if (!target.log_density) throw ParameterError("check_midpoint_concavity: missing log density");
  const int d = target.dim;
  Vec a(static_cast<std::size_t>(d));
  Vec b(static_cast<std::size_t>(d));
  Vec mid(static_cast<std::size_t>(d));
  for (int pair = 0; pair < n_pairs; ++pair) {
    for (int i = 0; i < d; ++i) {
      a[static_cast<std::size_t>(i)] = radius * (2.0 * rng.uniform() - 1.0);
      b[static_cast<std::size_t>(i)] = radius * (2.0 * rng.uniform() - 1.0);
      mid[static_cast<std::size_t>(i)] =
          0.5 * (a[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(i)]);
    }
    const double ga = target.log_density(a);
    const double gb = target.log_density(b);
    if (!std::isfinite(ga) || !std::isfinite(gb)) continue;
    const double gm = target.log_density(mid);
    if (!(gm >= 0.5 * (ga + gb) - tol)) return false;
  }
  return true;
}

}  // namespace proxmcmc
