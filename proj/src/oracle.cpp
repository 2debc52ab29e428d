#include "proxmcmc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "proxmcmc/prox.hpp"
#include "proxmcmc/rng.hpp"

namespace proxmcmc::oracle {

double golden_section_max(const std::function<double(double)>& f, double a,
                          double b, double tol, int max_iters) {
  if (!(a < b)) throw ParameterError("golden_section_max: empty bracket");
  constexpr double inv_phi = 0.6180339887498948482;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iters && (b - a) > tol; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double prox_1d(const std::function<double(double)>& g, double x, double lam) {
  if (lam <= 0.0) throw ParameterError("prox_1d: lam must be positive");
  const double lo = std::min(0.0, x) - 1.0;
  const double hi = std::max(0.0, x) + 1.0;
  auto obj = [&](double u) { return g(u) - (u - x) * (u - x) / (2.0 * lam); };
  return golden_section_max(obj, lo, hi);
}

Vec coordinate_ascent_max(const std::function<double(const Vec&)>& f, Vec x0,
                          int sweeps, double radius, double line_tol) {
  Vec x = std::move(x0);
  for (int s = 0; s < sweeps; ++s) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto line = [&](double t) {
        Vec y = x;
        y[i] = t;
        return f(y);
      };
      x[i] = golden_section_max(line, x[i] - radius, x[i] + radius, line_tol);
    }
  }
  return x;
}

Image prox_tv_2x2_exact(const Image& x, double lam, double alpha) {
  if (x.rows != 2 || x.cols != 2) throw ParameterError("prox_tv_2x2_exact: need a 2x2 image");
  if (lam <= 0.0 || alpha < 0.0) throw ParameterError("prox_tv_2x2_exact: bad parameters");
  const double mu = lam * alpha;
  // pixels 0..3 = (0,0),(0,1),(1,0),(1,1); edges are the four forward diffs
  const int edge_a[4] = {0, 2, 0, 1};
  const int edge_b[4] = {1, 3, 2, 3};
  const double xs[4] = {x.at(0, 0), x.at(0, 1), x.at(1, 0), x.at(1, 1)};

  auto objective = [&](const double u[4]) {
    double q = 0.0;
    for (int i = 0; i < 4; ++i) q += (u[i] - xs[i]) * (u[i] - xs[i]);
    double tv = 0.0;
    for (int e = 0; e < 4; ++e) tv += std::fabs(u[edge_b[e]] - u[edge_a[e]]);
    return 0.5 * q + mu * tv;
  };

  double best[4] = {xs[0], xs[1], xs[2], xs[3]};
  double best_obj = objective(best);

  int sign[4];
  for (int code = 0; code < 81; ++code) {
    int c = code;
    for (int e = 0; e < 4; ++e) {
      sign[e] = c % 3 - 1;  // -1, 0, +1
      c /= 3;
    }
    // merge pixels joined by zero-sign edges
    int group[4] = {0, 1, 2, 3};
    auto find = [&](int i) {
      while (group[i] != i) i = group[i] = group[group[i]];
      return i;
    };
    for (int e = 0; e < 4; ++e)
      if (sign[e] == 0) group[find(edge_a[e])] = find(edge_b[e]);
    // linear term of the guessed pattern: mu * sum_e sign[e]*(u_b - u_a)
    double coef[4] = {0, 0, 0, 0};
    for (int e = 0; e < 4; ++e) {
      coef[edge_b[e]] += mu * sign[e];
      coef[edge_a[e]] -= mu * sign[e];
    }
    // per merged group: v = mean(x_G) - sum(coef_G)/|G|
    double u[4];
    for (int g = 0; g < 4; ++g) {
      if (find(g) != g) continue;
      double sx = 0.0, sc = 0.0;
      int cnt = 0;
      for (int i = 0; i < 4; ++i)
        if (find(i) == g) {
          sx += xs[i];
          sc += coef[i];
          ++cnt;
        }
      const double v = sx / cnt - sc / cnt;
      for (int i = 0; i < 4; ++i)
        if (find(i) == g) u[i] = v;
    }
    const double o = objective(u);
    if (o < best_obj) {
      best_obj = o;
      std::copy(u, u + 4, best);
    }
  }

  Image out(2, 2);
  out.at(0, 0) = best[0];
  out.at(0, 1) = best[1];
  out.at(1, 0) = best[2];
  out.at(1, 1) = best[3];
  return out;
}

std::array<double, 3> sym3_eigenvalues(const std::array<double, 6>& a) {
  const double a00 = a[0], a01 = a[1], a02 = a[2], a11 = a[3], a12 = a[4], a22 = a[5];
  const double q = (a00 + a11 + a22) / 3.0;
  const double b00 = a00 - q, b11 = a11 - q, b22 = a22 - q;
  const double p2 = b00 * b00 + b11 * b11 + b22 * b22 +
                    2.0 * (a01 * a01 + a02 * a02 + a12 * a12);
  if (p2 <= 1e-300) return {q, q, q};
  const double p = std::sqrt(p2 / 6.0);
  // r = det(B/p) / 2
  const double c00 = b00 / p, c11 = b11 / p, c22 = b22 / p;
  const double c01 = a01 / p, c02 = a02 / p, c12 = a12 / p;
  double r = (c00 * (c11 * c22 - c12 * c12) - c01 * (c01 * c22 - c12 * c02) +
              c02 * (c01 * c12 - c11 * c02)) /
             2.0;
  r = std::clamp(r, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  constexpr double two_pi_3 = 2.0943951023931954923;
  const double e0 = q + 2.0 * p * std::cos(phi);
  const double e2 = q + 2.0 * p * std::cos(phi + two_pi_3);
  const double e1 = 3.0 * q - e0 - e2;
  std::array<double, 3> e{e0, e1, e2};
  std::sort(e.begin(), e.end(), std::greater<>());
  return e;
}

namespace {

std::array<double, 6> gram_3x3(const Image& u) {
  std::array<double, 6> g{};
  auto cdot = [&](int ja, int jb) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += u.at(i, ja) * u.at(i, jb);
    return s;
  };
  g[0] = cdot(0, 0);
  g[1] = cdot(0, 1);
  g[2] = cdot(0, 2);
  g[3] = cdot(1, 1);
  g[4] = cdot(1, 2);
  g[5] = cdot(2, 2);
  return g;
}

}  // namespace

std::array<double, 3> singular_values_3x3(const Image& u) {
  if (u.rows != 3 || u.cols != 3)
    throw ParameterError("singular_values_3x3: need a 3x3 matrix");
  const std::array<double, 6> g = gram_3x3(u);
  const double tr = g[0] + g[3] + g[5];
  const double m2 = g[0] * g[3] - g[1] * g[1] + g[0] * g[5] - g[2] * g[2] +
                    g[3] * g[5] - g[4] * g[4];
  const double det_g = g[0] * (g[3] * g[5] - g[4] * g[4]) -
                       g[1] * (g[1] * g[5] - g[4] * g[2]) +
                       g[2] * (g[1] * g[4] - g[3] * g[2]);

  // The dominant Gram eigenvalue is well conditioned; take it from the trig
  // form and polish with safeguarded Newton steps on the characteristic
  // polynomial p(t) = -t^3 + tr t^2 - m2 t + det.
  double e1 = std::max(sym3_eigenvalues(g)[0], 0.0);
  for (int it = 0; it < 2; ++it) {
    const double p = ((-e1 + tr) * e1 - m2) * e1 + det_g;
    const double dp = (-3.0 * e1 + 2.0 * tr) * e1 - m2;
    if (dp == 0.0) break;
    const double step = p / dp;
    if (!(std::fabs(step) <= 1e-3 * (1.0 + e1))) break;
    e1 -= step;
  }

  // Deflate the other two squared values as roots of t^2 - S t + P with S
  // from the trace and P from the exact 3x3 determinant. Near-zero singular
  // values stay accurate this way; the acos form loses half the digits at
  // the repeated Gram root and the sqrt doubles the damage.
  const double det_u = u.at(0, 0) * (u.at(1, 1) * u.at(2, 2) - u.at(1, 2) * u.at(2, 1)) -
                       u.at(0, 1) * (u.at(1, 0) * u.at(2, 2) - u.at(1, 2) * u.at(2, 0)) +
                       u.at(0, 2) * (u.at(1, 0) * u.at(2, 1) - u.at(1, 1) * u.at(2, 0));
  const double sum2 = std::max(tr - e1, 0.0);
  const double prod2 = e1 > 0.0 ? std::max(det_u * det_u / e1, 0.0) : 0.0;
  const double disc = std::max(sum2 * sum2 - 4.0 * prod2, 0.0);
  const double t_hi = 0.5 * (sum2 + std::sqrt(disc));
  const double t_lo = t_hi > 0.0 ? std::min(prod2 / t_hi, t_hi) : 0.0;

  std::array<double, 3> s{std::sqrt(e1), std::sqrt(t_hi), std::sqrt(t_lo)};
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

double nuclear_prox_value_3x3(const Image& x, const Image& u, double lam,
                              double alpha) {
  if (lam <= 0.0) throw ParameterError("nuclear_prox_value_3x3: lam must be positive");
  const auto s = singular_values_3x3(u);
  double q = 0.0;
  for (int i = 0; i < 9; ++i) {
    const double d = u.data[i] - x.data[i];
    q += d * d;
  }
  return -alpha * (s[0] + s[1] + s[2]) - q / (2.0 * lam);
}

double nuclear_prox_optimal_value_3x3(const Image& x, double lam, double alpha) {
  if (lam <= 0.0 || alpha < 0.0)
    throw ParameterError("nuclear_prox_optimal_value_3x3: bad parameters");
  const auto s = singular_values_3x3(x);
  double v = 0.0;
  for (double si : s) {
    const double sp = std::max(si - alpha * lam, 0.0);
    v += -alpha * sp - (sp - si) * (sp - si) / (2.0 * lam);
  }
  return v;
}

double nuclear_norm_3x3_smoothed(const Image& u, double smooth_eps) {
  const auto e = sym3_eigenvalues(gram_3x3(u));
  double s = 0.0;
  for (double ev : e) s += std::sqrt(std::max(ev, 0.0) + smooth_eps * smooth_eps);
  return s;
}

Image prox_nuclear_3x3(const Image& x, double lam, double alpha,
                       double smooth_eps, int sweeps) {
  if (x.rows != 3 || x.cols != 3) throw ParameterError("prox_nuclear_3x3: need a 3x3 matrix");
  if (lam <= 0.0 || alpha < 0.0) throw ParameterError("prox_nuclear_3x3: bad parameters");
  auto obj = [&](const Vec& v) {
    Image u(3, 3);
    u.data = v;
    double q = 0.0;
    for (int i = 0; i < 9; ++i) {
      const double d = v[i] - x.data[i];
      q += d * d;
    }
    return -alpha * nuclear_norm_3x3_smoothed(u, smooth_eps) - q / (2.0 * lam);
  };
  Vec best = coordinate_ascent_max(obj, x.data, sweeps, 0.5);
  Image out(3, 3);
  out.data = std::move(best);
  return out;
}

std::vector<SuiteResult> run_prox_suites(int cases, std::uint64_t seed) {
  if (cases < 1) throw ParameterError("run_prox_suites: cases must be positive");
  std::vector<SuiteResult> results;
  RngStream rng(seed, 0);
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };

  {
    SuiteResult r{"soft_threshold", cases, 0.0, 1e-6, false};
    for (int c = 0; c < cases; ++c) {
      const double x = u(-3.0, 3.0), lam = u(0.05, 2.0), alpha = u(0.2, 2.0);
      const double got = prox_soft_threshold({x}, lam, alpha)[0];
      const double want = prox_1d([&](double t) { return -alpha * std::fabs(t); }, x, lam);
      r.max_deviation = std::max(r.max_deviation, std::fabs(got - want));
    }
    r.pass = r.max_deviation < r.tolerance;
    results.push_back(r);
  }
  {
    SuiteResult r{"quadratic", cases, 0.0, 1e-6, false};
    for (int c = 0; c < cases; ++c) {
      const double x = u(-3.0, 3.0), lam = u(0.05, 2.0), gamma = u(0.2, 2.0);
      const double got = prox_quadratic({x}, lam, gamma)[0];
      const double want = prox_1d([&](double t) { return -gamma * t * t; }, x, lam);
      r.max_deviation = std::max(r.max_deviation, std::fabs(got - want));
    }
    r.pass = r.max_deviation < r.tolerance;
    results.push_back(r);
  }
  {
    SuiteResult r{"quartic", cases, 0.0, 1e-6, false};
    for (int c = 0; c < cases; ++c) {
      const double x = u(-3.0, 3.0), lam = u(0.05, 2.0);
      const double got = prox_quartic_1d(x, lam);
      const double want = prox_1d([&](double t) { return -t * t * t * t; }, x, lam);
      r.max_deviation = std::max(r.max_deviation, std::fabs(got - want));
    }
    r.pass = r.max_deviation < r.tolerance;
    results.push_back(r);
  }
  {
    SuiteResult r{"box_projection", cases, 0.0, 1e-6, false};
    for (int c = 0; c < cases; ++c) {
      const double x = u(-3.0, 3.0), lam = u(0.05, 2.0);
      double lo = u(-2.0, 2.0), hi = u(-2.0, 2.0);
      if (lo > hi) std::swap(lo, hi);
      const double got = prox_box_projection({x}, {lo}, {hi})[0];
      // inside the support the objective is the plain quadratic, so the
      // search bracket is the box itself
      auto objf = [&](double t) { return -(t - x) * (t - x) / (2.0 * lam); };
      const double want = golden_section_max(objf, lo, hi);
      r.max_deviation = std::max(r.max_deviation, std::fabs(got - want));
    }
    r.pass = r.max_deviation < r.tolerance;
    results.push_back(r);
  }
  {
    SuiteResult r{"nuclear_svt", cases, 0.0, 1e-3, false};
    for (int c = 0; c < cases; ++c) {
      Image x(3, 3);
      for (auto& v : x.data) v = u(-1.0, 1.0);
      const double lam = u(0.1, 1.0), alpha = u(0.2, 1.5);
      const Image got = prox_nuclear_svt(x, alpha * lam);
      // value certificate: strong concavity of modulus 1/lam bounds the
      // distance to the maximizer by sqrt(2 lam * value gap)
      const double opt = nuclear_prox_optimal_value_3x3(x, lam, alpha);
      const double v_got = nuclear_prox_value_3x3(x, got, lam, alpha);
      double dev = std::sqrt(2.0 * lam * std::fabs(opt - v_got));
      // the coordinate-ascent witness is feasible, so its value must not
      // exceed the claimed optimum
      const Image witness = prox_nuclear_3x3(x, lam, alpha);
      const double v_wit = nuclear_prox_value_3x3(x, witness, lam, alpha);
      if (v_wit > opt + 1e-7) dev = std::max(dev, 1.0);
      r.max_deviation = std::max(r.max_deviation, dev);
    }
    r.pass = r.max_deviation < r.tolerance;
    results.push_back(r);
  }
  {
    SuiteResult r{"tv_2x2", cases, 0.0, 1e-4, false};
    for (int c = 0; c < cases; ++c) {
      Image x(2, 2);
      for (auto& v : x.data) v = u(-1.0, 1.0);
      const double lam = u(0.1, 1.0), alpha = u(0.1, 1.0);
      // The dual ascent gains accuracy like 1/k, so give it enough room to
      // land well below the suite tolerance even on ill-conditioned draws.
      IterativeParams tight;
      tight.max_iters = 50000;
      tight.tolerance = 1e-10;
      const Image got = prox_tv(x, lam, alpha, tight).u;
      const Image want = prox_tv_2x2_exact(x, lam, alpha);
      for (int i = 0; i < 4; ++i)
        r.max_deviation = std::max(r.max_deviation, std::fabs(got.data[i] - want.data[i]));
    }
    r.pass = r.max_deviation < r.tolerance;
    results.push_back(r);
  }
  return results;
}

}  // namespace proxmcmc::oracle
