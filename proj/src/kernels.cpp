#include "proxmcmc/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>

namespace proxmcmc::kernels {

namespace {
std::atomic<Exec> g_exec{Exec::Parallel};
using idx = std::ptrdiff_t;
}  // namespace

Exec default_exec() { return g_exec.load(std::memory_order_relaxed); }
void set_default_exec(Exec e) { g_exec.store(e, std::memory_order_relaxed); }

void soft_threshold(const double* x, double* z, std::size_t n, double t, Exec e) {
  if (e == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (idx i = 0; i < static_cast<idx>(n); ++i) {
      const double a = std::fabs(x[i]) - t;
      z[i] = a > 0.0 ? std::copysign(a, x[i]) : 0.0;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::fabs(x[i]) - t;
      z[i] = a > 0.0 ? std::copysign(a, x[i]) : 0.0;
    }
  }
}

void clamp_box(const double* x, const double* lo, const double* hi, double* z,
               std::size_t n, Exec e) {
  if (e == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (idx i = 0; i < static_cast<idx>(n); ++i)
      z[i] = std::min(std::max(x[i], lo[i]), hi[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      z[i] = std::min(std::max(x[i], lo[i]), hi[i]);
  }
}

void axpby(double a, const double* x, double b, const double* y, double* z,
           std::size_t n, Exec e) {
  if (e == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (idx i = 0; i < static_cast<idx>(n); ++i) z[i] = a * x[i] + b * y[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) z[i] = a * x[i] + b * y[i];
  }
}

void scale_shift(double a, const double* x, double b, double* z, std::size_t n,
                 Exec e) {
  if (e == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (idx i = 0; i < static_cast<idx>(n); ++i) z[i] = a * x[i] + b;
  } else {
    for (std::size_t i = 0; i < n; ++i) z[i] = a * x[i] + b;
  }
}

double max_abs(const double* x, std::size_t n, Exec e) {
  double m = 0.0;
  if (e == Exec::Parallel) {
#pragma omp parallel for reduction(max : m) schedule(static)
    for (idx i = 0; i < static_cast<idx>(n); ++i) m = std::max(m, std::fabs(x[i]));
  } else {
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  }
  return m;
}

double max_abs_diff(const double* a, const double* b, std::size_t n, Exec e) {
  double m = 0.0;
  if (e == Exec::Parallel) {
#pragma omp parallel for reduction(max : m) schedule(static)
    for (idx i = 0; i < static_cast<idx>(n); ++i)
      m = std::max(m, std::fabs(a[i] - b[i]));
  } else {
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  }
  return m;
}

void gradient_forward(const double* img, int rows, int cols, double* gh,
                      double* gv, Exec e) {
  if (e == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (idx i = 0; i < rows; ++i) {
      const double* r = img + i * cols;
      double* h = gh + i * cols;
      double* v = gv + i * cols;
      for (int j = 0; j + 1 < cols; ++j) h[j] = r[j + 1] - r[j];
      h[cols - 1] = 0.0;
      if (i + 1 < rows) {
        const double* rn = img + (i + 1) * cols;
        for (int j = 0; j < cols; ++j) v[j] = rn[j] - r[j];
      } else {
        for (int j = 0; j < cols; ++j) v[j] = 0.0;
      }
    }
  } else {
    for (int i = 0; i < rows; ++i) {
      const double* r = img + static_cast<std::size_t>(i) * cols;
      double* h = gh + static_cast<std::size_t>(i) * cols;
      double* v = gv + static_cast<std::size_t>(i) * cols;
      for (int j = 0; j + 1 < cols; ++j) h[j] = r[j + 1] - r[j];
      h[cols - 1] = 0.0;
      if (i + 1 < rows) {
        const double* rn = r + cols;
        for (int j = 0; j < cols; ++j) v[j] = rn[j] - r[j];
      } else {
        for (int j = 0; j < cols; ++j) v[j] = 0.0;
      }
    }
  }
}

void divergence(const double* gh, const double* gv, int rows, int cols,
                double* out, Exec e) {
  if (e == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (idx i = 0; i < rows; ++i) {
      const double* h = gh + i * cols;
      const double* v = gv + i * cols;
      const double* vp = i > 0 ? gv + (i - 1) * cols : nullptr;
      double* o = out + i * cols;
      for (int j = 0; j < cols; ++j) {
        double d = 0.0;
        if (j + 1 < cols) d += h[j];
        if (j > 0) d -= h[j - 1];
        if (i + 1 < rows) d += v[j];
        if (i > 0) d -= vp[j];
        o[j] = d;
      }
    }
  } else {
    for (int i = 0; i < rows; ++i) {
      const double* h = gh + static_cast<std::size_t>(i) * cols;
      const double* v = gv + static_cast<std::size_t>(i) * cols;
      const double* vp = i > 0 ? gv + static_cast<std::size_t>(i - 1) * cols : nullptr;
      double* o = out + static_cast<std::size_t>(i) * cols;
      for (int j = 0; j < cols; ++j) {
        double d = 0.0;
        if (j + 1 < cols) d += h[j];
        if (j > 0) d -= h[j - 1];
        if (i + 1 < rows) d += v[j];
        if (i > 0) d -= vp[j];
        o[j] = d;
      }
    }
  }
}

void tv_dual_update(const double* p, const double* w, double* pn, std::size_t n,
                    double tau, Exec e) {
  if (e == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (idx i = 0; i < static_cast<idx>(n); ++i)
      pn[i] = (p[i] + tau * w[i]) / (1.0 + tau * std::fabs(w[i]));
  } else {
    for (std::size_t i = 0; i < n; ++i)
      pn[i] = (p[i] + tau * w[i]) / (1.0 + tau * std::fabs(w[i]));
  }
}

void complex_mul_scaled(const double* a, const double* b, double* z,
                        std::size_t n_complex, double s, Exec e) {
  if (e == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (idx i = 0; i < static_cast<idx>(n_complex); ++i) {
      const double ar = a[2 * i], ai = a[2 * i + 1];
      const double br = b[2 * i], bi = b[2 * i + 1];
      z[2 * i] = s * (ar * br - ai * bi);
      z[2 * i + 1] = s * (ar * bi + ai * br);
    }
  } else {
    for (std::size_t i = 0; i < n_complex; ++i) {
      const double ar = a[2 * i], ai = a[2 * i + 1];
      const double br = b[2 * i], bi = b[2 * i + 1];
      z[2 * i] = s * (ar * br - ai * bi);
      z[2 * i + 1] = s * (ar * bi + ai * br);
    }
  }
}

void complex_mul_conj_scaled(const double* a, const double* b, double* z,
                             std::size_t n_complex, double s, Exec e) {
  if (e == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (idx i = 0; i < static_cast<idx>(n_complex); ++i) {
      const double ar = a[2 * i], ai = a[2 * i + 1];
      const double br = b[2 * i], bi = -b[2 * i + 1];
      z[2 * i] = s * (ar * br - ai * bi);
      z[2 * i + 1] = s * (ar * bi + ai * br);
    }
  } else {
    for (std::size_t i = 0; i < n_complex; ++i) {
      const double ar = a[2 * i], ai = a[2 * i + 1];
      const double br = b[2 * i], bi = -b[2 * i + 1];
      z[2 * i] = s * (ar * br - ai * bi);
      z[2 * i + 1] = s * (ar * bi + ai * br);
    }
  }
}

}  // namespace proxmcmc::kernels
