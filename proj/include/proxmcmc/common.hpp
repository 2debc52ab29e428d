#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace proxmcmc {

using Vec = std::vector<double>;

/// Invalid argument or configuration value.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Runtime numeric failure (solver non-convergence, LAPACK error, ...).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File or stream problem.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense row-major image / matrix of doubles.
struct Image {
  int rows = 0;
  int cols = 0;
  Vec data;

  Image() = default;
  Image(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {
    if (r < 0 || c < 0) throw ParameterError("Image: negative dimensions");
  }

  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
  std::size_t size() const { return data.size(); }
};

/// Gradient field of an image stored as two stacked planes, horizontal
/// differences first, then vertical, each rows x cols.
struct GradField {
  int rows = 0;
  int cols = 0;
  Vec data;  // size 2 * rows * cols

  GradField() = default;
  GradField(int r, int c) : rows(r), cols(c), data(2 * static_cast<std::size_t>(r) * c, 0.0) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(rows) * cols; }
  double* h() { return data.data(); }
  const double* h() const { return data.data(); }
  double* v() { return data.data() + plane_size(); }
  const double* v() const { return data.data() + plane_size(); }
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double sq_norm(const Vec& a) { return dot(a, a); }

inline double sq_dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline bool all_finite(const Vec& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

inline Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

}  // namespace proxmcmc
