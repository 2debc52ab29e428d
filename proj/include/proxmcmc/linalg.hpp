#pragma once

#include <memory>

#include "proxmcmc/common.hpp"
#include "proxmcmc/kernels.hpp"

namespace proxmcmc {

/// Thin SVD x = U * diag(s) * V^T with s nonincreasing and nonnegative.
/// U is rows x k, V is cols x k, k = min(rows, cols).
struct SvdResult {
  Image U;
  Vec s;
  Image V;
};

SvdResult svd(const Image& x);
Vec singular_values(const Image& x);

GradField discrete_gradient(const Image& x);
Image divergence(const GradField& p);

/// Circular (periodic) 2-D convolution realized as a frequency-domain
/// transfer function. The kernel is centered so that entry
/// (kr/2, kc/2) multiplies the current pixel. Plans use FFTW_ESTIMATE, so
/// the chosen algorithm, and therefore the bit-level output, is stable from
/// run to run. forward/adjoint are safe to call concurrently.
class CircularConvolution {
 public:
  CircularConvolution(const Image& kernel, int rows, int cols);
  ~CircularConvolution();
  CircularConvolution(const CircularConvolution&) = delete;
  CircularConvolution& operator=(const CircularConvolution&) = delete;

  Image forward(const Image& x) const;
  Image adjoint(const Image& y) const;

  /// Largest transfer-function magnitude; bounds the Lipschitz constant of
  /// the data-fit gradient.
  double max_abs_transfer() const;

  int rows() const;
  int cols() const;

  struct Impl;  // opaque; holds plans and the transfer function

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace proxmcmc
