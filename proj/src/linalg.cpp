#include "proxmcmc/linalg.hpp"

#include <fftw3.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>

namespace proxmcmc {

namespace {

void check_finite(const Image& x, const char* who) {
  for (double v : x.data)
    if (!std::isfinite(v)) throw ParameterError(std::string(who) + ": non-finite entry");
}

}  // namespace

// Both drivers run through the column-major interface on the transposed
// problem: the row-major m x n buffer of A reads as the column-major n x m
// matrix A^T, and A^T = Vb S Ub^T gives U = Vb, V = Ub.

SvdResult svd(const Image& x) {
  check_finite(x, "svd");
  const int m = x.rows, n = x.cols;
  if (m == 0 || n == 0) throw ParameterError("svd: empty matrix");
  const int k = std::min(m, n);

  Image a = x;
  SvdResult r{Image(m, k), Vec(k), Image(n, k)};
  Vec ub(static_cast<std::size_t>(n) * k);   // n x k, column-major
  Vec vbt(static_cast<std::size_t>(k) * m);  // k x m, column-major

  int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', n, m, a.data.data(), n,
                            r.s.data(), ub.data(), n, vbt.data(), k);
  if (info != 0) {
    // divide-and-conquer failed; retry with the QR-based driver
    a = x;
    Vec superb(k);
    info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', n, m, a.data.data(), n,
                          r.s.data(), ub.data(), n, vbt.data(), k,
                          superb.data());
    if (info != 0) throw NumericError("svd: LAPACK did not converge");
  }
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < k; ++l)
      r.U.at(i, l) = vbt[static_cast<std::size_t>(i) * k + l];
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < k; ++l)
      r.V.at(j, l) = ub[static_cast<std::size_t>(l) * n + j];
  return r;
}

Vec singular_values(const Image& x) {
  check_finite(x, "singular_values");
  const int m = x.rows, n = x.cols;
  if (m == 0 || n == 0) throw ParameterError("singular_values: empty matrix");
  const int k = std::min(m, n);

  Image a = x;
  Vec s(k);
  int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', n, m, a.data.data(), n,
                            s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) {
    a = x;
    Vec superb(k);
    info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'N', 'N', n, m, a.data.data(), n,
                          s.data(), nullptr, 1, nullptr, 1, superb.data());
    if (info != 0) throw NumericError("singular_values: LAPACK did not converge");
  }
  return s;
}

GradField discrete_gradient(const Image& x) {
  if (x.rows < 2 || x.cols < 2) throw ParameterError("discrete_gradient: image must be at least 2x2");
  GradField g(x.rows, x.cols);
  kernels::gradient_forward(x.data.data(), x.rows, x.cols, g.h(), g.v());
  return g;
}

Image divergence(const GradField& p) {
  Image out(p.rows, p.cols);
  kernels::divergence(p.h(), p.v(), p.rows, p.cols, out.data.data());
  return out;
}

struct CircularConvolution::Impl {
  int rows = 0, cols = 0, nc = 0;  // nc = cols/2 + 1 (r2c layout)
  Vec transfer;                    // interleaved complex, rows * nc entries
  double tmax = 0.0;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  double* proto_r = nullptr;
  fftw_complex* proto_c = nullptr;

  ~Impl() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (proto_r) fftw_free(proto_r);
    if (proto_c) fftw_free(proto_c);
  }
};

namespace {

struct FftBuffers {
  double* r = nullptr;
  fftw_complex* c = nullptr;
  FftBuffers(std::size_t nr, std::size_t nc) {
    r = static_cast<double*>(fftw_malloc(sizeof(double) * nr));
    c = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nc));
    if (!r || !c) {
      if (r) fftw_free(r);
      if (c) fftw_free(c);
      throw NumericError("fftw_malloc failed");
    }
  }
  ~FftBuffers() {
    fftw_free(r);
    fftw_free(c);
  }
};

}  // namespace

CircularConvolution::CircularConvolution(const Image& kernel, int rows, int cols)
    : impl_(std::make_unique<Impl>()) {
  if (rows < 1 || cols < 1) throw ParameterError("CircularConvolution: empty image shape");
  if (kernel.rows > rows || kernel.cols > cols)
    throw ParameterError("CircularConvolution: kernel larger than image");
  check_finite(kernel, "CircularConvolution");

  impl_->rows = rows;
  impl_->cols = cols;
  impl_->nc = cols / 2 + 1;
  const std::size_t nreal = static_cast<std::size_t>(rows) * cols;
  const std::size_t ncomp = static_cast<std::size_t>(rows) * impl_->nc;

  impl_->proto_r = static_cast<double*>(fftw_malloc(sizeof(double) * nreal));
  impl_->proto_c = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * ncomp));
  if (!impl_->proto_r || !impl_->proto_c) throw NumericError("fftw_malloc failed");
  impl_->fwd = fftw_plan_dft_r2c_2d(rows, cols, impl_->proto_r, impl_->proto_c, FFTW_ESTIMATE);
  impl_->bwd = fftw_plan_dft_c2r_2d(rows, cols, impl_->proto_c, impl_->proto_r, FFTW_ESTIMATE);
  if (!impl_->fwd || !impl_->bwd) throw NumericError("fftw plan creation failed");

  // embed the kernel with its center at (0, 0), wrapping negative offsets
  std::fill(impl_->proto_r, impl_->proto_r + nreal, 0.0);
  const int ci = kernel.rows / 2, cj = kernel.cols / 2;
  for (int i = 0; i < kernel.rows; ++i)
    for (int j = 0; j < kernel.cols; ++j) {
      const int ii = ((i - ci) % rows + rows) % rows;
      const int jj = ((j - cj) % cols + cols) % cols;
      impl_->proto_r[static_cast<std::size_t>(ii) * cols + jj] += kernel.at(i, j);
    }
  fftw_execute(impl_->fwd);
  impl_->transfer.resize(2 * ncomp);
  for (std::size_t i = 0; i < ncomp; ++i) {
    impl_->transfer[2 * i] = impl_->proto_c[i][0];
    impl_->transfer[2 * i + 1] = impl_->proto_c[i][1];
  }
  impl_->tmax = 0.0;
  for (std::size_t i = 0; i < ncomp; ++i)
    impl_->tmax = std::max(impl_->tmax,
                           std::hypot(impl_->transfer[2 * i], impl_->transfer[2 * i + 1]));
}

CircularConvolution::~CircularConvolution() = default;

int CircularConvolution::rows() const { return impl_->rows; }
int CircularConvolution::cols() const { return impl_->cols; }
double CircularConvolution::max_abs_transfer() const { return impl_->tmax; }

namespace {

Image apply_transfer(const CircularConvolution::Impl& im, const Image& x, bool conj) {
  if (x.rows != im.rows || x.cols != im.cols)
    throw ParameterError("CircularConvolution: image shape mismatch");
  const std::size_t nreal = static_cast<std::size_t>(im.rows) * im.cols;
  const std::size_t ncomp = static_cast<std::size_t>(im.rows) * im.nc;
  FftBuffers buf(nreal, ncomp);
  std::copy(x.data.begin(), x.data.end(), buf.r);
  fftw_execute_dft_r2c(im.fwd, buf.r, buf.c);
  const double scale = 1.0 / static_cast<double>(nreal);  // c2r is unnormalized
  if (conj)
    kernels::complex_mul_conj_scaled(&buf.c[0][0], im.transfer.data(), &buf.c[0][0],
                                     ncomp, scale);
  else
    kernels::complex_mul_scaled(&buf.c[0][0], im.transfer.data(), &buf.c[0][0],
                                ncomp, scale);
  fftw_execute_dft_c2r(im.bwd, buf.c, buf.r);
  Image out(im.rows, im.cols);
  std::copy(buf.r, buf.r + nreal, out.data.begin());
  return out;
}

}  // namespace

Image CircularConvolution::forward(const Image& x) const {
  return apply_transfer(*impl_, x, false);
}

Image CircularConvolution::adjoint(const Image& y) const {
  return apply_transfer(*impl_, y, true);
}

}  // namespace proxmcmc
