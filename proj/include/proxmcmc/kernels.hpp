#pragma once

#include <cstddef>

namespace proxmcmc::kernels {

/// Execution policy for the elementwise numeric kernels. Every kernel has an
/// OpenMP-parallel implementation and a hand-written serial reference; both
/// produce bit-identical results for any thread count because each output
/// element depends only on the inputs (reductions are limited to max, which
/// is order-insensitive).
enum class Exec { Serial, Parallel };

Exec default_exec();
void set_default_exec(Exec e);

/// z[i] = sign(x[i]) * max(|x[i]| - t, 0)
void soft_threshold(const double* x, double* z, std::size_t n, double t,
                    Exec e = default_exec());

/// z[i] = min(max(x[i], lo[i]), hi[i])
void clamp_box(const double* x, const double* lo, const double* hi, double* z,
               std::size_t n, Exec e = default_exec());

/// z[i] = a * x[i] + b * y[i]
void axpby(double a, const double* x, double b, const double* y, double* z,
           std::size_t n, Exec e = default_exec());

/// z[i] = a * x[i] + b
void scale_shift(double a, const double* x, double b, double* z, std::size_t n,
                 Exec e = default_exec());

double max_abs(const double* x, std::size_t n, Exec e = default_exec());
double max_abs_diff(const double* a, const double* b, std::size_t n,
                    Exec e = default_exec());

/// Forward differences with replicate boundary: the last column of gh and the
/// last row of gv are zero.
void gradient_forward(const double* img, int rows, int cols, double* gh,
                      double* gv, Exec e = default_exec());

/// Negative adjoint of gradient_forward: <grad x, p> = -<x, divergence p>.
void divergence(const double* gh, const double* gv, int rows, int cols,
                double* out, Exec e = default_exec());

/// Dual projection step of the TV solver: pn[i] = (p[i] + tau*w[i]) / (1 + tau*|w[i]|)
void tv_dual_update(const double* p, const double* w, double* pn, std::size_t n,
                    double tau, Exec e = default_exec());

/// Interleaved complex Hadamard product with scaling: z = s * a .* b.
void complex_mul_scaled(const double* a, const double* b, double* z,
                        std::size_t n_complex, double s, Exec e = default_exec());

/// Same with the second factor conjugated: z = s * a .* conj(b).
void complex_mul_conj_scaled(const double* a, const double* b, double* z,
                             std::size_t n_complex, double s,
                             Exec e = default_exec());

}  // namespace proxmcmc::kernels
