#pragma once

#include <vector>

#include "proxmcmc/common.hpp"
#include "proxmcmc/kernels.hpp"

namespace proxmcmc {

/// Normalized autocorrelation rho(0..max_lag) of a scalar chain, computed
/// with the 1/N (biased) normalization via FFT. Throws NumericError when the
/// chain is constant.
Vec autocorrelation(const Vec& chain, int max_lag);

/// Same estimator as autocorrelation(), evaluated by direct O(N * max_lag)
/// summation. Kept as a cross-check for the FFT path.
Vec autocorrelation_direct(const Vec& chain, int max_lag);

/// Effective sample size N / tau with tau from the initial monotone positive
/// sequence of pair sums Gamma_k = rho(2k) + rho(2k+1). tau is floored at
/// 1/N, so antithetic chains may report ESS above N. Requires N >= 100.
double effective_sample_size(const Vec& chain);

/// Quantiles by linear interpolation between order statistics, with sorted
/// value k (1-based) assigned plotting position (k-1)/(N-1). probs must lie
/// in [0, 1].
Vec quantiles(const Vec& data, const Vec& probs);

struct CredibilityMap {
  Image lo;
  Image hi;
};

/// Per-pixel marginal quantile images at levels p_lo and p_hi from a stack
/// of flattened row-major samples. Requires at least 20 samples.
CredibilityMap credibility_map(const std::vector<Vec>& samples, int rows,
                               int cols, double p_lo, double p_hi,
                               kernels::Exec e = kernels::default_exec());

/// ESS per wall-clock second.
double time_normalized_ess(double ess, double wall_seconds);

double sample_mean(const Vec& data);

/// Unbiased (N-1 denominator) sample variance.
double sample_variance(const Vec& data);

}  // namespace proxmcmc
