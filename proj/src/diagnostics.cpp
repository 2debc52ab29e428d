#include "proxmcmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

#include <fftw3.h>

namespace proxmcmc {

namespace {

void validate_acf_args(const Vec& chain, int max_lag) {
  const std::size_t n = chain.size();
  if (n < 2) throw ParameterError("autocorrelation: need at least 2 samples");
  if (max_lag < 0 || static_cast<std::size_t>(max_lag) >= n)
    throw ParameterError("autocorrelation: max_lag must lie in [0, N-1]");
  const auto [lo, hi] = std::minmax_element(chain.begin(), chain.end());
  if (*lo == *hi)
    throw NumericError("autocorrelation: constant chain has no autocorrelation");
}

Vec centered(const Vec& chain) {
  const double mean = sample_mean(chain);
  Vec d(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) d[i] = chain[i] - mean;
  return d;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

}  // namespace

Vec autocorrelation(const Vec& chain, int max_lag) {
  validate_acf_args(chain, max_lag);
  const std::size_t n = chain.size();
  const Vec d = centered(chain);

  // Zero padding to at least N + max_lag keeps the circular correlation
  // linear over the lags of interest.
  const std::size_t m = next_pow2(n + static_cast<std::size_t>(max_lag));
  const std::size_t mc = m / 2 + 1;
  double* in = fftw_alloc_real(m);
  fftw_complex* freq = fftw_alloc_complex(mc);
  fftw_plan fwd = fftw_plan_dft_r2c_1d(static_cast<int>(m), in, freq, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_c2r_1d(static_cast<int>(m), freq, in, FFTW_ESTIMATE);

  std::copy(d.begin(), d.end(), in);
  std::fill(in + n, in + m, 0.0);
  fftw_execute(fwd);
  for (std::size_t k = 0; k < mc; ++k) {
    freq[k][0] = freq[k][0] * freq[k][0] + freq[k][1] * freq[k][1];
    freq[k][1] = 0.0;
  }
  fftw_execute(bwd);

  Vec rho(static_cast<std::size_t>(max_lag) + 1);
  const double c0 = in[0];
  for (int k = 0; k <= max_lag; ++k)
    rho[static_cast<std::size_t>(k)] = in[k] / c0;

  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  fftw_free(in);
  fftw_free(freq);
  return rho;
}

Vec autocorrelation_direct(const Vec& chain, int max_lag) {
  validate_acf_args(chain, max_lag);
  const std::size_t n = chain.size();
  const Vec d = centered(chain);
  double c0 = 0.0;
  for (std::size_t t = 0; t < n; ++t) c0 += d[t] * d[t];
  Vec rho(static_cast<std::size_t>(max_lag) + 1);
  for (int k = 0; k <= max_lag; ++k) {
    double ck = 0.0;
    for (std::size_t t = 0; t + static_cast<std::size_t>(k) < n; ++t)
      ck += d[t] * d[t + static_cast<std::size_t>(k)];
    rho[static_cast<std::size_t>(k)] = ck / c0;
  }
  return rho;
}

double effective_sample_size(const Vec& chain) {
  const std::size_t n = chain.size();
  if (n < 100)
    throw ParameterError("effective_sample_size: need at least 100 samples");
  const Vec rho = autocorrelation(chain, static_cast<int>(n) - 1);

  // Initial monotone positive sequence over Gamma_k = rho(2k) + rho(2k+1):
  // stop at the first nonpositive pair sum and enforce a running minimum.
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double gamma = rho[2 * k] + rho[2 * k + 1];
    if (gamma <= 0.0) break;
    gamma = std::min(gamma, prev);
    prev = gamma;
    sum += gamma;
  }
  const double tau = std::max(2.0 * sum - 1.0, 1.0 / static_cast<double>(n));
  return static_cast<double>(n) / tau;
}

Vec quantiles(const Vec& data, const Vec& probs) {
  if (data.empty()) throw ParameterError("quantiles: empty data");
  for (double p : probs)
    if (!(p >= 0.0 && p <= 1.0))
      throw ParameterError("quantiles: probabilities must lie in [0, 1]");
  Vec sorted = data;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  Vec out(probs.size());
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (n == 1) {
      out[j] = sorted[0];
      continue;
    }
    const double h = probs[j] * static_cast<double>(n - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(h), n - 2);
    const double frac = h - static_cast<double>(i);
    out[j] = sorted[i] + frac * (sorted[i + 1] - sorted[i]);
  }
  return out;
}

CredibilityMap credibility_map(const std::vector<Vec>& samples, int rows,
                               int cols, double p_lo, double p_hi,
                               kernels::Exec e) {
  if (rows < 1 || cols < 1)
    throw ParameterError("credibility_map: dimensions must be positive");
  if (samples.size() < 20)
    throw ParameterError("credibility_map: need at least 20 samples");
  if (!(p_lo >= 0.0 && p_lo < p_hi && p_hi <= 1.0))
    throw ParameterError("credibility_map: need 0 <= p_lo < p_hi <= 1");
  const std::size_t dim = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  for (const Vec& s : samples)
    if (s.size() != dim)
      throw ParameterError("credibility_map: sample size mismatch");

  CredibilityMap map{Image(rows, cols), Image(rows, cols)};
  const std::ptrdiff_t d = static_cast<std::ptrdiff_t>(dim);
  const Vec probs = {p_lo, p_hi};
  if (e == kernels::Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < d; ++j) {
      Vec column(samples.size());
      for (std::size_t t = 0; t < samples.size(); ++t)
        column[t] = samples[t][static_cast<std::size_t>(j)];
      const Vec q = quantiles(column, probs);
      map.lo.data[static_cast<std::size_t>(j)] = q[0];
      map.hi.data[static_cast<std::size_t>(j)] = q[1];
    }
  } else {
    for (std::ptrdiff_t j = 0; j < d; ++j) {
      Vec column(samples.size());
      for (std::size_t t = 0; t < samples.size(); ++t)
        column[t] = samples[t][static_cast<std::size_t>(j)];
      const Vec q = quantiles(column, probs);
      map.lo.data[static_cast<std::size_t>(j)] = q[0];
      map.hi.data[static_cast<std::size_t>(j)] = q[1];
    }
  }
  return map;
}

double time_normalized_ess(double ess, double wall_seconds) {
  if (!(wall_seconds > 0.0))
    throw ParameterError("time_normalized_ess: wall_seconds must be positive");
  return ess / wall_seconds;
}

double sample_mean(const Vec& data) {
  if (data.empty()) throw ParameterError("sample_mean: empty data");
  return std::accumulate(data.begin(), data.end(), 0.0) /
         static_cast<double>(data.size());
}

double sample_variance(const Vec& data) {
  if (data.size() < 2) throw ParameterError("sample_variance: need at least 2 samples");
  const double mean = sample_mean(data);
  double acc = 0.0;
  for (double v : data) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(data.size() - 1);
}

}  // namespace proxmcmc
