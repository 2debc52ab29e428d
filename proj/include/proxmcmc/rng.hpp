#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "proxmcmc/common.hpp"

namespace proxmcmc {

/// splitmix64 step; used only to whiten (seed, stream) pairs into engine seeds.
inline std::uint64_t splitmix64_next(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// One RNG stream per chain: mt19937_64 with a splitmix64-derived seed.
/// Uniforms take the top 53 bits of the engine output; normals use the
/// trigonometric Box-Muller transform with the second variate cached.
/// Output sequences are bit-reproducible for a fixed build.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(derive_seed(seed, stream)) {}

  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed + stream * 0x9E3779B97F4A7C15ull;
    (void)splitmix64_next(s);
    return splitmix64_next(s);
  }

  /// Uniform on (0, 1].
  double uniform() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = two_pi * u2;
    cached_ = r * std::sin(t);
    has_cached_ = true;
    return r * std::cos(t);
  }

  void normal_fill(double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = normal();
  }

  Vec normal_vec(std::size_t n) {
    Vec v(n);
    normal_fill(v.data(), n);
    return v;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace proxmcmc
