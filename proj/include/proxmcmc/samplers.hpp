#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "proxmcmc/common.hpp"
#include "proxmcmc/prox.hpp"
#include "proxmcmc/rng.hpp"

namespace proxmcmc {

enum class Sampler { PULA, PMALA, ULA, MALA, MALTA, SMMALA1D, RWMH };

/// Parses "pula" | "pmala" | "ula" | "mala" | "malta" | "smmala" | "rwmh".
Sampler sampler_from_name(const std::string& name);
std::string sampler_name(Sampler s);

/// True for samplers with a Metropolis-Hastings correction.
bool sampler_is_adjusted(Sampler s);
bool sampler_needs_gradient(Sampler s);
bool sampler_uses_prox(Sampler s);

/// Robbins-Monro step-size tuning toward the midpoint of a target
/// acceptance band, active during burn-in only.
struct Adaptation {
  bool enabled = false;
  double band_lo = 0.4;
  double band_hi = 0.6;
  double gain_exponent = 0.6;  // gain at burn-in step m is m^(-gain_exponent)
};

struct ChainConfig {
  Sampler sampler = Sampler::PMALA;
  double delta = 1.0;
  int n_samples = 1000;  // stored (post-thinning) samples
  int burn_in = 0;
  int thinning = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  Adaptation adaptation;
  std::optional<double> malta_eps1;      // required iff sampler = MALTA
  std::optional<double> smmala_eps2;     // required iff sampler = SMMALA1D
  std::optional<double> drift_clamp_R;   // P-ULA / P-MALA bounded-drift radius
};

struct ChainStats {
  long n_prox_evals = 0;
  long n_nonconverged_prox = 0;
  long mh_decisions = 0;  // post burn-in
  long mh_accepts = 0;    // post burn-in
};

struct ChainRun {
  std::vector<Vec> samples;
  Vec log_density_trace;
  double acceptance_rate = 1.0;  // post burn-in; 1.0 for unadjusted samplers
  double delta_final = 0.0;
  bool diverged = false;
  long divergence_step = 0;  // 1-based step at which the chain froze
  double wall_seconds = 0.0;
  ChainStats stats;
};

/// Everything needed to re-derive one accept/reject decision offline.
struct StepRecord {
  long step = 0;  // 1-based over burn-in plus sampling
  double delta = 0.0;
  bool mh = false;
  bool accepted = false;
  double log_ratio = 0.0;
  double uniform = 0.0;
  Vec state_before;
  Vec proposal;
};
using StepHook = std::function<void(const StepRecord&)>;

/// prox^{delta/2}_g(state) + sqrt(delta) * noise, with the optional drift
/// clamp state + R (p - state) / max(R, |p - state|) applied to the prox.
Vec pula_step(const Vec& state, const TargetDensity& target, double delta,
              const Vec& noise, std::optional<double> clamp_R = {},
              ProxWorkspace* ws = nullptr);

/// state + (delta/2) grad log pi(state) + sqrt(delta) * noise.
Vec ula_step(const Vec& state, const TargetDensity& target, double delta,
             const Vec& noise);

struct MhResult {
  Vec state;
  bool accepted = false;
  double log_ratio = 0.0;
  double uniform = 0.0;
  Vec proposal;
  Vec prox_state;      // P-MALA only: prox^{delta/2} of the returned state
  double log_density = 0.0;  // g at the returned state
};

/// One P-MALA transition. g_state and prox_state are the cached values for
/// the current state, so exactly one fresh prox evaluation (at the proposal)
/// occurs; the cache for the returned state comes back in the result.
MhResult pmala_step(const Vec& state, double g_state, const Vec& prox_state,
                    const TargetDensity& target, double delta,
                    std::optional<double> clamp_R, RngStream& rng,
                    ProxWorkspace* ws = nullptr);

MhResult mala_step(const Vec& state, double g_state,
                   const TargetDensity& target, double delta, RngStream& rng);

/// MALA with the drift h replaced by eps1 * h / max(eps1, |h|) on both
/// sides of the ratio.
MhResult malta_step(const Vec& state, double g_state,
                    const TargetDensity& target, double delta, double eps1,
                    RngStream& rng);

/// 1-D simplified manifold MALA: proposal mean state + (delta/2) h / (c + eps2)
/// and variance delta / (c + eps2), c = target.curvature_1d(state); the
/// ratio includes the position-dependent normalization.
MhResult smmala1d_step(const Vec& state, double g_state,
                       const TargetDensity& target, double delta, double eps2,
                       RngStream& rng);

/// Symmetric N(state, delta I) proposal.
MhResult rwmh_step(const Vec& state, double g_state,
                   const TargetDensity& target, double delta, RngStream& rng);

/// Runs burn_in + n_samples * thinning kernel steps, storing every
/// thinning-th post-burn-in state. Deterministic for a fixed (seed, stream).
///
/// Step-size adaptation moves log delta toward the acceptance-band midpoint
/// during burn-in and freezes delta afterward. Cached prox values are never
/// recomputed once delta is frozen, so the proposal mean used to draw and
/// the one used in the reverse density are always the same numbers even
/// when the prox itself is iterative.
///
/// If an unadjusted chain produces a non-finite state (or one whose trace
/// value is non-finite), it freezes at the last valid state, fills the
/// remaining storage slots with it and reports diverged = true.
///
/// log_density_trace stores g(state) per stored sample, except P-ULA which
/// stores the Moreau approximation log pi_{delta/2}(state) (its own
/// stationary reference; finite even when g(state) is an indicator's -inf).
ChainRun run_chain(const TargetDensity& target, const ChainConfig& config,
                   const Vec& initial, const StepHook& hook = {});

}  // namespace proxmcmc
