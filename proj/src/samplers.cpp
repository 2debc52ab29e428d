#include "proxmcmc/samplers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

namespace proxmcmc {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Vec clamp_drift(const Vec& state, const Vec& p, const std::optional<double>& R) {
  if (!R.has_value()) return p;
  const double d = std::sqrt(sq_dist(p, state));
  const double f = *R / std::max(*R, d);
  if (f >= 1.0) return p;
  Vec out(state.size());
  for (std::size_t i = 0; i < state.size(); ++i)
    out[i] = state[i] + f * (p[i] - state[i]);
  return out;
}

/// min(1, e^lr) acceptance with u drawn from (0, 1]; NaN ratios reject.
bool mh_accept(double log_ratio, double u) {
  return log_ratio >= 0.0 || std::log(u) < log_ratio;
}

void finish_mh(MhResult& r, const Vec& state, double g_state, Vec&& proposal,
               double g_prop, double lr, double u) {
  r.log_ratio = lr;
  r.uniform = u;
  r.proposal = proposal;
  if (mh_accept(lr, u)) {
    r.accepted = true;
    r.state = std::move(proposal);
    r.log_density = g_prop;
  } else {
    r.state = state;
    r.log_density = g_state;
  }
}

void check_delta(double delta, const char* who) {
  if (!(delta > 0.0))
    throw ParameterError(std::string(who) + ": delta must be positive");
}

}  // namespace

Sampler sampler_from_name(const std::string& name) {
  if (name == "pula") return Sampler::PULA;
  if (name == "pmala") return Sampler::PMALA;
  if (name == "ula") return Sampler::ULA;
  if (name == "mala") return Sampler::MALA;
  if (name == "malta") return Sampler::MALTA;
  if (name == "smmala") return Sampler::SMMALA1D;
  if (name == "rwmh") return Sampler::RWMH;
  throw ParameterError("unknown sampler: " + name);
}

std::string sampler_name(Sampler s) {
  switch (s) {
    case Sampler::PULA: return "pula";
    case Sampler::PMALA: return "pmala";
    case Sampler::ULA: return "ula";
    case Sampler::MALA: return "mala";
    case Sampler::MALTA: return "malta";
    case Sampler::SMMALA1D: return "smmala";
    case Sampler::RWMH: return "rwmh";
  }
  throw ParameterError("unknown sampler");
}

bool sampler_is_adjusted(Sampler s) {
  return s != Sampler::PULA && s != Sampler::ULA;
}

bool sampler_needs_gradient(Sampler s) {
  return s == Sampler::ULA || s == Sampler::MALA || s == Sampler::MALTA ||
         s == Sampler::SMMALA1D;
}

bool sampler_uses_prox(Sampler s) {
  return s == Sampler::PULA || s == Sampler::PMALA;
}

Vec pula_step(const Vec& state, const TargetDensity& target, double delta,
              const Vec& noise, std::optional<double> clamp_R,
              ProxWorkspace* ws) {
  check_delta(delta, "pula_step");
  if (noise.size() != state.size())
    throw ParameterError("pula_step: noise size mismatch");
  const Vec p = eval_prox(target, state, 0.5 * delta, ws);
  const Vec mean = clamp_drift(state, p, clamp_R);
  const double sd = std::sqrt(delta);
  Vec next(state.size());
  for (std::size_t i = 0; i < state.size(); ++i)
    next[i] = mean[i] + sd * noise[i];
  return next;
}

Vec ula_step(const Vec& state, const TargetDensity& target, double delta,
             const Vec& noise) {
  check_delta(delta, "ula_step");
  if (!target.gradient) throw ParameterError("ula_step: target has no gradient");
  if (noise.size() != state.size())
    throw ParameterError("ula_step: noise size mismatch");
  const Vec h = target.gradient(state);
  const double sd = std::sqrt(delta);
  Vec next(state.size());
  for (std::size_t i = 0; i < state.size(); ++i)
    next[i] = state[i] + 0.5 * delta * h[i] + sd * noise[i];
  return next;
}

MhResult pmala_step(const Vec& state, double g_state, const Vec& prox_state,
                    const TargetDensity& target, double delta,
                    std::optional<double> clamp_R, RngStream& rng,
                    ProxWorkspace* ws) {
  check_delta(delta, "pmala_step");
  const Vec mean_x = clamp_drift(state, prox_state, clamp_R);
  const double sd = std::sqrt(delta);
  Vec proposal(state.size());
  for (std::size_t i = 0; i < state.size(); ++i)
    proposal[i] = mean_x[i] + sd * rng.normal();
  const double g_p = target.log_density(proposal);
  Vec prox_p = eval_prox(target, proposal, 0.5 * delta, ws);
  const Vec mean_p = clamp_drift(proposal, prox_p, clamp_R);
  const double lr = g_p - g_state +
                    (sq_dist(proposal, mean_x) - sq_dist(state, mean_p)) /
                        (2.0 * delta);
  const double u = rng.uniform();
  MhResult r;
  finish_mh(r, state, g_state, std::move(proposal), g_p, lr, u);
  r.prox_state = r.accepted ? std::move(prox_p) : prox_state;
  return r;
}

namespace {

/// Shared MALA/MALTA body; eps1, when present, truncates the drift to that
/// norm on both sides of the ratio.
MhResult drifted_gaussian_mh(const Vec& state, double g_state,
                             const TargetDensity& target, double delta,
                             const std::optional<double>& eps1,
                             RngStream& rng) {
  if (!target.gradient)
    throw ParameterError("mala_step: target has no gradient");
  auto drift = [&eps1](Vec h) {
    if (eps1.has_value()) {
      const double n = std::sqrt(sq_norm(h));
      const double f = *eps1 / std::max(*eps1, n);
      for (double& v : h) v *= f;
    }
    return h;
  };
  const Vec hx = drift(target.gradient(state));
  Vec mean_x(state.size());
  for (std::size_t i = 0; i < state.size(); ++i)
    mean_x[i] = state[i] + 0.5 * delta * hx[i];
  const double sd = std::sqrt(delta);
  Vec proposal(state.size());
  for (std::size_t i = 0; i < state.size(); ++i)
    proposal[i] = mean_x[i] + sd * rng.normal();
  const double g_p = target.log_density(proposal);
  const Vec hp = drift(target.gradient(proposal));
  Vec mean_p(state.size());
  for (std::size_t i = 0; i < state.size(); ++i)
    mean_p[i] = proposal[i] + 0.5 * delta * hp[i];
  const double lr = g_p - g_state +
                    (sq_dist(proposal, mean_x) - sq_dist(state, mean_p)) /
                        (2.0 * delta);
  const double u = rng.uniform();
  MhResult r;
  finish_mh(r, state, g_state, std::move(proposal), g_p, lr, u);
  return r;
}

}  // namespace

MhResult mala_step(const Vec& state, double g_state,
                   const TargetDensity& target, double delta, RngStream& rng) {
  check_delta(delta, "mala_step");
  return drifted_gaussian_mh(state, g_state, target, delta, std::nullopt, rng);
}

MhResult malta_step(const Vec& state, double g_state,
                    const TargetDensity& target, double delta, double eps1,
                    RngStream& rng) {
  check_delta(delta, "malta_step");
  if (!(eps1 > 0.0)) throw ParameterError("malta_step: eps1 must be positive");
  return drifted_gaussian_mh(state, g_state, target, delta, eps1, rng);
}

MhResult smmala1d_step(const Vec& state, double g_state,
                       const TargetDensity& target, double delta, double eps2,
                       RngStream& rng) {
  check_delta(delta, "smmala1d_step");
  if (!(eps2 > 0.0)) throw ParameterError("smmala1d_step: eps2 must be positive");
  if (state.size() != 1) throw ParameterError("smmala1d_step: state must be 1-D");
  if (!target.gradient || !target.curvature_1d)
    throw ParameterError("smmala1d_step: target must supply gradient and curvature");

  const double x = state[0];
  const double reg_x = target.curvature_1d(x) + eps2;
  if (!(reg_x > 0.0))
    throw ParameterError("smmala1d_step: regularized curvature must be positive");
  const double mean_x = x + 0.5 * delta * target.gradient(state)[0] / reg_x;
  const double var_x = delta / reg_x;

  Vec proposal{mean_x + std::sqrt(var_x) * rng.normal()};
  const double p = proposal[0];
  const double g_p = target.log_density(proposal);

  double lr = kNan;
  const double reg_p = target.curvature_1d(p) + eps2;
  if (reg_p > 0.0) {
    const double mean_p = p + 0.5 * delta * target.gradient(proposal)[0] / reg_p;
    const double var_p = delta / reg_p;
    lr = g_p - g_state -
         (x - mean_p) * (x - mean_p) / (2.0 * var_p) - 0.5 * std::log(var_p) +
         (p - mean_x) * (p - mean_x) / (2.0 * var_x) + 0.5 * std::log(var_x);
  }
  const double u = rng.uniform();
  MhResult r;
  finish_mh(r, state, g_state, std::move(proposal), g_p, lr, u);
  return r;
}

MhResult rwmh_step(const Vec& state, double g_state,
                   const TargetDensity& target, double delta, RngStream& rng) {
  check_delta(delta, "rwmh_step");
  const double sd = std::sqrt(delta);
  Vec proposal(state.size());
  for (std::size_t i = 0; i < state.size(); ++i)
    proposal[i] = state[i] + sd * rng.normal();
  const double g_p = target.log_density(proposal);
  const double u = rng.uniform();
  MhResult r;
  finish_mh(r, state, g_state, std::move(proposal), g_p, g_p - g_state, u);
  return r;
}

namespace {

void validate_config(const TargetDensity& target, const ChainConfig& cfg,
                     const Vec& initial) {
  if (!(cfg.delta > 0.0)) throw ParameterError("run_chain: delta must be positive");
  if (cfg.n_samples < 1) throw ParameterError("run_chain: n_samples must be positive");
  if (cfg.burn_in < 0) throw ParameterError("run_chain: burn_in must be nonnegative");
  if (cfg.thinning < 1) throw ParameterError("run_chain: thinning must be positive");
  if (static_cast<int>(initial.size()) != target.dim)
    throw ParameterError("run_chain: initial state dimension mismatch");
  if (!all_finite(initial))
    throw ParameterError("run_chain: initial state must be finite");

  const Sampler s = cfg.sampler;
  if (cfg.malta_eps1.has_value() != (s == Sampler::MALTA))
    throw ParameterError("run_chain: malta_eps1 is required exactly for the MALTA sampler");
  if (s == Sampler::MALTA && !(*cfg.malta_eps1 > 0.0))
    throw ParameterError("run_chain: malta_eps1 must be positive");
  if (cfg.smmala_eps2.has_value() != (s == Sampler::SMMALA1D))
    throw ParameterError("run_chain: smmala_eps2 is required exactly for the SMMALA sampler");
  if (s == Sampler::SMMALA1D && !(*cfg.smmala_eps2 > 0.0))
    throw ParameterError("run_chain: smmala_eps2 must be positive");
  if (cfg.drift_clamp_R.has_value()) {
    if (!sampler_uses_prox(s))
      throw ParameterError("run_chain: drift_clamp_R applies only to P-ULA and P-MALA");
    if (!(*cfg.drift_clamp_R > 0.0))
      throw ParameterError("run_chain: drift_clamp_R must be positive");
  }
  if (cfg.adaptation.enabled) {
    if (!sampler_is_adjusted(s))
      throw ParameterError("run_chain: adaptation requires an MH-adjusted sampler");
    const Adaptation& a = cfg.adaptation;
    if (!(a.band_lo > 0.0 && a.band_lo < a.band_hi && a.band_hi < 1.0))
      throw ParameterError("run_chain: adaptation band must satisfy 0 < lo < hi < 1");
    if (!(a.gain_exponent > 0.0 && a.gain_exponent <= 1.0))
      throw ParameterError("run_chain: adaptation gain exponent must lie in (0, 1]");
  }

  if (!target.log_density) throw ParameterError("run_chain: target has no log density");
  if (sampler_uses_prox(s) && !target.prox)
    throw ParameterError("run_chain: sampler requires a proximity mapping");
  if (sampler_needs_gradient(s) && !target.gradient)
    throw ParameterError("run_chain: sampler requires a gradient");
  if (s == Sampler::SMMALA1D) {
    if (target.dim != 1)
      throw ParameterError("run_chain: SMMALA requires a 1-D target");
    if (!target.curvature_1d)
      throw ParameterError("run_chain: SMMALA requires curvature_1d");
  }
}

}  // namespace

ChainRun run_chain(const TargetDensity& target, const ChainConfig& cfg,
                   const Vec& initial, const StepHook& hook) {
  validate_config(target, cfg, initial);
  const Sampler s = cfg.sampler;
  const bool adjusted = sampler_is_adjusted(s);

  if (sampler_needs_gradient(s) && !all_finite(target.gradient(initial)))
    throw ParameterError("run_chain: gradient is not finite at the initial state");
  double g_state = target.log_density(initial);
  if (adjusted && !std::isfinite(g_state))
    throw ParameterError("run_chain: initial state must have finite log density");

  if (target.verify_concavity) {
    RngStream crng(cfg.seed, cfg.stream + 0x636f6e63ull);
    if (!check_midpoint_concavity(target, crng, 50, 2.0, 1e-9))
      throw NumericError("run_chain: target failed the midpoint concavity spot check");
  }

  const auto t0 = std::chrono::steady_clock::now();
  RngStream rng(cfg.seed, cfg.stream);
  ProxWorkspace ws;

  const long total = static_cast<long>(cfg.burn_in) +
                     static_cast<long>(cfg.n_samples) * cfg.thinning;
  ChainRun run;
  run.samples.reserve(static_cast<std::size_t>(cfg.n_samples));
  run.log_density_trace.assign(static_cast<std::size_t>(cfg.n_samples), 0.0);

  Vec state = initial;
  double delta = cfg.delta;
  const double band_mid = 0.5 * (cfg.adaptation.band_lo + cfg.adaptation.band_hi);

  Vec prox_state;
  double prox_delta = kNan;
  if (s == Sampler::PMALA) {
    prox_state = eval_prox(target, state, 0.5 * delta, &ws);
    prox_delta = delta;
  }

  long pending_slot = -1;  // P-ULA sample awaiting its Moreau trace value
  bool frozen = false;
  long accepts = 0;
  long decisions = 0;

  for (long step = 1; step <= total; ++step) {
    const bool in_burn = step <= cfg.burn_in;
    const double step_delta = delta;
    bool accepted = !adjusted;
    double lr = 0.0;
    double u = 0.0;
    Vec state_before_rec;
    Vec proposal_rec;
    if (hook) state_before_rec = state;

    switch (s) {
      case Sampler::PULA: {
        const Vec p = eval_prox(target, state, 0.5 * delta, &ws);
        if (pending_slot >= 0) {
          run.log_density_trace[static_cast<std::size_t>(pending_slot)] =
              target.log_density(p) - sq_dist(p, state) / delta;
          pending_slot = -1;
        }
        const Vec mean = clamp_drift(state, p, cfg.drift_clamp_R);
        const double sd = std::sqrt(delta);
        Vec next(state.size());
        for (std::size_t i = 0; i < state.size(); ++i)
          next[i] = mean[i] + sd * rng.normal();
        if (!all_finite(next)) {
          frozen = true;
          run.divergence_step = step;
        } else {
          state = std::move(next);
        }
        if (hook) proposal_rec = state;
        break;
      }
      case Sampler::ULA: {
        const Vec noise = rng.normal_vec(state.size());
        Vec next = ula_step(state, target, delta, noise);
        const double g_next =
            all_finite(next) ? target.log_density(next) : kNan;
        if (!std::isfinite(g_next)) {
          frozen = true;
          run.divergence_step = step;
        } else {
          state = std::move(next);
          g_state = g_next;
        }
        if (hook) proposal_rec = state;
        break;
      }
      case Sampler::PMALA: {
        if (!(prox_delta == delta)) {
          prox_state = eval_prox(target, state, 0.5 * delta, &ws);
          prox_delta = delta;
        }
        MhResult r = pmala_step(state, g_state, prox_state, target, delta,
                                cfg.drift_clamp_R, rng, &ws);
        accepted = r.accepted;
        lr = r.log_ratio;
        u = r.uniform;
        state = std::move(r.state);
        g_state = r.log_density;
        prox_state = std::move(r.prox_state);
        if (hook) proposal_rec = std::move(r.proposal);
        break;
      }
      case Sampler::MALA:
      case Sampler::MALTA:
      case Sampler::SMMALA1D:
      case Sampler::RWMH: {
        MhResult r;
        if (s == Sampler::MALA)
          r = mala_step(state, g_state, target, delta, rng);
        else if (s == Sampler::MALTA)
          r = malta_step(state, g_state, target, delta, *cfg.malta_eps1, rng);
        else if (s == Sampler::SMMALA1D)
          r = smmala1d_step(state, g_state, target, delta, *cfg.smmala_eps2, rng);
        else
          r = rwmh_step(state, g_state, target, delta, rng);
        accepted = r.accepted;
        lr = r.log_ratio;
        u = r.uniform;
        state = std::move(r.state);
        g_state = r.log_density;
        if (hook) proposal_rec = std::move(r.proposal);
        break;
      }
    }

    if (frozen) break;

    if (!in_burn) {
      if (adjusted) {
        ++decisions;
        if (accepted) ++accepts;
      }
      if ((step - cfg.burn_in) % cfg.thinning == 0) {
        const std::size_t slot = run.samples.size();
        run.samples.push_back(state);
        if (s == Sampler::PULA)
          pending_slot = static_cast<long>(slot);
        else
          run.log_density_trace[slot] = g_state;
      }
    }

    if (hook) {
      StepRecord rec;
      rec.step = step;
      rec.delta = step_delta;
      rec.mh = adjusted;
      rec.accepted = accepted;
      rec.log_ratio = lr;
      rec.uniform = u;
      rec.state_before = std::move(state_before_rec);
      rec.proposal = std::move(proposal_rec);
      hook(rec);
    }

    if (in_burn && cfg.adaptation.enabled) {
      double a = lr >= 0.0 ? 1.0 : std::exp(lr);
      if (std::isnan(a)) a = 0.0;
      const double gain =
          std::pow(static_cast<double>(step), -cfg.adaptation.gain_exponent);
      delta = std::exp(std::log(delta) + gain * (a - band_mid));
    }
  }

  if (frozen) {
    run.diverged = true;
    double fill_trace = g_state;
    if (s == Sampler::PULA)
      fill_trace = moreau_eval(target, state, 0.5 * delta, &ws).log_density_unnorm;
    if (pending_slot >= 0) {
      run.log_density_trace[static_cast<std::size_t>(pending_slot)] = fill_trace;
      pending_slot = -1;
    }
    while (run.samples.size() < static_cast<std::size_t>(cfg.n_samples)) {
      const std::size_t slot = run.samples.size();
      run.samples.push_back(state);
      run.log_density_trace[slot] = fill_trace;
    }
  } else if (pending_slot >= 0) {
    run.log_density_trace[static_cast<std::size_t>(pending_slot)] =
        moreau_eval(target, state, 0.5 * delta, &ws).log_density_unnorm;
  }

  run.delta_final = delta;
  run.acceptance_rate =
      adjusted ? (decisions > 0 ? static_cast<double>(accepts) /
                                      static_cast<double>(decisions)
                                : 0.0)
               : 1.0;
  run.stats.n_prox_evals = ws.n_evals;
  run.stats.n_nonconverged_prox = ws.n_nonconverged;
  run.stats.mh_decisions = decisions;
  run.stats.mh_accepts = accepts;
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  run.wall_seconds = std::max(dt.count(), 1e-9);
  return run;
}

}  // namespace proxmcmc
