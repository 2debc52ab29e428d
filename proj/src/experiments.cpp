#include "proxmcmc/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "proxmcmc/diagnostics.hpp"
#include "proxmcmc/linalg.hpp"
#include "proxmcmc/models.hpp"
#include "proxmcmc/oracle.hpp"
#include "proxmcmc/samplers.hpp"

namespace proxmcmc {
namespace {

using json = nlohmann::ordered_json;

// Per-command RNG stream bases. Sampler chains use the sampler enum value
// as their stream, so these stay far away from 0..6.
constexpr std::uint64_t kNoiseStream = 1000;
constexpr std::uint64_t kReplicaStream = 3000;
constexpr std::uint64_t kNullReplicaStream = 4000;

std::string path_join(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return (std::filesystem::path(dir) / name).string();
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw IoError("write failed for " + path);
}

void save_json(const std::string& path, const json& j) {
  save_text(path, j.dump(2) + "\n");
}

json finite_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

Image vec_to_image(const Vec& v, int rows, int cols) {
  Image img(rows, cols);
  img.data = v;
  return img;
}

double mse(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<long> parse_long_list(const std::string& s, const std::string& what) {
  std::vector<long> out;
  for (const std::string& tok : split_list(s)) {
    try {
      std::size_t pos = 0;
      const long v = std::stol(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError(what + ": not an integer: '" + tok + "'");
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const std::string& tok : split_list(s)) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError(what + ": not a number: '" + tok + "'");
    }
  }
  return out;
}

// CSV with free-form (possibly non-numeric) cells, for tables that mix
// sampler names with statistics.
void write_text_csv(const std::string& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
  std::string text;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j > 0) text += ',';
    text += header[j];
  }
  text += '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) text += ',';
      text += row[j];
    }
    text += '\n';
  }
  save_text(path, text);
}

/// Stores ESS under j["ess"], or null plus a note when the chain is too
/// short or degenerate for the estimator.
double put_ess(json& j, const Vec& chain) {
  try {
    const double ess = effective_sample_size(chain);
    j["ess"] = ess;
    return ess;
  } catch (const std::exception& e) {
    j["ess"] = nullptr;
    j["ess_note"] = e.what();
    return std::numeric_limits<double>::quiet_NaN();
  }
}

std::uint64_t seed_of(const KvConfig& cfg) {
  return static_cast<std::uint64_t>(cfg.get_long("seed", 0));
}

Vec posterior_mean(const std::vector<Vec>& samples) {
  Vec mean(samples.front().size(), 0.0);
  for (const Vec& s : samples)
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += s[i];
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (double& v : mean) v *= inv;
  return mean;
}

/// 1-D Wasserstein distance between the empirical distributions of two
/// equally sized value sets: mean absolute difference of sorted values.
double wasserstein1(Vec a, Vec b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double now_minus(const std::chrono::steady_clock::time_point& t0) {
  const auto dt = std::chrono::steady_clock::now() - t0;
  return std::chrono::duration<double>(dt).count();
}

}  // namespace

int cmd_benchmark1d(const KvConfig& cfg, const std::string& out_dir) {
  cfg.require_known({"benchmark", "gamma", "box_halfwidth", "samplers", "delta",
                     "n_samples", "burn_in", "thinning", "x0", "malta_eps1",
                     "smmala_eps2", "adaptation", "band_lo", "band_hi", "seed"});

  Benchmark1D spec;
  spec.kind = benchmark_kind(cfg.get("benchmark", "quartic"));
  spec.gamma = cfg.get_double("gamma", 1.0);
  spec.box_halfwidth = cfg.get_double("box_halfwidth", 1.0);
  const TargetDensity target = benchmark_target(spec);

  const double delta = cfg.get_double("delta", 1.0);
  const long n_samples = cfg.get_long("n_samples", 250);
  const long burn_in = cfg.get_long("burn_in", 0);
  const long thinning = cfg.get_long("thinning", 1);
  const double x0 = cfg.get_double("x0", 10.0);
  const std::uint64_t seed = seed_of(cfg);

  json summary;
  summary["command"] = "benchmark1d";
  summary["benchmark"] = benchmark_kind_name(spec.kind);
  summary["gamma"] = spec.gamma;
  if (spec.kind == Benchmark1D::Kind::UniformBox)
    summary["box_halfwidth"] = spec.box_halfwidth;
  summary["delta"] = delta;
  summary["n_samples"] = n_samples;
  summary["burn_in"] = burn_in;
  summary["thinning"] = thinning;
  summary["x0"] = x0;
  summary["seed"] = seed;

  json per = json::object();
  json timing_samplers = json::object();
  bool failed = false;

  for (const std::string& name : split_list(cfg.get("samplers", "pmala,mala,malta,smmala"))) {
    try {
      ChainConfig cc;
      cc.sampler = sampler_from_name(name);
      cc.delta = delta;
      cc.n_samples = static_cast<int>(n_samples);
      cc.burn_in = static_cast<int>(burn_in);
      cc.thinning = static_cast<int>(thinning);
      cc.seed = seed;
      cc.stream = static_cast<std::uint64_t>(cc.sampler);
      if (cc.sampler == Sampler::MALTA)
        cc.malta_eps1 = cfg.get_double("malta_eps1", 20.0);
      if (cc.sampler == Sampler::SMMALA1D)
        cc.smmala_eps2 = cfg.get_double("smmala_eps2", 0.1);
      if (cfg.get_bool("adaptation", false) && sampler_is_adjusted(cc.sampler)) {
        cc.adaptation.enabled = true;
        cc.adaptation.band_lo = cfg.get_double("band_lo", 0.4);
        cc.adaptation.band_hi = cfg.get_double("band_hi", 0.6);
      }

      const long total = burn_in + n_samples * thinning;
      std::vector<char> step_accepted(static_cast<std::size_t>(total) + 1, 1);
      const StepHook hook = [&step_accepted](const StepRecord& rec) {
        step_accepted[static_cast<std::size_t>(rec.step)] = rec.accepted ? 1 : 0;
      };
      const ChainRun run = run_chain(target, cc, Vec{x0}, hook);

      Vec states(run.samples.size());
      std::vector<Vec> rows;
      rows.reserve(run.samples.size());
      for (std::size_t t = 0; t < run.samples.size(); ++t) {
        states[t] = run.samples[t][0];
        const long step = burn_in + static_cast<long>(t + 1) * thinning;
        rows.push_back({static_cast<double>(t + 1), states[t],
                        run.log_density_trace[t],
                        static_cast<double>(step_accepted[static_cast<std::size_t>(step)])});
      }
      write_csv(path_join(out_dir, "trace_" + name + ".csv"),
                {"iteration", "state", "log_density", "accepted"}, rows);

      double max_abs_state = 0.0;
      for (double v : states) max_abs_state = std::max(max_abs_state, std::abs(v));

      json sj;
      sj["acceptance_rate"] = run.acceptance_rate;
      sj["delta_final"] = run.delta_final;
      sj["diverged"] = run.diverged || max_abs_state > 1e6;
      sj["divergence_step"] = run.diverged ? json(run.divergence_step) : json(nullptr);
      sj["mean"] = finite_or_null(sample_mean(states));
      sj["variance"] = finite_or_null(sample_variance(states));
      put_ess(sj, states);
      if (sampler_uses_prox(cc.sampler)) {
        sj["n_prox_evals"] = run.stats.n_prox_evals;
        sj["n_nonconverged_prox"] = run.stats.n_nonconverged_prox;
      }
      per[name] = sj;
      timing_samplers[name] = json{{"wall_seconds", run.wall_seconds}};
    } catch (const std::exception& e) {
      per[name] = json{{"error", e.what()}};
      failed = true;
    }
  }

  summary["samplers"] = per;
  save_json(path_join(out_dir, "summary.json"), summary);
  save_json(path_join(out_dir, "timing.json"), json{{"samplers", timing_samplers}});
  return failed ? 1 : 0;
}

int cmd_deconvolve(const KvConfig& cfg, const std::string& out_dir) {
  cfg.require_known({"n", "truth", "truth_pgm", "kernel_rows", "kernel_cols",
                     "noise_kind", "noise_value", "alpha", "delta0", "n_samples",
                     "burn_in", "thinning", "adaptation", "band_lo", "band_hi",
                     "samplers", "tv_max_iters", "tv_tolerance", "map_max_iters",
                     "map_rel_tol", "quantile_lo", "quantile_hi", "acf_max_lag",
                     "seed"});

  const int n = static_cast<int>(cfg.get_long("n", 64));
  Image truth;
  const std::string truth_name = cfg.get("truth", "phantom");
  if (truth_name == "phantom") {
    truth = phantom_image(n);
  } else if (truth_name == "checkerboard") {
    truth = checkerboard_image(n);
  } else if (truth_name == "pgm") {
    const std::string p = cfg.get("truth_pgm", "");
    if (p.empty()) throw ConfigError("deconvolve: truth=pgm requires truth_pgm=<path>");
    truth = read_pgm(p);
  } else {
    throw ConfigError("deconvolve: truth must be phantom, checkerboard or pgm");
  }
  const int rows = truth.rows;
  const int cols = truth.cols;

  const Image kernel = uniform_kernel(static_cast<int>(cfg.get_long("kernel_rows", 9)),
                                      static_cast<int>(cfg.get_long("kernel_cols", 9)));
  auto blur = std::make_shared<const CircularConvolution>(kernel, rows, cols);

  NoiseSpec noise;
  const std::string noise_kind = cfg.get("noise_kind", "bsnr_db");
  if (noise_kind == "sigma2") noise.kind = NoiseSpec::Kind::Sigma2;
  else if (noise_kind == "bsnr_db") noise.kind = NoiseSpec::Kind::BsnrDb;
  else if (noise_kind == "snr_db") noise.kind = NoiseSpec::Kind::SnrDb;
  else throw ConfigError("deconvolve: noise_kind must be sigma2, bsnr_db or snr_db");
  noise.value = cfg.get_double("noise_value", 40.0);

  const std::uint64_t seed = seed_of(cfg);
  RngStream noise_rng(seed, kNoiseStream);
  const Observation obs = synthesize_observation(truth.data, blur.get(), noise, noise_rng);

  DeconvModel model;
  model.blur = blur;
  model.y = obs.y;
  model.rows = rows;
  model.cols = cols;
  model.sigma2 = obs.sigma2;
  model.alpha = cfg.get_double("alpha", 1000.0);

  IterativeParams tv;
  tv.max_iters = static_cast<int>(cfg.get_long("tv_max_iters", 50));
  tv.tolerance = cfg.get_double("tv_tolerance", 1e-5);

  write_pgm(path_join(out_dir, "truth.pgm"), truth);
  write_pgm(path_join(out_dir, "observation.pgm"), vec_to_image(obs.y, rows, cols));

  MapParams map_params;
  map_params.rel_tol = cfg.get_double("map_rel_tol", 1e-8);
  map_params.max_iters = static_cast<int>(cfg.get_long("map_max_iters", 300));
  const auto map_t0 = std::chrono::steady_clock::now();
  const MapResult map = map_deconv(model, tv, map_params);
  const double map_wall = now_minus(map_t0);
  write_pgm(path_join(out_dir, "map.pgm"), vec_to_image(map.x, rows, cols));

  json summary;
  summary["command"] = "deconvolve";
  summary["rows"] = rows;
  summary["cols"] = cols;
  summary["kernel_rows"] = kernel.rows;
  summary["kernel_cols"] = kernel.cols;
  summary["noise"] = json{{"kind", noise_kind},
                          {"value", noise.value},
                          {"sigma2", obs.sigma2}};
  summary["alpha"] = model.alpha;
  summary["seed"] = seed;
  summary["map"] = json{{"objective", map.objective},
                        {"iters", map.iters},
                        {"hit_cap", map.hit_cap},
                        {"mse", mse(map.x, truth.data)},
                        {"observation_mse", mse(obs.y, truth.data)}};

  // Edge and flat pixel masks from the truth's forward-difference gradient
  // magnitude: edge pixels sit above the 90th percentile, flat ones at
  // exactly zero.
  const GradField tg = discrete_gradient(truth);
  const std::size_t npix = truth.size();
  Vec grad_mag(npix);
  for (std::size_t i = 0; i < npix; ++i)
    grad_mag[i] = std::hypot(tg.h()[i], tg.v()[i]);
  const double edge_cut = quantiles(grad_mag, Vec{0.9})[0];
  std::vector<char> edge_mask(npix), flat_mask(npix);
  for (std::size_t i = 0; i < npix; ++i) {
    edge_mask[i] = grad_mag[i] > edge_cut ? 1 : 0;
    flat_mask[i] = grad_mag[i] == 0.0 ? 1 : 0;
  }

  const TargetDensity target = deconv_target(model, tv);
  const double p_lo = cfg.get_double("quantile_lo", 0.05);
  const double p_hi = cfg.get_double("quantile_hi", 0.95);
  const int acf_max_lag = static_cast<int>(cfg.get_long("acf_max_lag", 20));

  json per = json::object();
  json timing_samplers = json::object();
  bool failed = false;

  for (const std::string& name : split_list(cfg.get("samplers", "pmala,mala"))) {
    try {
      ChainConfig cc;
      cc.sampler = sampler_from_name(name);
      cc.delta = cfg.get_double("delta0", 1e-7);
      cc.n_samples = static_cast<int>(cfg.get_long("n_samples", 2000));
      cc.burn_in = static_cast<int>(cfg.get_long("burn_in", 50000));
      cc.thinning = static_cast<int>(cfg.get_long("thinning", 25));
      cc.seed = seed;
      cc.stream = static_cast<std::uint64_t>(cc.sampler);
      if (cfg.get_bool("adaptation", true) && sampler_is_adjusted(cc.sampler)) {
        cc.adaptation.enabled = true;
        cc.adaptation.band_lo = cfg.get_double("band_lo", 0.4);
        cc.adaptation.band_hi = cfg.get_double("band_hi", 0.6);
      }

      const ChainRun run = run_chain(target, cc, map.x);

      std::vector<Vec> trace_rows;
      trace_rows.reserve(run.log_density_trace.size());
      for (std::size_t t = 0; t < run.log_density_trace.size(); ++t)
        trace_rows.push_back({static_cast<double>(t + 1), run.log_density_trace[t]});
      write_csv(path_join(out_dir, "trace_" + name + ".csv"),
                {"iteration", "log_posterior"}, trace_rows);

      json sj;
      sj["acceptance_rate"] = run.acceptance_rate;
      sj["delta_final"] = run.delta_final;
      sj["diverged"] = run.diverged;

      const int lag = std::min<int>(acf_max_lag, cc.n_samples - 1);
      sj["acf_max_lag"] = lag;
      try {
        const Vec acf = autocorrelation(run.log_density_trace, lag);
        std::vector<Vec> acf_rows;
        for (int k = 0; k <= lag; ++k)
          acf_rows.push_back({static_cast<double>(k), acf[static_cast<std::size_t>(k)]});
        write_csv(path_join(out_dir, "acf_" + name + ".csv"), {"lag", "acf"}, acf_rows);
        sj["acf_at_max_lag"] = acf[static_cast<std::size_t>(lag)];
      } catch (const std::exception& e) {
        sj["acf_at_max_lag"] = nullptr;
        sj["acf_note"] = e.what();
      }

      const double ess = put_ess(sj, run.log_density_trace);
      sj["ess_per_sample"] = std::isfinite(ess)
                                 ? json(ess / static_cast<double>(cc.n_samples))
                                 : json(nullptr);

      const Vec mean = posterior_mean(run.samples);
      write_pgm(path_join(out_dir, "mean_" + name + ".pgm"), vec_to_image(mean, rows, cols));
      sj["mean_mse"] = mse(mean, truth.data);

      const CredibilityMap cm = credibility_map(run.samples, rows, cols, p_lo, p_hi);
      Image width(rows, cols);
      for (std::size_t i = 0; i < npix; ++i)
        width.data[i] = cm.hi.data[i] - cm.lo.data[i];
      write_pgm(path_join(out_dir, "width_" + name + ".pgm"), width);
      write_matrix_csv(path_join(out_dir, "width_" + name + ".csv"), width);

      double w_all = 0.0, w_edge = 0.0, w_flat = 0.0;
      long n_edge = 0, n_flat = 0;
      for (std::size_t i = 0; i < npix; ++i) {
        w_all += width.data[i];
        if (edge_mask[i]) { w_edge += width.data[i]; ++n_edge; }
        if (flat_mask[i]) { w_flat += width.data[i]; ++n_flat; }
      }
      sj["width_mean"] = w_all / static_cast<double>(npix);
      sj["width_mean_edge"] =
          n_edge > 0 ? json(w_edge / static_cast<double>(n_edge)) : json(nullptr);
      sj["width_mean_flat"] =
          n_flat > 0 ? json(w_flat / static_cast<double>(n_flat)) : json(nullptr);

      if (sampler_uses_prox(cc.sampler)) {
        sj["n_prox_evals"] = run.stats.n_prox_evals;
        sj["n_nonconverged_prox"] = run.stats.n_nonconverged_prox;
      }
      per[name] = sj;

      json tj;
      tj["wall_seconds"] = run.wall_seconds;
      tj["time_normalized_ess"] =
          std::isfinite(ess) ? json(time_normalized_ess(ess, run.wall_seconds))
                             : json(nullptr);
      timing_samplers[name] = tj;
    } catch (const std::exception& e) {
      per[name] = json{{"error", e.what()}};
      failed = true;
    }
  }

  summary["samplers"] = per;
  save_json(path_join(out_dir, "summary.json"), summary);

  json timing;
  timing["map_wall_seconds"] = map_wall;
  timing["samplers"] = timing_samplers;
  save_json(path_join(out_dir, "timing.json"), timing);
  return failed ? 1 : 0;
}

int cmd_denoise_lowrank(const KvConfig& cfg, const std::string& out_dir) {
  cfg.require_known({"n", "sigma2", "alpha", "n_samples", "burn_in",
                     "pmala_delta0", "pmala_thinning", "pmala_band_lo",
                     "pmala_band_hi", "rwmh_delta0", "rwmh_thinning",
                     "rwmh_band_lo", "rwmh_band_hi", "adaptation", "samplers",
                     "replica_indices", "acf_max_lag", "seed"});

  const int n = static_cast<int>(cfg.get_long("n", 64));
  const double sigma2 = cfg.get_double("sigma2", 0.01);
  const double alpha = cfg.get_double("alpha", 115.0);
  const long n_samples = cfg.get_long("n_samples", 2000);
  const long burn_in = cfg.get_long("burn_in", 2000);
  const std::uint64_t seed = seed_of(cfg);

  const std::vector<std::string> names = split_list(cfg.get("samplers", "pmala,rwmh"));
  for (const std::string& name : names)
    if (name != "pmala" && name != "rwmh")
      throw ConfigError("denoise-lowrank: samplers must be drawn from pmala,rwmh");

  const std::vector<long> replica_indices = parse_long_list(
      cfg.get("replica_indices", "750,1000,1250,1500,1750,2000"),
      "denoise-lowrank: replica_indices");
  for (long idx : replica_indices)
    if (idx < 1 || idx > n_samples)
      throw ConfigError("denoise-lowrank: replica index " + std::to_string(idx) +
                        " outside 1.." + std::to_string(n_samples));

  const Image truth = checkerboard_image(n);
  RngStream noise_rng(seed, kNoiseStream);
  NoiseSpec noise;
  noise.kind = NoiseSpec::Kind::Sigma2;
  noise.value = sigma2;
  const Observation obs = synthesize_observation(truth.data, nullptr, noise, noise_rng);

  LowRankModel model;
  model.y = obs.y;
  model.rows = n;
  model.cols = n;
  model.sigma2 = sigma2;
  model.alpha = alpha;
  const TargetDensity target = lowrank_target(model);
  const MapResult map = map_lowrank(model);

  write_matrix_csv(path_join(out_dir, "truth.csv"), truth);
  write_matrix_csv(path_join(out_dir, "observation.csv"), vec_to_image(obs.y, n, n));
  write_matrix_csv(path_join(out_dir, "map.csv"), vec_to_image(map.x, n, n));

  const std::size_t npix = truth.size();
  double truth_energy = 0.0;
  for (double v : truth.data) truth_energy += v * v;

  const Vec map_sv = singular_values(vec_to_image(map.x, n, n));
  long map_rank = 0;
  for (double s : map_sv)
    if (s > 1e-6) ++map_rank;

  json summary;
  summary["command"] = "denoise-lowrank";
  summary["rows"] = n;
  summary["cols"] = n;
  summary["sigma2"] = sigma2;
  summary["alpha"] = alpha;
  summary["seed"] = seed;
  summary["snr_db"] =
      10.0 * std::log10(truth_energy / (static_cast<double>(npix) * sigma2));
  summary["map"] = json{{"objective", map.objective},
                        {"mse", mse(map.x, truth.data)},
                        {"rank", map_rank}};

  const int acf_max_lag = static_cast<int>(cfg.get_long("acf_max_lag", 20));
  const bool adapt = cfg.get_bool("adaptation", true);

  json per = json::object();
  json timing_samplers = json::object();
  std::map<std::string, ChainRun> runs;
  std::map<std::string, double> tess;
  bool failed = false;
  std::vector<std::vector<std::string>> comparison_rows;

  for (const std::string& name : names) {
    try {
      ChainConfig cc;
      cc.sampler = sampler_from_name(name);
      cc.n_samples = static_cast<int>(n_samples);
      cc.burn_in = static_cast<int>(burn_in);
      cc.seed = seed;
      cc.stream = static_cast<std::uint64_t>(cc.sampler);
      if (name == "pmala") {
        cc.delta = cfg.get_double("pmala_delta0", 1e-4);
        cc.thinning = static_cast<int>(cfg.get_long("pmala_thinning", 100));
        if (adapt) {
          cc.adaptation.enabled = true;
          cc.adaptation.band_lo = cfg.get_double("pmala_band_lo", 0.4);
          cc.adaptation.band_hi = cfg.get_double("pmala_band_hi", 0.6);
        }
      } else {
        cc.delta = cfg.get_double("rwmh_delta0", 1e-5);
        cc.thinning = static_cast<int>(cfg.get_long("rwmh_thinning", 200));
        if (adapt) {
          cc.adaptation.enabled = true;
          cc.adaptation.band_lo = cfg.get_double("rwmh_band_lo", 0.2);
          cc.adaptation.band_hi = cfg.get_double("rwmh_band_hi", 0.3);
        }
      }

      ChainRun run = run_chain(target, cc, map.x);

      std::vector<Vec> trace_rows;
      trace_rows.reserve(run.log_density_trace.size());
      for (std::size_t t = 0; t < run.log_density_trace.size(); ++t)
        trace_rows.push_back({static_cast<double>(t + 1), run.log_density_trace[t]});
      write_csv(path_join(out_dir, "trace_" + name + ".csv"),
                {"iteration", "log_posterior"}, trace_rows);

      json sj;
      sj["acceptance_rate"] = run.acceptance_rate;
      sj["delta_final"] = run.delta_final;
      sj["diverged"] = run.diverged;

      const int lag = std::min<int>(acf_max_lag, cc.n_samples - 1);
      try {
        const Vec acf = autocorrelation(run.log_density_trace, lag);
        std::vector<Vec> acf_rows;
        for (int k = 0; k <= lag; ++k)
          acf_rows.push_back({static_cast<double>(k), acf[static_cast<std::size_t>(k)]});
        write_csv(path_join(out_dir, "acf_" + name + ".csv"), {"lag", "acf"}, acf_rows);
      } catch (const std::exception&) {
      }

      const double ess = put_ess(sj, run.log_density_trace);
      const double ess_per_sample = ess / static_cast<double>(cc.n_samples);
      sj["ess_per_sample"] =
          std::isfinite(ess) ? json(ess_per_sample) : json(nullptr);
      sj["mean_mse"] = mse(posterior_mean(run.samples), truth.data);
      if (sampler_uses_prox(cc.sampler)) {
        sj["n_prox_evals"] = run.stats.n_prox_evals;
        sj["n_nonconverged_prox"] = run.stats.n_nonconverged_prox;
      }
      per[name] = sj;

      comparison_rows.push_back({name, format_g17(run.acceptance_rate),
                                 format_g17(ess), format_g17(ess_per_sample),
                                 format_g17(run.delta_final)});

      json tj;
      tj["wall_seconds"] = run.wall_seconds;
      if (std::isfinite(ess)) {
        tess[name] = time_normalized_ess(ess, run.wall_seconds);
        tj["time_normalized_ess"] = tess[name];
      } else {
        tj["time_normalized_ess"] = nullptr;
      }
      timing_samplers[name] = tj;
      runs.emplace(name, std::move(run));
    } catch (const std::exception& e) {
      per[name] = json{{"error", e.what()}};
      failed = true;
    }
  }

  write_text_csv(path_join(out_dir, "comparison.csv"),
                 {"sampler", "acceptance_rate", "ess", "ess_per_sample",
                  "delta_final"},
                 comparison_rows);

  // Posterior predictive replicas come from the P-MALA chain; each selected
  // sample gets one fresh noise draw and the sorted-value distance to the
  // observation is compared against a moment-matched iid Gaussian image.
  if (auto it = runs.find("pmala"); it != runs.end()) {
    std::vector<int> idx0;
    idx0.reserve(replica_indices.size());
    for (long idx : replica_indices) idx0.push_back(static_cast<int>(idx - 1));
    RngStream replica_rng(seed, kReplicaStream);
    const std::vector<Vec> replicas =
        posterior_predictive_replicas(it->second.samples, idx0, sigma2, replica_rng);

    double w1_sum = 0.0;
    for (std::size_t r = 0; r < replicas.size(); ++r) {
      write_matrix_csv(
          path_join(out_dir, "replica_" + std::to_string(replica_indices[r]) + ".csv"),
          vec_to_image(replicas[r], n, n));
      w1_sum += wasserstein1(replicas[r], obs.y);
    }

    RngStream null_rng(seed, kNullReplicaStream);
    const double y_mean = sample_mean(obs.y);
    const double y_sd = std::sqrt(sample_variance(obs.y));
    Vec null_draw(npix);
    for (double& v : null_draw) v = y_mean + y_sd * null_rng.normal();

    json rj;
    rj["indices"] = replica_indices;
    rj["w1_mean"] = replicas.empty()
                        ? json(nullptr)
                        : json(w1_sum / static_cast<double>(replicas.size()));
    rj["w1_noise_reference"] = wasserstein1(null_draw, obs.y);
    summary["replicas"] = rj;
  }

  summary["samplers"] = per;
  save_json(path_join(out_dir, "summary.json"), summary);

  json timing;
  timing["samplers"] = timing_samplers;
  if (tess.count("pmala") && tess.count("rwmh") && tess["rwmh"] > 0.0)
    timing["tess_ratio_pmala_over_rwmh"] = tess["pmala"] / tess["rwmh"];
  save_json(path_join(out_dir, "timing.json"), timing);
  return failed ? 1 : 0;
}

int cmd_prox_check(const KvConfig& cfg, const std::string& out_dir) {
  cfg.require_known({"cases", "seed"});
  const int cases = static_cast<int>(cfg.get_long("cases", 100));
  const std::uint64_t seed = seed_of(cfg);

  const std::vector<oracle::SuiteResult> suites = oracle::run_prox_suites(cases, seed);

  std::vector<std::vector<std::string>> rows;
  json per = json::object();
  bool all_pass = true;
  for (const auto& s : suites) {
    rows.push_back({s.op, std::to_string(s.cases), format_g17(s.max_deviation),
                    format_g17(s.tolerance), s.pass ? "1" : "0"});
    per[s.op] = json{{"cases", s.cases},
                     {"max_error", s.max_deviation},
                     {"tolerance", s.tolerance},
                     {"pass", s.pass}};
    all_pass = all_pass && s.pass;
  }
  write_text_csv(path_join(out_dir, "prox_check.csv"),
                 {"suite", "cases", "max_error", "tolerance", "pass"}, rows);

  json summary;
  summary["command"] = "prox-check";
  summary["cases"] = cases;
  summary["seed"] = seed;
  summary["all_pass"] = all_pass;
  summary["suites"] = per;
  save_json(path_join(out_dir, "summary.json"), summary);
  return all_pass ? 0 : 1;
}

int cmd_diagnose(const KvConfig& cfg, const std::string& out_dir) {
  cfg.require_known({"input", "column", "max_lag", "quantiles", "seed"});
  const std::string input = cfg.get("input", "");
  if (input.empty()) throw ConfigError("diagnose: input=<csv path> is required");

  const CsvTable table = read_csv(input);
  if (table.rows.empty()) throw IoError("diagnose: " + input + " has no data rows");
  const std::string column = cfg.get("column", "state");
  const Vec values = table.column_values(table.column(column));
  const long n = static_cast<long>(values.size());

  const std::string quantile_spec = cfg.get("quantiles", "0.05,0.5,0.95");
  const std::vector<double> probs =
      parse_double_list(quantile_spec, "diagnose: quantiles");
  for (double p : probs)
    if (!(p >= 0.0 && p <= 1.0))
      throw ConfigError("diagnose: quantile levels must lie in [0, 1]");

  const int lag =
      std::min<int>(static_cast<int>(cfg.get_long("max_lag", 20)), static_cast<int>(n - 1));
  const Vec acf = autocorrelation(values, lag);
  std::vector<Vec> acf_rows;
  for (int k = 0; k <= lag; ++k)
    acf_rows.push_back({static_cast<double>(k), acf[static_cast<std::size_t>(k)]});
  write_csv(path_join(out_dir, "acf.csv"), {"lag", "acf"}, acf_rows);

  const double ess = effective_sample_size(values);
  const Vec q = quantiles(values, Vec(probs.begin(), probs.end()));

  json summary;
  summary["command"] = "diagnose";
  summary["input"] = input;
  summary["column"] = column;
  summary["n"] = n;
  summary["mean"] = sample_mean(values);
  summary["variance"] = sample_variance(values);
  summary["ess"] = ess;
  summary["max_lag"] = lag;
  json qj = json::object();
  const std::vector<std::string> prob_names = split_list(quantile_spec);
  for (std::size_t i = 0; i < q.size(); ++i) qj[prob_names[i]] = q[i];
  summary["quantiles"] = qj;
  save_json(path_join(out_dir, "summary.json"), summary);
  return 0;
}

int run_command(const CliOptions& options) {
  try {
    KvConfig cfg;
    if (!options.config_path.empty()) cfg = KvConfig::parse_file(options.config_path);
    for (const std::string& assignment : options.overrides)
      cfg.apply_override(assignment);
    if (options.seed_set) cfg.set("seed", std::to_string(options.seed));

    const std::string out_dir = options.out_dir.empty() ? "." : options.out_dir;
    std::filesystem::create_directories(out_dir);

    if (options.command == "benchmark1d") return cmd_benchmark1d(cfg, out_dir);
    if (options.command == "deconvolve") return cmd_deconvolve(cfg, out_dir);
    if (options.command == "denoise-lowrank") return cmd_denoise_lowrank(cfg, out_dir);
    if (options.command == "prox-check") return cmd_prox_check(cfg, out_dir);
    if (options.command == "diagnose") return cmd_diagnose(cfg, out_dir);
    throw ConfigError("unknown command: " + options.command);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace proxmcmc
