#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "proxmcmc/diagnostics.hpp"
#include "proxmcmc/experiments.hpp"
#include "proxmcmc/io.hpp"
#include "proxmcmc/models.hpp"
#include "proxmcmc/rng.hpp"

using namespace proxmcmc;
using nlohmann::json;

namespace {

struct TempDir {
  std::filesystem::path root;

  TempDir() {
    root = std::filesystem::temp_directory_path() /
           ("proxmcmc_exp_" + std::to_string(::getpid()) + "_" +
            std::to_string(next_id()++));
    std::filesystem::create_directories(root);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(root, ec);
  }

  static int& next_id() {
    static int id = 0;
    return id;
  }

  /// Creates root/<name> and returns it, for use as a command output directory.
  std::string sub(const std::string& name) const {
    const auto p = root / name;
    std::filesystem::create_directories(p);
    return p.string();
  }

  std::string file(const std::string& name) const { return (root / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE_MESSAGE(f.good(), "cannot open ", path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json load_json(const std::string& dir, const std::string& name) {
  return json::parse(slurp((std::filesystem::path(dir) / name).string()));
}

bool has_file(const std::string& dir, const std::string& name) {
  return std::filesystem::is_regular_file(std::filesystem::path(dir) / name);
}

std::vector<std::string> dir_listing(const std::string& dir) {
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file()) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

/// Two output directories must hold the same files with identical bytes;
/// timing.json is exempt because wall-clock numbers vary between runs.
void check_same_outputs(const std::string& a, const std::string& b) {
  const std::vector<std::string> la = dir_listing(a);
  const std::vector<std::string> lb = dir_listing(b);
  REQUIRE(la == lb);
  for (const std::string& name : la) {
    if (name == "timing.json") continue;
    CAPTURE(name);
    CHECK(slurp((std::filesystem::path(a) / name).string()) ==
          slurp((std::filesystem::path(b) / name).string()));
  }
}

KvConfig make_cfg(std::initializer_list<std::pair<const char*, const char*>> kv) {
  KvConfig cfg;
  for (const auto& [k, v] : kv) cfg.set(k, v);
  return cfg;
}

/// AR(1) chain x <- 0.5 x + z written as a two-column trace CSV.
Vec write_chain_csv(const std::string& path, int n, std::uint64_t seed) {
  RngStream rng(seed, 17);
  Vec xs(static_cast<std::size_t>(n));
  double x = 0.0;
  std::vector<Vec> rows;
  for (int i = 0; i < n; ++i) {
    x = 0.5 * x + rng.normal();
    xs[static_cast<std::size_t>(i)] = x;
    rows.push_back({static_cast<double>(i + 1), x});
  }
  write_csv(path, {"iteration", "state"}, rows);
  return xs;
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("benchmark1d writes traces, summary and timing") {
    TempDir td;
    const std::string out = td.sub("bench");
    const KvConfig cfg = make_cfg({{"benchmark", "gaussian"},
                                   {"gamma", "0.5"},
                                   {"samplers", "pmala,mala"},
                                   {"delta", "0.8"},
                                   {"n_samples", "300"},
                                   {"burn_in", "100"},
                                   {"thinning", "2"},
                                   {"x0", "2"},
                                   {"seed", "42"}});
    CHECK(cmd_benchmark1d(cfg, out) == 0);

    for (const char* name :
         {"trace_pmala.csv", "trace_mala.csv", "summary.json", "timing.json"})
      CHECK(has_file(out, name));

    const json s = load_json(out, "summary.json");
    CHECK(s["command"] == "benchmark1d");
    CHECK(s["benchmark"] == "gaussian");
    CHECK(s["gamma"].get<double>() == 0.5);
    CHECK(!s.contains("box_halfwidth"));
    CHECK(s["delta"].get<double>() == 0.8);
    CHECK(s["n_samples"] == 300);
    CHECK(s["burn_in"] == 100);
    CHECK(s["thinning"] == 2);
    CHECK(s["x0"].get<double>() == 2.0);
    CHECK(s["seed"] == 42);

    for (const char* name : {"pmala", "mala"}) {
      CAPTURE(name);
      const json& sj = s["samplers"][name];
      CHECK(sj["acceptance_rate"].get<double>() > 0.0);
      CHECK(sj["acceptance_rate"].get<double>() <= 1.0);
      CHECK(sj["diverged"] == false);
      CHECK(sj["divergence_step"].is_null());
      CHECK(std::abs(sj["mean"].get<double>()) < 0.5);
      CHECK(sj["variance"].get<double>() > 0.4);
      CHECK(sj["variance"].get<double>() < 2.5);
      CHECK(sj["ess"].is_number());
      CHECK(sj["ess"].get<double>() > 0.0);
    }
    // Fixed step size: one prox at start plus one per step over 100 + 600 steps.
    CHECK(s["samplers"]["pmala"]["n_prox_evals"] == 701);
    CHECK(s["samplers"]["pmala"]["n_nonconverged_prox"] == 0);
    CHECK(!s["samplers"]["mala"].contains("n_prox_evals"));

    const CsvTable trace =
        read_csv((std::filesystem::path(out) / "trace_pmala.csv").string());
    REQUIRE(trace.header ==
            std::vector<std::string>({"iteration", "state", "log_density", "accepted"}));
    REQUIRE(trace.rows.size() == 300);
    const Vec states = trace.column_values(1);
    const Vec logds = trace.column_values(2);
    const Vec accepted = trace.column_values(3);
    for (std::size_t t = 0; t < trace.rows.size(); ++t) {
      CHECK(trace.rows[t][0] == static_cast<double>(t + 1));
      CHECK(std::isfinite(states[t]));
      CHECK(logds[t] == doctest::Approx(-0.5 * states[t] * states[t]).epsilon(1e-14));
      CHECK((accepted[t] == 0.0 || accepted[t] == 1.0));
    }
    // The summary moments are computed from exactly these values, and the CSV
    // round trip is bitwise, so equality is exact.
    CHECK(s["samplers"]["pmala"]["mean"].get<double>() == sample_mean(states));
    CHECK(s["samplers"]["pmala"]["variance"].get<double>() == sample_variance(states));

    const json t = load_json(out, "timing.json");
    CHECK(t["samplers"]["pmala"]["wall_seconds"].get<double>() > 0.0);
    CHECK(t["samplers"]["mala"]["wall_seconds"].get<double>() > 0.0);
  }

  TEST_CASE("benchmark1d surfaces per-sampler failures in the summary") {
    TempDir td;

    SUBCASE("gradient sampler started at a non-differentiable point") {
      const std::string out = td.sub("fail");
      const KvConfig cfg = make_cfg({{"benchmark", "laplace"},
                                     {"samplers", "pmala,mala"},
                                     {"delta", "0.5"},
                                     {"n_samples", "60"},
                                     {"burn_in", "20"},
                                     {"x0", "0"},
                                     {"seed", "1"}});
      CHECK(cmd_benchmark1d(cfg, out) == 1);

      const json s = load_json(out, "summary.json");
      CHECK(s["samplers"]["mala"].contains("error"));
      CHECK(s["samplers"]["mala"]["error"].is_string());
      CHECK(!s["samplers"]["mala"].contains("acceptance_rate"));
      CHECK(s["samplers"]["pmala"]["acceptance_rate"].get<double>() > 0.0);
      CHECK(has_file(out, "trace_pmala.csv"));
      CHECK(!has_file(out, "trace_mala.csv"));
    }

    SUBCASE("unknown sampler name") {
      const std::string out = td.sub("unknown");
      const KvConfig cfg =
          make_cfg({{"samplers", "frwmh"}, {"n_samples", "10"}, {"seed", "1"}});
      CHECK(cmd_benchmark1d(cfg, out) == 1);
      const json s = load_json(out, "summary.json");
      CHECK(s["samplers"]["frwmh"].contains("error"));
    }
  }

  TEST_CASE("experiment configs reject unknown keys") {
    TempDir td;
    const std::string out = td.sub("keys");
    const KvConfig bogus = make_cfg({{"n_sample", "10"}});
    CHECK_THROWS_AS(cmd_benchmark1d(bogus, out), ConfigError);
    CHECK_THROWS_AS(cmd_deconvolve(bogus, out), ConfigError);
    CHECK_THROWS_AS(cmd_denoise_lowrank(bogus, out), ConfigError);
    CHECK_THROWS_AS(cmd_prox_check(bogus, out), ConfigError);
    CHECK_THROWS_AS(cmd_diagnose(bogus, out), ConfigError);
  }

  TEST_CASE("deconvolve writes imaging artifacts and sampler stats") {
    TempDir td;
    const std::string out = td.sub("deconv");
    const KvConfig cfg = make_cfg({{"n", "16"},
                                   {"truth", "phantom"},
                                   {"kernel_rows", "3"},
                                   {"kernel_cols", "3"},
                                   {"noise_kind", "sigma2"},
                                   {"noise_value", "1e-3"},
                                   {"alpha", "5"},
                                   {"delta0", "1e-5"},
                                   {"n_samples", "120"},
                                   {"burn_in", "300"},
                                   {"thinning", "2"},
                                   {"samplers", "pmala,mala"},
                                   {"acf_max_lag", "10"},
                                   {"tv_max_iters", "30"},
                                   {"map_max_iters", "80"},
                                   {"seed", "3"}});
    CHECK(cmd_deconvolve(cfg, out) == 0);

    for (const char* name :
         {"truth.pgm", "observation.pgm", "map.pgm", "trace_pmala.csv",
          "trace_mala.csv", "acf_pmala.csv", "acf_mala.csv", "mean_pmala.pgm",
          "mean_mala.pgm", "width_pmala.pgm", "width_mala.pgm", "width_pmala.csv",
          "width_mala.csv", "summary.json", "timing.json"})
      CHECK(has_file(out, name));

    const json s = load_json(out, "summary.json");
    CHECK(s["command"] == "deconvolve");
    CHECK(s["rows"] == 16);
    CHECK(s["cols"] == 16);
    CHECK(s["kernel_rows"] == 3);
    CHECK(s["kernel_cols"] == 3);
    CHECK(s["noise"]["kind"] == "sigma2");
    CHECK(s["noise"]["sigma2"].get<double>() == doctest::Approx(1e-3));
    CHECK(s["alpha"].get<double>() == 5.0);
    CHECK(s["seed"] == 3);

    CHECK(std::isfinite(s["map"]["objective"].get<double>()));
    CHECK(s["map"]["iters"].get<int>() >= 1);
    CHECK(s["map"]["hit_cap"].is_boolean());
    CHECK(s["map"]["mse"].get<double>() >= 0.0);
    CHECK(s["map"]["observation_mse"].get<double>() >= 0.0);

    for (const char* name : {"pmala", "mala"}) {
      CAPTURE(name);
      const json& sj = s["samplers"][name];
      CHECK(sj["acceptance_rate"].get<double>() >= 0.0);
      CHECK(sj["acceptance_rate"].get<double>() <= 1.0);
      CHECK(sj["diverged"] == false);
      CHECK(sj["acf_max_lag"] == 10);
      CHECK(sj["acf_at_max_lag"].is_number());
      CHECK(std::abs(sj["acf_at_max_lag"].get<double>()) <= 1.0);
      CHECK(sj["ess"].is_number());
      CHECK(sj["delta_final"].get<double>() > 0.0);
      CHECK(sj["mean_mse"].get<double>() >= 0.0);
      CHECK(sj["width_mean"].get<double>() > 0.0);
      CHECK(sj["width_mean_edge"].get<double>() > 0.0);
      CHECK(sj["width_mean_flat"].get<double>() > 0.0);
    }
    CHECK(s["samplers"]["pmala"].contains("n_prox_evals"));
    CHECK(!s["samplers"]["mala"].contains("n_prox_evals"));

    const CsvTable acf =
        read_csv((std::filesystem::path(out) / "acf_pmala.csv").string());
    REQUIRE(acf.rows.size() == 11);
    CHECK(acf.rows[0][0] == 0.0);
    CHECK(acf.rows[0][1] == 1.0);

    const Image truth =
        read_pgm((std::filesystem::path(out) / "truth.pgm").string());
    CHECK(truth.rows == 16);
    CHECK(truth.cols == 16);

    const Image width =
        read_matrix_csv((std::filesystem::path(out) / "width_pmala.csv").string());
    REQUIRE(width.rows == 16);
    for (double w : width.data) CHECK(w >= 0.0);

    const json t = load_json(out, "timing.json");
    CHECK(t["map_wall_seconds"].get<double>() > 0.0);
    CHECK(t["samplers"]["pmala"]["wall_seconds"].get<double>() > 0.0);
    CHECK(t["samplers"]["pmala"]["time_normalized_ess"].get<double>() > 0.0);
  }

  TEST_CASE("denoise-lowrank reproduces the map estimate and writes replicas") {
    TempDir td;
    const std::string out = td.sub("lowrank");
    const KvConfig cfg = make_cfg({{"n", "16"},
                                   {"sigma2", "0.01"},
                                   {"n_samples", "150"},
                                   {"burn_in", "200"},
                                   {"pmala_delta0", "1e-4"},
                                   {"pmala_thinning", "4"},
                                   {"rwmh_delta0", "1e-5"},
                                   {"rwmh_thinning", "4"},
                                   {"replica_indices", "50,100,150"},
                                   {"acf_max_lag", "10"},
                                   {"seed", "11"}});
    CHECK(cmd_denoise_lowrank(cfg, out) == 0);

    for (const char* name :
         {"truth.csv", "observation.csv", "map.csv", "trace_pmala.csv",
          "trace_rwmh.csv", "acf_pmala.csv", "acf_rwmh.csv", "comparison.csv",
          "replica_50.csv", "replica_100.csv", "replica_150.csv", "summary.json",
          "timing.json"})
      CHECK(has_file(out, name));

    // Rebuild the observation from the documented noise stream and check the
    // stored truth, observation and MAP estimate entry for entry.
    const Image truth = checkerboard_image(16);
    RngStream noise_rng(11, 1000);
    NoiseSpec spec;
    spec.kind = NoiseSpec::Kind::Sigma2;
    spec.value = 0.01;
    const Observation obs = synthesize_observation(truth.data, nullptr, spec, noise_rng);
    LowRankModel model;
    model.y = obs.y;
    model.rows = 16;
    model.cols = 16;
    model.sigma2 = 0.01;
    model.alpha = 115.0;
    const MapResult map = map_lowrank(model);

    const Image truth_back =
        read_matrix_csv((std::filesystem::path(out) / "truth.csv").string());
    const Image obs_back =
        read_matrix_csv((std::filesystem::path(out) / "observation.csv").string());
    const Image map_back =
        read_matrix_csv((std::filesystem::path(out) / "map.csv").string());
    REQUIRE(truth_back.data.size() == truth.data.size());
    REQUIRE(obs_back.data.size() == obs.y.size());
    REQUIRE(map_back.data.size() == map.x.size());
    for (std::size_t i = 0; i < truth.data.size(); ++i) {
      CHECK(truth_back.data[i] == truth.data[i]);
      CHECK(obs_back.data[i] == obs.y[i]);
      CHECK(map_back.data[i] == map.x[i]);
    }

    const json s = load_json(out, "summary.json");
    CHECK(s["command"] == "denoise-lowrank");
    CHECK(s["rows"] == 16);
    CHECK(s["cols"] == 16);
    CHECK(s["sigma2"].get<double>() == 0.01);
    CHECK(s["alpha"].get<double>() == 115.0);
    CHECK(s["seed"] == 11);
    CHECK(s["map"]["rank"] == 2);
    CHECK(s["map"]["objective"].get<double>() ==
          doctest::Approx(map.objective).epsilon(1e-14));
    CHECK(s["map"]["mse"].get<double>() >= 0.0);

    double energy = 0.0;
    for (double v : truth.data) energy += v * v;
    const double snr = 10.0 * std::log10(energy / (256.0 * 0.01));
    CHECK(s["snr_db"].get<double>() == doctest::Approx(snr).epsilon(1e-12));

    REQUIRE(s.contains("replicas"));
    CHECK(s["replicas"]["indices"] == json({50, 100, 150}));
    CHECK(s["replicas"]["w1_mean"].get<double>() > 0.0);
    CHECK(s["replicas"]["w1_noise_reference"].get<double>() > 0.0);

    for (const char* name : {"pmala", "rwmh"}) {
      CAPTURE(name);
      const json& sj = s["samplers"][name];
      CHECK(sj["acceptance_rate"].get<double>() > 0.0);
      CHECK(sj["acceptance_rate"].get<double>() <= 1.0);
      CHECK(sj["ess"].is_number());
      CHECK(sj["delta_final"].get<double>() > 0.0);
    }
    // Adaptation recomputes the cached prox once per burn-in step on top of
    // the start-up call and one call per step: 800 + 1 + 200.
    CHECK(s["samplers"]["pmala"]["n_prox_evals"] == 1001);
    CHECK(!s["samplers"]["rwmh"].contains("n_prox_evals"));

    const std::string cmp = slurp((std::filesystem::path(out) / "comparison.csv").string());
    CHECK(cmp.rfind("sampler,acceptance_rate,ess,ess_per_sample,delta_final\n", 0) == 0);
    CHECK(cmp.find("\npmala,") != std::string::npos);
    CHECK(cmp.find("\nrwmh,") != std::string::npos);

    const Image rep =
        read_matrix_csv((std::filesystem::path(out) / "replica_50.csv").string());
    REQUIRE(rep.rows == 16);
    for (double v : rep.data) CHECK(std::isfinite(v));

    const json t = load_json(out, "timing.json");
    CHECK(t["samplers"]["pmala"]["wall_seconds"].get<double>() > 0.0);
    CHECK(t["samplers"]["rwmh"]["wall_seconds"].get<double>() > 0.0);
    CHECK(t["tess_ratio_pmala_over_rwmh"].get<double>() > 0.0);
  }

  TEST_CASE("denoise-lowrank validates samplers and replica indices") {
    TempDir td;
    CHECK_THROWS_AS(
        cmd_denoise_lowrank(make_cfg({{"samplers", "pmala,mala"}}), td.sub("a")),
        ConfigError);
    CHECK_THROWS_AS(cmd_denoise_lowrank(make_cfg({{"n_samples", "100"},
                                                  {"replica_indices", "50,101"}}),
                                        td.sub("b")),
                    ConfigError);
    CHECK_THROWS_AS(cmd_denoise_lowrank(make_cfg({{"replica_indices", "0"}}),
                                        td.sub("c")),
                    ConfigError);
  }

  TEST_CASE("prox-check writes a pass table") {
    TempDir td;
    const std::string out = td.sub("prox");
    const KvConfig cfg = make_cfg({{"cases", "25"}, {"seed", "5"}});
    CHECK(cmd_prox_check(cfg, out) == 0);
    CHECK(!has_file(out, "timing.json"));

    const json s = load_json(out, "summary.json");
    CHECK(s["command"] == "prox-check");
    CHECK(s["cases"] == 25);
    CHECK(s["seed"] == 5);
    CHECK(s["all_pass"] == true);
    REQUIRE(s["suites"].size() == 6);
    for (const char* op : {"soft_threshold", "quadratic", "quartic",
                           "box_projection", "nuclear_svt", "tv_2x2"}) {
      CAPTURE(op);
      REQUIRE(s["suites"].contains(op));
      const json& sj = s["suites"][op];
      CHECK(sj["cases"] == 25);
      CHECK(sj["pass"] == true);
      CHECK(sj["max_error"].get<double>() <= sj["tolerance"].get<double>());
    }

    const std::string table = slurp((std::filesystem::path(out) / "prox_check.csv").string());
    CHECK(table.rfind("suite,cases,max_error,tolerance,pass\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 7);
  }

  TEST_CASE("diagnose reports chain statistics from a trace csv") {
    TempDir td;
    const std::string input = td.file("chain.csv");
    const Vec xs = write_chain_csv(input, 400, 99);

    const std::string out = td.sub("diag");
    const KvConfig cfg = make_cfg({{"input", input.c_str()},
                                   {"max_lag", "15"},
                                   {"quantiles", "0.1,0.5,0.9"}});
    CHECK(cmd_diagnose(cfg, out) == 0);

    const json s = load_json(out, "summary.json");
    CHECK(s["command"] == "diagnose");
    CHECK(s["input"] == input);
    CHECK(s["column"] == "state");
    CHECK(s["n"] == 400);
    CHECK(s["mean"].get<double>() == sample_mean(xs));
    CHECK(s["variance"].get<double>() == sample_variance(xs));
    CHECK(s["ess"].get<double>() > 0.0);
    CHECK(s["ess"].get<double>() < 440.0);
    CHECK(s["max_lag"] == 15);

    REQUIRE(s["quantiles"].size() == 3);
    const Vec q = quantiles(xs, {0.1, 0.5, 0.9});
    CHECK(s["quantiles"]["0.1"].get<double>() == q[0]);
    CHECK(s["quantiles"]["0.5"].get<double>() == q[1]);
    CHECK(s["quantiles"]["0.9"].get<double>() == q[2]);

    const CsvTable acf = read_csv((std::filesystem::path(out) / "acf.csv").string());
    REQUIRE(acf.header == std::vector<std::string>({"lag", "acf"}));
    REQUIRE(acf.rows.size() == 16);
    CHECK(acf.rows[0][1] == 1.0);

    SUBCASE("max_lag is clamped to the chain length") {
      const std::string out2 = td.sub("diag_clamped");
      const KvConfig cfg2 = make_cfg({{"input", input.c_str()}, {"max_lag", "1000"}});
      CHECK(cmd_diagnose(cfg2, out2) == 0);
      const json s2 = load_json(out2, "summary.json");
      CHECK(s2["max_lag"] == 399);
      CHECK(read_csv((std::filesystem::path(out2) / "acf.csv").string()).rows.size() ==
            400);
    }
  }

  TEST_CASE("run_command maps errors to exit codes and respects seed precedence") {
    TempDir td;
    const std::string conf = td.file("bench.conf");
    {
      std::ofstream f(conf);
      f << "benchmark=gaussian\ngamma=0.5\nsamplers=rwmh\ndelta=2.5\n"
           "n_samples=120\nseed=3\n";
    }

    CliOptions base;
    base.command = "benchmark1d";
    base.config_path = conf;

    SUBCASE("config file seed applies when nothing overrides it") {
      base.out_dir = td.sub("p0");
      CHECK(run_command(base) == 0);
      CHECK(load_json(base.out_dir, "summary.json")["seed"] == 3);
    }

    SUBCASE("--set overrides the file") {
      base.out_dir = td.sub("p1");
      base.overrides = {"seed=5"};
      CHECK(run_command(base) == 0);
      CHECK(load_json(base.out_dir, "summary.json")["seed"] == 5);
    }

    SUBCASE("--seed overrides both") {
      base.out_dir = td.sub("p2");
      base.overrides = {"seed=5"};
      base.seed_set = true;
      base.seed = 9;
      CHECK(run_command(base) == 0);
      CHECK(load_json(base.out_dir, "summary.json")["seed"] == 9);
    }

    SUBCASE("the output directory is created on demand") {
      base.out_dir = (td.root / "deep" / "nested").string();
      CHECK(run_command(base) == 0);
      CHECK(has_file(base.out_dir, "summary.json"));
    }

    SUBCASE("usage and i/o problems exit with 2") {
      CliOptions opt;
      opt.out_dir = td.sub("p3");

      opt.command = "frobnicate";
      CHECK(run_command(opt) == 2);

      opt.command = "benchmark1d";
      opt.config_path = td.file("missing.conf");
      CHECK(run_command(opt) == 2);

      opt.config_path.clear();
      opt.overrides = {"wibble=1"};
      CHECK(run_command(opt) == 2);

      opt.command = "diagnose";
      opt.overrides = {};
      CHECK(run_command(opt) == 2);  // input= is required

      opt.overrides = {"input=" + td.file("missing.csv")};
      CHECK(run_command(opt) == 2);

      const std::string chain = td.file("chain.csv");
      write_chain_csv(chain, 120, 4);
      opt.overrides = {"input=" + chain, "column=momentum"};
      CHECK(run_command(opt) == 2);

      opt.overrides = {"input=" + chain, "quantiles=0.1,1.5"};
      CHECK(run_command(opt) == 2);

      const std::string header_only = td.file("empty.csv");
      write_csv(header_only, {"iteration", "state"}, {});
      opt.overrides = {"input=" + header_only};
      CHECK(run_command(opt) == 2);
    }

    SUBCASE("model and sampling failures exit with 1") {
      CliOptions opt;
      opt.out_dir = td.sub("p4");

      opt.command = "benchmark1d";
      opt.overrides = {"benchmark=nope", "n_samples=5"};
      CHECK(run_command(opt) == 1);

      opt.overrides = {"benchmark=laplace", "samplers=mala", "x0=0", "n_samples=5"};
      CHECK(run_command(opt) == 1);

      const std::string shorty = td.file("short.csv");
      write_chain_csv(shorty, 40, 4);
      opt.command = "diagnose";
      opt.overrides = {"input=" + shorty};  // too short for an ESS estimate
      CHECK(run_command(opt) == 1);
    }
  }

  TEST_CASE("command outputs are byte-identical across reruns") {
    TempDir td;

    SUBCASE("benchmark1d") {
      const KvConfig cfg = make_cfg({{"benchmark", "gaussian"},
                                     {"gamma", "0.5"},
                                     {"samplers", "pmala,rwmh"},
                                     {"delta", "1.2"},
                                     {"n_samples", "150"},
                                     {"burn_in", "50"},
                                     {"seed", "7"}});
      const std::string a = td.sub("a");
      const std::string b = td.sub("b");
      REQUIRE(cmd_benchmark1d(cfg, a) == 0);
      REQUIRE(cmd_benchmark1d(cfg, b) == 0);
      check_same_outputs(a, b);
    }

    SUBCASE("deconvolve") {
      const KvConfig cfg = make_cfg({{"n", "16"},
                                     {"kernel_rows", "3"},
                                     {"kernel_cols", "3"},
                                     {"noise_kind", "sigma2"},
                                     {"noise_value", "1e-3"},
                                     {"alpha", "5"},
                                     {"delta0", "1e-5"},
                                     {"n_samples", "100"},
                                     {"burn_in", "150"},
                                     {"thinning", "1"},
                                     {"samplers", "pmala"},
                                     {"acf_max_lag", "8"},
                                     {"tv_max_iters", "25"},
                                     {"map_max_iters", "50"},
                                     {"seed", "13"}});
      const std::string a = td.sub("a");
      const std::string b = td.sub("b");
      REQUIRE(cmd_deconvolve(cfg, a) == 0);
      REQUIRE(cmd_deconvolve(cfg, b) == 0);
      check_same_outputs(a, b);
    }

    SUBCASE("denoise-lowrank") {
      const KvConfig cfg = make_cfg({{"n", "16"},
                                     {"n_samples", "120"},
                                     {"burn_in", "150"},
                                     {"pmala_thinning", "4"},
                                     {"rwmh_thinning", "4"},
                                     {"replica_indices", "60,120"},
                                     {"acf_max_lag", "10"},
                                     {"seed", "17"}});
      const std::string a = td.sub("a");
      const std::string b = td.sub("b");
      REQUIRE(cmd_denoise_lowrank(cfg, a) == 0);
      REQUIRE(cmd_denoise_lowrank(cfg, b) == 0);
      check_same_outputs(a, b);
    }

    SUBCASE("prox-check") {
      const KvConfig cfg = make_cfg({{"cases", "20"}, {"seed", "3"}});
      const std::string a = td.sub("a");
      const std::string b = td.sub("b");
      REQUIRE(cmd_prox_check(cfg, a) == 0);
      REQUIRE(cmd_prox_check(cfg, b) == 0);
      check_same_outputs(a, b);
    }

    SUBCASE("diagnose") {
      const std::string input = td.file("chain.csv");
      write_chain_csv(input, 200, 23);
      const KvConfig cfg = make_cfg({{"input", input.c_str()}, {"max_lag", "12"}});
      const std::string a = td.sub("a");
      const std::string b = td.sub("b");
      REQUIRE(cmd_diagnose(cfg, a) == 0);
      REQUIRE(cmd_diagnose(cfg, b) == 0);
      check_same_outputs(a, b);
    }
  }
}
