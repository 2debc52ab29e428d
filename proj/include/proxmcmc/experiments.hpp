#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "proxmcmc/io.hpp"

namespace proxmcmc {

/// Parsed command line: subcommand name, optional config file, repeated
/// key=value overrides and the output directory for artifacts.
struct CliOptions {
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  bool seed_set = false;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

/// Merges the configuration sources (file first, then --set overrides, then
/// --seed), creates out_dir and dispatches to the subcommand. Returns the
/// process exit code: 0 on success, 1 when a model or sampler fails, 2 for
/// configuration and I/O problems.
int run_command(const CliOptions& options);

// The subcommands, exposed for in-process testing. Each consumes a fully
// merged configuration, rejects unknown keys and writes its artifacts under
// out_dir. All randomness derives from the "seed" key, so outputs are
// byte-identical across runs except for timing.json.
int cmd_benchmark1d(const KvConfig& cfg, const std::string& out_dir);
int cmd_deconvolve(const KvConfig& cfg, const std::string& out_dir);
int cmd_denoise_lowrank(const KvConfig& cfg, const std::string& out_dir);
int cmd_prox_check(const KvConfig& cfg, const std::string& out_dir);
int cmd_diagnose(const KvConfig& cfg, const std::string& out_dir);

}  // namespace proxmcmc
