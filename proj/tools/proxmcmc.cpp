#include <cstdlib>
#include <string>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"

#include "proxmcmc/experiments.hpp"

namespace {

void apply_thread_env() {
#ifdef _OPENMP
  if (const char* env = std::getenv("PROXMCMC_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) omp_set_num_threads(n);
  }
#endif
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();

  CLI::App app{"Proximal MCMC experiment harness"};
  app.require_subcommand(1);

  proxmcmc::CliOptions opt;
  const std::pair<const char*, const char*> commands[] = {
      {"benchmark1d", "Compare samplers on the scalar benchmark densities"},
      {"deconvolve", "Sample the TV-regularized image deconvolution posterior"},
      {"denoise-lowrank", "Sample the nuclear-norm low-rank denoising posterior"},
      {"prox-check", "Verify prox solvers against brute-force oracles"},
      {"diagnose", "Convergence diagnostics for a stored chain CSV"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", opt.config_path,
                    "configuration file with key=value lines");
    sub->add_option("--seed", opt.seed, "random seed (overrides the config)");
    sub->add_option("--out", opt.out_dir, "output directory (default: .)");
    sub->add_option("--set", opt.overrides,
                    "single key=value override, repeatable");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  opt.command = sub->get_name();
  opt.seed_set = sub->count("--seed") > 0;
  return proxmcmc::run_command(opt);
}
