// Serial versus OpenMP timings for the elementwise kernels. Run with
// PROXMCMC_THREADS (or OMP_NUM_THREADS) varied to see the scaling.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "proxmcmc/kernels.hpp"
#include "proxmcmc/rng.hpp"

namespace {

namespace k = proxmcmc::kernels;
using k::Exec;

std::vector<double> random_vec(std::size_t n, std::uint64_t stream) {
  proxmcmc::RngStream rng(1234, stream);
  return rng.normal_vec(n);
}

template <Exec E>
void BM_SoftThreshold(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_vec(n, 1);
  std::vector<double> z(n);
  for (auto _ : state) {
    k::soft_threshold(x.data(), z.data(), n, 0.5, E);
    benchmark::DoNotOptimize(z.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * n);
}

template <Exec E>
void BM_Axpby(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_vec(n, 1);
  const auto y = random_vec(n, 2);
  std::vector<double> z(n);
  for (auto _ : state) {
    k::axpby(0.3, x.data(), 0.7, y.data(), z.data(), n, E);
    benchmark::DoNotOptimize(z.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * n);
}

template <Exec E>
void BM_MaxAbsDiff(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vec(n, 1);
  const auto b = random_vec(n, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(k::max_abs_diff(a.data(), b.data(), n, E));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * n);
}

template <Exec E>
void BM_GradientForward(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto n = static_cast<std::size_t>(side) * side;
  const auto img = random_vec(n, 1);
  std::vector<double> gh(n), gv(n);
  for (auto _ : state) {
    k::gradient_forward(img.data(), side, side, gh.data(), gv.data(), E);
    benchmark::DoNotOptimize(gh.data());
    benchmark::DoNotOptimize(gv.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * n);
}

template <Exec E>
void BM_Divergence(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto n = static_cast<std::size_t>(side) * side;
  const auto gh = random_vec(n, 1);
  const auto gv = random_vec(n, 2);
  std::vector<double> out(n);
  for (auto _ : state) {
    k::divergence(gh.data(), gv.data(), side, side, out.data(), E);
    benchmark::DoNotOptimize(out.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * n);
}

template <Exec E>
void BM_TvDualUpdate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = random_vec(n, 1);
  const auto w = random_vec(n, 2);
  std::vector<double> pn(n);
  for (auto _ : state) {
    k::tv_dual_update(p.data(), w.data(), pn.data(), n, 0.248, E);
    benchmark::DoNotOptimize(pn.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * n);
}

}  // namespace

BENCHMARK_TEMPLATE(BM_SoftThreshold, Exec::Serial)->Arg(1 << 12)->Arg(1 << 20);
BENCHMARK_TEMPLATE(BM_SoftThreshold, Exec::Parallel)->Arg(1 << 12)->Arg(1 << 20);
BENCHMARK_TEMPLATE(BM_Axpby, Exec::Serial)->Arg(1 << 12)->Arg(1 << 20);
BENCHMARK_TEMPLATE(BM_Axpby, Exec::Parallel)->Arg(1 << 12)->Arg(1 << 20);
BENCHMARK_TEMPLATE(BM_MaxAbsDiff, Exec::Serial)->Arg(1 << 12)->Arg(1 << 20);
BENCHMARK_TEMPLATE(BM_MaxAbsDiff, Exec::Parallel)->Arg(1 << 12)->Arg(1 << 20);
BENCHMARK_TEMPLATE(BM_GradientForward, Exec::Serial)->Arg(64)->Arg(512);
BENCHMARK_TEMPLATE(BM_GradientForward, Exec::Parallel)->Arg(64)->Arg(512);
BENCHMARK_TEMPLATE(BM_Divergence, Exec::Serial)->Arg(64)->Arg(512);
BENCHMARK_TEMPLATE(BM_Divergence, Exec::Parallel)->Arg(64)->Arg(512);
BENCHMARK_TEMPLATE(BM_TvDualUpdate, Exec::Serial)->Arg(1 << 12)->Arg(1 << 20);
BENCHMARK_TEMPLATE(BM_TvDualUpdate, Exec::Parallel)->Arg(1 << 12)->Arg(1 << 20);

BENCHMARK_MAIN();
