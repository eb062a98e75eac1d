#include <benchmark/benchmark.h>

#include "qcollapse/csl.hpp"
#include "qcollapse/optics.hpp"
#include "qcollapse/rdm.hpp"

using namespace qcollapse;

static void BM_MachZehnderEvolve(benchmark::State& state) {
  const auto circuit = setups::mach_zehnder(0.3, 1.2);
  const Ket in = setups::mach_zehnder_input();
  for (auto _ : state) benchmark::DoNotOptimize(evolve(in, circuit));
}
BENCHMARK(BM_MachZehnderEvolve);

static void BM_HardyBothSplitters(benchmark::State& state) {
  const Ket k0 = setups::hardy_initial();
  for (auto _ : state) benchmark::DoNotOptimize(setups::hardy_frame_partial(k0, setups::HardyFrame::Both));
}
BENCHMARK(BM_HardyBothSplitters);

static void BM_SseTrajectory(benchmark::State& state) {
  SseParams p;
  const SseState init = state_from_weights({1.0 / 3.0, 2.0 / 3.0});
  RngStream rng(1, "bench");
  for (auto _ : state) benchmark::DoNotOptimize(run_trajectory(init, p, rng));
}
BENCHMARK(BM_SseTrajectory);

static void BM_RdmMismatch(benchmark::State& state) {
  RdmConfig cfg;
  RngStream rng(2, "bench");
  for (auto _ : state) {
    benchmark::DoNotOptimize(mismatch_fraction(cfg, 0.5, static_cast<std::uint64_t>(state.range(0)), rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RdmMismatch)->Arg(10000);

BENCHMARK_MAIN();
