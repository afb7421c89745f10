#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "idslab/ids_lab.hpp"

using namespace idslab;

namespace {

DiscreteHamiltonian benchmark_operator(std::int64_t radius) {
  ModelConfig cfg;
  cfg.dim = 2;
  cfg.mesh = 2;
  cfg.metric_amplitude = 0.3;
  cfg.potential_amplitude = 1.0;
  return make_dirichlet(cfg, 1, FolnerBox{2, radius, 2});
}

const std::vector<double>& grid() {
  static const std::vector<double> g = [] {
    ModelConfig cfg;
    cfg.dim = 2;
    cfg.mesh = 2;
    cfg.potential_amplitude = 1.0;
    return default_lambda_grid(cfg, 64);
  }();
  return g;
}

std::vector<std::size_t> columns(std::size_t n, std::size_t count) {
  std::vector<std::size_t> cols(count);
  for (std::size_t i = 0; i < count; ++i) cols[i] = i * n / count;
  return cols;
}

void BM_CountSweepSerial(benchmark::State& state) {
  const DiscreteHamiltonian h = benchmark_operator(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(count_sweep_serial(h, grid()));
  state.counters["n"] = static_cast<double>(h.size());
}

void BM_CountSweepParallel(benchmark::State& state) {
  const DiscreteHamiltonian h = benchmark_operator(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(count_sweep(h, grid(), 0));
  state.counters["n"] = static_cast<double>(h.size());
}

void BM_HeatColumnsSerial(benchmark::State& state) {
  const DiscreteHamiltonian h = benchmark_operator(state.range(0));
  const std::vector<std::size_t> cols = columns(h.size(), 32);
  for (auto _ : state) benchmark::DoNotOptimize(heat_columns_serial(h, 1.0, cols));
  state.counters["n"] = static_cast<double>(h.size());
}

void BM_HeatColumnsParallel(benchmark::State& state) {
  const DiscreteHamiltonian h = benchmark_operator(state.range(0));
  const std::vector<std::size_t> cols = columns(h.size(), 32);
  for (auto _ : state) benchmark::DoNotOptimize(heat_columns(h, 1.0, cols, 0));
  state.counters["n"] = static_cast<double>(h.size());
}

}  // namespace

BENCHMARK(BM_CountSweepSerial)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountSweepParallel)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_HeatColumnsSerial)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HeatColumnsParallel)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
