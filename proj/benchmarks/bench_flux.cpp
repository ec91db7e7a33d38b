#include <benchmark/benchmark.h>

#include <vector>

#include "dyadot/flux.hpp"
#include "dyadot/neumann.hpp"

namespace {

using namespace dyadot;

void BM_NeumannSolve(benchmark::State& state) {
  const auto m = state.range(0);
  RngStream r(6, "bench-neumann");
  std::vector<double> f(static_cast<std::size_t>(m * m));
  double mean = 0.0;
  for (double& v : f) mean += (v = r.uniform());
  mean /= static_cast<double>(f.size());
  for (double& v : f) v -= mean;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_neumann(m, 0.25, f).residual);
  }
}

void BM_UpperBound(benchmark::State& state) {
  const auto R = state.range(0);
  RngStream r(7, "bench-flux");
  const PointSet ps = sample_poisson(Box::square(static_cast<double>(R)), 1.0, r);
  for (auto _ : state) {
    benchmark::DoNotOptimize(upper_bound(ps).total);
  }
}

}  // namespace

BENCHMARK(BM_NeumannSolve)->RangeMultiplier(4)->Range(16, 512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_UpperBound)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMillisecond);
