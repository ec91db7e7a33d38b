#include <benchmark/benchmark.h>

#include "dyadot/witness.hpp"

namespace {

using namespace dyadot;

void BM_BuildWitness(benchmark::State& state) {
  const auto R = state.range(0);
  RngStream r(4, "bench-witness");
  const PointSet mu = sample_poisson(Box::square(static_cast<double>(R)), 1.0, r);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_witness(mu, R).lipschitz());
  }
}

void BM_WitnessValue(benchmark::State& state) {
  const auto R = state.range(0);
  RngStream r(5, "bench-witness-value");
  const Box box = Box::square(static_cast<double>(R));
  const PointSet mu = sample_poisson(box, 1.0, r);
  const PointSet nu = sample_uniform_n(box, static_cast<std::int64_t>(mu.size()), r);
  const WitnessField w = build_witness(mu, R);
  for (auto _ : state) {
    benchmark::DoNotOptimize(witness_value(w, mu, nu).raw);
  }
}

}  // namespace

BENCHMARK(BM_BuildWitness)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WitnessValue)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMicrosecond);
