#include <benchmark/benchmark.h>

#include "dyadot/semidiscrete.hpp"

namespace {

using namespace dyadot;

// Arg 0: R, arg 1: 1/h.
void BM_Semidiscrete(benchmark::State& state) {
  const double R = static_cast<double>(state.range(0));
  const double h = 1.0 / static_cast<double>(state.range(1));
  RngStream r(3, "bench-semidiscrete");
  const PointSet ps = sample_poisson(Box::square(R), 1.0, r);
  const double n = static_cast<double>(ps.size()) / (R * R);
  for (auto _ : state) {
    benchmark::DoNotOptimize(semidiscrete_w2(ps, ps.box(), n, h).value);
  }
}

}  // namespace

BENCHMARK(BM_Semidiscrete)
    ->Args({16, 1})->Args({32, 1})->Args({64, 1})->Args({8, 4})->Args({16, 4})
    ->Unit(benchmark::kMillisecond);
