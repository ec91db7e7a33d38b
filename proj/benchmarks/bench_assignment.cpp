#include <benchmark/benchmark.h>

#include "dyadot/assignment.hpp"

namespace {

using namespace dyadot;

void BM_Assignment(benchmark::State& state, AssignmentMethod method, int p) {
  const auto n = state.range(0);
  const double side = std::sqrt(static_cast<double>(n));
  RngStream r(1, "bench-assignment");
  const PointSet a = sample_uniform_n(Box::square(side), n, r);
  const PointSet b = sample_uniform_n(Box::square(side), n, r);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_assignment(a, b, p, method).cost);
  }
  state.SetComplexityN(n);
}

void BM_CyclicCheck(benchmark::State& state) {
  RngStream r(2, "bench-cycles");
  const PointSet a = sample_uniform_n(Box::square(22.0), 500, r);
  const PointSet b = sample_uniform_n(Box::square(22.0), 500, r);
  const MatchingPlan plan = solve_assignment(a, b, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_cyclic_monotonicity(plan, a, b, 10000, 6, r).violations);
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Assignment, dense_p2, AssignmentMethod::kDense, 2)
    ->RangeMultiplier(4)->Range(64, 1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Assignment, sparse_p2, AssignmentMethod::kSparse, 2)
    ->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Assignment, sparse_p1, AssignmentMethod::kSparse, 1)
    ->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CyclicCheck)->Unit(benchmark::kMillisecond);
