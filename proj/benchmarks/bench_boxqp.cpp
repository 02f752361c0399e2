#include <benchmark/benchmark.h>

#include "boxqp/bounding.hpp"
#include "boxqp/heuristics.hpp"
#include "boxqp/oracle.hpp"
#include "boxqp/rng.hpp"

using namespace boxqp;

namespace {

Matrix random_symmetric(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) M(i, j) = M(j, i) = 2.0 * rng.uniform01() - 1.0;
  return M;
}

LiftedPoint random_lifted(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  LiftedPoint p;
  p.x = Vector(n);
  p.X = Matrix(n, n);
  for (int i = 0; i < n; ++i) p.x(i) = rng.uniform01();
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) p.X(i, j) = p.X(j, i) = rng.uniform01();
  return p;
}

}  // namespace

static void BM_PsdProject(benchmark::State& state) {
  const Matrix M = random_symmetric(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(psd_project(M));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PsdProject)->RangeMultiplier(2)->Range(8, 64)->Complexity();

static void BM_SeparateTriangles(benchmark::State& state) {
  const LiftedPoint p = random_lifted(static_cast<int>(state.range(0)), 5);
  for (auto _ : state)
    benchmark::DoNotOptimize(separate_triangles(p, 100000, 1e-4));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SeparateTriangles)->RangeMultiplier(2)->Range(16, 128)->Complexity();

static void BM_RltCatalog(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(build_rlt_catalog(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_RltCatalog)->Arg(32)->Arg(64)->Arg(128);

static void BM_RootSdpSolve(benchmark::State& state) {
  const Instance inst = generate_spar(static_cast<int>(state.range(0)), 75, 1);
  const RelaxationModel model = assemble_model(inst);
  for (auto _ : state) benchmark::DoNotOptimize(solve(model, SolverConfig{}));
}
BENCHMARK(BM_RootSdpSolve)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_CertifiedBound(benchmark::State& state) {
  const Instance inst = generate_spar(static_cast<int>(state.range(0)), 75, 1);
  const RelaxationModel model = assemble_model(inst);
  const SdpSolution sol = solve(model, SolverConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(certify(model, sol));
}
BENCHMARK(BM_CertifiedBound)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_LocalSearch(benchmark::State& state) {
  const Instance inst = generate_spar(static_cast<int>(state.range(0)), 75, 2);
  const Vector x0 = Vector::Constant(inst.n, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(local_search(inst, x0));
}
BENCHMARK(BM_LocalSearch)->Arg(16)->Arg(64)->Arg(128);

static void BM_KktOracle(benchmark::State& state) {
  const Instance inst = generate_spar(static_cast<int>(state.range(0)), 75, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kkt_enumeration_oracle(inst));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KktOracle)->DenseRange(6, 10, 2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
