#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "phaseless/amplitude.hpp"
#include "phaseless/fourier.hpp"
#include "phaseless/lippmann_schwinger.hpp"
#include "phaseless/reconstruction.hpp"
#include "phaseless/synthesis.hpp"

namespace {

using namespace phaseless;

GridSpec square(int n, double half) {
  GridSpec g;
  g.n = n;
  g.box_min = {-half, -half, 0};
  g.box_max = {half, half, 0};
  return g;
}

PotentialSpec disc(Vec c, double r, cplx a = 1.0) {
  PotentialSpec s;
  s.components.push_back(Ball{c, r, a});
  return s;
}

const BackgroundSet kRefs{{disc({1.2137, 0.4071, 0}, 0.3), disc({-0.6113, 1.1029, 0}, 0.45, 2.0)}};

void BM_ForwardTransform(benchmark::State& state) {
  const GridSpec g = square(static_cast<int>(state.range(0)), 1.0);
  const ScalarField v = rasterize(disc({0, 0, 0}, 0.5), g);
  for (auto _ : state) benchmark::DoNotOptimize(forward_transform(v));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_ForwardTransform)->Arg(64)->Arg(128)->Arg(256);

void BM_GreenApply(benchmark::State& state) {
  const GridSpec g = square(static_cast<int>(state.range(0)), 1.0);
  const GreenOperator op(g, 10.0);
  std::vector<cplx> u(g.size(), cplx{1.0, 0.5}), out;
  for (auto _ : state) {
    op.apply(u, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_GreenApply)->Arg(32)->Arg(64)->Arg(128);

void BM_BornIterationSolve(benchmark::State& state) {
  const GridSpec g = square(static_cast<int>(state.range(0)), 1.0);
  const ScalarField v = rasterize(disc({0, 0, 0}, 0.5), g);
  LippmannSchwingerSolver solver;
  const WaveVector k{{10.0, 0.0, 0.0}};
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve_iterative(v, k));
}
BENCHMARK(BM_BornIterationSolve)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_DenseSolve(benchmark::State& state) {
  const GridSpec g = square(32, 0.6);
  const ScalarField v = rasterize(disc({0, 0, 0}, 0.5), g);
  LippmannSchwingerSolver solver;
  const WaveVector k{{10.0, 0.0, 0.0}};
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve_dense(v, k));
}
BENCHMARK(BM_DenseSolve)->Unit(benchmark::kMillisecond);

void BM_SynthesizeOracle(benchmark::State& state) {
  const GridSpec g = square(128, 2.0);
  const auto v = disc({0.0123, -0.0077, 0}, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(synthesize(v, kRefs, {25, 100}, g));
}
BENCHMARK(BM_SynthesizeOracle)->Unit(benchmark::kMillisecond);

void BM_SynthesizeFullSolver(benchmark::State& state) {
  const GridSpec g = square(32, 1.0);
  const auto v = disc({0.0123, -0.0077, 0}, 0.4);
  BackgroundSet refs{{disc({0.7, 0.1, 0}, 0.15), disc({-0.3, 0.7, 0}, 0.2, 2.0)}};
  const SynthesisOptions o{.mode = DataMode::kFullSolver, .p_max = 6.0};
  for (auto _ : state) benchmark::DoNotOptimize(synthesize(v, refs, {25}, g, o));
}
BENCHMARK(BM_SynthesizeFullSolver)->Unit(benchmark::kMillisecond);

void BM_ReconstructTwoReferences(benchmark::State& state) {
  const auto ds = synthesize(disc({0.0123, -0.0077, 0}, 0.5), kRefs, {25, 100}, square(128, 2.0));
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(ds, kRefs));
}
BENCHMARK(BM_ReconstructTwoReferences)->Unit(benchmark::kMillisecond);

void BM_ReconstructOneReference(benchmark::State& state) {
  const BackgroundSet one{{kRefs.backgrounds[0]}};
  const auto ds = synthesize(disc({0.0123, -0.0077, 0}, 0.5), one, {100}, square(64, 4.0));
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(ds, one));
}
BENCHMARK(BM_ReconstructOneReference)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
