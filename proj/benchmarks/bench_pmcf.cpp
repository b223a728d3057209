#include <benchmark/benchmark.h>

#include "pmcf/solver.hpp"

using namespace pmcf;

namespace {

DataFamily schwarzschild_york() {
  DataFamily f;
  f.metric_kind = MetricKind::Schwarzschild;
  f.m = 1.0;
  f.sigma = 0.05;
  f.k_kind = KKind::York;
  f.momentum = Vec3(0, 0, 0.1);
  return f;
}

const GridPtr& grid(int L) {
  static GridPtr g15 = SphericalGrid::make(15);
  static GridPtr g31 = SphericalGrid::make(31);
  return L == 15 ? g15 : g31;
}

void BM_Transform(benchmark::State& state) {
  const GridPtr& g = grid(int(state.range(0)));
  ScalarField f = g->constant(1.0);
  for (auto _ : state) {
    HarmonicCoeffs c = g->analyze(f);
    benchmark::DoNotOptimize(g->synthesize(c).v.sum());
  }
}
BENCHMARK(BM_Transform)->Arg(15)->Arg(31);

void BM_GeometryBuild(benchmark::State& state) {
  const GridPtr& g = grid(int(state.range(0)));
  const DataFamily fam = schwarzschild_york();
  const GraphSurface s = GraphSurface::sphere(g, 20.0);
  for (auto _ : state) {
    SurfaceGeometry geom = compute_geometry(s, fam);
    benchmark::DoNotOptimize(geom.H.sum());
  }
}
BENCHMARK(BM_GeometryBuild)->Arg(15)->Arg(31)->Unit(benchmark::kMillisecond);

void BM_OperatorAssembly(benchmark::State& state) {
  const GridPtr& g = grid(int(state.range(0)));
  const DataFamily fam = schwarzschild_york();
  const SurfaceGeometry geom = compute_geometry(GraphSurface::sphere(g, 20.0), fam);
  for (auto _ : state) {
    LinearizedOperator op = assemble_linearization(geom, fam);
    benchmark::DoNotOptimize(op.projected(0, 0));
  }
}
BENCHMARK(BM_OperatorAssembly)->Arg(15)->Arg(31)->Unit(benchmark::kMillisecond);

void BM_NewtonSolve(benchmark::State& state) {
  const GridPtr& g = grid(int(state.range(0)));
  const DataFamily fam = schwarzschild_york();
  const double h = schwarzschild_mean_curvature(1.0, 20.0);
  Eigen::ArrayXd y20(g->nodes());
  for (int n = 0; n < g->nodes(); ++n)
    y20[n] = real_sph_harm(2, 0, g->theta()[n], g->phi()[n]);
  const GraphSurface u0(g, 20.0 * (1.0 + 0.03 * y20 / y20.abs().maxCoeff()));
  for (auto _ : state) {
    SolveResult r = newton_solve(u0, fam, h, {});
    benchmark::DoNotOptimize(r.summary.R_e);
  }
}
BENCHMARK(BM_NewtonSolve)->Arg(15)->Arg(31)->Unit(benchmark::kMillisecond);

void BM_SpectralGap(benchmark::State& state) {
  const GridPtr& g = grid(int(state.range(0)));
  DataFamily fam = schwarzschild_york();
  fam.k_kind = KKind::Zero;
  const SurfaceGeometry geom = compute_geometry(GraphSurface::sphere(g, 50.0), fam);
  const LinearizedOperator op = assemble_linearization(geom, fam);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_gap(op, geom));
}
BENCHMARK(BM_SpectralGap)->Arg(15)->Arg(31)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
