#include <benchmark/benchmark.h>

#include "sliphom/epsilon_model.hpp"
#include "sliphom/evolution.hpp"

using namespace sliphom;

namespace {

const LoadField kLoad = LoadField::affine({1.0, 1.0, 0.0, 0.0}, {0.0, 0.0});

void BM_hat_g(benchmark::State& state) {
  const Grid2D grid(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(hat_g(kLoad, grid));
  }
}
BENCHMARK(BM_hat_g)->Arg(16)->Arg(64)->Arg(256);

void BM_lambda_map(benchmark::State& state) {
  const Grid1D grid(static_cast<int>(state.range(0)));
  const Grid2D qgrid(8, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_lambda_map(kLoad, grid, qgrid));
  }
}
BENCHMARK(BM_lambda_map)->Arg(64)->Arg(256)->Arg(1024);

void BM_minimize_I(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Grid1D grid(n);
  const Grid2D qgrid(8, n);
  const SlipSystem e1({1.0, 0.0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize_I(kLoad, e1, 0.5, grid, qgrid));
  }
}
BENCHMARK(BM_minimize_I)->Arg(64)->Arg(256)->Arg(1024);

void BM_minimize_eps_rig(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Grid1D grid(n);
  const Grid2D qgrid(8, n);
  const Microstructure ms(0.5, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize_eps_rig(kLoad, ms, grid, qgrid));
  }
}
BENCHMARK(BM_minimize_eps_rig)->Arg(64)->Arg(256)->Arg(1024);

void BM_evolve_limit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Grid1D grid(n);
  const Grid2D qgrid(8, n);
  const SlipSystem e1({1.0, 0.0});
  const LimitSystem sys(e1, 0.5, grid, qgrid);
  const LoadPath path = LoadPath::table(
      {0.0, 1.0}, {LoadField::affine({2, 2, 0, 0}, {0, 0}), LoadField::zero()});
  const DissipationSpec d(DissipationKind::monotone, 0.05);
  const TimePartition part = TimePartition::uniform(1.0, 10);
  const DeformationState q0 = sys.initial_state(path.at(0.0), {});
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve(sys, q0, path, d, part));
  }
}
BENCHMARK(BM_evolve_limit)->Arg(64)->Arg(256);

void BM_work_direct(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Grid1D grid(n);
  const DeformationState q{0.3, ShearProfile::from_function(grid, [](double x) { return x; }),
                           SlipSystem({1.0, 0.0})};
  const Grid2D qgrid(n, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(work_direct(kLoad, q, qgrid));
  }
}
BENCHMARK(BM_work_direct)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
