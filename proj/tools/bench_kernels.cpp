// Serial reference against the OpenMP kernels: one FD step and the Monte Carlo replicate loops.
#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

#include "hz/experiments.hpp"
#include "hz/fd.hpp"
#include "hz/voting.hpp"

using namespace hz;

namespace {

struct FdFixture {
  Grid grid;
  std::vector<double> u, out;
  double dt = 0;

  explicit FdFixture(double h) {
    const auto om = Domain::opening(1.0, 3.0);
    grid = make_grid(om, h, Point{-4.0, -3.0}, Point{4.0, 3.0});
    u.assign(grid.size(), 0.0);
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i)
        if (grid.mask[grid.index(i, j)]) u[grid.index(i, j)] = grid.xc(i) >= 0 ? 1.0 : 0.0;
    dt = stable_dt(grid, 0.02, 1.0);
  }
};

void BM_FdStepReference(benchmark::State& state) {
  FdFixture f(1.0 / static_cast<double>(state.range(0)));
  for (auto _ : state) {
    fd_step_reference(f.grid, f.u, f.out, f.dt, 0.02, 1.0, true);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.counters["cells"] = static_cast<double>(f.grid.active_cells());
}

void BM_FdStepParallel(benchmark::State& state) {
  FdFixture f(1.0 / static_cast<double>(state.range(0)));
  for (auto _ : state) {
    fd_step_parallel(f.grid, f.u, f.out, f.dt, 0.02, 1.0, true);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.counters["cells"] = static_cast<double>(f.grid.active_cells());
  state.counters["threads"] = omp_get_max_threads();
}

void BM_VoteSerial(benchmark::State& state) {
  const VoteParams vp{0.25, 1.0};
  const auto dom = Domain::full_space(1);
  const auto p = wave_condition(0.25, 1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_solution_serial(Point{0.0}, 0.5, vp, dom, p, state.range(0), 1, TreeOptions{}));
}

void BM_VoteParallel(benchmark::State& state) {
  const VoteParams vp{0.25, 1.0};
  const auto dom = Domain::full_space(1);
  const auto p = wave_condition(0.25, 1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_solution(Point{0.0}, 0.5, vp, dom, p, state.range(0), 1, TreeOptions{}));
  state.counters["threads"] = omp_get_max_threads();
}

// Dual replicate loop; the argument is the thread count (1 is the serial baseline).
void BM_DualReplicates(benchmark::State& state) {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  const auto params = strong_ladder_regime(1e4, 0.45, 0.5).params(RadiusMeasure::point_mass(1.0));
  double se = 0;
  for (auto _ : state) benchmark::DoNotOptimize(probability_many(params, 0.05, 2000, 1, &se));
  omp_set_num_threads(saved);
}

}  // namespace

BENCHMARK(BM_FdStepReference)->Arg(20)->Arg(50)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FdStepParallel)->Arg(20)->Arg(50)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_VoteSerial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VoteParallel)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DualReplicates)->Arg(1)->Arg(omp_get_num_procs())->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
