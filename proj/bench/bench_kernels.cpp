// Serial reference vs OpenMP kernels on solver-sized workloads. The two
// paths are bit-identical by construction; this target measures the speedup.

#include <benchmark/benchmark.h>

#include <random>

#include "subpflow/calculus.hpp"
#include "subpflow/presets.hpp"
#include "subpflow/solver.hpp"

namespace {

using namespace subpflow;

GridSpec bench_grid(int m) {
  GridSpec g;
  g.n = 1;
  g.box_lo = {-1.0, -1.0, -0.5};
  g.box_hi = {1.0, 1.0, 0.5};
  g.m = {m, m, (m + 1) / 2};
  g.t0 = 0.0;
  g.t1 = 0.01;
  g.nt = 2;
  return g;
}

Field random_field(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field f(g, FieldKind::slice);
  for (double& v : f.values()) v = u(rng);
  return f;
}

void bm_axis_derivative(benchmark::State& state, Exec exec) {
  const GridSpec g = bench_grid(static_cast<int>(state.range(0)));
  const Field f = random_field(g, 1);
  Field out(g, FieldKind::slice);
  for (auto _ : state) {
    kernels::axis_derivative(g, f.values().data(), out.values().data(), 0, exec);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * g.space_size());
}

void bm_gradient(benchmark::State& state, Exec exec) {
  const GridSpec g = bench_grid(static_cast<int>(state.range(0)));
  const Field f = random_field(g, 2);
  for (auto _ : state) {
    VectorField grad = horizontal_gradient(f, exec);
    benchmark::DoNotOptimize(grad.components[0].values().data());
  }
  state.SetItemsProcessed(state.iterations() * g.space_size());
}

void bm_step(benchmark::State& state, Exec exec) {
  ProblemSpec spec;
  spec.grid = bench_grid(static_cast<int>(state.range(0)));
  spec.flux = FluxModel::p_laplacian(1, 3.0, 0.5);
  spec.initial = preset_bump(spec.grid, std::vector<double>{0.0, 0.0, 0.0},
                             std::vector<double>{0.55, 0.55, 0.25}, 0.5);
  const double dt = stable_dt(spec, spec.initial, exec);
  for (auto _ : state) {
    Field next = step(spec, spec.initial, dt, exec);
    benchmark::DoNotOptimize(next.values().data());
  }
  state.SetItemsProcessed(state.iterations() * spec.grid.space_size());
}

void bm_integrate(benchmark::State& state, Exec exec) {
  GridSpec g = bench_grid(static_cast<int>(state.range(0)));
  const Field f = random_field(g, 3);
  for (auto _ : state) {
    const double v = integrate_slice(g, f.values(), {}, exec);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * g.space_size());
}

}  // namespace

BENCHMARK_CAPTURE(bm_axis_derivative, serial, Exec::serial)->Arg(49)->Arg(97);
BENCHMARK_CAPTURE(bm_axis_derivative, parallel, Exec::parallel)->Arg(49)->Arg(97);
BENCHMARK_CAPTURE(bm_gradient, serial, Exec::serial)->Arg(49)->Arg(97);
BENCHMARK_CAPTURE(bm_gradient, parallel, Exec::parallel)->Arg(49)->Arg(97);
BENCHMARK_CAPTURE(bm_step, serial, Exec::serial)->Arg(49)->Arg(97);
BENCHMARK_CAPTURE(bm_step, parallel, Exec::parallel)->Arg(49)->Arg(97);
BENCHMARK_CAPTURE(bm_integrate, serial, Exec::serial)->Arg(49)->Arg(97);
BENCHMARK_CAPTURE(bm_integrate, parallel, Exec::parallel)->Arg(49)->Arg(97);

BENCHMARK_MAIN();
