#include <benchmark/benchmark.h>

#include "rgsym/solvers.hpp"

using namespace rgsym;

static void BM_GridParabolic(benchmark::State& state) {
  OpticsScenario o;
  GridOptions g;
  g.nodes = static_cast<int>(state.range(0));
  g.outputs = 10;
  for (auto _ : state) benchmark::DoNotOptimize(optics_grid_solve(o, 0.5 * o.z_sing(), g).I0.back());
}
BENCHMARK(BM_GridParabolic)->Arg(501)->Arg(1001)->Arg(2001)->Unit(benchmark::kMillisecond);

static void BM_SolitonAxis(benchmark::State& state) {
  OpticsScenario o;
  o.profile = OpticsScenario::Profile::Soliton;
  o.nu = 0;
  for (auto _ : state) benchmark::DoNotOptimize(soliton_axis_ode(o).z_blowup);
}
BENCHMARK(BM_SolitonAxis)->Unit(benchmark::kMillisecond);

static void BM_ScriptE(benchmark::State& state) {
  PlasmaModel m(PlasmaScenario::defaults());
  double chi = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.script_e(chi));
    chi = chi < 10 ? chi + 0.01 : 0;
  }
}
BENCHMARK(BM_ScriptE);

static void BM_SpectrumQuadrature(benchmark::State& state) {
  PlasmaModel m(PlasmaScenario::defaults());
  const double t = 100 / m.omega();
  for (auto _ : state) benchmark::DoNotOptimize(m.spectrum(0, t, 0.5));
}
BENCHMARK(BM_SpectrumQuadrature)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
