#include <benchmark/benchmark.h>

#include "rgsym/scenarios.hpp"

using namespace rgsym;

static void BM_SimplifyRational(benchmark::State& state) {
  Expr e = parse("(x^2 - y^2)/(x - y) - (x + y) + (1 - 2*alpha*z^2)^-2*(1 - 2*alpha*z^2)^3");
  for (auto _ : state) benchmark::DoNotOptimize(simplify(e));
}
BENCHMARK(BM_SimplifyRational);

static void BM_ProlongParabolic(benchmark::State& state) {
  ModelSystem sys = optics_system(1);
  Generator g = parabolic_generator();
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(prolong(g, sys, order));
}
BENCHMARK(BM_ProlongParabolic)->Arg(1)->Arg(2)->Arg(3);

static void BM_InvarianceVlasov(benchmark::State& state) {
  ModelSystem sys = vlasov_system();
  Generator g = plasma_generator();
  g.eta["E"] = parse("-3*Omega^2*t*E");
  for (auto _ : state) benchmark::DoNotOptimize(check_invariance(sys, g));
}
BENCHMARK(BM_InvarianceVlasov);

static void BM_DeterminingHopf(benchmark::State& state) {
  ModelSystem sys = hopf_system();
  Ansatz a;
  a.degree = 1;
  a.mode = Ansatz::Mode::PerVariable;
  for (auto _ : state) benchmark::DoNotOptimize(determining_system(sys, a).dimension());
}
BENCHMARK(BM_DeterminingHopf)->Unit(benchmark::kMillisecond);
