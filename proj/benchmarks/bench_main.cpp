#include <benchmark/benchmark.h>

#include "orbitherm/catalog.hpp"
#include "orbitherm/geometry.hpp"
#include "orbitherm/orbits.hpp"
#include "orbitherm/pressure.hpp"
#include "orbitherm/shift.hpp"

using namespace orbitherm;

static void BM_CatLatticeEnumeration(benchmark::State& state) {
  auto cat = make_cat_map();
  int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto orbits = enumerate_periodic(cat, n, EnumMethod::Symbolic);
    benchmark::DoNotOptimize(orbits);
  }
}
BENCHMARK(BM_CatLatticeEnumeration)->Arg(8)->Arg(10)->Arg(12);

static void BM_HorseshoeWordEnumeration(benchmark::State& state) {
  auto hs = make_linear_horseshoe();
  int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto orbits = enumerate_periodic(hs, n, EnumMethod::Symbolic);
    benchmark::DoNotOptimize(orbits);
  }
}
BENCHMARK(BM_HorseshoeWordEnumeration)->Arg(8)->Arg(12);

static void BM_NewtonEnumeration(benchmark::State& state) {
  auto nl = make_nonlinear_horseshoe();
  int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto orbits = enumerate_periodic(nl, n, EnumMethod::Newton, SeedGrid{100});
    benchmark::DoNotOptimize(orbits);
  }
}
BENCHMARK(BM_NewtonEnumeration)->Arg(4)->Arg(6);

static void BM_Classification(benchmark::State& state) {
  auto nl = make_nonlinear_horseshoe();
  auto orbits = enumerate_periodic(nl, 8, EnumMethod::Symbolic);
  for (auto _ : state)
    for (const auto& o : orbits)
      benchmark::DoNotOptimize(classify_orbit(nl, o));
}
BENCHMARK(BM_Classification);

static void BM_EmpiricalConstant(benchmark::State& state) {
  auto cat = make_cat_map();
  auto o = classify_orbit(cat, enumerate_periodic(cat, 6, EnumMethod::Symbolic).back());
  for (auto _ : state) benchmark::DoNotOptimize(empirical_constant(o, 0.5));
}
BENCHMARK(BM_EmpiricalConstant);

static void BM_PressureSeries(benchmark::State& state) {
  auto cat = make_cat_map();
  OrbitDatabase db(cat, EnumMethod::Symbolic);
  for (int n = 1; n <= 10; ++n) db.ensure(n);
  SaddleFilter f{0.9, std::nullopt, 0.5, {}};
  for (auto _ : state)
    for (int n = 1; n <= 10; ++n)
      benchmark::DoNotOptimize(q_sp_row(db, zero_potential(), f, n, 0.0));
}
BENCHMARK(BM_PressureSeries);

static void BM_TransferPressure(benchmark::State& state) {
  auto shift = WeightedShift::golden_mean({1.0, 1.7});
  for (auto _ : state) benchmark::DoNotOptimize(transfer_pressure(shift));
}
BENCHMARK(BM_TransferPressure);

static void BM_EscapeRate(benchmark::State& state) {
  auto hs = make_linear_horseshoe();
  auto V = RegionSpec::full(hs);
  for (auto _ : state)
    benchmark::DoNotOptimize(escape_rate(hs, V, 12, 100000, 42, {4, 12},
                                         static_cast<int>(state.range(0))));
}
BENCHMARK(BM_EscapeRate)->Arg(1)->Arg(4);

BENCHMARK_MAIN();
