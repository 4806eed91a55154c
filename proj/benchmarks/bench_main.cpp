#include <benchmark/benchmark.h>

#include "martenscale/covering.hpp"
#include "martenscale/relaxer.hpp"
#include "martenscale/star_block.hpp"

using namespace martenscale;

static void BM_DistToRotatedWell(benchmark::State& st) {
  const Mat2 u = oblique_base(4, 1.1), f{0.9, 0.2, -0.3, 1.1};
  for (auto _ : st) benchmark::DoNotOptimize(dist_to_rotated_well(f, u));
}
BENCHMARK(BM_DistToRotatedWell);

static void BM_StarBlock(benchmark::State& st) {
  const WellSet w = hex_rhombic_wells();
  const Triangle t = reference_star_triangle();
  for (auto _ : st) benchmark::DoNotOptimize(star_block(t, static_cast<int>(st.range(0)), w));
}
BENCHMARK(BM_StarBlock)->Arg(2)->Arg(6);

static void BM_CoverBuild(benchmark::State& st) {
  const WellSet w = hex_rhombic_wells();
  for (auto _ : st) {
    DyadicCover cv(Polygon::unit_square(), static_cast<int>(st.range(0)), w);
    benchmark::DoNotOptimize(cv.energy(cv.max_level(), 1e-3));
  }
}
BENCHMARK(BM_CoverBuild)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_DiscreteEnergy(benchmark::State& st) {
  const WellSet w = hex_rhombic_wells();
  auto g = std::make_shared<const Grid>(make_grid(Polygon::unit_square(), static_cast<int>(st.range(0))));
  const DiscreteField f = make_field(g, FieldMode::Displacement, austenite_data(FieldMode::Displacement));
  for (auto _ : st) benchmark::DoNotOptimize(discrete_energy(f, w, 1e-2, RelaxConfig{}));
}
BENCHMARK(BM_DiscreteEnergy)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

static void BM_MinimizeFewIterations(benchmark::State& st) {
  const WellSet w = hex_rhombic_wells();
  auto g = std::make_shared<const Grid>(make_grid(Polygon::unit_square(), static_cast<int>(st.range(0))));
  RelaxConfig c;
  c.restarts = 1;
  c.max_iters = 5;
  c.threads = 1;
  for (auto _ : st) benchmark::DoNotOptimize(minimize(g, austenite_data(FieldMode::Displacement), w, 1e-2, c));
}
BENCHMARK(BM_MinimizeFewIterations)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
