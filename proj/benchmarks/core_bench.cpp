#include <benchmark/benchmark.h>

#include <random>

#include "pns/grid.hpp"
#include "pns/lorentz.hpp"
#include "pns/mild_solver.hpp"
#include "pns/spectral.hpp"

using namespace pns;

namespace {

VectorField3 random_field(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  VectorField3 u(g);
  for (int c = 0; c < 3; ++c)
    for (auto& v : u.comp[c]) v = gauss(rng);
  return u;
}

}  // namespace

static void BM_TransformRoundTrip(benchmark::State& state) {
  const Grid g = build_grid(static_cast<int>(state.range(0)), 16.0);
  const VectorField3 u = random_field(g, 1);
  for (auto _ : state) {
    auto back = spectral::inverse(spectral::forward(u));
    benchmark::DoNotOptimize(back.comp[0].data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TransformRoundTrip)->Arg(32)->Arg(64)->Arg(128)->Complexity();

static void BM_LorentzQuasinorm(benchmark::State& state) {
  const Grid g = build_grid(static_cast<int>(state.range(0)), 16.0);
  const VectorField3 u = random_field(g, 2);
  const auto idx = lorentz::LorentzIndex::pq(3.0, 4.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lorentz::lorentz_quasinorm(u, idx));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LorentzQuasinorm)->Arg(32)->Arg(64)->Arg(128)->Complexity();

static void BM_LevelSplit(benchmark::State& state) {
  const Grid g = build_grid(static_cast<int>(state.range(0)), 16.0);
  const VectorField3 u = random_field(g, 3);
  for (auto _ : state) {
    auto sp = lorentz::level_split(u, 1.0, 1.0);
    benchmark::DoNotOptimize(sp.high_support_measure);
  }
}
BENCHMARK(BM_LevelSplit)->Arg(32)->Arg(64);

static void BM_AdvectionTerm(benchmark::State& state) {
  const Grid g = build_grid(static_cast<int>(state.range(0)), 16.0);
  const VectorField3 u = random_field(g, 4);
  const VectorField3 v = random_field(g, 5);
  for (auto _ : state) {
    auto adv = spectral::advection_divergence_spectral(u, v);
    benchmark::DoNotOptimize(adv.comp[0].data());
  }
}
BENCHMARK(BM_AdvectionTerm)->Arg(32)->Arg(64);

static void BM_EtdStep(benchmark::State& state) {
  const Grid g = build_grid(static_cast<int>(state.range(0)), 16.0);
  const VectorField3 u0 = scaled(random_field(g, 6), 1e-3);
  solver::SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.snapshot_stride = 0;
  cfg.norm_stride = 1 << 20;
  for (auto _ : state) {
    cfg.t_end = cfg.dt;  // exactly one step
    auto traj = solver::time_step_solve(u0, nullptr, cfg);
    benchmark::DoNotOptimize(traj.steps.back().l2);
  }
}
BENCHMARK(BM_EtdStep)->Arg(32)->Arg(64);

BENCHMARK_MAIN();
