#include <benchmark/benchmark.h>

#include "meanfield/experiments.hpp"
#include "meanfield/simulator.hpp"
#include "meanfield/systemic_risk.hpp"
#include "meanfield/value_synthesis.hpp"

namespace {

using namespace meanfield;

LqModel bench_model(int n) {
  LqModel m = LqModel::zero(n, n, n, 1, 1.0);
  for (int i = 0; i < n; ++i) {
    m.A(i, i) = -0.5;
    m.B(i, i) = 1.0;
    m.D(i, i) = 0.3;
    m.Q(i, i) = 1.0;
    m.Qf(i, i) = 0.5;
    m.Gamma(i, i) = 0.4;
    if (i + 1 < n) m.G(i, i + 1) = 0.2;
  }
  m.D0.setConstant(0.1);
  m.eta.setConstant(0.25);
  return m;
}

void BM_SolveVMU(benchmark::State& state) {
  const LqModel m = bench_model(static_cast<int>(state.range(0)));
  const TimeGrid grid(1.0, 2000);
  for (auto _ : state) {
    VCoefficients v = solve_V(m, grid);
    MCoefficients mm = solve_M(m, v);
    benchmark::DoNotOptimize(assemble_U(v, mm));
  }
}
BENCHMARK(BM_SolveVMU)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SimulateCooperative(benchmark::State& state) {
  const LqModel m = bench_model(2);
  const VCoefficients v = solve_V(m, TimeGrid(1.0, 2000));
  SimConfig cfg;
  cfg.agents = static_cast<int>(state.range(0));
  cfg.paths = 64;
  cfg.dt = 0.01;
  cfg.seed = 1;
  cfg.threads = 1;
  cfg.initial = InitialDistribution::point_mass(Vector::Ones(2));
  for (auto _ : state) benchmark::DoNotOptimize(simulate(m, v, cfg).mean);
  state.SetItemsProcessed(state.iterations() * cfg.paths * cfg.agents * 100);
}
BENCHMARK(BM_SimulateCooperative)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SystemicRiskDirect(benchmark::State& state) {
  const sr::SrParams p;
  const TimeGrid grid(1.0, 2000);
  for (auto _ : state) benchmark::DoNotOptimize(sr::solve_direct(p, static_cast<int>(state.range(0)), grid));
}
BENCHMARK(BM_SystemicRiskDirect)->Arg(8)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
