#include <benchmark/benchmark.h>

#include "karmats/benchgen.hpp"
#include "karmats/simulation.hpp"

using namespace karmats;

namespace {

DscpGraph suite_graph(Structure s, EnrRegime enr, LagRegime lag) {
  SuiteConfig c;
  c.structure = s;
  c.enr_regime = enr;
  c.lag_regime = lag;
  c.series_lengths = {1};
  return build_replicate(c, 0).graph;
}

void BM_SimulateMlpSuiteGraph(benchmark::State& state) {
  const DscpGraph g = suite_graph(Structure::star, EnrRegime::dense, LagRegime::large);
  SimulationConfig cfg;
  cfg.length = static_cast<std::size_t>(state.range(0));
  cfg.seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(g, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateMlpSuiteGraph)->Arg(200)->Arg(1000)->Arg(10000);

void BM_SimulateLinearChain(benchmark::State& state) {
  DscpGraph g;
  const auto n = static_cast<int>(state.range(0));
  for (int i = 0; i < n; ++i) g = add_variable(g, VariableSpec::continuous("V" + std::to_string(i), -1e6, 1e6, 0.0));
  for (int i = 0; i < n; ++i) {
    LinearWindow lw;
    lw.coefficients = {{0.5}};
    g = set_functional(g, "lin" + std::to_string(i), lw);
    LagEdge e;
    e.source = i;
    e.target = (i + 1) % n;
    e.lag = 1;
    e.functional = FunctionalRef("lin" + std::to_string(i));
    g = add_edge(g, e);
    g = set_noise(g, i, GaussianNoise{0.0, 1.0});
  }
  SimulationConfig cfg;
  cfg.length = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(g, cfg));
  state.SetItemsProcessed(state.iterations() * 1000 * n);
}
BENCHMARK(BM_SimulateLinearChain)->Arg(5)->Arg(50)->Arg(500);

}  // namespace
