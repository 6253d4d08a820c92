#include <benchmark/benchmark.h>

#include "karmats/benchgen.hpp"
#include "karmats/metrics.hpp"
#include "karmats/rng.hpp"

using namespace karmats;

namespace {

DscpGraph random_graph(std::size_t n, std::size_t edges, int lags, Rng& rng) {
  DscpGraph g;
  for (std::size_t i = 0; i < n; ++i) g = add_variable(g, VariableSpec::continuous("V" + std::to_string(i), -1, 1, 0));
  while (g.edges.size() < edges) {
    LagEdge e;
    e.source = static_cast<VariableId>(rng.index(n));
    e.target = static_cast<VariableId>(rng.index(n));
    e.lag = rng.integer(1, lags);
    if (!g.find_edge(e.source, e.target, e.lag)) g = add_edge(g, e);
  }
  return g;
}

void BM_MatchF1(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const DscpGraph a = random_graph(n, 3 * n, 10, rng);
  const DscpGraph b = random_graph(n, 3 * n, 10, rng);
  for (auto _ : state) benchmark::DoNotOptimize(match_f1(a, b, 2));
}
BENCHMARK(BM_MatchF1)->Arg(5)->Arg(50)->Arg(200);

void BM_Sid(benchmark::State& state) {
  Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const DscpGraph a = random_graph(n, 3 * n, 10, rng);
  const DscpGraph b = random_graph(n, 3 * n, 10, rng);
  for (auto _ : state) benchmark::DoNotOptimize(sid(a, b));
}
BENCHMARK(BM_Sid)->Arg(5)->Arg(50)->Arg(200);

void BM_Fidelity(benchmark::State& state) {
  Rng rng(3);
  const auto vars = static_cast<std::size_t>(state.range(0));
  SeriesFrame a, b;
  for (std::size_t v = 0; v < vars; ++v) {
    SeriesColumn ca{{"V" + std::to_string(v)}, {}}, cb{{"V" + std::to_string(v)}, {}};
    for (int t = 0; t < 1000; ++t) {
      ca.values.push_back(rng.normal(0, 1));
      cb.values.push_back(rng.normal(0, 1));
    }
    a.columns.push_back(ca);
    b.columns.push_back(cb);
  }
  for (auto _ : state) benchmark::DoNotOptimize(fidelity(a, b));
}
BENCHMARK(BM_Fidelity)->Arg(5)->Arg(50);

}  // namespace
