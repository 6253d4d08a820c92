#include <benchmark/benchmark.h>

#include "karmats/benchgen.hpp"
#include "karmats/manifest.hpp"

using namespace karmats;

namespace {

void BM_BuildSuiteRegimeSweep(benchmark::State& state) {
  SuiteConfig c;
  c.structure = Structure::tree;
  c.enr_regime = EnrRegime::dense;
  c.lag_regime = LagRegime::large;
  c.replicates = static_cast<std::size_t>(state.range(0));
  c.series_lengths = {200, 400, 600, 800, 1000};
  for (auto _ : state) {
    Suite s = build_suite(c);
    benchmark::DoNotOptimize(render_suite(s));
  }
}
BENCHMARK(BM_BuildSuiteRegimeSweep)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
