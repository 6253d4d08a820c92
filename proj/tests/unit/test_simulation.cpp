#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "karmats/csv.hpp"
#include "karmats/document.hpp"
#include "karmats/simulation.hpp"
#include "linear_system.hpp"
#include "oracles.hpp"

using namespace karmats;

namespace {

SimulationConfig config(std::size_t length, std::uint64_t seed = 1, std::optional<std::size_t> burn_in = 0) {
  SimulationConfig c;
  c.length = length;
  c.seed = seed;
  c.burn_in = burn_in;
  return c;
}

template <class F>
std::string sim_error_code(F&& f) {
  try {
    f();
  } catch (const SimulationError& e) {
    return e.code();
  }
  return "";
}

/// Single noise-driven root R feeding F at lag 1, plus an isolated Z.
DscpGraph root_and_follower() {
  DscpGraph g;
  g = add_variable(g, VariableSpec::continuous("R", -100, 100, 0));
  g = add_variable(g, VariableSpec::continuous("F", -100, 100, 0));
  g = add_variable(g, VariableSpec::continuous("Z", -100, 100, 0));
  g = add_edge(g, {0, 1, 1});
  g = set_noise(g, 0, GaussianNoise{0, 1});
  g = set_noise(g, 1, GaussianNoise{0, 0.1});
  g = set_noise(g, 2, UniformNoise{-1, 1});
  return g;
}

}  // namespace

TEST(Simulation, LinearSystemMatchesRecurrence) {
  const auto sys = oracle::three_variable_system();
  ASSERT_TRUE(validate(sys.graph).ok()) << validate(sys.graph).to_string();
  const auto frame = simulate(sys.graph, config(200));
  const auto expected = oracle::unroll(sys, 200);
  ASSERT_EQ(frame.columns.size(), 3u);
  for (std::size_t v = 0; v < 3; ++v) {
    ASSERT_EQ(frame.columns[v].values.size(), 200u);
    for (std::size_t t = 0; t < 200; ++t) {
      ASSERT_NEAR(frame.columns[v].values[t], expected[v][t], 1e-12) << "v=" << v << " t=" << t;
    }
  }
}

TEST(Simulation, DefaultBurnInIsDropped) {
  const auto sys = oracle::three_variable_system();
  SimulationConfig c;
  c.length = 50;
  const auto frame = simulate(sys.graph, c);
  EXPECT_EQ(frame.meta.burn_in, 6u);  // 2 * max_lag
  EXPECT_EQ(frame.meta.start_step, 6u);
  EXPECT_EQ(frame.meta.next_step, 56u);
  const auto expected = oracle::unroll(sys, 56);
  for (std::size_t t = 0; t < 50; ++t) EXPECT_NEAR(frame.columns[2].values[t], expected[2][t + 6], 1e-12);
}

TEST(Simulation, SegmentInitUsesTrailingRows) {
  const auto sys = oracle::three_variable_system();
  // A data segment of 6 rows; only the last required_history (4) rows matter.
  SeriesFrame seg;
  std::array<std::vector<double>, 3> history;
  const char* names[] = {"A", "B", "C"};
  for (int v = 0; v < 3; ++v) {
    SeriesColumn col;
    col.spec.name = names[v];
    for (int r = 0; r < 6; ++r) col.values.push_back(0.1 * (v + 1) * (r + 1) - 0.3);
    history[v].assign(col.values.begin() + 2, col.values.end());
    seg.columns.push_back(col);
  }
  // Round-trip the segment through CSV as a file stand-in.
  const auto parsed = import_csv(export_csv(seg), schema_from_graph(sys.graph));
  SimulationConfig c = config(40);
  c.init = SegmentInit{parsed};
  const auto frame = simulate(sys.graph, c);
  const auto expected = oracle::unroll(sys, 40, history);
  for (std::size_t v = 0; v < 3; ++v) {
    for (std::size_t t = 0; t < 40; ++t) ASSERT_NEAR(frame.columns[v].values[t], expected[v][t], 1e-12);
  }

  SeriesFrame short_seg = parsed;
  for (auto& col : short_seg.columns) col.values.resize(3);
  c.init = SegmentInit{short_seg};
  EXPECT_EQ(sim_error_code([&] { simulate(sys.graph, c); }), "simulation.insufficient_prefix");

  SeriesFrame missing = parsed;
  missing.columns.pop_back();
  c.init = SegmentInit{missing};
  EXPECT_EQ(sim_error_code([&] { simulate(sys.graph, c); }), "simulation.schema_mismatch");
}

TEST(Simulation, DeterministicInSeed) {
  const auto g = gen::mixed_graph();
  auto c = config(300, 77, std::nullopt);
  c.record_latent = true;
  const auto a = simulate(g, c);
  const auto b = simulate(g, c);
  EXPECT_EQ(a, b);
  c.seed = 78;
  EXPECT_NE(a.columns[0].values, simulate(g, c).columns[0].values);
  EXPECT_EQ(a.meta.graph_hash, graph_hash(g));
}

TEST(Simulation, ValuesStayInDomain) {
  const auto g = gen::mixed_graph();
  auto c = config(2000, 3, std::nullopt);
  c.record_latent = true;
  const auto f = simulate(g, c);
  ASSERT_FALSE(f.check().has_value());
  for (const auto& col : f.columns) {
    const auto& spec = g.variable(*g.find(col.spec.name));
    for (double x : col.values) ASSERT_TRUE(spec.in_domain(x)) << col.spec.name << " " << x;
  }
}

TEST(Simulation, LatentColumnsHiddenByDefault) {
  const auto g = gen::mixed_graph();
  const auto f = simulate(g, config(20));
  EXPECT_EQ(f.find("pressure"), nullptr);
  EXPECT_NE(f.find("temperature"), nullptr);
  auto c = config(20);
  c.record_latent = true;
  EXPECT_NE(simulate(g, c).find("pressure"), nullptr);
}

TEST(Simulation, BinaryFollowsThresholdOnContemporaneousParent) {
  const auto g = gen::mixed_graph();
  const auto f = simulate(g, config(500, 9));
  const auto& temp = f.find("temperature")->values;
  const auto& alarm = f.find("alarm")->values;
  // alarm = warm(temperature[t]) with no noise, threshold 0.25
  for (std::size_t t = 0; t < temp.size(); ++t) ASSERT_EQ(alarm[t], temp[t] >= 20.0 ? 1.0 : 0.0);
}

TEST(Simulation, ClampFixesValueAndSparesNonDescendants) {
  const auto g = root_and_follower();
  const auto base = simulate(g, config(100, 5));
  auto c = config(100, 5);
  c.interventions.push_back(DoClamp{0, 3.0, 10, 19});
  const auto clamped = simulate(g, c);
  for (std::size_t t = 10; t <= 19; ++t) EXPECT_EQ(clamped.columns[0].values[t], 3.0);
  // R has no parents, so after the window its draws realign with the baseline:
  // the clamp consumed its noise slots instead of shifting them.
  for (std::size_t t = 20; t < 100; ++t) EXPECT_EQ(clamped.columns[0].values[t], base.columns[0].values[t]);
  for (std::size_t t = 0; t < 10; ++t) EXPECT_EQ(clamped.columns[0].values[t], base.columns[0].values[t]);
  EXPECT_EQ(clamped.columns[2].values, base.columns[2].values);
  // F reads R at lag 1: F[11..20] see the clamp.
  EXPECT_NE(clamped.columns[1].values[11], base.columns[1].values[11]);
  for (std::size_t t = 0; t <= 10; ++t) EXPECT_EQ(clamped.columns[1].values[t], base.columns[1].values[t]);
  ASSERT_EQ(clamped.meta.interventions.size(), 1u);
  EXPECT_NE(clamped.meta.interventions[0].find("R"), std::string::npos);
}

TEST(Simulation, ShiftNoiseOnlyInsideWindow) {
  const auto g = root_and_follower();
  const auto base = simulate(g, config(60, 5));
  auto c = config(60, 5);
  c.interventions.push_back(ShiftNoise{0, UniformNoise{50, 51}, 20, 29});
  const auto shifted = simulate(g, c);
  for (std::size_t t = 0; t < 60; ++t) {
    const double x = shifted.columns[0].values[t];
    if (t >= 20 && t <= 29) {
      EXPECT_GE(x, 50.0);
      EXPECT_LT(x, 51.0);
    } else {
      EXPECT_EQ(x, base.columns[0].values[t]);
    }
  }
}

TEST(Simulation, NewVariableDoesNotShiftExistingDraws) {
  const auto g = root_and_follower();
  auto bigger = add_variable(g, VariableSpec::continuous("W", -1, 1, 0));
  bigger = set_noise(bigger, 3, GaussianNoise{0, 1});
  const auto a = simulate(g, config(80, 12));
  const auto b = simulate(bigger, config(80, 12));
  for (std::size_t v = 0; v < 3; ++v) EXPECT_EQ(a.columns[v].values, b.columns[v].values);
}

TEST(Simulation, ResumeIsBitExact) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = gen::small_graph(rng, 2 + rng.index(3), 3, 0.3);
    for (std::size_t v = 0; v < g.size(); ++v) g = set_noise(g, static_cast<VariableId>(v), GaussianNoise{0, 0.5});
    g.variables[0].latent = true;
    const std::size_t t1 = required_history(g) + rng.index(50), t2 = 1 + rng.index(50);
    auto c = config(t1 + t2, rng.next_u64(), std::nullopt);
    c.record_latent = true;
    const auto whole = simulate(g, c);
    c.length = t1;
    const auto first = simulate(g, c);
    SimulationConfig more;
    more.length = t2;
    const auto rest = resume(first, g, more);
    EXPECT_EQ(rest.meta.start_step, first.meta.next_step);
    EXPECT_EQ(rest.meta.next_step, whole.meta.next_step);
    for (std::size_t v = 0; v < g.size(); ++v) {
      auto joined = first.columns[v].values;
      joined.insert(joined.end(), rest.columns[v].values.begin(), rest.columns[v].values.end());
      ASSERT_EQ(joined, whole.columns[v].values) << "trial " << trial;
    }
  }
}

TEST(Simulation, ConfigErrors) {
  const auto g = root_and_follower();
  EXPECT_EQ(sim_error_code([&] { simulate(g, config(0)); }), "simulation.config");
  auto c = config(10);
  c.interventions.push_back(DoClamp{0, 1.0, 5, 10});
  EXPECT_EQ(sim_error_code([&] { simulate(g, c); }), "simulation.config");
  c.interventions = {DoClamp{0, 1000.0, 0, 1}};
  EXPECT_EQ(sim_error_code([&] { simulate(g, c); }), "simulation.config");
  c.interventions = {DoClamp{9, 0.0, 0, 1}};
  EXPECT_EQ(sim_error_code([&] { simulate(g, c); }), "simulation.unknown_variable");
  c.interventions = {ShiftNoise{0, GaussianNoise{0, -1}, 0, 1}};
  EXPECT_EQ(sim_error_code([&] { simulate(g, c); }), "simulation.config");

  DscpGraph broken = g;
  broken.edges.push_back({0, 0, 0});
  EXPECT_EQ(sim_error_code([&] { simulate(broken, config(5)); }), "simulation.invalid_graph");
}

TEST(Simulation, ClampPropagatesOnlyToDescendants) {
  Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    auto g = gen::small_graph(rng, 4, 2, 0.2);
    for (std::size_t v = 0; v < g.size(); ++v) g = set_noise(g, static_cast<VariableId>(v), UniformNoise{-1, 1});
    const auto base = simulate(g, config(40, 1, 4));
    const auto target = static_cast<VariableId>(rng.index(g.size()));
    auto c = config(40, 1, 4);
    c.interventions.push_back(DoClamp{target, 4.5, 0, 39});
    const auto after = simulate(g, c);
    const auto desc = oracle::descendants(g, target);
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (static_cast<VariableId>(v) == target || desc.contains(static_cast<VariableId>(v))) continue;
      ASSERT_EQ(after.columns[v].values, base.columns[v].values);
    }
  }
}
