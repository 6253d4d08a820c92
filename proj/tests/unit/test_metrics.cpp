#include <gtest/gtest.h>

#include "generators.hpp"
#include "karmats/metrics.hpp"
#include "oracles.hpp"

using namespace karmats;

namespace {

DscpGraph named(std::vector<std::string> names) {
  DscpGraph g;
  for (auto& n : names) g = add_variable(g, VariableSpec::continuous(n, 0, 1, 0));
  return g;
}

DscpGraph with_edges(DscpGraph g, std::vector<LagEdge> edges) {
  for (auto& e : edges) g = add_edge(g, e);
  return g;
}

}  // namespace

TEST(MatchF1, ExactAndWindowed) {
  const auto base = named({"a", "b"});
  const auto truth = with_edges(base, {{0, 1, 2}, {0, 1, 5}});
  const auto est = with_edges(base, {{0, 1, 4}, {0, 1, 6}});
  const auto w0 = match_f1(truth, est, 0);
  EXPECT_EQ(w0.tp.size(), 0u);
  EXPECT_EQ(w0.f1, 0.0);
  // With w = 2 both estimates can be matched: 4 -> 2 and 6 -> 5. Greedy nearest
  // would pair 4 with 5 and leave 6 unmatched.
  const auto w2 = match_f1(truth, est, 2);
  EXPECT_EQ(w2.tp.size(), 2u);
  EXPECT_EQ(w2.f1, 1.0);
  EXPECT_EQ(match_f1(est, truth, 2).tp.size(), 2u);
  EXPECT_EQ(w2.tp[0].matched_lag, 2);
}

TEST(MatchF1, EmptyAndIdentity) {
  const auto g = with_edges(named({"a", "b", "c"}), {{0, 1, 1}, {1, 2, 3}, {2, 2, 1}});
  const auto empty = gen::without_edges(g);
  EXPECT_EQ(match_f1(g, g).f1, 1.0);
  EXPECT_EQ(match_f1(g, empty).f1, 0.0);
  EXPECT_EQ(match_f1(g, empty).fn.size(), 3u);
  EXPECT_EQ(match_f1(empty, g).fp.size(), 3u);
  EXPECT_EQ(match_f1(empty, empty).f1, 0.0);
}

TEST(MatchF1, LatentEdgesIgnoredAndUniverseChecked) {
  auto truth = with_edges(named({"a", "b", "h"}), {{0, 1, 1}, {2, 1, 1}});
  truth.variables[2].latent = true;
  const auto est = with_edges(named({"a", "b"}), {{0, 1, 1}});
  EXPECT_EQ(match_f1(truth, est).f1, 1.0);
  EXPECT_EQ(sid(truth, est), 0u);
  try {
    match_f1(truth, named({"a", "z"}));
    FAIL();
  } catch (const MetricsError& e) {
    EXPECT_EQ(e.code(), "metrics.universe_mismatch");
    EXPECT_NE(std::string(e.what()).find("z"), std::string::npos);
  }
  EXPECT_THROW(match_f1(est, est, -1), MetricsError);
}

TEST(SummaryF1, CollapsesLags) {
  const auto base = named({"a", "b"});
  const auto truth = with_edges(base, {{0, 1, 1}, {0, 1, 2}});
  const auto est = with_edges(base, {{0, 1, 7}, {1, 0, 1}});
  const auto r = summary_f1(truth, est);
  EXPECT_EQ(r.tp.size(), 1u);
  EXPECT_EQ(r.fp.size(), 1u);
  EXPECT_EQ(r.fn.size(), 0u);
  EXPECT_DOUBLE_EQ(r.f1, 2.0 / 3.0);
}

TEST(Sid, LiteralPairCount) {
  const auto base = named({"a", "b", "c"});
  const auto truth = with_edges(base, {{0, 1, 1}, {1, 2, 1}});
  EXPECT_EQ(sid(truth, truth), 0u);
  // c's parents differ (lag changed); summary agrees.
  const auto est = with_edges(base, {{0, 1, 1}, {1, 2, 2}});
  EXPECT_EQ(sid(truth, est), 2u);
  EXPECT_EQ(sid_summary(truth, est), 0u);
  const auto rep = sid_report(truth, est);
  EXPECT_EQ(rep.n, 3u);
  EXPECT_EQ(rep.differing_targets, (std::vector<std::string>{"c"}));
  EXPECT_EQ(sid(truth, base), 4u);
  EXPECT_EQ(to_json(rep)["max"], 6);
}

TEST(MetricProperty, AgreesWithOracles) {
  Rng rng(100);
  for (int i = 0; i < 500; ++i) {
    const auto n = 1 + rng.index(4);
    const auto truth = gen::small_graph(rng, n, 3, rng.uniform(0, 0.4));
    const auto est = rng.uniform01() < 0.5 ? gen::perturb(truth, rng, 3) : gen::small_graph(rng, n, 3, 0.2);
    const auto te = oracle::observed_edges(truth), ee = oracle::observed_edges(est);
    for (int w = 0; w <= 3; ++w) {
      const auto r = match_f1(truth, est, w);
      const auto tp = oracle::max_true_positives(te, ee, w);
      const auto s = oracle::scores(tp, ee.size(), te.size());
      ASSERT_EQ(r.tp.size(), tp);
      ASSERT_EQ(r.tp.size() + r.fp.size(), ee.size());
      ASSERT_EQ(r.tp.size() + r.fn.size(), te.size());
      ASSERT_DOUBLE_EQ(r.f1, s.f1);
    }
    ASSERT_EQ(sid(truth, est), oracle::sid(truth, est, false));
    ASSERT_EQ(sid_summary(truth, est), oracle::sid(truth, est, true));
    ASSERT_DOUBLE_EQ(summary_f1(truth, est).f1, oracle::summary_scores(truth, est).f1);
  }
}

TEST(MetricProperty, WindowMonotone) {
  Rng rng(101);
  for (int i = 0; i < 300; ++i) {
    const auto truth = gen::small_graph(rng, 4, 3, 0.3);
    const auto est = gen::perturb(truth, rng, 3);
    double prev = -1;
    for (int w = 0; w <= 4; ++w) {
      const double f = match_f1(truth, est, w).f1;
      ASSERT_GE(f, prev);
      prev = f;
    }
  }
}

TEST(Evaluate, BatchMatchesSerial) {
  Rng rng(102);
  std::vector<DscpGraph> truths, ests;
  for (int i = 0; i < 40; ++i) {
    truths.push_back(gen::small_graph(rng, 4, 3, 0.3));
    ests.push_back(gen::perturb(truths.back(), rng, 3));
  }
  std::vector<std::pair<const DscpGraph*, const DscpGraph*>> pairs;
  for (std::size_t i = 0; i < truths.size(); ++i) pairs.push_back({&truths[i], &ests[i]});
  const auto batch = evaluate_batch(pairs, 1, 4);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto one = evaluate(truths[i], ests[i], 1);
    EXPECT_EQ(batch[i].windowed.f1, one.windowed.f1);
    EXPECT_EQ(batch[i].sid.sid, one.sid.sid);
  }
  const auto j = to_json(batch[0]);
  EXPECT_TRUE(j.contains("f1"));
  EXPECT_TRUE(j["sid"].contains("definition"));
}
