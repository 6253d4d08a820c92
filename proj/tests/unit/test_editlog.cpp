#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "generators.hpp"
#include "karmats/document.hpp"
#include "karmats/editlog.hpp"

using namespace karmats;
using nlohmann::json;

namespace {

const Actor kExpert = Actor::expert("ana");

std::filesystem::path temp_path(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("karmats_test_" + std::to_string(::getpid()) + "_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(EditEvent, ActionNamesRoundTrip) {
  for (int a = 0; a <= static_cast<int>(EditAction::accept_suggestion); ++a) {
    const auto action = static_cast<EditAction>(a);
    EXPECT_EQ(parse_edit_action(to_string(action)), action);
  }
  EXPECT_FALSE(parse_edit_action("rename_variable").has_value());
}

TEST(EditEvent, JsonAndLineRoundTrip) {
  gen::EventSource source(1);
  DscpGraph g;
  for (int i = 0; i < 200; ++i) {
    auto e = source.next(g);
    e.seq = static_cast<std::uint64_t>(i + 1);
    e.timestamp = "2024-05-01T00:00:00Z";
    EXPECT_EQ(event_from_json(event_to_json(e)), e);
    const auto line = event_to_line(e);
    EXPECT_EQ(line.back(), '\n');
    EXPECT_EQ(line.find('\n'), line.size() - 1);
    g = apply_event(g, e);
  }
}

TEST(EditEvent, ParseJsonlReportsLine) {
  const auto good = event_to_line(edits::add_variable(kExpert, VariableSpec::binary("b")));
  EXPECT_EQ(parse_jsonl(good + "\n" + good).size(), 2u);
  try {
    parse_jsonl(good + "{broken\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.path().rfind("line 2", 0), 0u) << e.path();
  }
}

TEST(EditEvent, ApplyErrors) {
  DscpGraph g = apply_event({}, edits::add_variable(kExpert, VariableSpec::binary("b")));
  EXPECT_THROW(apply_event(g, edits::add_variable(kExpert, VariableSpec::binary("b"))), GraphError);
  EXPECT_THROW(apply_event(g, edits::remove_edge(kExpert, 0, 0, 1)), GraphError);
  EXPECT_THROW(apply_event(g, edits::remove_functional(kExpert, "none")), GraphError);
  EditEvent bad = edits::remove_variable(kExpert, 0);
  bad.payload = json::object();
  EXPECT_THROW(apply_event(g, bad), FormatError);
  g = apply_event(g, edits::add_functional(kExpert, "t", Threshold{}));
  EXPECT_THROW(apply_event(g, edits::add_functional(kExpert, "t", Threshold{})), GraphError);
  EXPECT_THROW(apply_event(g, edits::update_functional(kExpert, "u", Threshold{})), GraphError);
}

TEST(EditEvent, EventsFromGraphRebuildGraph) {
  const auto g = gen::mixed_graph();
  const auto events = events_from_graph(g, kExpert);
  const auto rebuilt = replay(events);
  EXPECT_TRUE(structurally_equal(rebuilt, g));
  EXPECT_EQ(save_graph(rebuilt), save_graph(g));

  gen::EventSource source(2);
  DscpGraph live;
  for (int i = 0; i < 300; ++i) live = apply_event(live, source.next(live));
  EXPECT_EQ(save_graph(replay(events_from_graph(live, kExpert))), save_graph(live));
}

TEST(EditEvent, AcceptSuggestionSetsAlgorithmProvenance) {
  DscpGraph g;
  g = add_variable(g, VariableSpec::continuous("a", 0, 1, 0));
  g = add_variable(g, VariableSpec::continuous("b", 0, 1, 0));
  SuggestionSet set{"pcmci", {{"a", "b", 1, 0.8}, {"b", "a", 2, 0.1}, {"b", "b", 1, 0.3}}};
  const auto e = accept_suggestion(set, 0);
  reject_suggestion(set, 1);
  reject_suggestion(set, 2);
  EXPECT_EQ(set.suggestions[0].status, SuggestionStatus::accepted);
  EXPECT_EQ(set.suggestions[1].status, SuggestionStatus::rejected);
  EXPECT_THROW(accept_suggestion(set, 1), std::invalid_argument);
  EXPECT_THROW(reject_suggestion(set, 0), std::invalid_argument);
  EXPECT_EQ(e.actor.kind, ActorKind::algorithm);
  const auto after = apply_event(g, e);
  ASSERT_EQ(after.edges.size(), 1u);
  EXPECT_EQ(after.edges[0].provenance, Provenance::algorithm("pcmci"));
  EXPECT_EQ(after.edges[0].lag, 1);
}

TEST(EditLog, CommitAssignsSeqAndCheckpoints) {
  EditLog log(4);
  gen::EventSource source(3);
  DscpGraph g;
  for (int i = 0; i < 10; ++i) g = log.commit(g, source.next(g));
  EXPECT_EQ(log.size(), 10u);
  EXPECT_EQ(log.last_seq(), 10u);
  const auto events = log.events();
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(events[i].seq, i + 1);
  EXPECT_EQ(log.events(7).size(), 3u);
  const auto cps = log.checkpoints();
  ASSERT_EQ(cps.size(), 2u);
  EXPECT_EQ(cps[0].seq, 4u);
  EXPECT_EQ(cps[1].seq, 8u);
  EXPECT_EQ(cps[1].document, save_graph(replay(std::vector<EditEvent>(events.begin(), events.begin() + 8))));
  EXPECT_TRUE(log.verify());
}

TEST(EditLog, FailedCommitAppendsNothing) {
  EditLog log;
  DscpGraph g = log.commit({}, edits::add_variable(kExpert, VariableSpec::binary("b")));
  EXPECT_THROW(log.commit(g, edits::add_variable(kExpert, VariableSpec::binary("b"))), GraphError);
  EXPECT_EQ(log.size(), 1u);
  EXPECT_THROW(log.append_existing(g, log.events().front()), std::invalid_argument);
}

TEST(EditLog, FileMirrorsCommits) {
  const auto path = temp_path("mirror.editlog.jsonl");
  EditLog log(16);
  log.attach_file(path);
  gen::EventSource source(4);
  DscpGraph g;
  for (int i = 0; i < 40; ++i) g = log.commit(g, source.next(g));
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str(), log.to_jsonl());
  const auto loaded = parse_jsonl(text.str());
  EXPECT_EQ(save_graph(replay(loaded)), save_graph(g));

  EditLog reloaded(16);
  DscpGraph r;
  for (const auto& e : loaded) r = reloaded.append_existing(r, e);
  EXPECT_EQ(reloaded.last_seq(), 40u);
  EXPECT_TRUE(reloaded.verify());
  std::filesystem::remove(path);
}

TEST(EditLog, ConcurrentReadersDuringWrites) {
  EditLog log(8);
  std::atomic<bool> done{false};
  std::atomic<std::size_t> reads{0};
  std::thread reader([&] {
    do {
      const auto events = log.events();
      for (std::size_t i = 0; i < events.size(); ++i) ASSERT_EQ(events[i].seq, i + 1);
      ++reads;
    } while (!done);
  });
  gen::EventSource source(5);
  DscpGraph g;
  for (int i = 0; i < 300; ++i) g = log.commit(g, source.next(g));
  done = true;
  reader.join();
  EXPECT_GT(reads.load(), 0u);
  EXPECT_TRUE(log.verify());
}
