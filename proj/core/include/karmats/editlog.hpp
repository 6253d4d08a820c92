#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "karmats/discovery.hpp"
#include "karmats/graph.hpp"

namespace karmats {

enum class ActorKind { expert, algorithm };

struct Actor {
  ActorKind kind = ActorKind::expert;
  std::string name;

  static Actor expert(std::string name) { return {ActorKind::expert, std::move(name)}; }
  static Actor algorithm(std::string name) { return {ActorKind::algorithm, std::move(name)}; }
  bool operator==(const Actor&) const = default;
};

enum class EditAction {
  add_variable,
  update_variable,
  remove_variable,
  add_edge,
  update_edge,
  remove_edge,
  update_partition,
  remove_partition,
  add_functional,
  update_functional,
  remove_functional,
  update_noise,
  update_settings,
  accept_suggestion,
};

std::string_view to_string(EditAction action) noexcept;
std::optional<EditAction> parse_edit_action(std::string_view text) noexcept;

/// One accepted mutation. Payload shapes per action:
///   add_variable       {"variable": VariableSpec}
///   update_variable    {"id", "variable": VariableSpec}
///   remove_variable    {"id"}
///   add_edge           {"edge": LagEdge}
///   update_edge        {"source", "target", "lag", "functional", "provenance"}
///   remove_edge        {"source", "target", "lag"}
///   update_partition   {"target", "groups": [PartitionGroup]}
///   remove_partition   {"target"}            (back to singleton groups)
///   add/update_functional {"key", "functional": FunctionalSpec}
///   remove_functional  {"key"}
///   update_noise       {"variable", "noise": NoiseSpec}
///   update_settings    {"binary_threshold"}
///   accept_suggestion  {"algorithm", "source": name, "target": name, "lag", "score"?}
struct EditEvent {
  std::uint64_t seq = 0;
  Actor actor;
  EditAction action = EditAction::add_variable;
  nlohmann::json payload = nlohmann::json::object();
  std::string timestamp;
  bool operator==(const EditEvent&) const = default;
};

/// Applies one event; throws GraphError (invariant violation) or FormatError (bad payload).
DscpGraph apply_event(const DscpGraph& graph, const EditEvent& event);
/// Folds events over `base` (an empty graph by default).
DscpGraph replay(std::span<const EditEvent> events, DscpGraph base = {});

nlohmann::json event_to_json(const EditEvent& event);
EditEvent event_from_json(const nlohmann::json& j, const std::string& path = "");
/// Single-line JSON form used by *.editlog.jsonl.
std::string event_to_line(const EditEvent& event);
std::vector<EditEvent> parse_jsonl(std::string_view text);

// Event builders; seq and timestamp are assigned by the log.
namespace edits {
EditEvent add_variable(Actor actor, const VariableSpec& spec);
EditEvent update_variable(Actor actor, VariableId id, const VariableSpec& spec);
EditEvent remove_variable(Actor actor, VariableId id);
EditEvent add_edge(Actor actor, const LagEdge& edge);
EditEvent update_edge(Actor actor, const LagEdge& edge);
EditEvent remove_edge(Actor actor, VariableId source, VariableId target, int lag);
EditEvent update_partition(Actor actor, VariableId target, const std::vector<PartitionGroup>& groups);
EditEvent remove_partition(Actor actor, VariableId target);
EditEvent add_functional(Actor actor, const std::string& key, const FunctionalSpec& spec);
EditEvent update_functional(Actor actor, const std::string& key, const FunctionalSpec& spec);
EditEvent remove_functional(Actor actor, const std::string& key);
EditEvent update_noise(Actor actor, VariableId id, const NoiseSpec& noise);
EditEvent update_settings(Actor actor, double binary_threshold);
}  // namespace edits

/// Events that rebuild `graph` from an empty graph.
std::vector<EditEvent> events_from_graph(const DscpGraph& graph, const Actor& actor);

/// Marks suggestion `index` accepted and returns the event that adds its edge
/// with algorithm provenance. Throws std::invalid_argument if not pending.
EditEvent accept_suggestion(SuggestionSet& set, std::size_t index);
void reject_suggestion(SuggestionSet& set, std::size_t index);

/// Append-only history of one graph with periodic canonical snapshots.
/// One writer, any number of concurrent readers.
class EditLog {
 public:
  struct Checkpoint {
    std::uint64_t seq = 0;
    std::string document;
  };

  explicit EditLog(std::size_t snapshot_interval = 64) : interval_(snapshot_interval == 0 ? 1 : snapshot_interval) {}
  EditLog(const EditLog&) = delete;
  EditLog& operator=(const EditLog&) = delete;

  /// Applies `event` to `current`, assigns the next seq, appends it and
  /// returns the new graph. Nothing is appended if the event fails.
  DscpGraph commit(const DscpGraph& current, EditEvent event);

  /// Appends a pre-sequenced event (seq must exceed the last one) after
  /// checking it applies; used when loading a log file.
  DscpGraph append_existing(const DscpGraph& current, const EditEvent& event);

  std::vector<EditEvent> events(std::uint64_t after_seq = 0) const;
  std::vector<Checkpoint> checkpoints() const;
  std::uint64_t last_seq() const;
  std::size_t size() const;

  /// Replays the log from empty and compares against every checkpoint.
  bool verify() const;

  std::string to_jsonl() const;
  /// Every committed event is also appended as a line to `path`.
  void attach_file(std::filesystem::path path);

 private:
  void record(const EditEvent& event, const DscpGraph& after);

  std::size_t interval_;
  mutable std::shared_mutex mutex_;
  std::vector<EditEvent> events_;
  std::vector<Checkpoint> checkpoints_;
  std::optional<std::filesystem::path> file_;
};

}  // namespace karmats
