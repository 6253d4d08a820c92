#include "karmats/editlog.hpp"

#include <fstream>
#include <stdexcept>

#include "karmats/document.hpp"

namespace karmats {

using nlohmann::json;
using namespace json_read;

namespace {

constexpr std::string_view kActionNames[] = {
    "add_variable",     "update_variable",  "remove_variable",   "add_edge",     "update_edge",
    "remove_edge",      "update_partition", "remove_partition",  "add_functional", "update_functional",
    "remove_functional", "update_noise",    "update_settings",   "accept_suggestion",
};

VariableId id_field(const json& payload, const char* key, const std::string& path) {
  const long long v = integer(field(payload, key, path), path + "/" + key);
  if (v < 0) throw FormatError(path + "/" + key, "expected a variable id");
  return static_cast<VariableId>(v);
}

int lag_field(const json& payload, const std::string& path) {
  return static_cast<int>(integer(field(payload, "lag", path), path + "/lag"));
}

EditEvent make(Actor actor, EditAction action, json payload) {
  EditEvent e;
  e.actor = std::move(actor);
  e.action = action;
  e.payload = std::move(payload);
  return e;
}

}  // namespace

std::string_view to_string(EditAction action) noexcept { return kActionNames[static_cast<std::size_t>(action)]; }

std::optional<EditAction> parse_edit_action(std::string_view text) noexcept {
  for (std::size_t i = 0; i < std::size(kActionNames); ++i) {
    if (kActionNames[i] == text) return static_cast<EditAction>(i);
  }
  return std::nullopt;
}

DscpGraph apply_event(const DscpGraph& graph, const EditEvent& event) {
  const json& p = event.payload;
  const std::string path = "/payload";
  object(p, path);
  switch (event.action) {
    case EditAction::add_variable:
      return add_variable(graph, variable_from_json(field(p, "variable", path), path + "/variable"));
    case EditAction::update_variable:
      return update_variable(graph, id_field(p, "id", path), variable_from_json(field(p, "variable", path), path + "/variable"));
    case EditAction::remove_variable:
      return remove_variable(graph, id_field(p, "id", path));
    case EditAction::add_edge:
      return add_edge(graph, edge_from_json(field(p, "edge", path), path + "/edge"));
    case EditAction::update_edge: {
      const VariableId s = id_field(p, "source", path);
      const VariableId t = id_field(p, "target", path);
      const int lag = lag_field(p, path);
      const LagEdge* existing = graph.find_edge(s, t, lag);
      if (!existing) throw GraphError("edge.unknown", "no such edge to update");
      FunctionalRef functional = existing->functional;
      Provenance provenance = existing->provenance;
      if (const json* f = optional_field(p, "functional")) functional = functional_ref_from_json(*f, path + "/functional");
      if (const json* pr = optional_field(p, "provenance")) provenance = provenance_from_json(*pr, path + "/provenance");
      return update_edge(graph, s, t, lag, std::move(functional), std::move(provenance));
    }
    case EditAction::remove_edge:
      return remove_edge(graph, id_field(p, "source", path), id_field(p, "target", path), lag_field(p, path));
    case EditAction::update_partition: {
      const VariableId target = id_field(p, "target", path);
      const json& groups = array(field(p, "groups", path), path + "/groups");
      std::vector<std::vector<ParentRef>> members;
      std::vector<FunctionalRef> bindings;
      for (std::size_t i = 0; i < groups.size(); ++i) {
        PartitionGroup g = group_from_json(groups[i], path + "/groups/" + std::to_string(i));
        members.push_back(std::move(g.members));
        bindings.push_back(std::move(g.functional));
      }
      return set_partition(graph, target, std::move(members), std::move(bindings));
    }
    case EditAction::remove_partition:
      return reset_partition(graph, id_field(p, "target", path));
    case EditAction::add_functional: {
      const std::string key = string(field(p, "key", path), path + "/key");
      if (graph.functionals.contains(key)) throw GraphError("functional.duplicate", "functional '" + key + "' already exists");
      return set_functional(graph, key, functional_from_json(field(p, "functional", path), path + "/functional"));
    }
    case EditAction::update_functional: {
      const std::string key = string(field(p, "key", path), path + "/key");
      if (!graph.functionals.contains(key)) throw GraphError("functional.unknown", "unknown functional '" + key + "'");
      return set_functional(graph, key, functional_from_json(field(p, "functional", path), path + "/functional"));
    }
    case EditAction::remove_functional:
      return remove_functional(graph, string(field(p, "key", path), path + "/key"));
    case EditAction::update_noise:
      return set_noise(graph, id_field(p, "variable", path), noise_from_json(field(p, "noise", path), path + "/noise"));
    case EditAction::update_settings: {
      const double threshold = number(field(p, "binary_threshold", path), path + "/binary_threshold");
      if (!(threshold >= 0.0 && threshold <= 1.0)) throw GraphError("graph.binary_threshold", "binary_threshold must lie in [0, 1]");
      DscpGraph out = graph;
      out.binary_threshold = threshold;
      return out;
    }
    case EditAction::accept_suggestion: {
      const std::string algorithm = string(field(p, "algorithm", path), path + "/algorithm");
      const std::string source = string(field(p, "source", path), path + "/source");
      const std::string target = string(field(p, "target", path), path + "/target");
      auto s = graph.find(source);
      auto t = graph.find(target);
      if (!s || !t) throw GraphError("variable.unknown", "suggested edge " + source + " -> " + target + " names an unknown variable");
      LagEdge edge;
      edge.source = *s;
      edge.target = *t;
      edge.lag = lag_field(p, path);
      edge.provenance = Provenance::algorithm(algorithm);
      if (const json* f = optional_field(p, "functional")) edge.functional = functional_ref_from_json(*f, path + "/functional");
      return add_edge(graph, std::move(edge));
    }
  }
  throw FormatError("/action", "unhandled action");
}

DscpGraph replay(std::span<const EditEvent> events, DscpGraph base) {
  for (const auto& e : events) base = apply_event(base, e);
  return base;
}

json event_to_json(const EditEvent& event) {
  return json{{"seq", event.seq},
              {"actor", json{{"kind", event.actor.kind == ActorKind::expert ? "expert" : "algorithm"},
                             {"name", event.actor.name}}},
              {"action", std::string(to_string(event.action))},
              {"payload", event.payload},
              {"timestamp", event.timestamp}};
}

EditEvent event_from_json(const json& j, const std::string& path) {
  object(j, path);
  EditEvent e;
  e.seq = count(field(j, "seq", path), path + "/seq");
  const json& actor = object(field(j, "actor", path), path + "/actor");
  const std::string kind = string(field(actor, "kind", path + "/actor"), path + "/actor/kind");
  if (kind == "expert") e.actor.kind = ActorKind::expert;
  else if (kind == "algorithm") e.actor.kind = ActorKind::algorithm;
  else throw FormatError(path + "/actor/kind", "unknown actor kind '" + kind + "'");
  e.actor.name = string(field(actor, "name", path + "/actor"), path + "/actor/name");
  const std::string action = string(field(j, "action", path), path + "/action");
  auto parsed = parse_edit_action(action);
  if (!parsed) throw FormatError(path + "/action", "unknown action '" + action + "'");
  e.action = *parsed;
  e.payload = object(field(j, "payload", path), path + "/payload");
  if (const json* ts = optional_field(j, "timestamp")) e.timestamp = string(*ts, path + "/timestamp");
  return e;
}

std::string event_to_line(const EditEvent& event) { return event_to_json(event).dump() + "\n"; }

std::vector<EditEvent> parse_jsonl(std::string_view text) {
  std::vector<EditEvent> out;
  std::size_t start = 0;
  std::size_t line = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line;
    const std::string_view row = text.substr(start, end - start);
    start = end + 1;
    if (row.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "line " + std::to_string(line);
    json j;
    try {
      j = json::parse(row.begin(), row.end());
    } catch (const json::parse_error& e) {
      throw FormatError(where, std::string("malformed JSON: ") + e.what());
    }
    try {
      out.push_back(event_from_json(j));
    } catch (const FormatError& e) {
      throw FormatError(where + e.path(), e.what());
    }
  }
  return out;
}

namespace edits {

EditEvent add_variable(Actor actor, const VariableSpec& spec) {
  return make(std::move(actor), EditAction::add_variable, json{{"variable", to_json(spec)}});
}
EditEvent update_variable(Actor actor, VariableId id, const VariableSpec& spec) {
  return make(std::move(actor), EditAction::update_variable, json{{"id", id}, {"variable", to_json(spec)}});
}
EditEvent remove_variable(Actor actor, VariableId id) {
  return make(std::move(actor), EditAction::remove_variable, json{{"id", id}});
}
EditEvent add_edge(Actor actor, const LagEdge& edge) {
  return make(std::move(actor), EditAction::add_edge, json{{"edge", to_json(edge)}});
}
EditEvent update_edge(Actor actor, const LagEdge& edge) {
  return make(std::move(actor), EditAction::update_edge,
              json{{"source", edge.source},
                   {"target", edge.target},
                   {"lag", edge.lag},
                   {"functional", to_json(edge.functional)},
                   {"provenance", to_json(edge.provenance)}});
}
EditEvent remove_edge(Actor actor, VariableId source, VariableId target, int lag) {
  return make(std::move(actor), EditAction::remove_edge, json{{"source", source}, {"target", target}, {"lag", lag}});
}
EditEvent update_partition(Actor actor, VariableId target, const std::vector<PartitionGroup>& groups) {
  json items = json::array();
  for (const auto& g : groups) items.push_back(to_json(g));
  return make(std::move(actor), EditAction::update_partition, json{{"target", target}, {"groups", std::move(items)}});
}
EditEvent remove_partition(Actor actor, VariableId target) {
  return make(std::move(actor), EditAction::remove_partition, json{{"target", target}});
}
EditEvent add_functional(Actor actor, const std::string& key, const FunctionalSpec& spec) {
  return make(std::move(actor), EditAction::add_functional, json{{"key", key}, {"functional", to_json(spec)}});
}
EditEvent update_functional(Actor actor, const std::string& key, const FunctionalSpec& spec) {
  return make(std::move(actor), EditAction::update_functional, json{{"key", key}, {"functional", to_json(spec)}});
}
EditEvent remove_functional(Actor actor, const std::string& key) {
  return make(std::move(actor), EditAction::remove_functional, json{{"key", key}});
}
EditEvent update_noise(Actor actor, VariableId id, const NoiseSpec& noise) {
  return make(std::move(actor), EditAction::update_noise, json{{"variable", id}, {"noise", to_json(noise)}});
}
EditEvent update_settings(Actor actor, double binary_threshold) {
  return make(std::move(actor), EditAction::update_settings, json{{"binary_threshold", binary_threshold}});
}

}  // namespace edits

std::vector<EditEvent> events_from_graph(const DscpGraph& graph, const Actor& actor) {
  const DscpGraph g = canonical(graph);
  std::vector<EditEvent> out;
  for (const auto& [key, spec] : g.functionals) out.push_back(edits::add_functional(actor, key, spec));
  for (const auto& v : g.variables) out.push_back(edits::add_variable(actor, v));
  for (std::size_t v = 0; v < g.noise.size(); ++v) {
    if (!std::holds_alternative<NoNoise>(g.noise[v])) {
      out.push_back(edits::update_noise(actor, static_cast<VariableId>(v), g.noise[v]));
    }
  }
  if (g.binary_threshold != DscpGraph{}.binary_threshold) out.push_back(edits::update_settings(actor, g.binary_threshold));
  DscpGraph rebuilt = replay(out);
  for (const auto& e : g.edges) {
    out.push_back(edits::add_edge(actor, e));
    rebuilt = apply_event(rebuilt, out.back());
  }
  rebuilt = canonical(rebuilt);
  for (std::size_t t = 0; t < g.partitions.size(); ++t) {
    if (g.partitions[t] != rebuilt.partitions[t]) {
      out.push_back(edits::update_partition(actor, static_cast<VariableId>(t), g.partitions[t]));
    }
  }
  return out;
}

EditEvent accept_suggestion(SuggestionSet& set, std::size_t index) {
  if (index >= set.suggestions.size()) throw std::invalid_argument("suggestion index out of range");
  Suggestion& s = set.suggestions[index];
  if (s.status != SuggestionStatus::pending) throw std::invalid_argument("suggestion is not pending");
  json payload{{"algorithm", set.algorithm}, {"source", s.source}, {"target", s.target}, {"lag", s.lag}};
  if (s.score) payload["score"] = *s.score;
  s.status = SuggestionStatus::accepted;
  return make(Actor::algorithm(set.algorithm), EditAction::accept_suggestion, std::move(payload));
}

void reject_suggestion(SuggestionSet& set, std::size_t index) {
  if (index >= set.suggestions.size()) throw std::invalid_argument("suggestion index out of range");
  Suggestion& s = set.suggestions[index];
  if (s.status != SuggestionStatus::pending) throw std::invalid_argument("suggestion is not pending");
  s.status = SuggestionStatus::rejected;
}

DscpGraph EditLog::commit(const DscpGraph& current, EditEvent event) {
  std::unique_lock lock(mutex_);
  DscpGraph next = apply_event(current, event);
  event.seq = events_.empty() ? 1 : events_.back().seq + 1;
  record(event, next);
  return next;
}

DscpGraph EditLog::append_existing(const DscpGraph& current, const EditEvent& event) {
  std::unique_lock lock(mutex_);
  if (!events_.empty() && event.seq <= events_.back().seq) {
    throw std::invalid_argument("edit log seq " + std::to_string(event.seq) + " is not increasing");
  }
  DscpGraph next = apply_event(current, event);
  record(event, next);
  return next;
}

void EditLog::record(const EditEvent& event, const DscpGraph& after) {
  events_.push_back(event);
  if (events_.size() % interval_ == 0) checkpoints_.push_back({event.seq, save_graph(after)});
  if (file_) {
    std::ofstream out(*file_, std::ios::app | std::ios::binary);
    out << event_to_line(event);
    if (!out) throw std::runtime_error("cannot append to " + file_->string());
  }
}

std::vector<EditEvent> EditLog::events(std::uint64_t after_seq) const {
  std::shared_lock lock(mutex_);
  std::vector<EditEvent> out;
  for (const auto& e : events_) {
    if (e.seq > after_seq) out.push_back(e);
  }
  return out;
}

std::vector<EditLog::Checkpoint> EditLog::checkpoints() const {
  std::shared_lock lock(mutex_);
  return checkpoints_;
}

std::uint64_t EditLog::last_seq() const {
  std::shared_lock lock(mutex_);
  return events_.empty() ? 0 : events_.back().seq;
}

std::size_t EditLog::size() const {
  std::shared_lock lock(mutex_);
  return events_.size();
}

bool EditLog::verify() const {
  std::shared_lock lock(mutex_);
  DscpGraph g;
  std::size_t next_checkpoint = 0;
  for (const auto& e : events_) {
    g = apply_event(g, e);
    if (next_checkpoint < checkpoints_.size() && checkpoints_[next_checkpoint].seq == e.seq) {
      if (save_graph(g) != checkpoints_[next_checkpoint].document) return false;
      ++next_checkpoint;
    }
  }
  return next_checkpoint == checkpoints_.size();
}

std::string EditLog::to_jsonl() const {
  std::shared_lock lock(mutex_);
  std::string out;
  for (const auto& e : events_) out += event_to_line(e);
  return out;
}

void EditLog::attach_file(std::filesystem::path path) {
  std::unique_lock lock(mutex_);
  file_ = std::move(path);
}

}  // namespace karmats
