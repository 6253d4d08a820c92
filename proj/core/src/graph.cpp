#include "karmats/graph.hpp"

#include <algorithm>
#include <deque>

namespace karmats {

namespace {

std::string edge_label(const DscpGraph& g, VariableId s, VariableId t, int lag) {
  auto name = [&](VariableId id) { return g.contains(id) ? g.variable(id).name : "#" + std::to_string(id); };
  return name(s) + " -> " + name(t) + " (lag " + std::to_string(lag) + ")";
}

void require_variable(const DscpGraph& g, VariableId id) {
  if (!g.contains(id)) throw GraphError("variable.unknown", "unknown variable id " + std::to_string(id));
}

void check_spec(const DscpGraph& g, const VariableSpec& spec, std::optional<VariableId> self) {
  if (auto problem = check_variable(spec)) throw GraphError(problem->code, spec.name + ": " + problem->message);
  if (auto existing = g.find(spec.name); existing && existing != self) {
    throw GraphError("variable.duplicate_name", "variable name '" + spec.name + "' is already used");
  }
}

void check_binding(const DscpGraph& g, const FunctionalRef& ref, std::size_t group_size) {
  if (ref.is_naive()) return;
  auto it = g.functionals.find(ref.key());
  if (it == g.functionals.end()) throw GraphError("functional.unknown", "unknown functional '" + ref.key() + "'");
  if (auto arity = functional_arity(it->second); arity && *arity != group_size) {
    throw GraphError("functional.arity", "functional '" + ref.key() + "' takes " + std::to_string(*arity) +
                                             " parents but the group has " + std::to_string(group_size));
  }
}

/// True if `to` is reachable from `from` along lag-0 edges.
bool reaches_contemporaneous(const DscpGraph& g, VariableId from, VariableId to) {
  std::vector<bool> seen(g.size(), false);
  std::deque<VariableId> queue{from};
  seen[static_cast<std::size_t>(from)] = true;
  while (!queue.empty()) {
    const VariableId v = queue.front();
    queue.pop_front();
    if (v == to) return true;
    for (const auto& e : g.edges) {
      if (e.lag == 0 && e.source == v && !seen[static_cast<std::size_t>(e.target)]) {
        seen[static_cast<std::size_t>(e.target)] = true;
        queue.push_back(e.target);
      }
    }
  }
  return false;
}

std::vector<PartitionGroup> singleton_groups(const DscpGraph& g, VariableId target) {
  std::vector<const LagEdge*> incoming;
  for (const auto& e : g.edges) {
    if (e.target == target) incoming.push_back(&e);
  }
  std::sort(incoming.begin(), incoming.end(), [](const LagEdge* a, const LagEdge* b) { return a->parent() < b->parent(); });
  std::vector<PartitionGroup> groups;
  for (const LagEdge* e : incoming) groups.push_back({{e->parent()}, e->functional});
  return groups;
}

std::size_t group_index_of(const std::vector<PartitionGroup>& groups, ParentRef parent) {
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (std::find(groups[i].members.begin(), groups[i].members.end(), parent) != groups[i].members.end()) return i;
  }
  return groups.size();
}

}  // namespace

std::string_view to_string(ProvenanceKind kind) noexcept {
  switch (kind) {
    case ProvenanceKind::expert: return "expert";
    case ProvenanceKind::algorithm: return "algorithm";
    case ProvenanceKind::generator: return "template";
  }
  return "expert";
}

std::optional<VariableId> DscpGraph::find(std::string_view name) const {
  for (const auto& v : variables) {
    if (v.name == name) return v.id;
  }
  return std::nullopt;
}

const LagEdge* DscpGraph::find_edge(VariableId source, VariableId target, int lag) const {
  for (const auto& e : edges) {
    if (e.source == source && e.target == target && e.lag == lag) return &e;
  }
  return nullptr;
}

FunctionalSpec DscpGraph::resolve(const FunctionalRef& ref) const {
  if (ref.is_naive()) return ref.naive() == Naive::identity ? FunctionalSpec{Identity{}} : FunctionalSpec{Null{}};
  auto it = functionals.find(ref.key());
  if (it == functionals.end()) throw GraphError("functional.unknown", "unknown functional '" + ref.key() + "'");
  return it->second;
}

DscpGraph add_variable(const DscpGraph& graph, VariableSpec spec) {
  check_spec(graph, spec, std::nullopt);
  DscpGraph out = graph;
  spec.id = static_cast<VariableId>(out.variables.size());
  out.variables.push_back(std::move(spec));
  out.partitions.emplace_back();
  out.noise.emplace_back(NoNoise{});
  return out;
}

DscpGraph update_variable(const DscpGraph& graph, VariableId id, VariableSpec spec) {
  require_variable(graph, id);
  spec.id = id;
  check_spec(graph, spec, id);
  DscpGraph out = graph;
  out.variables[static_cast<std::size_t>(id)] = std::move(spec);
  return out;
}

DscpGraph remove_variable(const DscpGraph& graph, VariableId id) {
  require_variable(graph, id);
  std::set<VariableId> affected;
  for (const auto& e : graph.edges) {
    if (e.source == id && e.target != id) affected.insert(e.target);
  }

  auto renumber = [id](VariableId v) { return v > id ? v - 1 : v; };
  DscpGraph out;
  out.functionals = graph.functionals;
  out.binary_threshold = graph.binary_threshold;
  for (const auto& v : graph.variables) {
    if (v.id == id) continue;
    VariableSpec copy = v;
    copy.id = renumber(v.id);
    out.variables.push_back(std::move(copy));
    out.noise.push_back(graph.noise.at(static_cast<std::size_t>(v.id)));
  }
  for (const auto& e : graph.edges) {
    if (e.source == id || e.target == id) continue;
    LagEdge copy = e;
    copy.source = renumber(e.source);
    copy.target = renumber(e.target);
    out.edges.push_back(std::move(copy));
  }
  out.partitions.resize(out.variables.size());
  for (const auto& v : graph.variables) {
    if (v.id == id) continue;
    const VariableId nid = renumber(v.id);
    if (affected.contains(v.id)) {
      out.partitions[static_cast<std::size_t>(nid)] = singleton_groups(out, nid);
      continue;
    }
    auto groups = graph.partitions.at(static_cast<std::size_t>(v.id));
    for (auto& group : groups) {
      for (auto& m : group.members) m.source = renumber(m.source);
      std::sort(group.members.begin(), group.members.end());
    }
    out.partitions[static_cast<std::size_t>(nid)] = std::move(groups);
  }
  return out;
}

DscpGraph add_edge(const DscpGraph& graph, LagEdge edge) {
  if (!graph.contains(edge.source) || !graph.contains(edge.target)) {
    throw GraphError("edge.unknown_variable", "edge endpoint does not exist: " +
                                                  edge_label(graph, edge.source, edge.target, edge.lag));
  }
  const std::string label = edge_label(graph, edge.source, edge.target, edge.lag);
  if (edge.lag < 0) throw GraphError("edge.negative_lag", "negative lag on " + label);
  if (edge.lag == 0 && edge.source == edge.target) {
    throw GraphError("edge.self_loop", "contemporaneous self-loop " + label);
  }
  if (graph.find_edge(edge.source, edge.target, edge.lag)) throw GraphError("edge.duplicate", "duplicate edge " + label);
  check_binding(graph, edge.functional, 1);
  if (edge.lag == 0 && reaches_contemporaneous(graph, edge.target, edge.source)) {
    throw GraphError("edge.contemporaneous_cycle", "edge " + label + " closes a contemporaneous cycle");
  }
  DscpGraph out = graph;
  out.partitions[static_cast<std::size_t>(edge.target)].push_back({{edge.parent()}, edge.functional});
  out.edges.push_back(std::move(edge));
  return out;
}

DscpGraph update_edge(const DscpGraph& graph, VariableId source, VariableId target, int lag,
                      FunctionalRef functional, Provenance provenance) {
  if (!graph.find_edge(source, target, lag)) {
    throw GraphError("edge.unknown", "no edge " + edge_label(graph, source, target, lag));
  }
  check_binding(graph, functional, 1);
  DscpGraph out = graph;
  for (auto& e : out.edges) {
    if (e.source == source && e.target == target && e.lag == lag) {
      e.functional = functional;
      e.provenance = std::move(provenance);
    }
  }
  auto& groups = out.partitions[static_cast<std::size_t>(target)];
  const std::size_t gi = group_index_of(groups, {source, lag});
  if (gi < groups.size() && groups[gi].members.size() == 1) groups[gi].functional = functional;
  return out;
}

DscpGraph remove_edge(const DscpGraph& graph, VariableId source, VariableId target, int lag) {
  if (!graph.find_edge(source, target, lag)) {
    throw GraphError("edge.unknown", "no edge " + edge_label(graph, source, target, lag));
  }
  DscpGraph out = graph;
  std::erase_if(out.edges, [&](const LagEdge& e) { return e.source == source && e.target == target && e.lag == lag; });
  auto& groups = out.partitions[static_cast<std::size_t>(target)];
  const std::size_t gi = group_index_of(groups, {source, lag});
  if (gi < groups.size() && groups[gi].members.size() == 1) {
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(gi));
  } else {
    // A multi-parent functional cannot lose an input; fall back to singletons.
    groups = singleton_groups(out, target);
  }
  return out;
}

DscpGraph set_partition(const DscpGraph& graph, VariableId target, std::vector<std::vector<ParentRef>> groups,
                        std::vector<FunctionalRef> bindings) {
  require_variable(graph, target);
  if (groups.size() != bindings.size()) {
    throw GraphError("partition.arity", "got " + std::to_string(groups.size()) + " groups but " +
                                            std::to_string(bindings.size()) + " functional bindings");
  }
  const auto parents = parents_of(graph, target);
  std::set<ParentRef> seen;
  for (auto& group : groups) {
    if (group.empty()) throw GraphError("partition.empty_group", "partition group is empty");
    for (const auto& m : group) {
      if (!std::binary_search(parents.begin(), parents.end(), m)) {
        throw GraphError("partition.unknown_parent", edge_label(graph, m.source, target, m.lag) + " is not an edge");
      }
      if (!seen.insert(m).second) {
        throw GraphError("partition.overlap", "parent " + edge_label(graph, m.source, target, m.lag) +
                                                  " appears in more than one group");
      }
    }
    std::sort(group.begin(), group.end());
  }
  if (seen.size() != parents.size()) {
    throw GraphError("partition.incomplete_cover", "groups cover " + std::to_string(seen.size()) + " of " +
                                                       std::to_string(parents.size()) + " parents");
  }
  for (std::size_t i = 0; i < groups.size(); ++i) check_binding(graph, bindings[i], groups[i].size());

  DscpGraph out = graph;
  auto& slot = out.partitions[static_cast<std::size_t>(target)];
  slot.clear();
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].size() == 1) {
      for (auto& e : out.edges) {
        if (e.target == target && e.parent() == groups[i].front()) e.functional = bindings[i];
      }
    }
    slot.push_back({std::move(groups[i]), std::move(bindings[i])});
  }
  return out;
}

DscpGraph reset_partition(const DscpGraph& graph, VariableId target) {
  require_variable(graph, target);
  DscpGraph out = graph;
  out.partitions[static_cast<std::size_t>(target)] = singleton_groups(out, target);
  return out;
}

DscpGraph set_functional(const DscpGraph& graph, const std::string& key, FunctionalSpec spec) {
  if (key.empty()) throw GraphError("functional.key", "functional key is empty");
  if (auto problem = check_functional(spec)) throw GraphError("functional.shape", key + ": " + *problem);
  const auto arity = functional_arity(spec);
  if (arity) {
    for (const auto& groups : graph.partitions) {
      for (const auto& group : groups) {
        if (!group.functional.is_naive() && group.functional.key() == key && group.members.size() != *arity) {
          throw GraphError("functional.arity", "functional '" + key + "' is bound to a group of " +
                                                   std::to_string(group.members.size()) + " parents");
        }
      }
    }
    for (const auto& e : graph.edges) {
      if (!e.functional.is_naive() && e.functional.key() == key && *arity != 1) {
        throw GraphError("functional.arity", "functional '" + key + "' is bound to a single edge");
      }
    }
  }
  DscpGraph out = graph;
  out.functionals[key] = std::move(spec);
  return out;
}

DscpGraph remove_functional(const DscpGraph& graph, const std::string& key) {
  if (!graph.functionals.contains(key)) throw GraphError("functional.unknown", "unknown functional '" + key + "'");
  const FunctionalRef ref(key);
  for (const auto& e : graph.edges) {
    if (e.functional == ref) throw GraphError("functional.in_use", "functional '" + key + "' is used by an edge");
  }
  for (const auto& groups : graph.partitions) {
    for (const auto& group : groups) {
      if (group.functional == ref) throw GraphError("functional.in_use", "functional '" + key + "' is used by a partition");
    }
  }
  DscpGraph out = graph;
  out.functionals.erase(key);
  return out;
}

DscpGraph set_noise(const DscpGraph& graph, VariableId id, NoiseSpec noise) {
  require_variable(graph, id);
  if (auto problem = check_noise(noise)) throw GraphError("noise.invalid", *problem);
  DscpGraph out = graph;
  out.noise[static_cast<std::size_t>(id)] = noise;
  return out;
}

std::vector<ParentRef> parents_of(const DscpGraph& graph, VariableId target) {
  require_variable(graph, target);
  std::vector<ParentRef> out;
  for (const auto& e : graph.edges) {
    if (e.target == target) out.push_back(e.parent());
  }
  std::sort(out.begin(), out.end());
  return out;
}

SummaryGraph summary_graph(const DscpGraph& graph) {
  SummaryGraph s;
  s.nodes = graph.size();
  for (const auto& e : graph.edges) s.edges.insert({e.source, e.target});
  return s;
}

double enr(const DscpGraph& graph) {
  if (graph.variables.empty()) return 0.0;
  return static_cast<double>(graph.edges.size()) / static_cast<double>(graph.variables.size());
}

int max_lag(const DscpGraph& graph) {
  int lag = 0;
  for (const auto& e : graph.edges) lag = std::max(lag, e.lag);
  return lag;
}

std::size_t required_history(const DscpGraph& graph) {
  std::size_t rows = 0;
  for (std::size_t t = 0; t < graph.partitions.size(); ++t) {
    for (const auto& group : graph.partitions[t]) {
      const std::size_t window = functional_window(graph.resolve(group.functional));
      for (const auto& m : group.members) {
        rows = std::max(rows, static_cast<std::size_t>(m.lag) + window - 1);
      }
    }
  }
  return std::max(rows, static_cast<std::size_t>(max_lag(graph)));
}

DscpGraph canonical(const DscpGraph& graph) {
  DscpGraph out = graph;
  std::sort(out.edges.begin(), out.edges.end(), [](const LagEdge& a, const LagEdge& b) {
    return std::tie(a.source, a.target, a.lag) < std::tie(b.source, b.target, b.lag);
  });
  for (auto& groups : out.partitions) {
    for (auto& group : groups) std::sort(group.members.begin(), group.members.end());
    std::sort(groups.begin(), groups.end(), [](const PartitionGroup& a, const PartitionGroup& b) {
      if (a.members.empty() || b.members.empty()) return a.members.size() < b.members.size();
      return a.members.front() < b.members.front();
    });
  }
  return out;
}

bool structurally_equal(const DscpGraph& a, const DscpGraph& b) { return canonical(a) == canonical(b); }

double aggregate_node(const DscpGraph& graph, VariableId target, std::span<const double> group_outputs, double noise) {
  require_variable(graph, target);
  const auto& groups = graph.partitions.at(static_cast<std::size_t>(target));
  if (group_outputs.size() != groups.size()) {
    throw GraphError("partition.arity", "expected " + std::to_string(groups.size()) + " group outputs, got " +
                                            std::to_string(group_outputs.size()));
  }
  return aggregate_node(graph.variable(target), group_outputs, noise, graph.binary_threshold);
}

}  // namespace karmats
