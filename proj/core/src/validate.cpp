#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <sstream>

#include "karmats/graph.hpp"

namespace karmats {

namespace {

class Collector {
 public:
  explicit Collector(const DscpGraph& g) : g_(g) {}

  void add(std::string code, std::string location, std::string message) {
    report_.findings.push_back({std::move(code), std::move(location), std::move(message)});
  }
  std::string name(VariableId id) const {
    return g_.contains(id) ? g_.variable(id).name : "#" + std::to_string(id);
  }
  std::string edge(VariableId s, VariableId t, int lag) const {
    return name(s) + " -> " + name(t) + " (lag " + std::to_string(lag) + ")";
  }
  ValidationReport take() { return std::move(report_); }

 private:
  const DscpGraph& g_;
  ValidationReport report_;
};

/// Strongly connected components of the lag-0 subgraph with more than one node.
std::vector<std::vector<VariableId>> contemporaneous_sccs(const DscpGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<VariableId>> succ(n);
  for (const auto& e : g.edges) {
    if (e.lag == 0 && e.source != e.target && g.contains(e.source) && g.contains(e.target)) {
      succ[static_cast<std::size_t>(e.source)].push_back(e.target);
    }
  }
  // Tarjan, recursive; graphs edited by hand stay small.
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<VariableId> stack;
  std::vector<std::vector<VariableId>> out;
  int counter = 0;
  std::function<void(VariableId)> visit = [&](VariableId v) {
    const auto vi = static_cast<std::size_t>(v);
    index[vi] = low[vi] = counter++;
    stack.push_back(v);
    on_stack[vi] = true;
    for (VariableId w : succ[vi]) {
      const auto wi = static_cast<std::size_t>(w);
      if (index[wi] < 0) {
        visit(w);
        low[vi] = std::min(low[vi], low[wi]);
      } else if (on_stack[wi]) {
        low[vi] = std::min(low[vi], index[wi]);
      }
    }
    if (low[vi] == index[vi]) {
      std::vector<VariableId> comp;
      VariableId w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[static_cast<std::size_t>(w)] = false;
        comp.push_back(w);
      } while (w != v);
      if (comp.size() > 1) {
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] < 0) visit(static_cast<VariableId>(v));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// One concrete cycle through the smallest node of a component.
std::vector<VariableId> cycle_in(const DscpGraph& g, const std::vector<VariableId>& comp) {
  const VariableId start = comp.front();
  std::map<VariableId, VariableId> parent;
  std::deque<VariableId> queue{start};
  std::set<VariableId> members(comp.begin(), comp.end());
  std::set<VariableId> seen{start};
  while (!queue.empty()) {
    const VariableId v = queue.front();
    queue.pop_front();
    for (const auto& e : g.edges) {
      if (e.lag != 0 || e.source != v || !members.contains(e.target)) continue;
      if (e.target == start) {
        std::vector<VariableId> path{v};
        while (path.back() != start) path.push_back(parent.at(path.back()));
        std::reverse(path.begin(), path.end());
        return path;
      }
      if (seen.insert(e.target).second) {
        parent[e.target] = v;
        queue.push_back(e.target);
      }
    }
  }
  return comp;
}

}  // namespace

std::size_t ValidationReport::count(std::string_view code) const {
  return static_cast<std::size_t>(
      std::count_if(findings.begin(), findings.end(), [&](const Finding& f) { return f.code == code; }));
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& f : findings) os << f.location << ": [" << f.code << "] " << f.message << '\n';
  return os.str();
}

ValidationReport validate(const DscpGraph& g) {
  Collector c(g);
  const std::size_t n = g.size();

  std::map<std::string, VariableId> names;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = g.variables[i];
    const std::string loc = "variables[" + std::to_string(i) + "]";
    if (v.id != static_cast<VariableId>(i)) {
      c.add("variable.id", loc, "id " + std::to_string(v.id) + " is not the dense index " + std::to_string(i));
    }
    if (auto problem = check_variable(v)) c.add(problem->code, loc, v.name + ": " + problem->message);
    if (auto [it, fresh] = names.emplace(v.name, v.id); !fresh) {
      c.add("variable.duplicate_name", loc, "name '" + v.name + "' is already used");
    }
  }

  if (!(g.binary_threshold >= 0.0 && g.binary_threshold <= 1.0)) {
    c.add("graph.binary_threshold", "binary_threshold", "must lie in [0, 1]");
  }

  if (g.noise.size() != n) {
    c.add("graph.noise_size", "noise", "expected " + std::to_string(n) + " noise entries");
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (auto problem = check_noise(g.noise[i])) c.add("noise.invalid", "noise[" + std::to_string(i) + "]", *problem);
    }
  }

  for (const auto& [key, spec] : g.functionals) {
    if (key.empty()) c.add("functional.key", "functionals", "empty functional key");
    if (auto problem = check_functional(spec)) c.add("functional.shape", "functionals." + key, *problem);
  }

  auto check_ref = [&](const FunctionalRef& ref, std::size_t group_size, const std::string& loc) {
    if (ref.is_naive()) return;
    auto it = g.functionals.find(ref.key());
    if (it == g.functionals.end()) {
      c.add("functional.unknown", loc, "unknown functional '" + ref.key() + "'");
      return;
    }
    if (auto arity = functional_arity(it->second); arity && *arity != group_size) {
      c.add("functional.arity", loc,
            "functional '" + ref.key() + "' takes " + std::to_string(*arity) + " parents, group has " +
                std::to_string(group_size));
    }
  };

  std::set<std::tuple<VariableId, VariableId, int>> triples;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    const std::string loc = "edges[" + std::to_string(i) + "] " + c.edge(e.source, e.target, e.lag);
    if (!g.contains(e.source) || !g.contains(e.target)) {
      c.add("edge.unknown_variable", loc, "endpoint does not exist");
      continue;
    }
    if (e.lag < 0) c.add("edge.negative_lag", loc, "lag must be >= 0");
    if (e.lag == 0 && e.source == e.target) c.add("edge.self_loop", loc, "contemporaneous self-loop");
    if (!triples.insert({e.source, e.target, e.lag}).second) c.add("edge.duplicate", loc, "duplicate edge");
    check_ref(e.functional, 1, loc);
  }

  for (const auto& comp : contemporaneous_sccs(g)) {
    const auto cycle = cycle_in(g, comp);
    std::string path;
    for (VariableId v : cycle) path += c.name(v) + " -> ";
    path += c.name(cycle.front());
    c.add("edge.contemporaneous_cycle", "edges", "contemporaneous cycle " + path);
  }

  if (g.partitions.size() != n) {
    c.add("graph.partitions_size", "partitions", "expected " + std::to_string(n) + " partition entries");
  } else {
    for (std::size_t t = 0; t < n; ++t) {
      const auto target = static_cast<VariableId>(t);
      std::set<ParentRef> parents;
      for (const auto& e : g.edges) {
        if (e.target == target) parents.insert(e.parent());
      }
      std::set<ParentRef> covered;
      const auto& groups = g.partitions[t];
      for (std::size_t k = 0; k < groups.size(); ++k) {
        const std::string loc = "partitions[" + c.name(target) + "].groups[" + std::to_string(k) + "]";
        if (groups[k].members.empty()) c.add("partition.empty_group", loc, "group has no members");
        for (const auto& m : groups[k].members) {
          if (!parents.contains(m)) {
            c.add("partition.unknown_parent", loc, c.edge(m.source, target, m.lag) + " is not an edge");
          } else if (!covered.insert(m).second) {
            c.add("partition.overlap", loc, c.edge(m.source, target, m.lag) + " appears in more than one group");
          }
        }
        check_ref(groups[k].functional, groups[k].members.size(), loc);
      }
      if (covered.size() != parents.size()) {
        std::string missing;
        for (const auto& p : parents) {
          if (!covered.contains(p)) missing += (missing.empty() ? "" : ", ") + c.edge(p.source, target, p.lag);
        }
        c.add("partition.incomplete_cover", "partitions[" + c.name(target) + "]", "parents not in any group: " + missing);
      }
    }
  }
  return c.take();
}

}  // namespace karmats
