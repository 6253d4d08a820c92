#include "karmats/simulation.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <sstream>

#include "karmats/document.hpp"

namespace karmats {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

struct CompiledGroup {
  std::vector<ParentRef> members;
  FunctionalSpec functional;
  std::size_t window = 1;
};

struct CompiledNode {
  VariableId id = 0;
  std::vector<CompiledGroup> groups;
  std::vector<const DoClamp*> clamps;
  std::vector<const ShiftNoise*> shifts;
};

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_interventions(const DscpGraph& graph, const std::vector<InterventionSpec>& interventions,
                         std::size_t length) {
  for (std::size_t i = 0; i < interventions.size(); ++i) {
    const std::string loc = "interventions[" + std::to_string(i) + "]: ";
    std::visit(Overloaded{
                   [&](const DoClamp& c) {
                     if (!graph.contains(c.variable)) {
                       throw SimulationError("simulation.unknown_variable", loc + "unknown variable id " +
                                                                                std::to_string(c.variable));
                     }
                     if (c.t_start > c.t_end || c.t_end >= length) {
                       throw SimulationError("simulation.config", loc + "window must satisfy t_start <= t_end < length");
                     }
                     if (!graph.variable(c.variable).in_domain(c.value)) {
                       throw SimulationError("simulation.config", loc + "clamp value " + fmt_double(c.value) +
                                                                      " is outside the domain of " +
                                                                      graph.variable(c.variable).name);
                     }
                   },
                   [&](const ShiftNoise& s) {
                     if (!graph.contains(s.variable)) {
                       throw SimulationError("simulation.unknown_variable", loc + "unknown variable id " +
                                                                                std::to_string(s.variable));
                     }
                     if (s.t_start > s.t_end || s.t_end >= length) {
                       throw SimulationError("simulation.config", loc + "window must satisfy t_start <= t_end < length");
                     }
                     if (auto problem = check_noise(s.noise)) throw SimulationError("simulation.config", loc + *problem);
                   },
               },
               interventions[i]);
  }
}

void check_graph(const DscpGraph& graph) {
  auto report = validate(graph);
  if (!report.ok()) throw SimulationError("simulation.invalid_graph", "graph is not simulatable:\n" + report.to_string());
}

/// Shared stepping loop. `history[v]` holds the prefix rows on entry and gains
/// burn_in + length rows.
SeriesFrame run(const DscpGraph& graph, std::vector<std::vector<double>> history, std::uint64_t seed,
                std::uint64_t start_step, std::size_t burn_in, std::size_t length,
                const std::vector<InterventionSpec>& interventions, bool record_latent) {
  const std::size_t prefix = history.empty() ? 0 : history.front().size();
  const std::size_t steps = burn_in + length;

  std::vector<CompiledNode> nodes;
  for (VariableId id : topo_order_contemporaneous(graph)) {
    CompiledNode node;
    node.id = id;
    for (const auto& group : graph.partitions[static_cast<std::size_t>(id)]) {
      FunctionalSpec spec = graph.resolve(group.functional);
      const std::size_t window = functional_window(spec);
      node.groups.push_back({group.members, std::move(spec), window});
    }
    for (const auto& iv : interventions) {
      if (auto* c = std::get_if<DoClamp>(&iv); c && c->variable == id) node.clamps.push_back(c);
      if (auto* s = std::get_if<ShiftNoise>(&iv); s && s->variable == id) node.shifts.push_back(s);
    }
    nodes.push_back(std::move(node));
  }

  for (auto& column : history) column.resize(prefix + steps);

  std::vector<double> inputs;
  std::vector<double> outputs;
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t row = prefix + s;
    const bool recorded = s >= burn_in;
    const std::size_t t = s - burn_in;
    for (const auto& node : nodes) {
      const auto vi = static_cast<std::size_t>(node.id);
      NoiseStream stream(derive_seed(seed, vi), start_step + s);

      const DoClamp* clamp = nullptr;
      const NoiseSpec* noise = &graph.noise[vi];
      if (recorded) {
        for (const auto* c : node.clamps) {
          if (t >= c->t_start && t <= c->t_end) clamp = c;
        }
        for (const auto* sh : node.shifts) {
          if (t >= sh->t_start && t <= sh->t_end) noise = &sh->noise;
        }
      }
      if (clamp) {
        sample_noise(*noise, stream);  // keep the slot consumed
        history[vi][row] = clamp->value;
        continue;
      }

      outputs.clear();
      for (const auto& group : node.groups) {
        inputs.clear();
        for (const auto& m : group.members) {
          const auto& src = history[static_cast<std::size_t>(m.source)];
          for (std::size_t w = 0; w < group.window; ++w) {
            inputs.push_back(src[row - static_cast<std::size_t>(m.lag) - w]);
          }
        }
        outputs.push_back(eval_functional(group.functional, ParentWindows(inputs, group.window)));
      }
      const double draw = sample_noise(*noise, stream);
      history[vi][row] = aggregate_node(graph.variable(node.id), outputs, draw, graph.binary_threshold);
    }
  }

  SeriesFrame frame;
  for (const auto& v : graph.variables) {
    if (v.latent && !record_latent) continue;
    SeriesColumn column;
    column.spec = {v.name, v.kind, v.categories, v.latent};
    const auto& full = history[static_cast<std::size_t>(v.id)];
    column.values.assign(full.begin() + static_cast<std::ptrdiff_t>(prefix + burn_in), full.end());
    frame.columns.push_back(std::move(column));
  }
  frame.meta.seed = seed;
  frame.meta.graph_hash = graph_hash(graph);
  frame.meta.burn_in = burn_in;
  frame.meta.start_step = start_step + burn_in;
  frame.meta.next_step = start_step + steps;
  for (const auto& iv : interventions) frame.meta.interventions.push_back(describe(graph, iv));
  return frame;
}

std::vector<double> tail(const std::vector<double>& values, std::size_t rows) {
  return {values.end() - static_cast<std::ptrdiff_t>(rows), values.end()};
}

}  // namespace

std::string describe(const DscpGraph& graph, const InterventionSpec& intervention) {
  auto name = [&](VariableId id) { return graph.contains(id) ? graph.variable(id).name : "#" + std::to_string(id); };
  return std::visit(Overloaded{
                        [&](const DoClamp& c) {
                          return "do_clamp(" + name(c.variable) + ", " + fmt_double(c.value) + ", " +
                                 std::to_string(c.t_start) + ".." + std::to_string(c.t_end) + ")";
                        },
                        [&](const ShiftNoise& s) {
                          return "shift_noise(" + name(s.variable) + ", " +
                                 std::string(s.noise.index() == 0   ? "none"
                                             : s.noise.index() == 1 ? "gaussian"
                                                                    : "uniform") +
                                 ", " + std::to_string(s.t_start) + ".." + std::to_string(s.t_end) + ")";
                        },
                    },
                    intervention);
}

std::vector<VariableId> topo_order_contemporaneous(const DscpGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<VariableId>> succ(n);
  for (const auto& e : graph.edges) {
    if (e.lag != 0) continue;
    succ[static_cast<std::size_t>(e.source)].push_back(e.target);
    ++indegree[static_cast<std::size_t>(e.target)];
  }
  std::priority_queue<VariableId, std::vector<VariableId>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push(static_cast<VariableId>(v));
  }
  std::vector<VariableId> order;
  order.reserve(n);
  while (!ready.empty()) {
    const VariableId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (VariableId w : succ[static_cast<std::size_t>(v)]) {
      if (--indegree[static_cast<std::size_t>(w)] == 0) ready.push(w);
    }
  }
  if (order.size() != n) throw GraphError("edge.contemporaneous_cycle", "contemporaneous subgraph has a cycle");
  return order;
}

SeriesFrame simulate(const DscpGraph& graph, const SimulationConfig& config) {
  check_graph(graph);
  if (config.length < 1) throw SimulationError("simulation.config", "length must be >= 1");
  check_interventions(graph, config.interventions, config.length);

  const std::size_t prefix = required_history(graph);
  std::vector<std::vector<double>> history(graph.size());
  std::size_t burn_in = 0;

  if (const auto* seg = std::get_if<SegmentInit>(&config.init)) {
    const SeriesFrame& segment = seg->segment;
    if (auto problem = segment.check()) throw SimulationError("simulation.schema_mismatch", "segment: " + *problem);
    if (segment.length() < prefix) {
      throw SimulationError("simulation.insufficient_prefix", "data segment has " + std::to_string(segment.length()) +
                                                                  " rows, the graph needs " + std::to_string(prefix));
    }
    for (const auto& v : graph.variables) {
      auto& column = history[static_cast<std::size_t>(v.id)];
      const SeriesColumn* source = segment.find(v.name);
      if (!source) {
        if (!v.latent) throw SimulationError("simulation.schema_mismatch", "data segment has no column '" + v.name + "'");
        column.assign(prefix, v.initial_value());
        continue;
      }
      column = tail(source->values, prefix);
      for (double x : column) {
        if (!v.in_domain(x)) {
          throw SimulationError("simulation.schema_mismatch", "segment value " + fmt_double(x) +
                                                                  " is outside the domain of " + v.name);
        }
      }
    }
    burn_in = config.burn_in.value_or(0);
  } else {
    for (const auto& v : graph.variables) history[static_cast<std::size_t>(v.id)].assign(prefix, v.initial_value());
    burn_in = config.burn_in.value_or(2 * static_cast<std::size_t>(max_lag(graph)));
  }

  return run(graph, std::move(history), config.seed, 0, burn_in, config.length, config.interventions,
             config.record_latent);
}

SeriesFrame resume(const SeriesFrame& frame, const DscpGraph& graph, const SimulationConfig& config) {
  check_graph(graph);
  if (config.length < 1) throw SimulationError("simulation.config", "length must be >= 1");
  if (auto problem = frame.check()) throw SimulationError("simulation.schema_mismatch", *problem);
  if (frame.columns.size() != graph.size()) {
    throw SimulationError("simulation.schema_mismatch", "frame has " + std::to_string(frame.columns.size()) +
                                                            " columns, graph has " + std::to_string(graph.size()) +
                                                            " variables");
  }
  check_interventions(graph, config.interventions, config.length);

  const std::size_t prefix = required_history(graph);
  if (frame.length() < prefix) {
    throw SimulationError("simulation.insufficient_prefix",
                          "frame has " + std::to_string(frame.length()) + " rows, the graph needs " + std::to_string(prefix));
  }
  std::vector<std::vector<double>> history(graph.size());
  for (const auto& v : graph.variables) {
    const SeriesColumn* column = frame.find(v.name);
    if (!column) throw SimulationError("simulation.schema_mismatch", "frame has no column '" + v.name + "'");
    if (column->spec.kind != v.kind || column->spec.categories != v.categories) {
      throw SimulationError("simulation.schema_mismatch", "column '" + v.name + "' does not match the variable kind");
    }
    history[static_cast<std::size_t>(v.id)] = tail(column->values, prefix);
  }
  const bool record_latent = std::any_of(frame.columns.begin(), frame.columns.end(),
                                         [](const SeriesColumn& c) { return c.spec.latent; }) ||
                             config.record_latent;
  return run(graph, std::move(history), frame.meta.seed, frame.meta.next_step, 0, config.length,
             config.interventions, record_latent);
}

}  // namespace karmats
