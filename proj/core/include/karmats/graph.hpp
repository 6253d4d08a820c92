#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "karmats/functionals.hpp"
#include "karmats/variable.hpp"

namespace karmats {

/// (source, lag) reference to a parent of some target. Ordered by lag, then source.
struct ParentRef {
  VariableId source = 0;
  int lag = 0;

  bool operator==(const ParentRef&) const = default;
  std::strong_ordering operator<=>(const ParentRef& other) const noexcept {
    if (auto c = lag <=> other.lag; c != 0) return c;
    return source <=> other.source;
  }
};

enum class Naive { identity, null };

/// Either a naive mapping or the key of a FunctionalSpec in the graph's table.
class FunctionalRef {
 public:
  FunctionalRef() = default;
  FunctionalRef(Naive naive) : ref_(naive) {}
  explicit FunctionalRef(std::string key) : ref_(std::move(key)) {}

  static FunctionalRef identity() { return FunctionalRef(Naive::identity); }
  static FunctionalRef null() { return FunctionalRef(Naive::null); }

  bool is_naive() const noexcept { return std::holds_alternative<Naive>(ref_); }
  Naive naive() const { return std::get<Naive>(ref_); }
  const std::string& key() const { return std::get<std::string>(ref_); }

  bool operator==(const FunctionalRef&) const = default;
  auto operator<=>(const FunctionalRef&) const = default;

 private:
  std::variant<Naive, std::string> ref_ = Naive::identity;
};

enum class ProvenanceKind { expert, algorithm, generator };

/// Who authored a graph element. `generator` is a template or suite generator.
struct Provenance {
  ProvenanceKind kind = ProvenanceKind::expert;
  std::string name;

  static Provenance expert(std::string name) { return {ProvenanceKind::expert, std::move(name)}; }
  static Provenance algorithm(std::string name) { return {ProvenanceKind::algorithm, std::move(name)}; }
  static Provenance generator(std::string name) { return {ProvenanceKind::generator, std::move(name)}; }

  bool operator==(const Provenance&) const = default;
};

std::string_view to_string(ProvenanceKind kind) noexcept;

struct LagEdge {
  VariableId source = 0;
  VariableId target = 0;
  int lag = 0;
  FunctionalRef functional = FunctionalRef::identity();
  Provenance provenance;

  ParentRef parent() const noexcept { return {source, lag}; }
  bool operator==(const LagEdge&) const = default;
};

/// One group of a target's parent partition, bound to a single functional.
/// Members are kept in ParentRef order; that order is the functional's input order.
struct PartitionGroup {
  std::vector<ParentRef> members;
  FunctionalRef functional = FunctionalRef::identity();
  bool operator==(const PartitionGroup&) const = default;
};

/// The full process model.
///
/// A plain value: the edit functions below take a graph and return a new one,
/// checking invariants as they go. Direct member mutation bypasses the checks;
/// run validate() on anything assembled by hand.
struct DscpGraph {
  std::vector<VariableSpec> variables;
  std::vector<LagEdge> edges;
  /// partitions[target] = groups over that target's parents.
  std::vector<std::vector<PartitionGroup>> partitions;
  std::map<std::string, FunctionalSpec> functionals;
  /// noise[variable]
  std::vector<NoiseSpec> noise;
  double binary_threshold = 0.5;

  std::size_t size() const noexcept { return variables.size(); }
  bool contains(VariableId id) const noexcept { return id >= 0 && static_cast<std::size_t>(id) < variables.size(); }
  const VariableSpec& variable(VariableId id) const { return variables.at(static_cast<std::size_t>(id)); }
  std::optional<VariableId> find(std::string_view name) const;
  const LagEdge* find_edge(VariableId source, VariableId target, int lag) const;
  /// Resolves a reference against the table; naive references resolve to Identity/Null.
  FunctionalSpec resolve(const FunctionalRef& ref) const;

  bool operator==(const DscpGraph&) const = default;
};

class GraphError : public std::runtime_error {
 public:
  GraphError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Edits. Each returns a new graph or throws GraphError.
DscpGraph add_variable(const DscpGraph& graph, VariableSpec spec);
DscpGraph update_variable(const DscpGraph& graph, VariableId id, VariableSpec spec);
/// Deletes incident edges, renumbers later ids down by one and rebuilds the
/// partitions of affected targets into singleton groups.
DscpGraph remove_variable(const DscpGraph& graph, VariableId id);
/// New edge enters its target's partition as its own singleton group.
DscpGraph add_edge(const DscpGraph& graph, LagEdge edge);
DscpGraph update_edge(const DscpGraph& graph, VariableId source, VariableId target, int lag,
                      FunctionalRef functional, Provenance provenance);
DscpGraph remove_edge(const DscpGraph& graph, VariableId source, VariableId target, int lag);
DscpGraph set_partition(const DscpGraph& graph, VariableId target, std::vector<std::vector<ParentRef>> groups,
                        std::vector<FunctionalRef> bindings);
/// Resets a target's partition to one singleton group per incoming edge.
DscpGraph reset_partition(const DscpGraph& graph, VariableId target);
DscpGraph set_functional(const DscpGraph& graph, const std::string& key, FunctionalSpec spec);
DscpGraph remove_functional(const DscpGraph& graph, const std::string& key);
DscpGraph set_noise(const DscpGraph& graph, VariableId id, NoiseSpec noise);

// Queries.

/// (source, lag) pairs of edges into target, ordered by (lag, source).
std::vector<ParentRef> parents_of(const DscpGraph& graph, VariableId target);

struct SummaryGraph {
  std::size_t nodes = 0;
  std::set<std::pair<VariableId, VariableId>> edges;
  bool has(VariableId source, VariableId target) const { return edges.contains({source, target}); }
  bool operator==(const SummaryGraph&) const = default;
};

SummaryGraph summary_graph(const DscpGraph& graph);

/// |E| / |V| over all lagged edges; 0 for an empty graph.
double enr(const DscpGraph& graph);
int max_lag(const DscpGraph& graph);
/// Rows of history a simulation needs: max over groups of (lag + window - 1).
std::size_t required_history(const DscpGraph& graph);

/// Same graph with edges and partition groups in canonical order.
DscpGraph canonical(const DscpGraph& graph);
bool structurally_equal(const DscpGraph& a, const DscpGraph& b);

/// aggregate_node resolved against a graph node; requires one output per group.
double aggregate_node(const DscpGraph& graph, VariableId target, std::span<const double> group_outputs, double noise);

// Validation.

struct Finding {
  std::string code;
  std::string location;
  std::string message;
  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool ok() const noexcept { return findings.empty(); }
  std::size_t count(std::string_view code) const;
  std::string to_string() const;
};

/// Lists every violated invariant; an empty report means the graph can be simulated.
ValidationReport validate(const DscpGraph& graph);

/// Thrown when a whole graph fails validation (loading, simulation).
class InvalidGraphError : public std::runtime_error {
 public:
  explicit InvalidGraphError(ValidationReport report)
      : std::runtime_error("invalid graph:\n" + report.to_string()), report_(std::move(report)) {}
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

}  // namespace karmats
