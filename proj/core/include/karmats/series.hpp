#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "karmats/variable.hpp"

namespace karmats {

struct DscpGraph;

/// Column schema: what is needed to read or write a typed column.
struct ColumnSpec {
  std::string name;
  VariableKind kind = VariableKind::continuous;
  std::vector<std::string> categories;
  bool latent = false;
  bool operator==(const ColumnSpec&) const = default;
};

/// Column schema for every variable of a graph, in id order.
std::vector<ColumnSpec> schema_from_graph(const DscpGraph& graph, bool include_latent = true);

/// Values are stored as doubles; binary and categorical entries are integer codes.
struct SeriesColumn {
  ColumnSpec spec;
  std::vector<double> values;
  bool operator==(const SeriesColumn&) const = default;
};

struct RunMetadata {
  std::uint64_t seed = 0;
  std::string graph_hash;
  /// Noise-stream slot of the first recorded row and the slot after the last.
  std::uint64_t start_step = 0;
  std::uint64_t next_step = 0;
  std::size_t burn_in = 0;
  std::vector<std::string> interventions;
  bool operator==(const RunMetadata&) const = default;
};

struct SeriesFrame {
  std::vector<SeriesColumn> columns;
  RunMetadata meta;

  std::size_t length() const noexcept { return columns.empty() ? 0 : columns.front().values.size(); }
  const SeriesColumn* find(std::string_view name) const;
  std::vector<ColumnSpec> schema() const;
  /// Checks equal column lengths and valid codes; returns a message on failure.
  std::optional<std::string> check() const;

  bool operator==(const SeriesFrame&) const = default;
};

}  // namespace karmats
