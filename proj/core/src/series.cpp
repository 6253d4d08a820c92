#include "karmats/series.hpp"

#include "karmats/graph.hpp"

namespace karmats {

std::vector<ColumnSpec> schema_from_graph(const DscpGraph& graph, bool include_latent) {
  std::vector<ColumnSpec> out;
  for (const auto& v : graph.variables) {
    if (v.latent && !include_latent) continue;
    out.push_back({v.name, v.kind, v.categories, v.latent});
  }
  return out;
}

const SeriesColumn* SeriesFrame::find(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.spec.name == name) return &c;
  }
  return nullptr;
}

std::vector<ColumnSpec> SeriesFrame::schema() const {
  std::vector<ColumnSpec> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(c.spec);
  return out;
}

std::optional<std::string> SeriesFrame::check() const {
  const std::size_t n = length();
  for (const auto& c : columns) {
    if (c.values.size() != n) return "column '" + c.spec.name + "' has a different length";
    if (c.spec.kind == VariableKind::continuous) continue;
    const int codes = c.spec.kind == VariableKind::binary ? 2 : static_cast<int>(c.spec.categories.size());
    for (double v : c.values) {
      if (!(v >= 0.0 && v < codes && v == static_cast<double>(static_cast<int>(v)))) {
        return "column '" + c.spec.name + "' holds an invalid code";
      }
    }
  }
  return std::nullopt;
}

}  // namespace karmats
