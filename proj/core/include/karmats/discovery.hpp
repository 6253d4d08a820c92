#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "karmats/graph.hpp"

namespace karmats {

enum class SuggestionStatus { pending, accepted, rejected };

std::string_view to_string(SuggestionStatus status) noexcept;

/// One edge proposed by a discovery algorithm, referenced by variable names.
struct Suggestion {
  std::string source;
  std::string target;
  int lag = 0;
  std::optional<double> score;
  SuggestionStatus status = SuggestionStatus::pending;
  bool operator==(const Suggestion&) const = default;
};

struct SuggestionSet {
  std::string algorithm;
  std::vector<Suggestion> suggestions;
  bool operator==(const SuggestionSet&) const = default;
};

enum class DiscoveryFormat {
  /// CSV with header `source,target,lag[,score]`, or a JSON array of
  /// {"source", "target", "lag", "score"?} objects.
  edge_list,
  /// JSON {"variables": [names], "matrix": M} with M[i][j][lag] != 0 meaning
  /// i -> j at that lag, score |M[i][j][lag]|. Without "variables" (or when
  /// the document is a bare array) rows follow the graph's observed variables.
  lag_matrix,
};

std::optional<DiscoveryFormat> parse_discovery_format(std::string_view text) noexcept;

/// Imports discovery output as pending suggestions. Names must resolve in `graph`.
SuggestionSet import_discovery(std::string_view bytes, DiscoveryFormat format, std::string algorithm,
                               const DscpGraph& graph);

/// *.suggestions.json
std::string save_suggestions(const SuggestionSet& set);
SuggestionSet load_suggestions(std::string_view bytes);

}  // namespace karmats
