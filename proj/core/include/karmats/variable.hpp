#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace karmats {

using VariableId = std::int32_t;

enum class VariableKind { continuous, binary, categorical };
enum class Aggregation { sum, average, vote };

std::string_view to_string(VariableKind kind) noexcept;
std::string_view to_string(Aggregation mode) noexcept;
std::optional<VariableKind> parse_variable_kind(std::string_view text) noexcept;
std::optional<Aggregation> parse_aggregation(std::string_view text) noexcept;

/// A named variable of the process.
///
/// Binary values are encoded {0, 1}; categorical values are integer codes
/// 0..K-1 in category-list order. min/max/offset only apply to continuous
/// variables.
struct VariableSpec {
  VariableId id = 0;
  std::string name;
  VariableKind kind = VariableKind::continuous;
  std::vector<std::string> categories;
  double min = 0.0;
  double max = 1.0;
  double offset = 0.0;
  std::string memo;
  Aggregation aggregation = Aggregation::sum;
  bool latent = false;

  static VariableSpec continuous(std::string name, double min, double max, double offset);
  static VariableSpec binary(std::string name);
  static VariableSpec categorical(std::string name, std::vector<std::string> categories);

  std::optional<int> code_of(std::string_view label) const;
  /// Number of valid codes: K for categorical, 2 for binary, 0 for continuous.
  int code_count() const noexcept;
  /// Value used for the history prefix when no data segment is supplied.
  double initial_value() const noexcept;
  /// True when `value` lies in the variable's declared domain.
  bool in_domain(double value) const noexcept;

  bool operator==(const VariableSpec&) const = default;
};

struct SpecProblem {
  std::string code;
  std::string message;
};

/// Checks the per-variable invariants; ids and name uniqueness are graph-level.
std::optional<SpecProblem> check_variable(const VariableSpec& spec);

}  // namespace karmats
