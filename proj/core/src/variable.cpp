#include "karmats/variable.hpp"

#include <cmath>
#include <set>

namespace karmats {

std::string_view to_string(VariableKind kind) noexcept {
  switch (kind) {
    case VariableKind::continuous: return "continuous";
    case VariableKind::binary: return "binary";
    case VariableKind::categorical: return "categorical";
  }
  return "continuous";
}

std::string_view to_string(Aggregation mode) noexcept {
  switch (mode) {
    case Aggregation::sum: return "sum";
    case Aggregation::average: return "average";
    case Aggregation::vote: return "vote";
  }
  return "sum";
}

std::optional<VariableKind> parse_variable_kind(std::string_view text) noexcept {
  if (text == "continuous") return VariableKind::continuous;
  if (text == "binary") return VariableKind::binary;
  if (text == "categorical") return VariableKind::categorical;
  return std::nullopt;
}

std::optional<Aggregation> parse_aggregation(std::string_view text) noexcept {
  if (text == "sum") return Aggregation::sum;
  if (text == "average") return Aggregation::average;
  if (text == "vote") return Aggregation::vote;
  return std::nullopt;
}

VariableSpec VariableSpec::continuous(std::string name, double min, double max, double offset) {
  VariableSpec spec;
  spec.name = std::move(name);
  spec.kind = VariableKind::continuous;
  spec.min = min;
  spec.max = max;
  spec.offset = offset;
  return spec;
}

VariableSpec VariableSpec::binary(std::string name) {
  VariableSpec spec;
  spec.name = std::move(name);
  spec.kind = VariableKind::binary;
  return spec;
}

VariableSpec VariableSpec::categorical(std::string name, std::vector<std::string> categories) {
  VariableSpec spec;
  spec.name = std::move(name);
  spec.kind = VariableKind::categorical;
  spec.categories = std::move(categories);
  spec.aggregation = Aggregation::vote;
  return spec;
}

std::optional<int> VariableSpec::code_of(std::string_view label) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == label) return static_cast<int>(i);
  }
  return std::nullopt;
}

int VariableSpec::code_count() const noexcept {
  switch (kind) {
    case VariableKind::categorical: return static_cast<int>(categories.size());
    case VariableKind::binary: return 2;
    case VariableKind::continuous: return 0;
  }
  return 0;
}

double VariableSpec::initial_value() const noexcept {
  return kind == VariableKind::continuous ? offset : 0.0;
}

bool VariableSpec::in_domain(double value) const noexcept {
  if (!std::isfinite(value)) return false;
  if (kind == VariableKind::continuous) return value >= min && value <= max;
  return value == std::floor(value) && value >= 0.0 && value < code_count();
}

std::optional<SpecProblem> check_variable(const VariableSpec& spec) {
  if (spec.name.empty()) return SpecProblem{"variable.name", "variable name is empty"};
  switch (spec.kind) {
    case VariableKind::continuous:
      if (!std::isfinite(spec.min) || !std::isfinite(spec.max) || !(spec.min < spec.max)) {
        return SpecProblem{"variable.bounds", "malformed bounds: min must be < max"};
      }
      if (!(spec.offset >= spec.min && spec.offset <= spec.max)) {
        return SpecProblem{"variable.bounds", "offset must lie within [min, max]"};
      }
      if (spec.aggregation == Aggregation::vote) {
        return SpecProblem{"variable.aggregation", "vote aggregation requires a binary or categorical variable"};
      }
      break;
    case VariableKind::categorical: {
      if (spec.categories.empty()) return SpecProblem{"variable.categories", "categorical variable has no categories"};
      std::set<std::string_view> seen;
      for (const auto& label : spec.categories) {
        if (!seen.insert(label).second) {
          return SpecProblem{"variable.categories", "duplicate category label '" + label + "'"};
        }
      }
      break;
    }
    case VariableKind::binary:
      break;
  }
  return std::nullopt;
}

}  // namespace karmats
