#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "karmats/rng.hpp"
#include "karmats/variable.hpp"

namespace karmats {

// ---------------------------------------------------------------------------
// Local functionals. Each maps the windows of one parent group to a real
// contribution; contributions of a node's groups are then aggregated.
// ---------------------------------------------------------------------------

/// Sum of the most recent values of all inputs (a copy for a single parent).
struct Identity {
  bool operator==(const Identity&) const = default;
};

/// Contributes zero.
struct Null {
  bool operator==(const Null&) const = default;
};

/// intercept + sum_p sum_w coefficients[p][w] * x_p[t - lag_p - w].
struct LinearWindow {
  std::vector<std::vector<double>> coefficients;
  double intercept = 0.0;
  bool operator==(const LinearWindow&) const = default;
};

/// Emits `high` when the parent value is >= cut and `low` otherwise (NaN -> low).
struct Threshold {
  double cut = 0.5;
  double low = 0.0;
  double high = 1.0;
  bool operator==(const Threshold&) const = default;
};

/// Lookup over tuples of parent codes.
struct CategoricalTable {
  std::map<std::vector<int>, double> entries;
  std::optional<double> fallback;
  std::size_t arity() const noexcept { return entries.empty() ? 0 : entries.begin()->first.size(); }
  bool operator==(const CategoricalTable&) const = default;
};

enum class Activation { relu };

/// Fully connected network. widths = [d_in, h_1, ..., 1]; weights[l] is a
/// row-major widths[l] x widths[l+1] matrix; hidden layers use `activation`,
/// the output layer is linear. d_in = parents * window.
struct Mlp {
  std::size_t window = 1;
  std::vector<std::size_t> widths;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  Activation activation = Activation::relu;
  bool operator==(const Mlp&) const = default;
};

using FunctionalSpec = std::variant<Identity, Null, LinearWindow, Threshold, CategoricalTable, Mlp>;

std::string_view functional_type_name(const FunctionalSpec& spec) noexcept;

/// History window (number of past values per parent) the functional reads.
std::size_t functional_window(const FunctionalSpec& spec) noexcept;

/// Number of parents the functional expects; nullopt for Identity and Null,
/// which accept any number.
std::optional<std::size_t> functional_arity(const FunctionalSpec& spec) noexcept;

/// Shape consistency of the parameters (weights vs widths, ragged windows...).
std::optional<std::string> check_functional(const FunctionalSpec& spec);

class FunctionalError : public std::runtime_error {
 public:
  FunctionalError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Parent windows in group order; parent(p)[w] is the value w steps before
/// that parent's lagged reading (w = 0 is the most recent).
class ParentWindows {
 public:
  ParentWindows(std::span<const double> values, std::size_t window);

  std::size_t parents() const noexcept { return window_ == 0 ? 0 : values_.size() / window_; }
  std::size_t window() const noexcept { return window_; }
  std::span<const double> parent(std::size_t p) const { return values_.subspan(p * window_, window_); }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::span<const double> values_;
  std::size_t window_;
};

/// Evaluates a functional. Pure: equal inputs give bit-equal outputs.
/// Throws FunctionalError("functional.arity", ...) on shape mismatch and
/// FunctionalError("functional.code", ...) for an invalid categorical code.
double eval_functional(const FunctionalSpec& spec, const ParentWindows& inputs);

/// Random two-layer ReLU network, weights and biases drawn from
/// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)). Deterministic in (arity, hidden, seed).
FunctionalSpec random_mlp(std::size_t arity, std::size_t hidden, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Noise processes, one additive draw per variable per time step.
// ---------------------------------------------------------------------------

struct NoNoise {
  bool operator==(const NoNoise&) const = default;
};
struct GaussianNoise {
  double mean = 0.0;
  double stddev = 1.0;
  bool operator==(const GaussianNoise&) const = default;
};
struct UniformNoise {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const UniformNoise&) const = default;
};

using NoiseSpec = std::variant<NoNoise, GaussianNoise, UniformNoise>;

std::optional<std::string> check_noise(const NoiseSpec& spec);

/// Draws from the current slot of `stream` and advances it by one slot.
double sample_noise(const NoiseSpec& spec, NoiseStream& stream);

// ---------------------------------------------------------------------------
// Node aggregation.
// ---------------------------------------------------------------------------

/// Combines the group outputs of one node with its noise draw.
///
///  - continuous: sum/average of outputs + noise, clamped to [min, max];
///  - binary (sum/average): aggregate + noise, clamped to [0, 1], then
///    1 if >= binary_threshold else 0;
///  - vote: plurality over the group outputs rounded to valid codes, noise
///    ignored, ties to the lowest code;
///  - categorical (sum/average): aggregate + noise rounded and clamped to a
///    valid code.
double aggregate_node(const VariableSpec& target, std::span<const double> group_outputs, double noise,
                      double binary_threshold = 0.5);

}  // namespace karmats
