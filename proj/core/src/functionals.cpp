#include "karmats/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace karmats {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void arity_error(const std::string& what) { throw FunctionalError("functional.arity", what); }

double relu(double x) noexcept { return x > 0.0 ? x : 0.0; }

double eval_linear(const LinearWindow& f, const ParentWindows& in) {
  if (in.parents() != f.coefficients.size()) {
    arity_error("linear_window expects " + std::to_string(f.coefficients.size()) + " parents, got " +
                std::to_string(in.parents()));
  }
  double acc = f.intercept;
  for (std::size_t p = 0; p < f.coefficients.size(); ++p) {
    const auto& coeff = f.coefficients[p];
    if (coeff.size() != in.window()) arity_error("linear_window window mismatch");
    const auto window = in.parent(p);
    for (std::size_t w = 0; w < coeff.size(); ++w) acc += coeff[w] * window[w];
  }
  return acc;
}

double eval_table(const CategoricalTable& f, const ParentWindows& in) {
  if (in.parents() != f.arity()) {
    arity_error("categorical_table expects " + std::to_string(f.arity()) + " parents, got " +
                std::to_string(in.parents()));
  }
  std::vector<int> key;
  key.reserve(in.parents());
  for (std::size_t p = 0; p < in.parents(); ++p) {
    const double v = in.parent(p)[0];
    if (!std::isfinite(v) || v < 0.0 || v != std::floor(v)) {
      throw FunctionalError("functional.code", "categorical_table input is not a valid code");
    }
    key.push_back(static_cast<int>(v));
  }
  if (auto it = f.entries.find(key); it != f.entries.end()) return it->second;
  if (f.fallback) return *f.fallback;
  throw FunctionalError("functional.code", "categorical_table has no entry for the input codes");
}

double eval_mlp(const Mlp& f, const ParentWindows& in) {
  if (f.widths.empty() || in.values().size() != f.widths.front() || in.window() != f.window) {
    arity_error("mlp expects " + std::to_string(f.widths.empty() ? 0 : f.widths.front()) + " inputs, got " +
                std::to_string(in.values().size()));
  }
  std::vector<double> activ(in.values().begin(), in.values().end());
  std::vector<double> next;
  const std::size_t layers = f.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t rows = f.widths[l];
    const std::size_t cols = f.widths[l + 1];
    const auto& w = f.weights[l];
    next.assign(f.biases[l].begin(), f.biases[l].end());
    for (std::size_t r = 0; r < rows; ++r) {
      const double x = activ[r];
      for (std::size_t c = 0; c < cols; ++c) next[c] += x * w[r * cols + c];
    }
    if (l + 1 < layers) {
      for (double& v : next) v = relu(v);
    }
    activ.swap(next);
  }
  return activ.front();
}

}  // namespace

ParentWindows::ParentWindows(std::span<const double> values, std::size_t window)
    : values_(values), window_(window) {
  if (window_ == 0 ? !values_.empty() : values_.size() % window_ != 0) {
    arity_error("parent windows are ragged");
  }
}

std::string_view functional_type_name(const FunctionalSpec& spec) noexcept {
  static constexpr std::string_view names[] = {"identity", "null", "linear_window",
                                               "threshold", "categorical_table", "mlp"};
  return names[spec.index()];
}

std::size_t functional_window(const FunctionalSpec& spec) noexcept {
  return std::visit(Overloaded{
                        [](const LinearWindow& f) -> std::size_t {
                          return f.coefficients.empty() ? 1 : std::max<std::size_t>(1, f.coefficients.front().size());
                        },
                        [](const Mlp& f) -> std::size_t { return std::max<std::size_t>(1, f.window); },
                        [](const auto&) -> std::size_t { return 1; },
                    },
                    spec);
}

std::optional<std::size_t> functional_arity(const FunctionalSpec& spec) noexcept {
  return std::visit(Overloaded{
                        [](const Identity&) -> std::optional<std::size_t> { return std::nullopt; },
                        [](const Null&) -> std::optional<std::size_t> { return std::nullopt; },
                        [](const LinearWindow& f) -> std::optional<std::size_t> { return f.coefficients.size(); },
                        [](const Threshold&) -> std::optional<std::size_t> { return 1; },
                        [](const CategoricalTable& f) -> std::optional<std::size_t> { return f.arity(); },
                        [](const Mlp& f) -> std::optional<std::size_t> {
                          if (f.widths.empty() || f.window == 0) return 0;
                          return f.widths.front() / f.window;
                        },
                    },
                    spec);
}

std::optional<std::string> check_functional(const FunctionalSpec& spec) {
  return std::visit(
      Overloaded{
          [](const Identity&) -> std::optional<std::string> { return std::nullopt; },
          [](const Null&) -> std::optional<std::string> { return std::nullopt; },
          [](const LinearWindow& f) -> std::optional<std::string> {
            if (f.coefficients.empty()) return "linear_window has no parents";
            const std::size_t w = f.coefficients.front().size();
            if (w == 0) return "linear_window has an empty window";
            for (const auto& c : f.coefficients) {
              if (c.size() != w) return "linear_window coefficient windows differ in length";
            }
            return std::nullopt;
          },
          [](const Threshold& f) -> std::optional<std::string> {
            if (std::isnan(f.cut)) return "threshold cut is NaN";
            return std::nullopt;
          },
          [](const CategoricalTable& f) -> std::optional<std::string> {
            if (f.entries.empty()) return "categorical_table has no entries";
            const std::size_t a = f.arity();
            if (a == 0) return "categorical_table keys are empty";
            for (const auto& [key, value] : f.entries) {
              if (key.size() != a) return "categorical_table keys differ in length";
              for (int code : key) {
                if (code < 0) return "categorical_table key has a negative code";
              }
            }
            return std::nullopt;
          },
          [](const Mlp& f) -> std::optional<std::string> {
            if (f.window == 0) return "mlp window must be >= 1";
            if (f.widths.size() < 2) return "mlp needs at least an input and an output width";
            if (f.widths.back() != 1) return "mlp output width must be 1";
            if (f.widths.front() == 0 || f.widths.front() % f.window != 0) {
              return "mlp input width must be a positive multiple of the window";
            }
            if (f.weights.size() != f.widths.size() - 1 || f.biases.size() != f.widths.size() - 1) {
              return "mlp layer count does not match widths";
            }
            for (std::size_t l = 0; l + 1 < f.widths.size(); ++l) {
              if (f.widths[l] == 0) return "mlp has a zero-width layer";
              if (f.weights[l].size() != f.widths[l] * f.widths[l + 1]) {
                return "mlp weight shape mismatch at layer " + std::to_string(l);
              }
              if (f.biases[l].size() != f.widths[l + 1]) return "mlp bias shape mismatch at layer " + std::to_string(l);
            }
            return std::nullopt;
          },
      },
      spec);
}

double eval_functional(const FunctionalSpec& spec, const ParentWindows& inputs) {
  return std::visit(Overloaded{
                        [&](const Identity&) {
                          double acc = 0.0;
                          for (std::size_t p = 0; p < inputs.parents(); ++p) acc += inputs.parent(p)[0];
                          return acc;
                        },
                        [](const Null&) { return 0.0; },
                        [&](const LinearWindow& f) { return eval_linear(f, inputs); },
                        [&](const Threshold& f) {
                          if (inputs.parents() != 1) arity_error("threshold expects exactly one parent");
                          return inputs.parent(0)[0] >= f.cut ? f.high : f.low;
                        },
                        [&](const CategoricalTable& f) { return eval_table(f, inputs); },
                        [&](const Mlp& f) { return eval_mlp(f, inputs); },
                    },
                    spec);
}

FunctionalSpec random_mlp(std::size_t arity, std::size_t hidden, std::uint64_t seed) {
  if (arity == 0 || hidden == 0) throw FunctionalError("functional.arity", "random_mlp needs arity >= 1 and hidden >= 1");
  Rng rng(derive_seed(seed, 0x6d6c70));
  Mlp mlp;
  mlp.window = 1;
  mlp.widths = {arity, hidden, 1};
  auto fill = [&rng](std::size_t count, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<double> out(count);
    for (double& v : out) v = rng.uniform(-bound, bound);
    return out;
  };
  mlp.weights.push_back(fill(arity * hidden, arity));
  mlp.biases.push_back(fill(hidden, arity));
  mlp.weights.push_back(fill(hidden, hidden));
  mlp.biases.push_back(fill(1, hidden));
  return mlp;
}

std::optional<std::string> check_noise(const NoiseSpec& spec) {
  return std::visit(Overloaded{
                        [](const NoNoise&) -> std::optional<std::string> { return std::nullopt; },
                        [](const GaussianNoise& n) -> std::optional<std::string> {
                          if (!std::isfinite(n.mean) || !std::isfinite(n.stddev) || n.stddev < 0.0) {
                            return "gaussian noise needs a finite mean and std >= 0";
                          }
                          return std::nullopt;
                        },
                        [](const UniformNoise& n) -> std::optional<std::string> {
                          if (!std::isfinite(n.lo) || !std::isfinite(n.hi) || n.lo > n.hi) {
                            return "uniform noise needs finite lo <= hi";
                          }
                          return std::nullopt;
                        },
                    },
                    spec);
}

double sample_noise(const NoiseSpec& spec, NoiseStream& stream) {
  const double value = std::visit(Overloaded{
                                      [](const NoNoise&) { return 0.0; },
                                      [&](const GaussianNoise& n) {
                                        if (n.stddev == 0.0) return n.mean;
                                        const double u1 = 1.0 - stream.uniform(0);  // (0, 1]
                                        const double u2 = stream.uniform(1);
                                        const double z = std::sqrt(-2.0 * std::log(u1)) *
                                                         std::cos(2.0 * std::numbers::pi * u2);
                                        return n.mean + n.stddev * z;
                                      },
                                      [&](const UniformNoise& n) { return n.lo + (n.hi - n.lo) * stream.uniform(0); },
                                  },
                                  spec);
  stream.advance();
  return value;
}

double aggregate_node(const VariableSpec& target, std::span<const double> group_outputs, double noise,
                      double binary_threshold) {
  const auto combine = [&] {
    double acc = 0.0;
    for (double v : group_outputs) acc += v;
    if (target.aggregation == Aggregation::average && !group_outputs.empty()) {
      acc /= static_cast<double>(group_outputs.size());
    }
    return acc;
  };

  if (target.kind == VariableKind::continuous) {
    return std::clamp(combine() + noise, target.min, target.max);
  }

  const int codes = target.code_count();
  const auto to_code = [&](double v) -> int {
    if (target.kind == VariableKind::binary) return std::clamp(v, 0.0, 1.0) >= binary_threshold ? 1 : 0;
    if (std::isnan(v)) return 0;
    return static_cast<int>(std::clamp(std::round(v), 0.0, static_cast<double>(codes - 1)));
  };

  if (target.aggregation == Aggregation::vote) {
    std::vector<int> tally(static_cast<std::size_t>(codes), 0);
    for (double v : group_outputs) ++tally[static_cast<std::size_t>(to_code(v))];
    // max_element returns the first maximum, i.e. the lowest tied code.
    return static_cast<double>(std::max_element(tally.begin(), tally.end()) - tally.begin());
  }
  return static_cast<double>(to_code(combine() + noise));
}

}  // namespace karmats
