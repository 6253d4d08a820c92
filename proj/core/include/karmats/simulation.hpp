#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "karmats/functionals.hpp"
#include "karmats/graph.hpp"
#include "karmats/series.hpp"

namespace karmats {

/// History prefix filled from declared offsets (binary/categorical start at 0).
struct OffsetsInit {};

/// History prefix taken from the last rows of a data segment, matched by name.
/// Missing latent columns fall back to offsets.
struct SegmentInit {
  SeriesFrame segment;
};

using InitSpec = std::variant<OffsetsInit, SegmentInit>;

/// Fixes a variable to `value` for recorded steps [t_start, t_end]; the
/// variable's functionals are not evaluated inside the window.
struct DoClamp {
  VariableId variable = 0;
  double value = 0.0;
  std::size_t t_start = 0;
  std::size_t t_end = 0;
};

/// Replaces a variable's noise process for recorded steps [t_start, t_end].
struct ShiftNoise {
  VariableId variable = 0;
  NoiseSpec noise;
  std::size_t t_start = 0;
  std::size_t t_end = 0;
};

using InterventionSpec = std::variant<DoClamp, ShiftNoise>;

std::string describe(const DscpGraph& graph, const InterventionSpec& intervention);

struct SimulationConfig {
  std::size_t length = 1;
  std::uint64_t seed = 0;
  /// Defaults to 2 * max_lag for offsets init and 0 for a data segment.
  std::optional<std::size_t> burn_in;
  InitSpec init = OffsetsInit{};
  std::vector<InterventionSpec> interventions;
  bool record_latent = false;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Execution order within a time step: every lag-0 edge points forward,
/// ties broken by ascending id. Throws GraphError on a lag-0 cycle.
std::vector<VariableId> topo_order_contemporaneous(const DscpGraph& graph);

/// Rolls the graph forward. Deterministic in (graph, config).
///
/// Each variable owns a counter-based noise stream keyed by (seed, id) and
/// consumes one slot per step, including clamped steps, so edits that add
/// variables or interventions never shift another variable's draws.
SeriesFrame simulate(const DscpGraph& graph, const SimulationConfig& config);

/// Continues `frame` for config.length more steps, reusing the frame's seed and
/// noise-stream position. simulate(T1) followed by resume(T2) equals
/// simulate(T1 + T2) bit for bit (the frame must hold every variable, latent
/// ones included, i.e. record_latent or no latent variables).
SeriesFrame resume(const SeriesFrame& frame, const DscpGraph& graph, const SimulationConfig& config);

}  // namespace karmats
