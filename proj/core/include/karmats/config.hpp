#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string_view>

#include "karmats/benchgen.hpp"
#include "karmats/graph.hpp"
#include "karmats/simulation.hpp"

namespace karmats {

/// Simulation config documents reference variables by name:
///   {"length", "seed", "burn_in"?, "record_latent"?,
///    "init": {"kind": "offsets"} | {"kind": "segment", "csv": path} | {"kind": "segment", "data": csv text},
///    "interventions": [{"kind": "do_clamp", "variable", "value", "t_start", "t_end"},
///                      {"kind": "shift_noise", "variable", "noise", "t_start", "t_end"}]}
/// A relative segment path resolves against `base_dir`. Throws FormatError.
SimulationConfig simulation_config_from_json(const nlohmann::json& j, const DscpGraph& graph,
                                             const std::filesystem::path& base_dir = {});
/// Segment init is written inline as {"kind": "segment", "rows": n}; it is not re-readable.
nlohmann::json simulation_config_to_json(const SimulationConfig& config, const DscpGraph& graph);

SuiteConfig suite_config_from_json(const nlohmann::json& j);
nlohmann::json suite_config_to_json(const SuiteConfig& config);

}  // namespace karmats
