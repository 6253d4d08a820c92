#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "karmats/graph.hpp"
#include "karmats/rng.hpp"
#include "karmats/series.hpp"

namespace karmats {

enum class Structure { star, tree, cycle };
enum class LagRegime { small, large };
enum class EnrRegime { sparse, dense };
enum class StarOrientation { leaves_to_center, center_to_leaves };

std::string_view to_string(Structure s) noexcept;
std::string_view to_string(LagRegime r) noexcept;
std::string_view to_string(EnrRegime r) noexcept;
std::string_view to_string(StarOrientation o) noexcept;
std::optional<Structure> parse_structure(std::string_view text) noexcept;
std::optional<LagRegime> parse_lag_regime(std::string_view text) noexcept;
std::optional<EnrRegime> parse_enr_regime(std::string_view text) noexcept;
std::optional<StarOrientation> parse_star_orientation(std::string_view text) noexcept;

/// 5 for small, 10 for large.
int regime_max_lag(LagRegime regime) noexcept;
/// Inclusive edge-count range a densified graph on n nodes must land in:
/// sparse ENR <= 2, dense 2 < ENR < 4.
std::pair<std::size_t, std::size_t> regime_edge_bounds(EnrRegime regime, std::size_t n) noexcept;
bool enr_in_regime(double enr, EnrRegime regime) noexcept;

struct SuiteConfig {
  Structure structure = Structure::star;
  std::size_t n_nodes = 5;
  LagRegime lag_regime = LagRegime::small;
  EnrRegime enr_regime = EnrRegime::sparse;
  double latent_fraction = 0.0;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  std::vector<std::size_t> series_lengths{200};
  StarOrientation star_orientation = StarOrientation::leaves_to_center;
  std::size_t mlp_hidden = 8;
  double noise_std = 0.1;
  bool operator==(const SuiteConfig&) const = default;
};

class BenchgenError : public std::runtime_error {
 public:
  BenchgenError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Throws BenchgenError("benchgen.config") on the first violated constraint.
void check_suite_config(const SuiteConfig& config);

/// Motif skeleton over variables X0..X{n-1}, continuous in [-10, 10]. Edge lags
/// are drawn uniformly from [1, max_skeleton_lag].
DscpGraph gen_motif(Structure structure, std::size_t n, Rng& rng, int max_skeleton_lag = 1,
                    StarOrientation orientation = StarOrientation::leaves_to_center);

/// Adds random lagged edges until the edge count reaches a target drawn
/// uniformly from the regime's range. At least one edge ends up with a lag in
/// the upper half of the regime bound.
DscpGraph densify(const DscpGraph& skeleton, EnrRegime enr_regime, LagRegime lag_regime, Rng& rng);

/// Flags round(fraction * n) uniformly chosen variables as latent.
DscpGraph mark_latent(const DscpGraph& graph, double fraction, Rng& rng);

/// Binds one joint random ReLU MLP per target over all its parents and sets
/// gaussian(0, noise_std) noise on every variable.
DscpGraph attach_mlp_functionals(const DscpGraph& graph, std::size_t hidden, double noise_std, std::uint64_t seed);

struct Replicate {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::uint64_t simulation_seed = 0;
  DscpGraph graph;
  /// One observed-only frame per series length, in config order.
  std::vector<SeriesFrame> series;
};

struct Suite {
  SuiteConfig config;
  std::vector<Replicate> replicates;
};

/// The full generator pipeline for one replicate; a pure function of (config, index).
Replicate build_replicate(const SuiteConfig& config, std::size_t index);
/// Builds every replicate, in parallel up to `threads` (0 = hardware concurrency).
Suite build_suite(const SuiteConfig& config, unsigned threads = 0);

}  // namespace karmats
