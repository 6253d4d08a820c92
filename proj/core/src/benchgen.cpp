#include "karmats/benchgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "karmats/simulation.hpp"

namespace karmats {

namespace {

constexpr double kBound = 10.0;
constexpr std::uint64_t kMlpStream = 0x6d6c7073ULL;
constexpr std::uint64_t kSimStream = 0x73696dULL;

template <class E, std::size_t N>
std::optional<E> lookup(const std::string_view (&names)[N], std::string_view text) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == text) return static_cast<E>(i);
  }
  return std::nullopt;
}

constexpr std::string_view kStructures[] = {"star", "tree", "cycle"};
constexpr std::string_view kLagRegimes[] = {"small", "large"};
constexpr std::string_view kEnrRegimes[] = {"sparse", "dense"};
constexpr std::string_view kOrientations[] = {"leaves_to_center", "center_to_leaves"};

LagEdge generated_edge(VariableId s, VariableId t, int lag, std::string_view generator) {
  LagEdge e;
  e.source = s;
  e.target = t;
  e.lag = lag;
  e.provenance = Provenance::generator(std::string(generator));
  return e;
}

}  // namespace

std::string_view to_string(Structure s) noexcept { return kStructures[static_cast<int>(s)]; }
std::string_view to_string(LagRegime r) noexcept { return kLagRegimes[static_cast<int>(r)]; }
std::string_view to_string(EnrRegime r) noexcept { return kEnrRegimes[static_cast<int>(r)]; }
std::string_view to_string(StarOrientation o) noexcept { return kOrientations[static_cast<int>(o)]; }
std::optional<Structure> parse_structure(std::string_view text) noexcept { return lookup<Structure>(kStructures, text); }
std::optional<LagRegime> parse_lag_regime(std::string_view text) noexcept { return lookup<LagRegime>(kLagRegimes, text); }
std::optional<EnrRegime> parse_enr_regime(std::string_view text) noexcept { return lookup<EnrRegime>(kEnrRegimes, text); }
std::optional<StarOrientation> parse_star_orientation(std::string_view text) noexcept {
  return lookup<StarOrientation>(kOrientations, text);
}

int regime_max_lag(LagRegime regime) noexcept { return regime == LagRegime::small ? 5 : 10; }

std::pair<std::size_t, std::size_t> regime_edge_bounds(EnrRegime regime, std::size_t n) noexcept {
  if (regime == EnrRegime::sparse) return {0, 2 * n};
  return {2 * n + 1, 4 * n - 1};
}

bool enr_in_regime(double enr, EnrRegime regime) noexcept {
  if (regime == EnrRegime::sparse) return enr <= 2.0;
  return enr > 2.0 && enr < 4.0;
}

void check_suite_config(const SuiteConfig& c) {
  auto fail = [](const std::string& message) { throw BenchgenError("benchgen.config", message); };
  if (c.n_nodes < 2) fail("n_nodes must be at least 2");
  if (c.structure == Structure::cycle && c.n_nodes < 3) fail("a cycle needs at least 3 nodes");
  if (c.replicates < 1) fail("replicates must be at least 1");
  if (!(c.latent_fraction >= 0.0 && c.latent_fraction <= 0.8)) fail("latent_fraction must lie in [0, 0.8]");
  if (c.series_lengths.empty()) fail("series_lengths must not be empty");
  for (std::size_t i = 0; i < c.series_lengths.size(); ++i) {
    if (c.series_lengths[i] < 1) fail("series lengths must be positive");
    for (std::size_t k = 0; k < i; ++k) {
      if (c.series_lengths[k] == c.series_lengths[i]) fail("series lengths must be distinct");
    }
  }
  if (c.mlp_hidden < 1) fail("mlp_hidden must be at least 1");
  if (!(c.noise_std >= 0.0) || !std::isfinite(c.noise_std)) fail("noise_std must be a non-negative number");
}

DscpGraph gen_motif(Structure structure, std::size_t n, Rng& rng, int max_skeleton_lag, StarOrientation orientation) {
  if (n < 2 || (structure == Structure::cycle && n < 3)) {
    throw BenchgenError("benchgen.motif", "too few nodes (" + std::to_string(n) + ") for a " +
                                              std::string(to_string(structure)));
  }
  if (max_skeleton_lag < 1) throw BenchgenError("benchgen.motif", "skeleton lag bound must be at least 1");
  DscpGraph g;
  for (std::size_t i = 0; i < n; ++i) {
    g = add_variable(g, VariableSpec::continuous("X" + std::to_string(i), -kBound, kBound, 0.0));
  }
  const std::string_view name = to_string(structure);
  auto lag = [&] { return rng.integer(1, max_skeleton_lag); };
  for (std::size_t k = 1; k < n; ++k) {
    const auto node = static_cast<VariableId>(k);
    switch (structure) {
      case Structure::star:
        if (orientation == StarOrientation::leaves_to_center) g = add_edge(g, generated_edge(node, 0, lag(), name));
        else g = add_edge(g, generated_edge(0, node, lag(), name));
        break;
      case Structure::tree: {
        const auto parent = static_cast<VariableId>(rng.index(k));
        g = add_edge(g, generated_edge(parent, node, lag(), name));
        break;
      }
      case Structure::cycle:
        g = add_edge(g, generated_edge(node - 1, node, lag(), name));
        break;
    }
  }
  if (structure == Structure::cycle) g = add_edge(g, generated_edge(static_cast<VariableId>(n - 1), 0, lag(), name));
  return g;
}

DscpGraph densify(const DscpGraph& skeleton, EnrRegime enr_regime, LagRegime lag_regime, Rng& rng) {
  const std::size_t n = skeleton.size();
  const int bound = regime_max_lag(lag_regime);
  if (n == 0) throw BenchgenError("benchgen.regime_unreachable", "cannot densify an empty graph");
  if (max_lag(skeleton) > bound) {
    throw BenchgenError("benchgen.regime_unreachable", "skeleton lag exceeds the regime bound");
  }
  for (const auto& e : skeleton.edges) {
    if (e.lag == 0) throw BenchgenError("benchgen.regime_unreachable", "skeleton holds a contemporaneous edge");
  }
  auto [lo, hi] = regime_edge_bounds(enr_regime, n);
  lo = std::max(lo, skeleton.edges.size() + 1);
  const std::size_t capacity = n * n * static_cast<std::size_t>(bound);
  hi = std::min(hi, capacity);
  if (lo > hi) {
    throw BenchgenError("benchgen.regime_unreachable", "skeleton with " + std::to_string(skeleton.edges.size()) +
                                                           " edges cannot reach the " +
                                                           std::string(to_string(enr_regime)) + " regime");
  }
  const std::size_t target = lo + rng.index(hi - lo + 1);
  const int upper_first = bound / 2 + 1;

  DscpGraph g = skeleton;
  bool first = true;
  while (g.edges.size() < target) {
    const auto s = static_cast<VariableId>(rng.index(n));
    const auto t = static_cast<VariableId>(rng.index(n));
    const int lag = first ? rng.integer(upper_first, bound) : rng.integer(1, bound);
    if (g.find_edge(s, t, lag)) continue;
    g = add_edge(g, generated_edge(s, t, lag, "densify"));
    first = false;
  }
  return g;
}

DscpGraph mark_latent(const DscpGraph& graph, double fraction, Rng& rng) {
  const std::size_t n = graph.size();
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  DscpGraph g = graph;
  for (std::size_t i = 0; i < std::min(k, n); ++i) g.variables[order[i]].latent = true;
  return g;
}

DscpGraph attach_mlp_functionals(const DscpGraph& graph, std::size_t hidden, double noise_std, std::uint64_t seed) {
  DscpGraph g = graph;
  for (std::size_t t = 0; t < g.size(); ++t) {
    const auto target = static_cast<VariableId>(t);
    g = set_noise(g, target, GaussianNoise{0.0, noise_std});
    const auto parents = parents_of(g, target);
    if (parents.empty()) continue;
    const std::string key = "mlp_" + g.variable(target).name;
    g = set_functional(g, key, random_mlp(parents.size(), hidden, derive_seed(seed, t)));
    g = set_partition(g, target, {parents}, {FunctionalRef(key)});
  }
  return g;
}

Replicate build_replicate(const SuiteConfig& config, std::size_t index) {
  check_suite_config(config);
  Replicate rep;
  rep.index = index;
  rep.seed = derive_seed(config.seed, index);
  rep.simulation_seed = derive_seed(rep.seed, kSimStream);
  Rng rng(rep.seed);
  try {
    DscpGraph g = gen_motif(config.structure, config.n_nodes, rng, regime_max_lag(config.lag_regime),
                            config.star_orientation);
    g = densify(g, config.enr_regime, config.lag_regime, rng);
    g = mark_latent(g, config.latent_fraction, rng);
    g = attach_mlp_functionals(g, config.mlp_hidden, config.noise_std, derive_seed(rep.seed, kMlpStream));
    if (auto report = validate(g); !report.ok()) throw InvalidGraphError(report);
    rep.graph = canonical(g);
    for (auto length : config.series_lengths) {
      SimulationConfig sim;
      sim.length = length;
      sim.seed = rep.simulation_seed;
      rep.series.push_back(simulate(rep.graph, sim));
    }
  } catch (const BenchgenError& e) {
    throw BenchgenError(e.code(), "replicate " + std::to_string(index) + ": " + e.what());
  } catch (const std::exception& e) {
    throw BenchgenError("benchgen.replicate", "replicate " + std::to_string(index) + ": " + e.what());
  }
  return rep;
}

Suite build_suite(const SuiteConfig& config, unsigned threads) {
  check_suite_config(config);
  Suite suite;
  suite.config = config;
  suite.replicates.resize(config.replicates);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, config.replicates));

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = config.replicates;
  auto work = [&] {
    for (std::size_t i = next++; i < config.replicates; i = next++) {
      try {
        suite.replicates[i] = build_replicate(config, i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return suite;
}

}  // namespace karmats
