#include "generators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "karmats/document.hpp"

namespace gen {

using namespace karmats;

DscpGraph small_graph(Rng& rng, std::size_t n, int max_lag, double density) {
  DscpGraph g;
  for (std::size_t i = 0; i < n; ++i) g = add_variable(g, VariableSpec::continuous("V" + std::to_string(i), -5, 5, 0));
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      for (int lag = 1; lag <= max_lag; ++lag) {
        if (rng.uniform01() < density) {
          g = add_edge(g, {static_cast<VariableId>(s), static_cast<VariableId>(t), lag});
        }
      }
    }
  }
  return g;
}

DscpGraph perturb(const DscpGraph& g, Rng& rng, int max_lag) {
  std::set<std::tuple<VariableId, VariableId, int>> edges;
  for (const auto& e : g.edges) {
    const double r = rng.uniform01();
    if (r < 0.2) continue;  // drop
    int lag = e.lag;
    if (r < 0.5) lag = std::clamp(lag + (rng.uniform01() < 0.5 ? -1 : 1) * rng.integer(1, 2), 1, max_lag);
    edges.insert({e.source, e.target, lag});
  }
  const int extra = rng.integer(0, 3);
  const auto n = g.size();
  for (int k = 0; k < extra && n > 0; ++k) {
    edges.insert({static_cast<VariableId>(rng.index(n)), static_cast<VariableId>(rng.index(n)), rng.integer(1, max_lag)});
  }
  DscpGraph out = without_edges(g);
  for (const auto& [s, t, lag] : edges) out = add_edge(out, {s, t, lag});
  return out;
}

DscpGraph without_edges(const DscpGraph& g) {
  DscpGraph out;
  for (const auto& v : g.variables) out = add_variable(out, v);
  return out;
}

DscpGraph mixed_graph() {
  DscpGraph g;
  g = add_variable(g, VariableSpec::continuous("temperature", -20, 45, 18.5));
  auto activities = VariableSpec::categorical("activities", {"sleep", "work", "sport, outdoor"});
  activities.aggregation = Aggregation::sum;
  g = add_variable(g, activities);
  g = add_variable(g, VariableSpec::binary("alarm"));
  auto hidden = VariableSpec::continuous("pressure", 0, 2, 1);
  hidden.latent = true;
  hidden.memo = "unobserved \"driver\"";
  g = add_variable(g, hidden);
  auto load = VariableSpec::continuous("load", -100, 100, 0);
  load.aggregation = Aggregation::average;
  g = add_variable(g, load);

  g = set_functional(g, "warm", Threshold{20.0, 0.0, 1.0});
  g = set_functional(g, "lin", LinearWindow{{{0.5, 0.25}, {-0.1, 0.0}}, 0.3});
  CategoricalTable table;
  table.entries = {{{0}, -1.0}, {{1}, 2.0}, {{2}, 3.5}};
  table.fallback = 0.0;
  g = set_functional(g, "by_activity", table);
  g = set_functional(g, "net", random_mlp(2, 3, 99));

  const auto T = *g.find("temperature");
  const auto A = *g.find("activities");
  const auto B = *g.find("alarm");
  const auto P = *g.find("pressure");
  const auto L = *g.find("load");

  g = add_edge(g, {T, T, 1});
  g = add_edge(g, {P, T, 2});
  g = set_partition(g, T, {{{T, 1}, {P, 2}}}, {FunctionalRef("lin")});
  g = add_edge(g, {T, B, 0, FunctionalRef("warm"), Provenance::algorithm("pcmci")});
  g = add_edge(g, {A, A, 1});
  g = add_edge(g, {A, L, 1, FunctionalRef("by_activity")});
  g = add_edge(g, {T, L, 1});
  g = add_edge(g, {P, L, 3});
  g = set_partition(g, L, {{{A, 1}}, {{T, 1}, {P, 3}}}, {FunctionalRef("by_activity"), FunctionalRef("net")});
  g = add_edge(g, {P, P, 1, FunctionalRef::null(), Provenance::generator("template")});

  g = set_noise(g, T, GaussianNoise{0.0, 0.5});
  g = set_noise(g, A, UniformNoise{-0.6, 0.6});
  g = set_noise(g, P, GaussianNoise{1.0, 0.1});
  g = set_noise(g, L, UniformNoise{-1, 1});
  g.binary_threshold = 0.25;
  return g;
}

SeriesFrame frame(Rng& rng, std::size_t columns, std::size_t length) {
  SeriesFrame f;
  for (std::size_t j = 0; j < columns; ++j) {
    SeriesColumn c;
    c.spec.name = "c" + std::to_string(j);
    const double mix = rng.uniform(-1, 1);
    const double scale = std::exp(rng.uniform(-3, 3));
    for (std::size_t t = 0; t < length; ++t) {
      const double prev = j == 0 ? 0.0 : f.columns[j - 1].values[t];
      c.values.push_back(mix * prev + scale * rng.normal(0, 1) + 1e3 * mix);
    }
    f.columns.push_back(std::move(c));
  }
  return f;
}

namespace {

VariableSpec random_variable(Rng& rng, std::string name) {
  VariableSpec v;
  switch (rng.index(3)) {
    case 0: {
      const double lo = rng.uniform(-10, 0);
      v = VariableSpec::continuous(std::move(name), lo, lo + rng.uniform(0.5, 20), 0);
      v.offset = rng.uniform(v.min, v.max);
      break;
    }
    case 1:
      v = VariableSpec::binary(std::move(name));
      break;
    default: {
      std::vector<std::string> cats;
      const int k = rng.integer(2, 4);
      for (int i = 0; i < k; ++i) cats.push_back("c" + std::to_string(i));
      v = VariableSpec::categorical(std::move(name), cats);
      break;
    }
  }
  v.latent = rng.uniform01() < 0.2;
  if (v.kind != VariableKind::continuous && rng.uniform01() < 0.3) v.aggregation = Aggregation::vote;
  if (rng.uniform01() < 0.3) v.memo = "note " + std::to_string(rng.index(100));
  return v;
}

FunctionalSpec random_functional(Rng& rng) {
  switch (rng.index(4)) {
    case 0: {
      const auto arity = 1 + rng.index(2);
      const auto window = 1 + rng.index(2);
      LinearWindow lw;
      lw.coefficients.assign(arity, std::vector<double>(window));
      for (auto& row : lw.coefficients)
        for (auto& c : row) c = rng.uniform(-1, 1);
      lw.intercept = rng.uniform(-1, 1);
      return lw;
    }
    case 1:
      return Threshold{rng.uniform(-1, 1), rng.uniform(-1, 0), rng.uniform(0, 1)};
    case 2: {
      CategoricalTable t;
      for (int c = 0; c < 3; ++c) t.entries[{c}] = rng.uniform(-2, 2);
      t.fallback = 0.0;
      return t;
    }
    default:
      return random_mlp(1 + rng.index(2), 1 + rng.index(3), rng.next_u64());
  }
}

FunctionalRef random_ref(Rng& rng, const DscpGraph& g) {
  const double r = rng.uniform01();
  if (r < 0.4 || g.functionals.empty()) return r < 0.2 ? FunctionalRef::null() : FunctionalRef::identity();
  auto it = g.functionals.begin();
  std::advance(it, static_cast<long>(rng.index(g.functionals.size())));
  return FunctionalRef(it->first);
}

NoiseSpec random_noise(Rng& rng) {
  switch (rng.index(3)) {
    case 0: return NoNoise{};
    case 1: return GaussianNoise{rng.uniform(-1, 1), rng.uniform(0.01, 1)};
    default: {
      const double lo = rng.uniform(-1, 0);
      return UniformNoise{lo, lo + rng.uniform(0.1, 1)};
    }
  }
}

Actor random_actor(Rng& rng) {
  return rng.uniform01() < 0.8 ? Actor::expert("expert" + std::to_string(rng.index(3)))
                               : Actor::algorithm("pcmci");
}

}  // namespace

EditEvent EventSource::candidate(const DscpGraph& g) {
  Rng& r = rng_;
  const auto n = g.size();
  const Actor actor = random_actor(r);
  auto any_var = [&] { return static_cast<VariableId>(r.index(n)); };

  // Adding variables is favoured while the graph is small.
  const double pick = r.uniform01();
  if (n < 2 || (n < 6 && pick < 0.15)) {
    return edits::add_variable(actor, random_variable(r, "n" + std::to_string(names_++)));
  }
  switch (r.index(14)) {
    case 0:
      return edits::add_variable(actor, random_variable(r, "n" + std::to_string(names_++)));
    case 1: {
      const auto id = any_var();
      auto spec = random_variable(r, g.variable(id).name);
      if (r.uniform01() < 0.5) spec = g.variable(id), spec.memo = "edited " + std::to_string(r.index(1000));
      return edits::update_variable(actor, id, spec);
    }
    case 2:
      if (n > 4) return edits::remove_variable(actor, any_var());
      [[fallthrough]];
    case 3:
    case 4: {
      LagEdge e{any_var(), any_var(), r.integer(0, 3), random_ref(r, g),
                r.uniform01() < 0.2 ? Provenance::algorithm("pcmci") : Provenance::expert("expert")};
      return edits::add_edge(actor, e);
    }
    case 5: {
      if (g.edges.empty()) break;
      LagEdge e = g.edges[r.index(g.edges.size())];
      e.functional = random_ref(r, g);
      e.provenance = Provenance::expert("reviewer");
      return edits::update_edge(actor, e);
    }
    case 6: {
      if (g.edges.empty()) break;
      const auto& e = g.edges[r.index(g.edges.size())];
      return edits::remove_edge(actor, e.source, e.target, e.lag);
    }
    case 7: {
      // Random regrouping of one target's parents.
      const auto t = any_var();
      auto ps = parents_of(g, t);
      if (ps.size() < 2) break;
      r.shuffle(ps);
      std::vector<PartitionGroup> groups;
      std::size_t i = 0;
      while (i < ps.size()) {
        const std::size_t take = 1 + r.index(ps.size() - i);
        PartitionGroup grp;
        grp.members.assign(ps.begin() + static_cast<long>(i), ps.begin() + static_cast<long>(i + take));
        std::sort(grp.members.begin(), grp.members.end());
        grp.functional = random_ref(r, g);
        groups.push_back(std::move(grp));
        i += take;
      }
      return edits::update_partition(actor, t, groups);
    }
    case 8:
      return edits::remove_partition(actor, any_var());
    case 9:
      return edits::add_functional(actor, "f" + std::to_string(keys_++), random_functional(r));
    case 10: {
      if (g.functionals.empty()) break;
      auto it = g.functionals.begin();
      std::advance(it, static_cast<long>(r.index(g.functionals.size())));
      return edits::update_functional(actor, it->first, random_functional(r));
    }
    case 11: {
      if (g.functionals.empty()) break;
      auto it = g.functionals.begin();
      std::advance(it, static_cast<long>(r.index(g.functionals.size())));
      return edits::remove_functional(actor, it->first);
    }
    case 12:
      return edits::update_noise(actor, any_var(), random_noise(r));
    case 13: {
      if (r.uniform01() < 0.5) return edits::update_settings(actor, r.uniform(0.1, 0.9));
      SuggestionSet set;
      set.algorithm = r.uniform01() < 0.5 ? "pcmci" : "varlingam";
      const auto s = any_var();
      const auto t = any_var();
      set.suggestions.push_back({g.variable(s).name, g.variable(t).name, r.integer(0, 3), r.uniform(0, 1)});
      return accept_suggestion(set, 0);
    }
  }
  return edits::add_variable(actor, random_variable(r, "n" + std::to_string(names_++)));
}

EditEvent EventSource::next(const DscpGraph& current) {
  for (;;) {
    EditEvent e = candidate(current);
    try {
      (void)apply_event(current, e);
      return e;
    } catch (const GraphError&) {
    } catch (const FormatError&) {
    }
  }
}

}  // namespace gen
