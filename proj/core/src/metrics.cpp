#include "karmats/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <set>
#include <thread>

namespace karmats {

using nlohmann::json;

namespace {

struct Projected {
  std::vector<std::string> names;  // sorted observed names
  /// (source, target) -> sorted lags
  std::map<std::pair<std::string, std::string>, std::vector<int>> edges;
};

Projected project(const DscpGraph& g) {
  Projected p;
  for (const auto& v : g.variables) {
    if (!v.latent) p.names.push_back(v.name);
  }
  std::sort(p.names.begin(), p.names.end());
  for (const auto& e : g.edges) {
    const auto& s = g.variable(e.source);
    const auto& t = g.variable(e.target);
    if (s.latent || t.latent) continue;
    p.edges[{s.name, t.name}].push_back(e.lag);
  }
  for (auto& [key, lags] : p.edges) std::sort(lags.begin(), lags.end());
  return p;
}

std::pair<Projected, Projected> project_pair(const DscpGraph& truth, const DscpGraph& estimate) {
  Projected t = project(truth);
  Projected e = project(estimate);
  if (t.names != e.names) {
    std::string only_t, only_e;
    std::vector<std::string> diff;
    std::set_difference(t.names.begin(), t.names.end(), e.names.begin(), e.names.end(), std::back_inserter(diff));
    for (const auto& n : diff) only_t += (only_t.empty() ? "" : ", ") + n;
    diff.clear();
    std::set_difference(e.names.begin(), e.names.end(), t.names.begin(), t.names.end(), std::back_inserter(diff));
    for (const auto& n : diff) only_e += (only_e.empty() ? "" : ", ") + n;
    throw MetricsError("metrics.universe_mismatch", "variable universe mismatch: only in truth [" + only_t +
                                                        "], only in estimate [" + only_e + "]");
  }
  return {std::move(t), std::move(e)};
}

void finish(EdgeMatchReport& r) {
  const double tp = static_cast<double>(r.tp.size());
  const double fp = static_cast<double>(r.fp.size());
  const double fn = static_cast<double>(r.fn.size());
  r.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
}

using ParentSets = std::map<std::string, std::set<std::pair<std::string, int>>>;

ParentSets parent_sets(const Projected& p, bool collapse) {
  ParentSets out;
  for (const auto& n : p.names) out[n];
  for (const auto& [key, lags] : p.edges) {
    for (int lag : lags) out[key.second].insert({key.first, collapse ? 0 : lag});
  }
  return out;
}

std::size_t differing(const ParentSets& a, const ParentSets& b, std::vector<std::string>* targets) {
  std::size_t count = 0;
  for (const auto& [name, parents] : a) {
    if (parents != b.at(name)) {
      ++count;
      if (targets) targets->push_back(name);
    }
  }
  return count;
}

}  // namespace

EdgeMatchReport match_f1(const DscpGraph& truth, const DscpGraph& estimate, int lag_window) {
  if (lag_window < 0) throw MetricsError("metrics.lag_window", "lag_window must be non-negative");
  auto [t, e] = project_pair(truth, estimate);
  EdgeMatchReport r;
  r.lag_window = lag_window;
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& [k, v] : t.edges) keys.insert(k);
  for (const auto& [k, v] : e.edges) keys.insert(k);
  static const std::vector<int> none;
  for (const auto& key : keys) {
    auto ti = t.edges.find(key);
    auto ei = e.edges.find(key);
    const auto& tl = ti == t.edges.end() ? none : ti->second;
    const auto& el = ei == e.edges.end() ? none : ei->second;
    // Intervals [lag - w, lag + w] of equal width sorted by right end: giving
    // each the smallest free truth lag inside it yields a maximum matching.
    std::size_t p = 0;
    for (int lag : el) {
      while (p < tl.size() && tl[p] < lag - lag_window) {
        r.fn.push_back({key.first, key.second, tl[p], std::nullopt});
        ++p;
      }
      if (p < tl.size() && tl[p] <= lag + lag_window) {
        r.tp.push_back({key.first, key.second, lag, tl[p]});
        ++p;
      } else {
        r.fp.push_back({key.first, key.second, lag, std::nullopt});
      }
    }
    for (; p < tl.size(); ++p) r.fn.push_back({key.first, key.second, tl[p], std::nullopt});
  }
  finish(r);
  return r;
}

EdgeMatchReport summary_f1(const DscpGraph& truth, const DscpGraph& estimate) {
  auto [t, e] = project_pair(truth, estimate);
  EdgeMatchReport r;
  r.summary = true;
  for (const auto& [key, lags] : e.edges) {
    (t.edges.contains(key) ? r.tp : r.fp).push_back({key.first, key.second, 0, std::nullopt});
  }
  for (const auto& [key, lags] : t.edges) {
    if (!e.edges.contains(key)) r.fn.push_back({key.first, key.second, 0, std::nullopt});
  }
  finish(r);
  return r;
}

SidReport sid_report(const DscpGraph& truth, const DscpGraph& estimate) {
  auto [t, e] = project_pair(truth, estimate);
  SidReport r;
  r.n = t.names.size();
  const std::size_t interveners = r.n == 0 ? 0 : r.n - 1;
  // Deleting the edges into i never touches the parents of j != i, so each
  // target with differing parents contributes one pair per other variable.
  r.sid = interveners * differing(parent_sets(t, false), parent_sets(e, false), &r.differing_targets);
  r.sid_summary = interveners * differing(parent_sets(t, true), parent_sets(e, true), nullptr);
  return r;
}

std::size_t sid(const DscpGraph& truth, const DscpGraph& estimate) { return sid_report(truth, estimate).sid; }

std::size_t sid_summary(const DscpGraph& truth, const DscpGraph& estimate) {
  return sid_report(truth, estimate).sid_summary;
}

EvaluationReport evaluate(const DscpGraph& truth, const DscpGraph& estimate, int lag_window) {
  return {match_f1(truth, estimate, lag_window), summary_f1(truth, estimate), sid_report(truth, estimate)};
}

std::vector<EvaluationReport> evaluate_batch(const std::vector<std::pair<const DscpGraph*, const DscpGraph*>>& pairs,
                                             int lag_window, unsigned threads) {
  std::vector<EvaluationReport> out(pairs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, pairs.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(pairs.size());
  auto work = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      try {
        out[i] = evaluate(*pairs[i].first, *pairs[i].second, lag_window);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return out;
}

namespace {

json edges_json(const std::vector<NamedEdge>& edges, bool summary) {
  json out = json::array();
  for (const auto& e : edges) {
    json item{{"source", e.source}, {"target", e.target}};
    if (!summary) item["lag"] = e.lag;
    if (!summary && e.matched_lag) item["matched_lag"] = *e.matched_lag;
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace

json to_json(const EdgeMatchReport& r) {
  json j{{"tp", edges_json(r.tp, r.summary)},
         {"fp", edges_json(r.fp, r.summary)},
         {"fn", edges_json(r.fn, r.summary)},
         {"precision", r.precision},
         {"recall", r.recall},
         {"f1", r.f1},
         {"summary", r.summary}};
  if (!r.summary) j["lag_window"] = r.lag_window;
  return j;
}

json to_json(const SidReport& r) {
  return json{{"sid", r.sid},
              {"sid_summary", r.sid_summary},
              {"n", r.n},
              {"max", r.n * (r.n == 0 ? 0 : r.n - 1)},
              {"differing_targets", r.differing_targets},
              {"definition", "count of ordered pairs (i, j), i != j, whose parent set of j after deleting all edges "
                             "into i differs; equals (n - 1) x #targets with differing parents. Not the "
                             "adjustment-set based structural intervention distance."},
              {"sid_summary_note", "parents compared with lags collapsed"}};
}

json to_json(const EvaluationReport& r) {
  return json{{"windowed", to_json(r.windowed)},
              {"summary", to_json(r.summary)},
              {"sid", to_json(r.sid)},
              {"f1", r.windowed.f1},
              {"summary_f1", r.summary.f1}};
}

}  // namespace karmats
