#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

namespace oracle {

using karmats::DscpGraph;
using karmats::VariableId;

std::vector<Edge> observed_edges(const DscpGraph& g) {
  std::vector<Edge> out;
  for (const auto& e : g.edges) {
    const auto& s = g.variables[static_cast<std::size_t>(e.source)];
    const auto& t = g.variables[static_cast<std::size_t>(e.target)];
    if (s.latent || t.latent) continue;
    out.push_back({s.name, t.name, e.lag});
  }
  return out;
}

std::size_t max_true_positives(const std::vector<Edge>& truth, const std::vector<Edge>& estimate, int window) {
  // Matches never cross (source, target) pairs, so search each pair on its own:
  // every assignment of estimated edges to unused truth edges, memoized on the used set.
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<int>, std::vector<int>>> pairs;
  for (const auto& e : truth) pairs[{e.source, e.target}].first.push_back(e.lag);
  for (const auto& e : estimate) pairs[{e.source, e.target}].second.push_back(e.lag);
  std::size_t total = 0;
  for (const auto& [key, lags] : pairs) {
    const auto& [t, est] = lags;
    std::map<std::pair<std::size_t, std::uint64_t>, std::size_t> memo;
    std::function<std::size_t(std::size_t, std::uint64_t)> best = [&](std::size_t k, std::uint64_t used) -> std::size_t {
      if (k == est.size()) return 0;
      if (auto it = memo.find({k, used}); it != memo.end()) return it->second;
      std::size_t result = best(k + 1, used);  // leave est[k] unmatched
      for (std::size_t i = 0; i < t.size(); ++i) {
        if ((used >> i & 1) || std::abs(t[i] - est[k]) > window) continue;
        result = std::max(result, 1 + best(k + 1, used | std::uint64_t{1} << i));
      }
      memo[{k, used}] = result;
      return result;
    };
    total += best(0, 0);
  }
  return total;
}

Scores scores(std::size_t tp, std::size_t n_estimate, std::size_t n_truth) {
  Scores s;
  if (n_estimate > 0) s.precision = static_cast<double>(tp) / static_cast<double>(n_estimate);
  if (n_truth > 0) s.recall = static_cast<double>(tp) / static_cast<double>(n_truth);
  if (s.precision + s.recall > 0) s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

Scores summary_scores(const DscpGraph& truth, const DscpGraph& estimate) {
  std::set<std::pair<std::string, std::string>> t, e;
  for (const auto& x : observed_edges(truth)) t.insert({x.source, x.target});
  for (const auto& x : observed_edges(estimate)) e.insert({x.source, x.target});
  std::size_t tp = 0;
  for (const auto& x : e) tp += t.count(x);
  return scores(tp, e.size(), t.size());
}

namespace {

std::vector<std::string> observed_names(const DscpGraph& g) {
  std::vector<std::string> out;
  for (const auto& v : g.variables) {
    if (!v.latent) out.push_back(v.name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Copy of `edges` without those pointing into `name`.
std::vector<Edge> mutilate(const std::vector<Edge>& edges, const std::string& name) {
  std::vector<Edge> out;
  for (const auto& e : edges) {
    if (e.target != name) out.push_back(e);
  }
  return out;
}

std::set<std::pair<std::string, int>> parents(const std::vector<Edge>& edges, const std::string& of, bool collapse) {
  std::set<std::pair<std::string, int>> out;
  for (const auto& e : edges) {
    if (e.target == of) out.insert({e.source, collapse ? 0 : e.lag});
  }
  return out;
}

}  // namespace

std::size_t sid(const DscpGraph& truth, const DscpGraph& estimate, bool collapse_lags) {
  const auto names = observed_names(truth);
  const auto te = observed_edges(truth);
  const auto ee = observed_edges(estimate);
  std::size_t count = 0;
  for (const auto& i : names) {
    const auto tm = mutilate(te, i);
    const auto em = mutilate(ee, i);
    for (const auto& j : names) {
      if (i == j) continue;
      if (parents(tm, j, collapse_lags) != parents(em, j, collapse_lags)) ++count;
    }
  }
  return count;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  cov /= n - 1;
  va /= n - 1;
  vb /= n - 1;
  return cov / (std::sqrt(va) * std::sqrt(vb));
}

std::set<VariableId> descendants(const DscpGraph& g, VariableId from) {
  std::set<VariableId> seen;
  std::vector<VariableId> stack{from};
  while (!stack.empty()) {
    const VariableId v = stack.back();
    stack.pop_back();
    for (const auto& e : g.edges) {
      if (e.source == v && seen.insert(e.target).second) stack.push_back(e.target);
    }
  }
  return seen;
}

bool is_contemporaneous_order(const DscpGraph& g, const std::vector<VariableId>& order) {
  if (order.size() != g.variables.size()) return false;
  std::map<VariableId, std::size_t> pos;
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
  if (pos.size() != order.size()) return false;
  for (const auto& e : g.edges) {
    if (e.lag == 0 && pos.at(e.source) >= pos.at(e.target)) return false;
  }
  return true;
}

std::vector<VariableId> smallest_order(const DscpGraph& g) {
  std::vector<VariableId> order(g.variables.size());
  std::iota(order.begin(), order.end(), 0);
  do {
    if (is_contemporaneous_order(g, order)) return order;
  } while (std::next_permutation(order.begin(), order.end()));
  return {};
}

}  // namespace oracle
