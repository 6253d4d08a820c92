#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "karmats/graph.hpp"
#include "karmats/series.hpp"

namespace karmats {

class MetricsError : public std::runtime_error {
 public:
  MetricsError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Edge by variable names. Summary-level reports leave lag at 0.
struct NamedEdge {
  std::string source;
  std::string target;
  int lag = 0;
  /// For a true positive, the lag of the truth edge it consumed.
  std::optional<int> matched_lag;
  bool operator==(const NamedEdge&) const = default;
};

struct EdgeMatchReport {
  std::vector<NamedEdge> tp;
  std::vector<NamedEdge> fp;
  std::vector<NamedEdge> fn;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int lag_window = 0;
  bool summary = false;
};

// Graphs are compared over their observed (non-latent) variables, matched by
// name; edges touching a latent variable are ignored. Both graphs must have
// the same observed name set or MetricsError("metrics.universe_mismatch") is thrown.

/// Windowed F1. Within each (source, target) pair, estimated and true lags are
/// matched one-to-one with |lag difference| <= lag_window, maximizing the number
/// of matches (each truth edge consumed at most once).
EdgeMatchReport match_f1(const DscpGraph& truth, const DscpGraph& estimate, int lag_window = 0);
/// F1 over the lag-collapsed summary graphs.
EdgeMatchReport summary_f1(const DscpGraph& truth, const DscpGraph& estimate);

/// Count of ordered pairs (i, j), i != j, for which the parents of j after
/// deleting every edge into i differ between the graphs. Parents are
/// (source, lag) pairs.
std::size_t sid(const DscpGraph& truth, const DscpGraph& estimate);
/// Same count with lags collapsed (parents are source names only).
std::size_t sid_summary(const DscpGraph& truth, const DscpGraph& estimate);

struct SidReport {
  std::size_t sid = 0;
  std::size_t sid_summary = 0;
  std::size_t n = 0;
  /// Targets whose (source, lag) parent sets differ.
  std::vector<std::string> differing_targets;
};

SidReport sid_report(const DscpGraph& truth, const DscpGraph& estimate);

struct EvaluationReport {
  EdgeMatchReport windowed;
  EdgeMatchReport summary;
  SidReport sid;
};

EvaluationReport evaluate(const DscpGraph& truth, const DscpGraph& estimate, int lag_window = 0);

/// Scores many (truth, estimate) pairs on up to `threads` threads (0 = hardware concurrency).
std::vector<EvaluationReport> evaluate_batch(const std::vector<std::pair<const DscpGraph*, const DscpGraph*>>& pairs,
                                             int lag_window = 0, unsigned threads = 0);

nlohmann::json to_json(const EdgeMatchReport& report);
nlohmann::json to_json(const SidReport& report);
nlohmann::json to_json(const EvaluationReport& report);

// ---------------------------------------------------------------------------
// Series fidelity

struct VariableStats {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;
};

struct FidelityReport {
  /// Columns kept in the correlation matrices, in the real frame's order.
  std::vector<std::string> variables;
  double matrix_corr = 0.0;
  double cosine = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  double frobenius = 0.0;
  double spectral_l2 = 0.0;
  double lag1_real = 0.0;
  double lag1_synth = 0.0;
  std::vector<VariableStats> real_stats;
  std::vector<VariableStats> synth_stats;
  std::vector<std::string> warnings;
};

/// Pearson correlation matrix of the given columns (population moments).
/// Entries involving a zero-variance column are NaN.
std::vector<std::vector<double>> pearson_matrix(const std::vector<const std::vector<double>*>& columns);
std::vector<std::vector<double>> pearson_matrix(const SeriesFrame& frame);

/// Mean over columns of E[z_t z_{t+1}] on z-scored values.
double lag1_autocorrelation(const std::vector<const std::vector<double>*>& columns);

/// Compares real and synthetic frames over the same variable names. Columns with
/// zero variance in either frame are dropped with a warning. matrix_corr is NaN
/// (with a warning) when fewer than two off-diagonal entries remain or one side
/// is constant.
FidelityReport fidelity(const SeriesFrame& real, const SeriesFrame& synth);

nlohmann::json to_json(const FidelityReport& report);

}  // namespace karmats
