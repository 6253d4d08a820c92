#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "karmats/metrics.hpp"

namespace karmats {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  double sum = 0.0;
  for (double x : v) sum += x;
  m.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.stddev = std::sqrt(ss / static_cast<double>(v.size()));
  return m;
}

std::vector<double> zscore(const std::vector<double>& v) {
  const Moments m = moments(v);
  std::vector<double> z(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) z[i] = (v[i] - m.mean) / m.stddev;
  return z;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  if (ma.stddev == 0.0 || mb.stddev == 0.0) return kNaN;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma.mean;
    const double db = b[i] - mb.mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> upper(const std::vector<std::vector<double>>& m) {
  std::vector<double> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t k = i + 1; k < m.size(); ++k) out.push_back(m[i][k]);
  }
  return out;
}

std::vector<double> spectrum(const std::vector<std::vector<double>>& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) a(i, k) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(out.begin(), out.end());
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::vector<std::vector<double>> pearson_matrix(const std::vector<const std::vector<double>*>& columns) {
  const std::size_t n = columns.size();
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i; k < n; ++k) {
      const double r = i == k ? (moments(*columns[i]).stddev == 0.0 ? kNaN : 1.0) : pearson(*columns[i], *columns[k]);
      out[i][k] = out[k][i] = r;
    }
  }
  return out;
}

std::vector<std::vector<double>> pearson_matrix(const SeriesFrame& frame) {
  std::vector<const std::vector<double>*> cols;
  for (const auto& c : frame.columns) cols.push_back(&c.values);
  return pearson_matrix(cols);
}

double lag1_autocorrelation(const std::vector<const std::vector<double>*>& columns) {
  if (columns.empty()) return kNaN;
  double total = 0.0;
  for (const auto* col : columns) {
    const auto z = zscore(*col);
    double s = 0.0;
    for (std::size_t t = 0; t + 1 < z.size(); ++t) s += z[t] * z[t + 1];
    total += s / static_cast<double>(z.size() - 1);
  }
  return total / static_cast<double>(columns.size());
}

FidelityReport fidelity(const SeriesFrame& real, const SeriesFrame& synth) {
  std::set<std::string> rn, sn;
  for (const auto& c : real.columns) rn.insert(c.spec.name);
  for (const auto& c : synth.columns) sn.insert(c.spec.name);
  if (rn != sn) throw MetricsError("metrics.universe_mismatch", "real and synthetic frames have different columns");
  if (real.length() < 3 || synth.length() < 3) {
    throw MetricsError("metrics.fidelity_length", "fidelity needs at least 3 rows in each frame");
  }
  FidelityReport r;
  std::vector<const std::vector<double>*> rc, sc;
  for (const auto& col : real.columns) {
    const SeriesColumn* other = synth.find(col.spec.name);
    const Moments mr = moments(col.values);
    const Moments ms = moments(other->values);
    r.real_stats.push_back({col.spec.name, mr.mean, mr.stddev});
    r.synth_stats.push_back({col.spec.name, ms.mean, ms.stddev});
    if (mr.stddev == 0.0 || ms.stddev == 0.0) {
      r.warnings.push_back("column '" + col.spec.name + "' has zero variance in the " +
                           (mr.stddev == 0.0 ? std::string("real") : std::string("synthetic")) +
                           " frame; excluded from correlation metrics");
      continue;
    }
    r.variables.push_back(col.spec.name);
    rc.push_back(&col.values);
    sc.push_back(&other->values);
  }
  const auto cr = pearson_matrix(rc);
  const auto cs = pearson_matrix(sc);
  const auto vr = upper(cr);
  const auto vs = upper(cs);

  double abs_sum = 0.0, sq_sum = 0.0, dot = 0.0, nr = 0.0, ns = 0.0;
  for (std::size_t i = 0; i < vr.size(); ++i) {
    const double d = vr[i] - vs[i];
    abs_sum += std::abs(d);
    sq_sum += d * d;
    dot += vr[i] * vs[i];
    nr += vr[i] * vr[i];
    ns += vs[i] * vs[i];
  }
  if (vr.empty()) {
    r.warnings.push_back("fewer than two usable columns; correlation metrics are undefined");
    r.mae = r.rmse = kNaN;
    r.cosine = r.matrix_corr = kNaN;
  } else {
    const double m = static_cast<double>(vr.size());
    r.mae = abs_sum / m;
    r.rmse = std::sqrt(sq_sum / m);
    r.cosine = nr > 0.0 && ns > 0.0 ? dot / std::sqrt(nr * ns) : kNaN;
    r.matrix_corr = pearson(vr, vs);
    if (std::isnan(r.cosine)) r.warnings.push_back("an off-diagonal vector is all zero; cosine is undefined");
    if (std::isnan(r.matrix_corr)) {
      r.warnings.push_back("off-diagonal entries are constant or too few; matrix_corr is undefined");
    }
  }
  double frob = 0.0;
  for (std::size_t i = 0; i < cr.size(); ++i) {
    for (std::size_t k = 0; k < cr.size(); ++k) frob += (cr[i][k] - cs[i][k]) * (cr[i][k] - cs[i][k]);
  }
  r.frobenius = std::sqrt(frob);
  const auto er = spectrum(cr);
  const auto es = spectrum(cs);
  double spec = 0.0;
  for (std::size_t i = 0; i < er.size(); ++i) spec += (er[i] - es[i]) * (er[i] - es[i]);
  r.spectral_l2 = std::sqrt(spec);
  r.lag1_real = lag1_autocorrelation(rc);
  r.lag1_synth = lag1_autocorrelation(sc);
  return r;
}

json to_json(const FidelityReport& r) {
  auto stats = [](const std::vector<VariableStats>& s) {
    json out = json::array();
    for (const auto& v : s) out.push_back(json{{"name", v.name}, {"mean", v.mean}, {"std", v.stddev}});
    return out;
  };
  return json{{"variables", r.variables},
              {"matrix_corr", number_or_null(r.matrix_corr)},
              {"cosine", number_or_null(r.cosine)},
              {"mae", number_or_null(r.mae)},
              {"rmse", number_or_null(r.rmse)},
              {"frobenius", number_or_null(r.frobenius)},
              {"spectral_l2", number_or_null(r.spectral_l2)},
              {"lag1_real", number_or_null(r.lag1_real)},
              {"lag1_synth", number_or_null(r.lag1_synth)},
              {"real_stats", stats(r.real_stats)},
              {"synth_stats", stats(r.synth_stats)},
              {"warnings", r.warnings}};
}

}  // namespace karmats
