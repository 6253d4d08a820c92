#include "karmats/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "karmats/config.hpp"
#include "karmats/csv.hpp"
#include "karmats/document.hpp"
#include "karmats/hash.hpp"

namespace karmats {

using nlohmann::json;
using namespace json_read;

namespace {

json file_json(const FileEntry& f) { return json{{"file", f.file}, {"sha256", f.sha256}}; }

FileEntry file_from_json(const json& j, const std::string& path) {
  object(j, path);
  return {string(field(j, "file", path), path + "/file"), string(field(j, "sha256", path), path + "/sha256")};
}

std::vector<std::string> names(const json& j, const std::string& path) {
  std::vector<std::string> out;
  array(j, path);
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(string(j[i], path + "/" + std::to_string(i)));
  return out;
}

}  // namespace

std::string replicate_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rep%03zu", index);
  return buf;
}

std::vector<std::pair<std::string, std::string>> render_suite(const Suite& suite, SuiteManifest* out) {
  std::vector<std::pair<std::string, std::string>> files;
  SuiteManifest manifest;
  manifest.config = suite.config;
  auto emit = [&](std::string name, std::string bytes) {
    FileEntry entry{name, sha256_hex(bytes)};
    files.emplace_back(std::move(name), std::move(bytes));
    return entry;
  };
  for (const auto& rep : suite.replicates) {
    ReplicateEntry entry;
    entry.index = rep.index;
    entry.seed = rep.seed;
    entry.simulation_seed = rep.simulation_seed;
    entry.enr = enr(rep.graph);
    entry.max_lag = max_lag(rep.graph);
    for (const auto& v : rep.graph.variables) (v.latent ? entry.latent : entry.observed).push_back(v.name);
    const std::string stem = replicate_stem(rep.index);
    entry.graph = emit(stem + ".dscp.json", save_graph(rep.graph));
    for (const auto& frame : rep.series) {
      const std::string base = stem + "_T" + std::to_string(frame.length());
      SeriesEntry s;
      s.length = frame.length();
      s.csv = emit(base + ".series.csv", export_csv(frame));
      s.meta = emit(base + ".series.meta.json", export_series_meta(frame));
      entry.series.push_back(std::move(s));
    }
    manifest.replicates.push_back(std::move(entry));
  }
  files.emplace_back("manifest.json", save_manifest(manifest));
  if (out) *out = std::move(manifest);
  return files;
}

SuiteManifest write_suite(const Suite& suite, const std::filesystem::path& dir) {
  SuiteManifest manifest;
  auto files = render_suite(suite, &manifest);
  std::filesystem::create_directories(dir);
  for (const auto& [name, bytes] : files) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    f << bytes;
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  }
  return manifest;
}

std::string save_manifest(const SuiteManifest& m) {
  json reps = json::array();
  for (const auto& r : m.replicates) {
    json series = json::array();
    for (const auto& s : r.series) {
      series.push_back(json{{"length", s.length}, {"csv", file_json(s.csv)}, {"meta", file_json(s.meta)}});
    }
    reps.push_back(json{{"index", r.index},
                        {"seed", r.seed},
                        {"simulation_seed", r.simulation_seed},
                        {"graph", file_json(r.graph)},
                        {"enr", r.enr},
                        {"max_lag", r.max_lag},
                        {"observed_variables", r.observed},
                        {"latent_variables", r.latent},
                        {"series", std::move(series)}});
  }
  return dump_canonical(json{{"format_version", kManifestFormatVersion},
                             {"config", suite_config_to_json(m.config)},
                             {"max_lag_bound", regime_max_lag(m.config.lag_regime)},
                             {"replicates", std::move(reps)}});
}

SuiteManifest load_manifest(std::string_view bytes) {
  const json j = parse_json(bytes);
  object(j, "");
  const std::string version = string(field(j, "format_version", ""), "/format_version");
  if (version != kManifestFormatVersion) throw FormatError("/format_version", "unsupported manifest version '" + version + "'");
  SuiteManifest m;
  try {
    m.config = suite_config_from_json(field(j, "config", ""));
  } catch (const FormatError& e) {
    throw FormatError("/config" + e.path(), e.what());
  }
  const json& reps = array(field(j, "replicates", ""), "/replicates");
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const std::string p = "/replicates/" + std::to_string(i);
    const json& r = object(reps[i], p);
    ReplicateEntry e;
    e.index = count(field(r, "index", p), p + "/index");
    e.seed = field(r, "seed", p).get<std::uint64_t>();
    e.simulation_seed = field(r, "simulation_seed", p).get<std::uint64_t>();
    e.graph = file_from_json(field(r, "graph", p), p + "/graph");
    e.enr = number(field(r, "enr", p), p + "/enr");
    e.max_lag = static_cast<int>(integer(field(r, "max_lag", p), p + "/max_lag"));
    e.observed = names(field(r, "observed_variables", p), p + "/observed_variables");
    e.latent = names(field(r, "latent_variables", p), p + "/latent_variables");
    const json& series = array(field(r, "series", p), p + "/series");
    for (std::size_t k = 0; k < series.size(); ++k) {
      const std::string sp = p + "/series/" + std::to_string(k);
      SeriesEntry s;
      s.length = count(field(series[k], "length", sp), sp + "/length");
      s.csv = file_from_json(field(series[k], "csv", sp), sp + "/csv");
      s.meta = file_from_json(field(series[k], "meta", sp), sp + "/meta");
      e.series.push_back(std::move(s));
    }
    m.replicates.push_back(std::move(e));
  }
  return m;
}

}  // namespace karmats
