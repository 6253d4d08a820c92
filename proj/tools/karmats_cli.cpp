// karmats: command line front end for simulation, benchmark generation,
// evaluation, fidelity scoring, format conversion and the HTTP service.

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "karmats/benchgen.hpp"
#include "karmats/config.hpp"
#include "karmats/csv.hpp"
#include "karmats/discovery.hpp"
#include "karmats/document.hpp"
#include "karmats/editlog.hpp"
#include "karmats/http_server.hpp"
#include "karmats/manifest.hpp"
#include "karmats/metrics.hpp"
#include "karmats/service.hpp"
#include "karmats/simulation.hpp"

namespace fs = std::filesystem;
using namespace karmats;
using nlohmann::json;

namespace {

/// Carries the file a failure belongs to so messages read "file: /json/path: what".
struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw CliError(path.string() + ": cannot write file");
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Runs `fn`, rewriting library errors to name `file`.
template <class F>
auto with_file(const fs::path& file, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const FormatError& e) {
    const std::string where = e.path().empty() ? "" : e.path() + ": ";
    throw CliError(file.string() + ": " + where + e.what());
  } catch (const InvalidGraphError& e) {
    std::string msg = file.string() + ": invalid graph";
    for (const auto& f : e.report().findings) msg += "\n  " + f.location + ": " + f.code + ": " + f.message;
    throw CliError(msg);
  } catch (const GraphError& e) {
    throw CliError(file.string() + ": " + e.code() + ": " + e.what());
  }
}

DscpGraph load_graph_file(const fs::path& path) {
  const std::string bytes = read_file(path);
  return with_file(path, [&] { return load_graph(bytes); });
}

/// Estimate from a discovery result: the truth's observed variables plus the suggested edges.
DscpGraph estimate_from_suggestions(const SuggestionSet& set, const DscpGraph& truth) {
  DscpGraph g;
  for (const auto& v : truth.variables) {
    if (v.latent) continue;
    VariableSpec copy = v;
    copy.id = static_cast<VariableId>(g.variables.size());
    g.variables.push_back(std::move(copy));
  }
  std::set<std::tuple<VariableId, VariableId, int>> seen;
  for (const auto& s : set.suggestions) {
    if (s.status == SuggestionStatus::rejected) continue;
    auto src = g.find(s.source);
    auto dst = g.find(s.target);
    if (!src || !dst) throw FormatError("", "suggestion " + s.source + " -> " + s.target + " names an unobserved variable");
    if (!seen.insert({*src, *dst, s.lag}).second) continue;
    LagEdge e;
    e.source = *src;
    e.target = *dst;
    e.lag = s.lag;
    e.provenance = Provenance::algorithm(set.algorithm);
    g.edges.push_back(e);
  }
  return g;
}

std::string guess_estimate_format(const std::string& path) {
  if (ends_with(path, ".dscp.json")) return "dscp";
  if (ends_with(path, ".suggestions.json")) return "suggestions";
  if (ends_with(path, ".csv")) return "edge-list";
  return "lag-matrix";
}

DscpGraph load_estimate(const fs::path& path, std::string format, const DscpGraph& truth, const std::string& algorithm) {
  if (format == "auto") format = guess_estimate_format(path.string());
  if (format == "dscp") return load_graph_file(path);
  const std::string bytes = read_file(path);
  return with_file(path, [&] {
    if (format == "suggestions") return estimate_from_suggestions(load_suggestions(bytes), truth);
    auto parsed = parse_discovery_format(format);
    if (!parsed) throw CliError("unknown estimate format '" + format + "'");
    return estimate_from_suggestions(import_discovery(bytes, *parsed, algorithm, truth), truth);
  });
}

void emit(const json& report, const std::string& out) {
  const std::string text = dump_canonical(report);
  if (out.empty()) std::cout << text;
  else write_file(out, text);
}

int cmd_simulate(const std::string& graph_path, const std::string& config_path, std::string out) {
  const DscpGraph graph = load_graph_file(graph_path);
  const std::string config_bytes = read_file(config_path);
  const SimulationConfig config = with_file(config_path, [&] {
    return simulation_config_from_json(parse_json(config_bytes), graph, fs::path(config_path).parent_path());
  });
  SeriesFrame frame;
  try {
    frame = simulate(graph, config);
  } catch (const SimulationError& e) {
    throw CliError(config_path + ": " + e.code() + ": " + e.what());
  }
  if (out.empty()) out = fs::path(graph_path).filename().string();
  for (std::string_view suffix : {".dscp.json", ".json", ".series.csv"}) {
    if (ends_with(out, suffix)) {
      out.resize(out.size() - suffix.size());
      break;
    }
  }
  write_file(out + ".series.csv", export_csv(frame));
  write_file(out + ".series.meta.json", export_series_meta(frame));
  std::cout << out << ".series.csv\n" << out << ".series.meta.json\n";
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_dir, unsigned threads) {
  const std::string bytes = read_file(config_path);
  const SuiteConfig config = with_file(config_path, [&] { return suite_config_from_json(parse_json(bytes)); });
  Suite suite;
  try {
    suite = build_suite(config, threads);
  } catch (const BenchgenError& e) {
    throw CliError(config_path + ": " + e.code() + ": " + e.what());
  }
  const SuiteManifest manifest = write_suite(suite, out_dir);
  std::size_t files = 1;
  for (const auto& r : manifest.replicates) files += 1 + 2 * r.series.size();
  std::cout << (fs::path(out_dir) / "manifest.json").string() << " (" << manifest.replicates.size() << " replicates, "
            << files << " files)\n";
  return 0;
}

int cmd_eval(const std::string& truth_path, const std::string& estimate_path, int lag_window, bool summary_only,
             const std::string& format, const std::string& algorithm, const std::string& out) {
  const DscpGraph truth = load_graph_file(truth_path);
  const DscpGraph estimate = load_estimate(estimate_path, format, truth, algorithm);
  try {
    const EvaluationReport report = evaluate(truth, estimate, lag_window);
    json j = to_json(report);
    if (summary_only) {
      j = json{{"summary", to_json(report.summary)},
               {"summary_f1", report.summary.f1},
               {"sid_summary", report.sid.sid_summary},
               {"sid", to_json(report.sid)}};
    }
    emit(j, out);
  } catch (const MetricsError& e) {
    throw CliError(truth_path + " vs " + estimate_path + ": " + e.code() + ": " + e.what());
  }
  return 0;
}

SeriesFrame load_frame(const std::string& csv_path, const std::string& schema_path) {
  const std::string csv = read_file(csv_path);
  if (schema_path.empty()) {
    fs::path sidecar = csv_path;
    std::string s = sidecar.string();
    if (ends_with(s, ".series.csv")) {
      sidecar = s.substr(0, s.size() - 4) + ".meta.json";
      if (fs::exists(sidecar)) {
        const std::string meta = read_file(sidecar);
        return with_file(csv_path, [&] { return import_series(csv, meta); });
      }
    }
    return with_file(csv_path, [&] { return import_csv(csv); });
  }
  const std::string meta = read_file(schema_path);
  return with_file(csv_path, [&] {
    std::vector<ColumnSpec> schema;
    series_meta_from_json(meta, &schema);
    return import_csv(csv, schema);
  });
}

int cmd_fidelity(const std::string& real_path, const std::string& synth_path, const std::string& schema,
                 const std::string& out) {
  const SeriesFrame real = load_frame(real_path, schema);
  const SeriesFrame synth = load_frame(synth_path, schema);
  FidelityReport report;
  try {
    report = fidelity(real, synth);
  } catch (const MetricsError& e) {
    throw CliError(real_path + " vs " + synth_path + ": " + e.code() + ": " + e.what());
  }
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  emit(to_json(report), out);
  return 0;
}

HttpServer* g_server = nullptr;

int cmd_serve(int port, const std::string& host, const std::string& data_dir) {
  ServiceOptions options = options_from_env();
  if (!data_dir.empty()) options.data_dir = data_dir;
  Service service(options);
  HttpServer server(service);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::cerr << "karmats serving on " << host << ":" << port << "\n";
  server.listen(host, port);
  g_server = nullptr;
  return 0;
}

int cmd_convert(const std::string& in, const std::string& out, const std::string& graph_path,
                const std::string& format, const std::string& algorithm) {
  const std::string bytes = read_file(in);
  if (ends_with(in, ".editlog.jsonl") && ends_with(out, ".dscp.json")) {
    const DscpGraph g = with_file(in, [&] {
      const auto events = parse_jsonl(bytes);
      DscpGraph replayed = replay(events);
      if (auto report = validate(replayed); !report.ok()) throw InvalidGraphError(report);
      return replayed;
    });
    write_file(out, save_graph(g));
  } else if (ends_with(in, ".dscp.json") && ends_with(out, ".dscp.json")) {
    write_file(out, with_file(in, [&] { return save_document(load_document(bytes)); }));
  } else if (ends_with(in, ".dscp.json") && ends_with(out, ".editlog.jsonl")) {
    const DscpGraph g = with_file(in, [&] { return load_graph(bytes); });
    std::string text;
    std::uint64_t seq = 0;
    for (auto e : events_from_graph(g, Actor::expert("convert"))) {
      e.seq = ++seq;
      text += event_to_line(e);
    }
    write_file(out, text);
  } else if (ends_with(out, ".suggestions.json")) {
    if (graph_path.empty()) throw CliError("converting discovery output needs --graph");
    const DscpGraph g = load_graph_file(graph_path);
    const std::string fmt = format == "auto" ? (ends_with(in, ".csv") ? "edge-list" : "lag-matrix") : format;
    auto parsed = parse_discovery_format(fmt);
    if (!parsed) throw CliError("unknown discovery format '" + fmt + "'");
    write_file(out, with_file(in, [&] { return save_suggestions(import_discovery(bytes, *parsed, algorithm, g)); }));
  } else {
    throw CliError("do not know how to convert " + in + " to " + out);
  }
  std::cout << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"karmats: discrete-time structural causal process engine"};
  app.require_subcommand(1);

  std::string graph, config, out, truth, estimate, real, synth, schema, in_path, out_path, host = "0.0.0.0";
  std::string data_dir, format = "auto", algorithm = "import";
  int lag_window = 0;
  int port = port_from_env();
  bool summary = false;
  unsigned threads = 0;

  auto* sim = app.add_subcommand("simulate", "Simulate a graph; writes <out>.series.csv and <out>.series.meta.json");
  sim->add_option("graph", graph, "Graph document (*.dscp.json)")->required();
  sim->add_option("config", config, "Simulation config (JSON)")->required();
  sim->add_option("-o,--out", out, "Output stem");

  auto* bench = app.add_subcommand("bench", "Generate a benchmark suite");
  std::string out_dir = "suite";
  bench->add_option("suite_config", config, "Suite config (JSON)")->required();
  bench->add_option("-o,--out", out_dir, "Output directory");
  bench->add_option("-j,--threads", threads, "Worker threads (0 = all cores)");

  auto* eval = app.add_subcommand("eval", "Score an estimated graph against the truth");
  eval->add_option("truth", truth, "Ground-truth graph (*.dscp.json)")->required();
  eval->add_option("estimate", estimate, "Estimate: graph, suggestions, edge list or lag matrix")->required();
  eval->add_option("--lag-window", lag_window, "Lag tolerance for a match")->check(CLI::NonNegativeNumber);
  eval->add_flag("--summary", summary, "Report only lag-collapsed metrics");
  eval->add_option("--format", format, "Estimate format: auto, dscp, suggestions, edge-list, lag-matrix");
  eval->add_option("--algorithm", algorithm, "Algorithm name for discovery output");
  eval->add_option("-o,--out", out, "Write the report here instead of stdout");

  auto* fid = app.add_subcommand("fidelity", "Compare real and synthetic series");
  fid->add_option("real", real, "Real series CSV")->required();
  fid->add_option("synth", synth, "Synthetic series CSV")->required();
  fid->add_option("--schema", schema, "Series meta file giving column kinds");
  fid->add_option("-o,--out", out, "Write the report here instead of stdout");

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--port", port, "Port (default KARMATS_PORT or 8080)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--data-dir", data_dir, "Edit log directory (default KARMATS_DATA_DIR)");

  auto* conv = app.add_subcommand("convert", "Convert between file formats");
  conv->add_option("in", in_path, "Input file")->required();
  conv->add_option("out", out_path, "Output file")->required();
  conv->add_option("--graph", graph, "Graph that discovery names resolve against");
  conv->add_option("--format", format, "Discovery format: auto, edge-list, lag-matrix");
  conv->add_option("--algorithm", algorithm, "Algorithm name recorded on suggestions");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(graph, config, out);
    if (*bench) return cmd_bench(config, out_dir, threads);
    if (*eval) return cmd_eval(truth, estimate, lag_window, summary, format, algorithm, out);
    if (*fid) return cmd_fidelity(real, synth, schema, out);
    if (*serve) return cmd_serve(port, host, data_dir);
    if (*conv) return cmd_convert(in_path, out_path, graph, format, algorithm);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
