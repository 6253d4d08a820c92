#include "karmats/discovery.hpp"

#include <algorithm>
#include <cmath>

#include "karmats/csv.hpp"
#include "karmats/document.hpp"

namespace karmats {

using nlohmann::json;
using namespace json_read;

namespace {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void require_name(const DscpGraph& graph, const std::string& name, const std::string& where) {
  if (!graph.find(name)) throw FormatError(where, "variable '" + name + "' does not exist in the graph");
}

int parse_lag(std::string_view text, const std::string& where) {
  const double v = parse_double(text, where);
  if (v < 0.0 || v != std::floor(v) || v > 1e6) throw FormatError(where, "lag must be a non-negative integer");
  return static_cast<int>(v);
}

SuggestionSet edge_list_csv(std::string_view bytes, SuggestionSet set, const DscpGraph& graph) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= bytes.size()) {
    std::size_t end = bytes.find('\n', start);
    if (end == std::string_view::npos) end = bytes.size();
    lines.push_back(bytes.substr(start, end - start));
    start = end + 1;
  }
  int source_col = -1, target_col = -1, lag_col = -1, score_col = -1;
  bool header_seen = false;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string where = "line " + std::to_string(ln + 1);
    auto fields = split_line(lines[ln]);
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (!fields.empty() && !fields[0].empty() && fields[0][0] == '#') continue;
    if (!header_seen) {
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (fields[c] == "source") source_col = static_cast<int>(c);
        else if (fields[c] == "target") target_col = static_cast<int>(c);
        else if (fields[c] == "lag") lag_col = static_cast<int>(c);
        else if (fields[c] == "score") score_col = static_cast<int>(c);
      }
      if (source_col < 0 || target_col < 0 || lag_col < 0) {
        throw FormatError(where, "edge list header must name source, target and lag columns");
      }
      header_seen = true;
      continue;
    }
    const auto need = static_cast<std::size_t>(std::max({source_col, target_col, lag_col, score_col}) + 1);
    if (fields.size() < need) throw FormatError(where, "row has " + std::to_string(fields.size()) + " fields");
    Suggestion s;
    s.source = fields[static_cast<std::size_t>(source_col)];
    s.target = fields[static_cast<std::size_t>(target_col)];
    s.lag = parse_lag(fields[static_cast<std::size_t>(lag_col)], where);
    if (score_col >= 0 && !fields[static_cast<std::size_t>(score_col)].empty()) {
      s.score = parse_double(fields[static_cast<std::size_t>(score_col)], where);
    }
    require_name(graph, s.source, where);
    require_name(graph, s.target, where);
    set.suggestions.push_back(std::move(s));
  }
  if (!header_seen) throw FormatError("line 1", "edge list has no header");
  return set;
}

SuggestionSet edge_list_json(const json& j, SuggestionSet set, const DscpGraph& graph) {
  array(j, "");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string path = "/" + std::to_string(i);
    Suggestion s;
    s.source = string(field(j[i], "source", path), path + "/source");
    s.target = string(field(j[i], "target", path), path + "/target");
    const long long lag = integer(field(j[i], "lag", path), path + "/lag");
    if (lag < 0) throw FormatError(path + "/lag", "lag must be non-negative");
    s.lag = static_cast<int>(lag);
    if (const json* v = optional_field(j[i], "score")) s.score = number(*v, path + "/score");
    require_name(graph, s.source, path + "/source");
    require_name(graph, s.target, path + "/target");
    set.suggestions.push_back(std::move(s));
  }
  return set;
}

SuggestionSet lag_matrix(const json& doc, SuggestionSet set, const DscpGraph& graph) {
  std::vector<std::string> names;
  const json* matrix = &doc;
  if (doc.is_object()) {
    matrix = &field(doc, "matrix", "");
    if (const json* vars = optional_field(doc, "variables")) {
      array(*vars, "/variables");
      for (std::size_t i = 0; i < vars->size(); ++i) {
        names.push_back(string((*vars)[i], "/variables/" + std::to_string(i)));
        require_name(graph, names.back(), "/variables/" + std::to_string(i));
      }
    }
  }
  if (names.empty()) {
    for (const auto& v : graph.variables) {
      if (!v.latent) names.push_back(v.name);
    }
  }
  const std::string mpath = doc.is_object() ? "/matrix" : "";
  array(*matrix, mpath);
  const std::size_t n = names.size();
  if (matrix->size() != n) {
    throw FormatError(mpath, "matrix has " + std::to_string(matrix->size()) + " rows for " + std::to_string(n) + " variables");
  }
  std::size_t depth = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string ipath = mpath + "/" + std::to_string(i);
    const json& row = array((*matrix)[i], ipath);
    if (row.size() != n) throw FormatError(ipath, "expected " + std::to_string(n) + " columns");
    for (std::size_t k = 0; k < n; ++k) {
      const std::string kpath = ipath + "/" + std::to_string(k);
      const json& lags = array(row[k], kpath);
      if (i == 0 && k == 0) depth = lags.size();
      if (lags.size() != depth) throw FormatError(kpath, "expected " + std::to_string(depth) + " lag entries");
      for (std::size_t tau = 0; tau < depth; ++tau) {
        const double value = number(lags[tau], kpath + "/" + std::to_string(tau));
        if (value == 0.0 || (tau == 0 && i == k)) continue;
        set.suggestions.push_back({names[i], names[k], static_cast<int>(tau), std::abs(value), SuggestionStatus::pending});
      }
    }
  }
  return set;
}

}  // namespace

std::string_view to_string(SuggestionStatus status) noexcept {
  switch (status) {
    case SuggestionStatus::pending: return "pending";
    case SuggestionStatus::accepted: return "accepted";
    case SuggestionStatus::rejected: return "rejected";
  }
  return "pending";
}

std::optional<DiscoveryFormat> parse_discovery_format(std::string_view text) noexcept {
  if (text == "edge-list" || text == "edge_list") return DiscoveryFormat::edge_list;
  if (text == "lag-matrix" || text == "lag_matrix") return DiscoveryFormat::lag_matrix;
  return std::nullopt;
}

SuggestionSet import_discovery(std::string_view bytes, DiscoveryFormat format, std::string algorithm,
                               const DscpGraph& graph) {
  SuggestionSet set;
  set.algorithm = std::move(algorithm);
  if (format == DiscoveryFormat::lag_matrix) return lag_matrix(parse_json(bytes), std::move(set), graph);
  const auto first = bytes.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && bytes[first] == '[') {
    return edge_list_json(parse_json(bytes), std::move(set), graph);
  }
  return edge_list_csv(bytes, std::move(set), graph);
}

std::string save_suggestions(const SuggestionSet& set) {
  json items = json::array();
  for (const auto& s : set.suggestions) {
    json item{{"source", s.source}, {"target", s.target}, {"lag", s.lag}, {"status", std::string(to_string(s.status))}};
    item["score"] = s.score ? json(*s.score) : json(nullptr);
    items.push_back(std::move(item));
  }
  return dump_canonical(json{{"format_version", "karmats.suggestions/1"}, {"algorithm", set.algorithm}, {"suggestions", items}});
}

SuggestionSet load_suggestions(std::string_view bytes) {
  const json j = parse_json(bytes);
  object(j, "");
  SuggestionSet set;
  set.algorithm = string(field(j, "algorithm", ""), "/algorithm");
  const json& items = array(field(j, "suggestions", ""), "/suggestions");
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string path = "/suggestions/" + std::to_string(i);
    Suggestion s;
    s.source = string(field(items[i], "source", path), path + "/source");
    s.target = string(field(items[i], "target", path), path + "/target");
    s.lag = static_cast<int>(integer(field(items[i], "lag", path), path + "/lag"));
    if (const json* v = optional_field(items[i], "score")) s.score = number(*v, path + "/score");
    if (const json* v = optional_field(items[i], "status")) {
      const std::string status = string(*v, path + "/status");
      if (status == "pending") s.status = SuggestionStatus::pending;
      else if (status == "accepted") s.status = SuggestionStatus::accepted;
      else if (status == "rejected") s.status = SuggestionStatus::rejected;
      else throw FormatError(path + "/status", "unknown status '" + status + "'");
    }
    set.suggestions.push_back(std::move(s));
  }
  return set;
}

}  // namespace karmats
