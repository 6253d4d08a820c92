#include "karmats/document.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "karmats/hash.hpp"

namespace karmats {

using nlohmann::json;

namespace json_read {

const json& object(const json& j, const std::string& path) {
  if (!j.is_object()) throw FormatError(path, "expected an object");
  return j;
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) throw FormatError(path, "expected an array");
  return j;
}

const json& field(const json& obj, const char* key, const std::string& path) {
  object(obj, path);
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(path + "/" + key, "missing required field");
  return *it;
}

const json* optional_field(const json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw FormatError(path, "expected a number");
  return j.get<double>();
}

long long integer(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15) return static_cast<long long>(v);
  }
  throw FormatError(path, "expected an integer");
}

std::size_t count(const json& j, const std::string& path) {
  const long long v = integer(j, path);
  if (v < 0) throw FormatError(path, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) throw FormatError(path, "expected a string");
  return j.get<std::string>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw FormatError(path, "expected a boolean");
  return j.get<bool>();
}

}  // namespace json_read

namespace {

using namespace json_read;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

VariableId variable_id(const json& j, const std::string& path) {
  const long long v = integer(j, path);
  if (v < 0 || v > std::numeric_limits<VariableId>::max()) throw FormatError(path, "expected a variable id");
  return static_cast<VariableId>(v);
}

int lag_value(const json& j, const std::string& path) {
  const long long v = integer(j, path);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) throw FormatError(path, "lag out of range");
  return static_cast<int>(v);
}

std::vector<double> number_list(const json& j, const std::string& path) {
  array(j, path);
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "/" + std::to_string(i)));
  return out;
}

std::vector<std::vector<double>> matrix(const json& j, const std::string& path) {
  array(j, path);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number_list(j[i], path + "/" + std::to_string(i)));
  return out;
}

const std::set<std::string> kKnownTopLevel = {"format_version", "metadata", "variables", "edges",
                                              "partitions", "functionals", "noise", "binary_threshold"};

}  // namespace

json to_json(const VariableSpec& spec) {
  return json{{"id", spec.id},
              {"name", spec.name},
              {"kind", std::string(to_string(spec.kind))},
              {"categories", spec.categories},
              {"min", spec.min},
              {"max", spec.max},
              {"offset", spec.offset},
              {"memo", spec.memo},
              {"aggregation", std::string(to_string(spec.aggregation))},
              {"latent", spec.latent}};
}

VariableSpec variable_from_json(const json& j, const std::string& path) {
  object(j, path);
  VariableSpec spec;
  if (const json* id = optional_field(j, "id")) spec.id = variable_id(*id, path + "/id");
  spec.name = string(field(j, "name", path), path + "/name");
  const std::string kind = string(field(j, "kind", path), path + "/kind");
  auto parsed_kind = parse_variable_kind(kind);
  if (!parsed_kind) throw FormatError(path + "/kind", "unknown variable kind '" + kind + "'");
  spec.kind = *parsed_kind;
  if (const json* cats = optional_field(j, "categories")) {
    array(*cats, path + "/categories");
    for (std::size_t i = 0; i < cats->size(); ++i) {
      spec.categories.push_back(string((*cats)[i], path + "/categories/" + std::to_string(i)));
    }
  }
  if (const json* v = optional_field(j, "min")) spec.min = number(*v, path + "/min");
  if (const json* v = optional_field(j, "max")) spec.max = number(*v, path + "/max");
  if (const json* v = optional_field(j, "offset")) spec.offset = number(*v, path + "/offset");
  if (const json* v = optional_field(j, "memo")) spec.memo = string(*v, path + "/memo");
  if (const json* v = optional_field(j, "aggregation")) {
    const std::string mode = string(*v, path + "/aggregation");
    auto parsed = parse_aggregation(mode);
    if (!parsed) throw FormatError(path + "/aggregation", "unknown aggregation '" + mode + "'");
    spec.aggregation = *parsed;
  } else if (spec.kind == VariableKind::categorical) {
    spec.aggregation = Aggregation::vote;
  }
  if (const json* v = optional_field(j, "latent")) spec.latent = boolean(*v, path + "/latent");
  return spec;
}

json to_json(const FunctionalRef& ref) {
  if (ref.is_naive()) return json{{"naive", ref.naive() == Naive::identity ? "identity" : "null"}};
  return json{{"ref", ref.key()}};
}

FunctionalRef functional_ref_from_json(const json& j, const std::string& path) {
  object(j, path);
  if (const json* naive = optional_field(j, "naive")) {
    const std::string kind = string(*naive, path + "/naive");
    if (kind == "identity") return FunctionalRef::identity();
    if (kind == "null") return FunctionalRef::null();
    throw FormatError(path + "/naive", "expected 'identity' or 'null'");
  }
  if (const json* ref = optional_field(j, "ref")) return FunctionalRef(string(*ref, path + "/ref"));
  throw FormatError(path, "expected {\"naive\": ...} or {\"ref\": ...}");
}

json to_json(const Provenance& provenance) {
  return json{{"kind", std::string(to_string(provenance.kind))}, {"name", provenance.name}};
}

Provenance provenance_from_json(const json& j, const std::string& path) {
  object(j, path);
  Provenance p;
  const std::string kind = string(field(j, "kind", path), path + "/kind");
  if (kind == "expert") p.kind = ProvenanceKind::expert;
  else if (kind == "algorithm") p.kind = ProvenanceKind::algorithm;
  else if (kind == "template") p.kind = ProvenanceKind::generator;
  else throw FormatError(path + "/kind", "unknown provenance kind '" + kind + "'");
  if (const json* name = optional_field(j, "name")) p.name = string(*name, path + "/name");
  return p;
}

json to_json(const LagEdge& edge) {
  return json{{"source", edge.source},
              {"target", edge.target},
              {"lag", edge.lag},
              {"functional", to_json(edge.functional)},
              {"provenance", to_json(edge.provenance)}};
}

LagEdge edge_from_json(const json& j, const std::string& path) {
  object(j, path);
  LagEdge e;
  e.source = variable_id(field(j, "source", path), path + "/source");
  e.target = variable_id(field(j, "target", path), path + "/target");
  e.lag = lag_value(field(j, "lag", path), path + "/lag");
  if (const json* f = optional_field(j, "functional")) e.functional = functional_ref_from_json(*f, path + "/functional");
  if (const json* p = optional_field(j, "provenance")) e.provenance = provenance_from_json(*p, path + "/provenance");
  return e;
}

json to_json(const ParentRef& parent) { return json{{"source", parent.source}, {"lag", parent.lag}}; }

ParentRef parent_from_json(const json& j, const std::string& path) {
  object(j, path);
  return {variable_id(field(j, "source", path), path + "/source"), lag_value(field(j, "lag", path), path + "/lag")};
}

json to_json(const PartitionGroup& group) {
  json members = json::array();
  for (const auto& m : group.members) members.push_back(to_json(m));
  return json{{"members", std::move(members)}, {"functional", to_json(group.functional)}};
}

PartitionGroup group_from_json(const json& j, const std::string& path) {
  object(j, path);
  PartitionGroup group;
  const json& members = array(field(j, "members", path), path + "/members");
  for (std::size_t i = 0; i < members.size(); ++i) {
    group.members.push_back(parent_from_json(members[i], path + "/members/" + std::to_string(i)));
  }
  group.functional = functional_ref_from_json(field(j, "functional", path), path + "/functional");
  return group;
}

json to_json(const FunctionalSpec& spec) {
  json out = std::visit(
      Overloaded{
          [](const Identity&) { return json::object(); },
          [](const Null&) { return json::object(); },
          [](const LinearWindow& f) { return json{{"coefficients", f.coefficients}, {"intercept", f.intercept}}; },
          [](const Threshold& f) { return json{{"cut", f.cut}, {"low", f.low}, {"high", f.high}}; },
          [](const CategoricalTable& f) {
            json entries = json::array();
            for (const auto& [codes, value] : f.entries) entries.push_back(json{{"codes", codes}, {"value", value}});
            json out{{"entries", std::move(entries)}};
            if (f.fallback) out["fallback"] = *f.fallback;
            return out;
          },
          [](const Mlp& f) {
            return json{{"window", f.window},
                        {"widths", f.widths},
                        {"weights", f.weights},
                        {"biases", f.biases},
                        {"activation", "relu"}};
          },
      },
      spec);
  out["type"] = std::string(functional_type_name(spec));
  return out;
}

FunctionalSpec functional_from_json(const json& j, const std::string& path) {
  object(j, path);
  const std::string type = string(field(j, "type", path), path + "/type");
  if (type == "identity") return Identity{};
  if (type == "null") return Null{};
  if (type == "linear_window") {
    LinearWindow f;
    f.coefficients = matrix(field(j, "coefficients", path), path + "/coefficients");
    if (const json* v = optional_field(j, "intercept")) f.intercept = number(*v, path + "/intercept");
    return f;
  }
  if (type == "threshold") {
    Threshold f;
    f.cut = number(field(j, "cut", path), path + "/cut");
    if (const json* v = optional_field(j, "low")) f.low = number(*v, path + "/low");
    if (const json* v = optional_field(j, "high")) f.high = number(*v, path + "/high");
    return f;
  }
  if (type == "categorical_table") {
    CategoricalTable f;
    const json& entries = array(field(j, "entries", path), path + "/entries");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const std::string ep = path + "/entries/" + std::to_string(i);
      const json& codes = array(field(entries[i], "codes", ep), ep + "/codes");
      std::vector<int> key;
      for (std::size_t k = 0; k < codes.size(); ++k) {
        key.push_back(static_cast<int>(integer(codes[k], ep + "/codes/" + std::to_string(k))));
      }
      if (!f.entries.emplace(std::move(key), number(field(entries[i], "value", ep), ep + "/value")).second) {
        throw FormatError(ep + "/codes", "duplicate code tuple");
      }
    }
    if (const json* v = optional_field(j, "fallback")) f.fallback = number(*v, path + "/fallback");
    return f;
  }
  if (type == "mlp") {
    Mlp f;
    if (const json* v = optional_field(j, "window")) f.window = count(*v, path + "/window");
    const json& widths = array(field(j, "widths", path), path + "/widths");
    for (std::size_t i = 0; i < widths.size(); ++i) f.widths.push_back(count(widths[i], path + "/widths/" + std::to_string(i)));
    f.weights = matrix(field(j, "weights", path), path + "/weights");
    f.biases = matrix(field(j, "biases", path), path + "/biases");
    if (const json* v = optional_field(j, "activation"); v && string(*v, path + "/activation") != "relu") {
      throw FormatError(path + "/activation", "only 'relu' is supported");
    }
    return f;
  }
  throw FormatError(path + "/type", "unknown functional type '" + type + "'");
}

json to_json(const NoiseSpec& spec) {
  return std::visit(Overloaded{
                        [](const NoNoise&) { return json{{"distribution", "none"}}; },
                        [](const GaussianNoise& n) {
                          return json{{"distribution", "gaussian"}, {"mean", n.mean}, {"std", n.stddev}};
                        },
                        [](const UniformNoise& n) { return json{{"distribution", "uniform"}, {"lo", n.lo}, {"hi", n.hi}}; },
                    },
                    spec);
}

NoiseSpec noise_from_json(const json& j, const std::string& path) {
  object(j, path);
  const std::string dist = string(field(j, "distribution", path), path + "/distribution");
  if (dist == "none") return NoNoise{};
  if (dist == "gaussian") {
    GaussianNoise n;
    if (const json* v = optional_field(j, "mean")) n.mean = number(*v, path + "/mean");
    n.stddev = number(field(j, "std", path), path + "/std");
    return n;
  }
  if (dist == "uniform") {
    return UniformNoise{number(field(j, "lo", path), path + "/lo"), number(field(j, "hi", path), path + "/hi")};
  }
  throw FormatError(path + "/distribution", "unknown distribution '" + dist + "'");
}

json document_to_json(const GraphDocument& doc) {
  const DscpGraph g = canonical(doc.graph);
  json out = doc.extensions.is_object() ? doc.extensions : json::object();
  out["format_version"] = std::string(kGraphFormatVersion);
  out["metadata"] = json{{"title", doc.metadata.title}, {"authors", doc.metadata.authors}, {"created", doc.metadata.created}};

  json variables = json::array();
  for (const auto& v : g.variables) variables.push_back(to_json(v));
  out["variables"] = std::move(variables);

  json edges = json::array();
  for (const auto& e : g.edges) edges.push_back(to_json(e));
  out["edges"] = std::move(edges);

  json partitions = json::array();
  for (std::size_t t = 0; t < g.partitions.size(); ++t) {
    if (g.partitions[t].empty()) continue;
    json groups = json::array();
    for (const auto& group : g.partitions[t]) groups.push_back(to_json(group));
    partitions.push_back(json{{"target", t}, {"groups", std::move(groups)}});
  }
  out["partitions"] = std::move(partitions);

  json functionals = json::object();
  for (const auto& [key, spec] : g.functionals) functionals[key] = to_json(spec);
  out["functionals"] = std::move(functionals);

  json noise = json::array();
  for (std::size_t v = 0; v < g.noise.size(); ++v) {
    if (std::holds_alternative<NoNoise>(g.noise[v])) continue;
    json entry = to_json(g.noise[v]);
    entry["variable"] = v;
    noise.push_back(std::move(entry));
  }
  out["noise"] = std::move(noise);
  out["binary_threshold"] = g.binary_threshold;
  return out;
}

GraphDocument document_from_json(const json& j) {
  object(j, "");
  const std::string version = string(field(j, "format_version", ""), "/format_version");
  if (version != kGraphFormatVersion) {
    throw FormatError("/format_version", "unsupported format version '" + version + "', expected '" +
                                             std::string(kGraphFormatVersion) + "'");
  }

  GraphDocument doc;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kKnownTopLevel.contains(it.key())) doc.extensions[it.key()] = it.value();
  }

  if (const json* meta = optional_field(j, "metadata")) {
    object(*meta, "/metadata");
    if (const json* v = optional_field(*meta, "title")) doc.metadata.title = string(*v, "/metadata/title");
    if (const json* v = optional_field(*meta, "created")) doc.metadata.created = string(*v, "/metadata/created");
    if (const json* v = optional_field(*meta, "authors")) {
      array(*v, "/metadata/authors");
      for (std::size_t i = 0; i < v->size(); ++i) {
        doc.metadata.authors.push_back(string((*v)[i], "/metadata/authors/" + std::to_string(i)));
      }
    }
  }

  DscpGraph& g = doc.graph;
  const json& variables = array(field(j, "variables", ""), "/variables");
  for (std::size_t i = 0; i < variables.size(); ++i) {
    const std::string path = "/variables/" + std::to_string(i);
    VariableSpec spec = variable_from_json(variables[i], path);
    if (!optional_field(variables[i], "id")) spec.id = static_cast<VariableId>(i);
    g.variables.push_back(std::move(spec));
  }
  const std::size_t n = g.size();
  g.noise.assign(n, NoNoise{});
  g.partitions.assign(n, {});

  if (const json* edges = optional_field(j, "edges")) {
    array(*edges, "/edges");
    for (std::size_t i = 0; i < edges->size(); ++i) g.edges.push_back(edge_from_json((*edges)[i], "/edges/" + std::to_string(i)));
  }

  if (const json* functionals = optional_field(j, "functionals")) {
    object(*functionals, "/functionals");
    for (auto it = functionals->begin(); it != functionals->end(); ++it) {
      g.functionals.emplace(it.key(), functional_from_json(it.value(), "/functionals/" + it.key()));
    }
  }

  std::vector<bool> listed(n, false);
  if (const json* partitions = optional_field(j, "partitions")) {
    array(*partitions, "/partitions");
    for (std::size_t i = 0; i < partitions->size(); ++i) {
      const std::string path = "/partitions/" + std::to_string(i);
      const json& entry = (*partitions)[i];
      const VariableId target = variable_id(field(entry, "target", path), path + "/target");
      if (static_cast<std::size_t>(target) >= n) throw FormatError(path + "/target", "unknown variable id");
      if (listed[static_cast<std::size_t>(target)]) throw FormatError(path + "/target", "target listed twice");
      listed[static_cast<std::size_t>(target)] = true;
      const json& groups = array(field(entry, "groups", path), path + "/groups");
      for (std::size_t k = 0; k < groups.size(); ++k) {
        g.partitions[static_cast<std::size_t>(target)].push_back(
            group_from_json(groups[k], path + "/groups/" + std::to_string(k)));
      }
    }
  }
  // Targets without an explicit partition get one singleton group per edge.
  for (const auto& e : g.edges) {
    if (e.target >= 0 && static_cast<std::size_t>(e.target) < n && !listed[static_cast<std::size_t>(e.target)]) {
      g.partitions[static_cast<std::size_t>(e.target)].push_back({{e.parent()}, e.functional});
    }
  }

  if (const json* noise = optional_field(j, "noise")) {
    array(*noise, "/noise");
    for (std::size_t i = 0; i < noise->size(); ++i) {
      const std::string path = "/noise/" + std::to_string(i);
      const VariableId v = variable_id(field((*noise)[i], "variable", path), path + "/variable");
      if (static_cast<std::size_t>(v) >= n) throw FormatError(path + "/variable", "unknown variable id");
      g.noise[static_cast<std::size_t>(v)] = noise_from_json((*noise)[i], path);
    }
  }
  if (const json* v = optional_field(j, "binary_threshold")) g.binary_threshold = number(*v, "/binary_threshold");

  auto report = validate(g);
  if (!report.ok()) throw InvalidGraphError(std::move(report));
  g = canonical(g);
  return doc;
}

std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

json parse_json(std::string_view bytes) {
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw FormatError("byte " + std::to_string(e.byte), std::string("malformed JSON: ") + e.what());
  }
}

std::string save_document(const GraphDocument& doc) { return dump_canonical(document_to_json(doc)); }

GraphDocument load_document(std::string_view bytes) { return document_from_json(parse_json(bytes)); }

std::string save_graph(const DscpGraph& graph) { return save_document(GraphDocument{graph, {}, json::object()}); }

DscpGraph load_graph(std::string_view bytes) { return load_document(bytes).graph; }

std::string graph_hash(const DscpGraph& graph) { return sha256_hex(save_graph(graph)); }

}  // namespace karmats
