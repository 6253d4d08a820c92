#include "karmats/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "karmats/csv.hpp"
#include "karmats/document.hpp"

namespace karmats {

using nlohmann::json;
using namespace json_read;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw FormatError(path + "/" + key, "unknown field");
  }
}

VariableId variable_by_name(const json& obj, const DscpGraph& graph, const std::string& path) {
  const std::string name = string(field(obj, "variable", path), path + "/variable");
  auto id = graph.find(name);
  if (!id) throw FormatError(path + "/variable", "unknown variable '" + name + "'");
  return *id;
}

std::string read_file(const std::filesystem::path& path, const std::string& where) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(where, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t unsigned_field(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw FormatError(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

}  // namespace

SimulationConfig simulation_config_from_json(const json& j, const DscpGraph& graph, const std::filesystem::path& base_dir) {
  object(j, "");
  reject_unknown(j, {"length", "seed", "burn_in", "init", "interventions", "record_latent"}, "");
  SimulationConfig c;
  c.length = count(field(j, "length", ""), "/length");
  if (const json* v = optional_field(j, "seed")) c.seed = unsigned_field(*v, "/seed");
  if (const json* v = optional_field(j, "burn_in")) c.burn_in = count(*v, "/burn_in");
  if (const json* v = optional_field(j, "record_latent")) c.record_latent = boolean(*v, "/record_latent");
  if (const json* init = optional_field(j, "init")) {
    object(*init, "/init");
    const std::string kind = string(field(*init, "kind", "/init"), "/init/kind");
    if (kind == "offsets") {
      reject_unknown(*init, {"kind"}, "/init");
      c.init = OffsetsInit{};
    } else if (kind == "segment") {
      reject_unknown(*init, {"kind", "csv", "data"}, "/init");
      std::string bytes;
      std::string source = "/init/data";
      if (const json* inline_csv = optional_field(*init, "data")) {
        bytes = string(*inline_csv, "/init/data");
      } else {
        std::filesystem::path csv = string(field(*init, "csv", "/init"), "/init/csv");
        if (csv.is_relative() && !base_dir.empty()) csv = base_dir / csv;
        bytes = read_file(csv, "/init/csv");
        source = "/init/csv: " + csv.string();
      }
      try {
        c.init = SegmentInit{import_csv(bytes, schema_from_graph(graph))};
      } catch (const FormatError& e) {
        throw FormatError(source + ": " + e.path(), e.what());
      }
    } else {
      throw FormatError("/init/kind", "unknown init kind '" + kind + "'");
    }
  }
  if (const json* ivs = optional_field(j, "interventions")) {
    array(*ivs, "/interventions");
    for (std::size_t i = 0; i < ivs->size(); ++i) {
      const std::string path = "/interventions/" + std::to_string(i);
      const json& iv = object((*ivs)[i], path);
      const std::string kind = string(field(iv, "kind", path), path + "/kind");
      const VariableId var = variable_by_name(iv, graph, path);
      const std::size_t t_start = count(field(iv, "t_start", path), path + "/t_start");
      const std::size_t t_end = count(field(iv, "t_end", path), path + "/t_end");
      if (kind == "do_clamp") {
        reject_unknown(iv, {"kind", "variable", "value", "t_start", "t_end"}, path);
        c.interventions.push_back(DoClamp{var, number(field(iv, "value", path), path + "/value"), t_start, t_end});
      } else if (kind == "shift_noise") {
        reject_unknown(iv, {"kind", "variable", "noise", "t_start", "t_end"}, path);
        c.interventions.push_back(ShiftNoise{var, noise_from_json(field(iv, "noise", path), path + "/noise"), t_start, t_end});
      } else {
        throw FormatError(path + "/kind", "unknown intervention kind '" + kind + "'");
      }
    }
  }
  return c;
}

json simulation_config_to_json(const SimulationConfig& c, const DscpGraph& graph) {
  json j{{"length", c.length}, {"seed", c.seed}, {"record_latent", c.record_latent}};
  if (c.burn_in) j["burn_in"] = *c.burn_in;
  if (const auto* seg = std::get_if<SegmentInit>(&c.init)) {
    j["init"] = json{{"kind", "segment"}, {"rows", seg->segment.length()}};
  } else {
    j["init"] = json{{"kind", "offsets"}};
  }
  json ivs = json::array();
  for (const auto& iv : c.interventions) {
    if (const auto* clamp = std::get_if<DoClamp>(&iv)) {
      ivs.push_back(json{{"kind", "do_clamp"},
                         {"variable", graph.variable(clamp->variable).name},
                         {"value", clamp->value},
                         {"t_start", clamp->t_start},
                         {"t_end", clamp->t_end}});
    } else {
      const auto& shift = std::get<ShiftNoise>(iv);
      ivs.push_back(json{{"kind", "shift_noise"},
                         {"variable", graph.variable(shift.variable).name},
                         {"noise", to_json(shift.noise)},
                         {"t_start", shift.t_start},
                         {"t_end", shift.t_end}});
    }
  }
  j["interventions"] = std::move(ivs);
  return j;
}

SuiteConfig suite_config_from_json(const json& j) {
  object(j, "");
  reject_unknown(j,
                 {"structure", "n_nodes", "lag_regime", "enr_regime", "latent_fraction", "replicates", "seed",
                  "series_lengths", "star_orientation", "mlp_hidden", "noise_std"},
                 "");
  SuiteConfig c;
  auto parse_enum = [&](const char* key, auto parser, auto& out) {
    if (const json* v = optional_field(j, key)) {
      const std::string text = string(*v, std::string("/") + key);
      auto parsed = parser(text);
      if (!parsed) throw FormatError(std::string("/") + key, "unknown value '" + text + "'");
      out = *parsed;
    }
  };
  parse_enum("structure", parse_structure, c.structure);
  parse_enum("lag_regime", parse_lag_regime, c.lag_regime);
  parse_enum("enr_regime", parse_enr_regime, c.enr_regime);
  parse_enum("star_orientation", parse_star_orientation, c.star_orientation);
  if (const json* v = optional_field(j, "n_nodes")) c.n_nodes = count(*v, "/n_nodes");
  if (const json* v = optional_field(j, "latent_fraction")) c.latent_fraction = number(*v, "/latent_fraction");
  if (const json* v = optional_field(j, "replicates")) c.replicates = count(*v, "/replicates");
  if (const json* v = optional_field(j, "seed")) c.seed = unsigned_field(*v, "/seed");
  if (const json* v = optional_field(j, "mlp_hidden")) c.mlp_hidden = count(*v, "/mlp_hidden");
  if (const json* v = optional_field(j, "noise_std")) c.noise_std = number(*v, "/noise_std");
  if (const json* v = optional_field(j, "series_lengths")) {
    array(*v, "/series_lengths");
    c.series_lengths.clear();
    for (std::size_t i = 0; i < v->size(); ++i) c.series_lengths.push_back(count((*v)[i], "/series_lengths/" + std::to_string(i)));
  }
  try {
    check_suite_config(c);
  } catch (const BenchgenError& e) {
    throw FormatError("", e.what());
  }
  return c;
}

json suite_config_to_json(const SuiteConfig& c) {
  return json{{"structure", std::string(to_string(c.structure))},
              {"n_nodes", c.n_nodes},
              {"lag_regime", std::string(to_string(c.lag_regime))},
              {"enr_regime", std::string(to_string(c.enr_regime))},
              {"latent_fraction", c.latent_fraction},
              {"replicates", c.replicates},
              {"seed", c.seed},
              {"series_lengths", c.series_lengths},
              {"star_orientation", std::string(to_string(c.star_orientation))},
              {"mlp_hidden", c.mlp_hidden},
              {"noise_std", c.noise_std}};
}

}  // namespace karmats
