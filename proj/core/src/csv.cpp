#include "karmats/csv.hpp"

#include <array>
#include <charconv>
#include <map>

#include "karmats/document.hpp"

namespace karmats {

using nlohmann::json;

namespace {

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

std::vector<Row> parse_rows(std::string_view text) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  row.line = 1;
  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.fields.size() == 1 && row.fields[0].empty())) rows.push_back(std::move(row));
    row = Row{};
    row.line = line;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      continue;
    } else if (c == '\n') {
      ++line;
      end_row();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw FormatError("line " + std::to_string(row.line), "unterminated quoted field");
  if (!field.empty() || !row.fields.empty()) end_row();
  return rows;
}

void append_field(std::string& out, std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) {
    out.append(value);
    return;
  }
  out.push_back('"');
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

json schema_to_json(const std::vector<ColumnSpec>& schema) {
  json out = json::array();
  for (const auto& c : schema) {
    out.push_back(json{{"name", c.name},
                       {"kind", std::string(to_string(c.kind))},
                       {"categories", c.categories},
                       {"latent", c.latent}});
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text, const std::string& where) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw FormatError(where, "'" + std::string(text) + "' is not a number");
  }
  return value;
}

std::string export_csv(const SeriesFrame& frame) {
  std::string out;
  for (std::size_t c = 0; c < frame.columns.size(); ++c) {
    if (c) out.push_back(',');
    append_field(out, frame.columns[c].spec.name);
  }
  out.push_back('\n');
  const std::size_t n = frame.length();
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t c = 0; c < frame.columns.size(); ++c) {
      if (c) out.push_back(',');
      const auto& column = frame.columns[c];
      const double v = column.values[t];
      switch (column.spec.kind) {
        case VariableKind::continuous: out += format_double(v); break;
        case VariableKind::binary: out.push_back(v != 0.0 ? '1' : '0'); break;
        case VariableKind::categorical:
          append_field(out, column.spec.categories.at(static_cast<std::size_t>(v)));
          break;
      }
    }
    out.push_back('\n');
  }
  return out;
}

SeriesFrame import_csv(std::string_view bytes, const std::vector<ColumnSpec>& schema) {
  const auto rows = parse_rows(bytes);
  if (rows.empty()) throw FormatError("line 1", "missing header row");
  std::map<std::string, const ColumnSpec*> by_name;
  for (const auto& c : schema) by_name.emplace(c.name, &c);

  SeriesFrame frame;
  const auto& header = rows.front();
  for (std::size_t c = 0; c < header.fields.size(); ++c) {
    const std::string& name = header.fields[c];
    auto it = by_name.find(name);
    if (it == by_name.end()) throw FormatError("line 1", "column '" + name + "' is not in the schema");
    if (frame.find(name)) throw FormatError("line 1", "duplicate column '" + name + "'");
    frame.columns.push_back({*it->second, {}});
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "line " + std::to_string(row.line);
    if (row.fields.size() != header.fields.size()) {
      throw FormatError(where, "expected " + std::to_string(header.fields.size()) + " fields, got " +
                                   std::to_string(row.fields.size()));
    }
    for (std::size_t c = 0; c < row.fields.size(); ++c) {
      auto& column = frame.columns[c];
      const std::string& text = row.fields[c];
      switch (column.spec.kind) {
        case VariableKind::continuous: column.values.push_back(parse_double(text, where)); break;
        case VariableKind::binary:
          if (text != "0" && text != "1") throw FormatError(where, "binary column '" + column.spec.name + "' holds '" + text + "'");
          column.values.push_back(text == "1" ? 1.0 : 0.0);
          break;
        case VariableKind::categorical: {
          std::size_t code = column.spec.categories.size();
          for (std::size_t k = 0; k < column.spec.categories.size(); ++k) {
            if (column.spec.categories[k] == text) code = k;
          }
          if (code == column.spec.categories.size()) {
            throw FormatError(where, "unknown category label '" + text + "' in column '" + column.spec.name + "'");
          }
          column.values.push_back(static_cast<double>(code));
          break;
        }
      }
    }
  }
  return frame;
}

SeriesFrame import_csv(std::string_view bytes) {
  const auto rows = parse_rows(bytes);
  if (rows.empty()) throw FormatError("line 1", "missing header row");
  std::vector<ColumnSpec> schema;
  for (const auto& name : rows.front().fields) schema.push_back({name, VariableKind::continuous, {}, false});
  return import_csv(bytes, schema);
}

std::string export_series_meta(const SeriesFrame& frame) {
  json interventions = frame.meta.interventions;
  json out{{"format_version", "karmats.series/1"},
           {"seed", frame.meta.seed},
           {"graph_hash", frame.meta.graph_hash},
           {"start_step", frame.meta.start_step},
           {"next_step", frame.meta.next_step},
           {"burn_in", frame.meta.burn_in},
           {"length", frame.length()},
           {"interventions", std::move(interventions)},
           {"columns", schema_to_json(frame.schema())}};
  return dump_canonical(out);
}

RunMetadata series_meta_from_json(std::string_view bytes, std::vector<ColumnSpec>* schema) {
  using namespace json_read;
  const json j = parse_json(bytes);
  object(j, "");
  RunMetadata meta;
  if (const json* v = optional_field(j, "seed")) {
    if (!v->is_number_unsigned() && !v->is_number_integer()) throw FormatError("/seed", "expected an integer");
    meta.seed = v->get<std::uint64_t>();
  }
  if (const json* v = optional_field(j, "graph_hash")) meta.graph_hash = string(*v, "/graph_hash");
  if (const json* v = optional_field(j, "start_step")) meta.start_step = count(*v, "/start_step");
  if (const json* v = optional_field(j, "next_step")) meta.next_step = count(*v, "/next_step");
  if (const json* v = optional_field(j, "burn_in")) meta.burn_in = count(*v, "/burn_in");
  if (const json* v = optional_field(j, "interventions")) {
    array(*v, "/interventions");
    for (std::size_t i = 0; i < v->size(); ++i) meta.interventions.push_back(string((*v)[i], "/interventions/" + std::to_string(i)));
  }
  if (schema) {
    schema->clear();
    const json& columns = array(field(j, "columns", ""), "/columns");
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const std::string path = "/columns/" + std::to_string(i);
      ColumnSpec c;
      c.name = string(field(columns[i], "name", path), path + "/name");
      const std::string kind = string(field(columns[i], "kind", path), path + "/kind");
      auto parsed = parse_variable_kind(kind);
      if (!parsed) throw FormatError(path + "/kind", "unknown kind '" + kind + "'");
      c.kind = *parsed;
      if (const json* cats = optional_field(columns[i], "categories")) {
        array(*cats, path + "/categories");
        for (std::size_t k = 0; k < cats->size(); ++k) c.categories.push_back(string((*cats)[k], path + "/categories"));
      }
      if (const json* v = optional_field(columns[i], "latent")) c.latent = boolean(*v, path + "/latent");
      schema->push_back(std::move(c));
    }
  }
  return meta;
}

SeriesFrame import_series(std::string_view csv, std::string_view meta) {
  std::vector<ColumnSpec> schema;
  RunMetadata run = series_meta_from_json(meta, &schema);
  SeriesFrame frame = import_csv(csv, schema);
  frame.meta = std::move(run);
  if (auto problem = frame.check()) throw FormatError("csv", *problem);
  return frame;
}

}  // namespace karmats
