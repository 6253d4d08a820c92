#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "karmats/series.hpp"

namespace karmats {

/// Header row of column names, one row per time step. Continuous values use
/// the shortest decimal that round-trips, binary is 0/1, categorical is the
/// label. Fields containing ',', '"' or newlines are quoted.
std::string export_csv(const SeriesFrame& frame);

/// Reads columns by header name against `schema`; every header must be in the
/// schema (schema entries missing from the file are simply absent).
/// Throws FormatError("line N", ...) on ragged rows, unknown labels or bad numbers.
SeriesFrame import_csv(std::string_view bytes, const std::vector<ColumnSpec>& schema);

/// Schema-less import: every column is read as continuous.
SeriesFrame import_csv(std::string_view bytes);

/// *.series.meta.json sidecar: run metadata plus the column schema.
std::string export_series_meta(const SeriesFrame& frame);
RunMetadata series_meta_from_json(std::string_view bytes, std::vector<ColumnSpec>* schema = nullptr);

/// CSV plus its sidecar; the sidecar supplies the schema.
SeriesFrame import_series(std::string_view csv, std::string_view meta);

/// Shortest round-trip decimal text for a double.
std::string format_double(double value);
double parse_double(std::string_view text, const std::string& where);

}  // namespace karmats
