#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "karmats/graph.hpp"

namespace karmats {

inline constexpr std::string_view kGraphFormatVersion = "karmats.dscp/1";

/// Schema or syntax problem in an interchange file. `path()` is a JSON
/// pointer (or "line N" for text formats) locating the offending value.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct DocumentMetadata {
  std::string title;
  std::vector<std::string> authors;
  std::string created;
  bool operator==(const DocumentMetadata&) const = default;
};

/// A graph plus human metadata. Top-level keys this version does not know are
/// carried in `extensions` and written back unchanged.
struct GraphDocument {
  DscpGraph graph;
  DocumentMetadata metadata;
  nlohmann::json extensions = nlohmann::json::object();
};

// Element codecs, shared with the edit log. `path` prefixes error locations.
nlohmann::json to_json(const VariableSpec& spec);
VariableSpec variable_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const FunctionalRef& ref);
FunctionalRef functional_ref_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const Provenance& provenance);
Provenance provenance_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const LagEdge& edge);
LagEdge edge_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const ParentRef& parent);
ParentRef parent_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const PartitionGroup& group);
PartitionGroup group_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const FunctionalSpec& spec);
FunctionalSpec functional_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const NoiseSpec& spec);
NoiseSpec noise_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json document_to_json(const GraphDocument& doc);
/// Parses and validates; throws FormatError or InvalidGraphError.
GraphDocument document_from_json(const nlohmann::json& j);

/// Canonical text: sorted keys, shortest round-trip numbers, two-space indent,
/// trailing newline. Structurally equal graphs give identical bytes.
std::string dump_canonical(const nlohmann::json& j);
nlohmann::json parse_json(std::string_view bytes);

std::string save_document(const GraphDocument& doc);
GraphDocument load_document(std::string_view bytes);
std::string save_graph(const DscpGraph& graph);
DscpGraph load_graph(std::string_view bytes);

/// SHA-256 of save_graph(graph).
std::string graph_hash(const DscpGraph& graph);

// Small checked accessors used by every JSON reader in the project.
namespace json_read {
const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& path);
const nlohmann::json* optional_field(const nlohmann::json& obj, const char* key);
const nlohmann::json& object(const nlohmann::json& j, const std::string& path);
const nlohmann::json& array(const nlohmann::json& j, const std::string& path);
double number(const nlohmann::json& j, const std::string& path);
long long integer(const nlohmann::json& j, const std::string& path);
std::size_t count(const nlohmann::json& j, const std::string& path);
std::string string(const nlohmann::json& j, const std::string& path);
bool boolean(const nlohmann::json& j, const std::string& path);
}  // namespace json_read

}  // namespace karmats
