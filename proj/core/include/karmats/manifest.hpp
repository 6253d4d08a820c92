#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "karmats/benchgen.hpp"

namespace karmats {

struct FileEntry {
  std::string file;
  std::string sha256;
  bool operator==(const FileEntry&) const = default;
};

struct SeriesEntry {
  std::size_t length = 0;
  FileEntry csv;
  FileEntry meta;
  bool operator==(const SeriesEntry&) const = default;
};

struct ReplicateEntry {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::uint64_t simulation_seed = 0;
  FileEntry graph;
  double enr = 0.0;
  int max_lag = 0;
  std::vector<std::string> observed;
  std::vector<std::string> latent;
  std::vector<SeriesEntry> series;
  bool operator==(const ReplicateEntry&) const = default;
};

struct SuiteManifest {
  SuiteConfig config;
  std::vector<ReplicateEntry> replicates;
  bool operator==(const SuiteManifest&) const = default;
};

inline constexpr const char* kManifestFormatVersion = "karmats.manifest/1";

/// File names are relative to the suite directory.
std::string replicate_stem(std::size_t index);

/// Renders every suite file into memory (name -> bytes), manifest.json included.
/// Contains no timestamps, so equal configs give equal bytes.
std::vector<std::pair<std::string, std::string>> render_suite(const Suite& suite, SuiteManifest* manifest = nullptr);
/// Writes render_suite's files to `dir`, creating it.
SuiteManifest write_suite(const Suite& suite, const std::filesystem::path& dir);

std::string save_manifest(const SuiteManifest& manifest);
SuiteManifest load_manifest(std::string_view bytes);

}  // namespace karmats
