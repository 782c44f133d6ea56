#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace twkit::app {

struct ManifestFile {
  std::string path;  // relative to the output directory
  std::string kind;  // csv, json or svg
  std::uintmax_t bytes = 0;
  std::string sha256;
};

struct StageRecord {
  std::string name;
  std::string status;  // ok, skipped or failed
  std::vector<std::string> outputs;
};

struct Manifest {
  std::uint64_t master_seed = 0;
  std::string status = "ok";
  std::string error;
  std::vector<StageRecord> stages;
  std::vector<ManifestFile> files;

  nlohmann::json to_json() const;
};

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// synth -> eval-impute -> augment -> train -> analyze -> plot, writing into
/// config.output_dir and finishing with manifest.json. A failing stage stops
/// the run; the manifest still records every stage that completed.
Manifest run_pipeline(const Config& config, std::ostream& log);

}  // namespace twkit::app
