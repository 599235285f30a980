#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

namespace layerlab::pipeline {

std::set<std::string> default_abbreviations();

struct PipelineConfig {
  double line_gap_factor = 1.5;
  double block_gap_factor = 1.8;
  int min_table_aligned_columns = 3;
  std::set<std::string> abbreviation_list = default_abbreviations();
  std::optional<std::string> structure_service_url;
  int render_dpi = 150;

  // Throws ConfigError naming each invalid field.
  void validate() const;

  nlohmann::json to_json() const;
  // All fields optional; unknown fields are rejected.
  static PipelineConfig from_json(const nlohmann::json& json);
  // YAML or JSON file.
  static PipelineConfig load(const std::filesystem::path& path);

  // SHA-256 of the canonical JSON form; keys the parse cache.
  std::string hash() const;
};

// Reads a YAML or JSON file into JSON (JSON is a YAML subset).
nlohmann::json load_yaml_or_json(const std::filesystem::path& path);
nlohmann::json parse_yaml_or_json(const std::string& text);

}  // namespace layerlab::pipeline
