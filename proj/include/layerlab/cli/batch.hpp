#pragma once

#include <filesystem>
#include <ostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "layerlab/pipeline/config.hpp"
#include "layerlab/predict/registry.hpp"

namespace layerlab::cli {

enum ExitCode { kOk = 0, kConfigError = 1, kFileFailed = 2, kNoTables = 3 };

struct BatchConfig {
  std::filesystem::path input_dir;
  std::filesystem::path output_dir;
  pipeline::PipelineConfig pipeline_config;
  std::vector<predict::PredictorRequest> predictors;
  bool continue_on_error = true;
  int parallelism = 1;

  // {input_dir?, output_dir?, pipeline_config?, predictors?, continue_on_error?, parallelism?}.
  // Errors: ConfigError.
  static BatchConfig from_json(const nlohmann::json& json);
  // YAML or JSON file.
  static BatchConfig load(const std::filesystem::path& path);
};

// Processes every *.pdf of input_dir (with an optional <name>.regions.json
// beside it) into output_dir/<doc_id>/ using the service's store layout.
// Failures go to output_dir/<name>.error.txt. Prints one line per file.
int run_batch(const BatchConfig& config, const predict::Registry& registry, std::ostream& out, std::ostream& err);

// Writes <doc_id>_<layer>_<entity_id>.csv for every table record in the
// document's image result layers.
int export_tables(const std::filesystem::path& document_json, const std::filesystem::path& out_dir, std::ostream& out,
                  std::ostream& err);

}  // namespace layerlab::cli
