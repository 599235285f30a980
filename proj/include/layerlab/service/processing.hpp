#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "layerlab/doc/document.hpp"
#include "layerlab/pdf/render.hpp"
#include "layerlab/pipeline/config.hpp"
#include "layerlab/pipeline/pipeline.hpp"
#include "layerlab/predict/registry.hpp"
#include "layerlab/predict/runners.hpp"

// Processing steps shared by the batch CLI and the service, so both produce
// the same document.json for the same inputs.
namespace layerlab::service {

doc::Document parse_stage(std::string_view pdf_bytes, const pipeline::PipelineConfig& config,
                          const std::string& source_filename, const std::vector<pipeline::TableHint>& hints);

// A validated request with its instantiated predictor.
struct PreparedPredictor {
  predict::PredictorRequest request;
  predict::Predictor predictor;
  bool concurrent = false;
};

// Validates every request; ConfigError field names are prefixed with
// "predictors[<i>]." (and "predictors[<i>].name" for unknown predictors).
std::vector<PreparedPredictor> prepare_predictors(const predict::Registry& registry,
                                                  const std::vector<predict::PredictorRequest>& requests);

// Parses a JSON list of predictor configuration records. Errors: ConfigError.
std::vector<predict::PredictorRequest> parse_predictor_requests(const nlohmann::json& list);

predict::RunResult predictor_stage(doc::Document doc, const PreparedPredictor& prepared,
                                   const pdf::PageRenderer& renderer, const pipeline::PipelineConfig& config);

// One JSON object per line.
std::string errors_jsonl(const std::vector<predict::EntityError>& errors);

}  // namespace layerlab::service
