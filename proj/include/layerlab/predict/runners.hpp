#pragma once

#include <string>
#include <vector>

#include "layerlab/doc/document.hpp"
#include "layerlab/pdf/render.hpp"
#include "layerlab/predict/interfaces.hpp"

namespace layerlab::predict {

struct RunResult {
  doc::Document document;
  std::string layer;  // name of the added result layer
  std::vector<EntityError> errors;
};

struct RunOptions {
  std::string target_layer;  // empty: the runner's default
  std::size_t batch_size = 32;
  bool concurrent = false;  // only honoured for predictors declared concurrency-safe
  int dpi = 150;
};

// "<prefix>_<name>", or with "_2", "_3", ... appended when already taken.
std::string result_layer_name(const doc::Document& doc, const std::string& prefix, const std::string& name);

// Crop-relative box to page coordinates and back.
doc::Box to_page_box(const doc::Box& region, const doc::Box& relative);
doc::Box to_crop_box(const doc::Box& region, const doc::Box& page_box);

// Enclosing box of the entity's boxes on its first page. Errors: entity-has-no-boxes.
doc::Box entity_region(const doc::Entity& entity);

// Result layer "tagged_<name>". Errors: missing-sentences-layer.
RunResult run_token_predictor(doc::Document doc, TokenClassificationPredictor& predictor, const std::string& name,
                              const RunOptions& options = {});

// Result layer "generated_<name>", target "paragraphs" by default.
// Errors: missing-target-layer.
RunResult run_text_predictor(doc::Document doc, TextGenerationPredictor& predictor, const std::string& name,
                             const RunOptions& options = {});

// Result layer "image_<name>", target "tables" by default.
// Errors: missing-target-layer.
RunResult run_image_predictor(doc::Document doc, ImagePredictor& predictor, const std::string& name,
                              const pdf::PageRenderer& renderer, const RunOptions& options = {});

// Dispatches on the predictor's kind; `renderer` is only used by image predictors.
RunResult run_predictor(doc::Document doc, const Predictor& predictor, const std::string& name,
                        const pdf::PageRenderer& renderer, const RunOptions& options = {});

}  // namespace layerlab::predict
