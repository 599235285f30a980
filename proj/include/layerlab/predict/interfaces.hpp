#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "layerlab/doc/document.hpp"
#include "layerlab/pdf/render.hpp"
#include "layerlab/predict/records.hpp"
#include "layerlab/predict/types.hpp"

namespace layerlab::predict {

class TokenClassificationPredictor {
 public:
  virtual ~TokenClassificationPredictor() = default;
  // One list of tags per input text, in input order.
  virtual std::vector<std::vector<TaggedSpan>> tag_batch(const std::vector<std::string>& texts) = 0;
};

class TextGenerationPredictor {
 public:
  virtual ~TextGenerationPredictor() = default;
  virtual std::string generate(const std::string& entity_text) = 0;
  virtual ParsedRecord postprocess_to_record(const std::string& response) const {
    return parse_whole_response(response);
  }
};

// Where the runner cropped the entity: boxes an ImagePredictor returns are
// relative to `region`.
struct ImageContext {
  doc::Box region;
  int dpi = 150;
};

class ImagePredictor {
 public:
  virtual ~ImagePredictor() = default;
  // Errors: not-implemented unless overridden.
  virtual ImageOutput process_image(const Image& crop);
  // Defaults to process_image on the rendered region.
  virtual ImageOutput process_entity(const doc::Document& doc, const doc::Entity& entity,
                                     const pdf::PageRenderer& renderer, const ImageContext& context);
};

using Predictor = std::variant<std::shared_ptr<TokenClassificationPredictor>,
                               std::shared_ptr<TextGenerationPredictor>, std::shared_ptr<ImagePredictor>>;

PredictorKind kind_of(const Predictor& predictor);

}  // namespace layerlab::predict
