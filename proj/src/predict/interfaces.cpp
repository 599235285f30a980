#include "layerlab/predict/interfaces.hpp"

#include "layerlab/error.hpp"

namespace layerlab::predict {

ImageOutput ImagePredictor::process_image(const Image&) {
  throw Error("not-implemented", "predictor implements neither process_image nor process_entity");
}

ImageOutput ImagePredictor::process_entity(const doc::Document&, const doc::Entity&,
                                           const pdf::PageRenderer& renderer, const ImageContext& context) {
  return process_image(renderer.render_region(context.region, context.dpi));
}

PredictorKind kind_of(const Predictor& predictor) {
  switch (predictor.index()) {
    case 0: return PredictorKind::token_classification;
    case 1: return PredictorKind::text_generation;
    default: return PredictorKind::image;
  }
}

}  // namespace layerlab::predict
