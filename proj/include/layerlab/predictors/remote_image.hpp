#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "layerlab/predict/interfaces.hpp"

namespace layerlab::predictors {

// Validates a service reply {raw_text?, table?, boxes?: [[x,y,w,h,label?,score?],...]}.
// Errors: invalid-response-schema.
predict::ImageOutput parse_image_service_response(const nlohmann::json& reply);

// POSTs a PNG as multipart field "image" and reads the reply.
// Errors: http-error, transport-error, invalid-response-schema.
predict::ImageOutput call_image_service(const std::string& url, const Image& image, double timeout_s);

class RemoteImagePredictor : public predict::ImagePredictor {
 public:
  RemoteImagePredictor(std::string url, double timeout_s = 60);
  predict::ImageOutput process_image(const Image& crop) override;

 private:
  std::string url_;
  double timeout_s_;
};

}  // namespace layerlab::predictors
