#include "layerlab/predictors/remote_image.hpp"

#include <httplib.h>

#include "layerlab/error.hpp"
#include "layerlab/util/http.hpp"

namespace layerlab::predictors {

using Json = nlohmann::json;
using predict::ImageOutput;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error("invalid-response-schema", what); }

}  // namespace

ImageOutput parse_image_service_response(const Json& reply) {
  if (!reply.is_object()) bad("reply is not a JSON object");
  ImageOutput out;
  if (reply.contains("raw_text") && !reply["raw_text"].is_null()) {
    if (!reply["raw_text"].is_string()) bad("raw_text must be a string");
    out.raw_text = reply["raw_text"].get<std::string>();
  }
  if (reply.contains("table") && !reply["table"].is_null()) {
    try {
      out.table = predict::TableRecord::from_json(reply["table"]);
    } catch (const Error& e) {
      bad(std::string("table: ") + e.what());
    }
  }
  if (reply.contains("boxes") && !reply["boxes"].is_null()) {
    if (!reply["boxes"].is_array()) bad("boxes must be a list");
    out.boxes.emplace();
    for (const auto& b : reply["boxes"]) {
      if (!b.is_array() || b.size() < 4 || b.size() > 6) bad("each box must be [x,y,w,h,label?,score?]");
      for (int i = 0; i < 4; ++i)
        if (!b[i].is_number()) bad("box coordinates must be numbers");
      predict::BoxPrediction p;
      p.box = {0, b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
      if (b.size() > 4) {
        if (!b[4].is_string()) bad("box label must be a string");
        p.label = b[4].get<std::string>();
      }
      if (b.size() > 5) {
        if (!b[5].is_number()) bad("box score must be a number");
        p.score = b[5].get<double>();
      }
      out.boxes->push_back(std::move(p));
    }
  }
  try {
    out.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return out;
}

ImageOutput call_image_service(const std::string& url, const Image& image, double timeout_s) {
  const http::Url u = http::split_url(url);
  auto client = http::make_client(u.origin, timeout_s);
  const httplib::MultipartFormDataItems items = {{"image", image.to_png(), "crop.png", "image/png"}};
  const auto res = client->Post(u.path, items);
  if (!res) throw Error("transport-error", "request to " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw Error("http-error", "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  const Json reply = Json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) bad("reply is not valid JSON");
  return parse_image_service_response(reply);
}

RemoteImagePredictor::RemoteImagePredictor(std::string url, double timeout_s)
    : url_(std::move(url)), timeout_s_(timeout_s) {}

ImageOutput RemoteImagePredictor::process_image(const Image& crop) { return call_image_service(url_, crop, timeout_s_); }

}  // namespace layerlab::predictors
