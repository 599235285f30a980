#include "layerlab/predictors/chat.hpp"

#include <cstdlib>

#include <httplib.h>

#include "layerlab/error.hpp"
#include "layerlab/util/http.hpp"

namespace layerlab::predictors {

using Json = nlohmann::json;

ChatConfig ChatConfig::from_json(const Json& config) {
  ChatConfig c;
  FieldErrors errors;
  c.endpoint_url = config.value("endpoint_url", "");
  c.model = config.value("model", "");
  c.system_prompt = config.value("system_prompt", "");
  c.user_prompt_template = config.value("user_prompt_template", "{entity_text}");
  c.temperature = config.value("temperature", 0.0);
  c.timeout_s = config.value("timeout_s", 60.0);
  if (c.endpoint_url.empty()) errors["endpoint_url"] = "required";
  else {
    try {
      http::split_url(c.endpoint_url);
    } catch (const Error& e) {
      errors["endpoint_url"] = e.what();
    }
  }
  if (c.model.empty()) errors["model"] = "required";
  try {
    predict::GenerationMessage::make(c.system_prompt, c.user_prompt_template, "x");
  } catch (const Error&) {
    errors["user_prompt_template"] = "must contain {entity_text} exactly once";
  }
  if (!(c.temperature >= 0 && c.temperature <= 2)) errors["temperature"] = "must be within [0, 2]";
  if (!(c.timeout_s > 0)) errors["timeout_s"] = "must be positive";

  const std::string key = config.value("api_key", "");
  const std::string env = config.value("api_key_env", "");
  if (!key.empty()) {
    c.api_key = key;
  } else if (!env.empty()) {
    const char* value = std::getenv(env.c_str());
    if (!value || !*value) errors["api_key_env"] = "environment variable " + env + " is not set";
    else c.api_key = value;
  } else {
    errors["api_key"] = "required unless api_key_env names an environment variable";
    errors["api_key_env"] = "required unless api_key is given";
  }
  if (!errors.empty()) throw ConfigError(errors);
  return c;
}

ChatCompletionPredictor::ChatCompletionPredictor(ChatConfig config) : config_(std::move(config)) {}

std::string ChatCompletionPredictor::request_body(const std::string& entity_text) const {
  const auto message = predict::GenerationMessage::make(config_.system_prompt, config_.user_prompt_template, entity_text);
  const Json body = {{"model", config_.model},
                     {"temperature", config_.temperature},
                     {"messages",
                      {{{"role", "system"}, {"content", message.system}}, {{"role", "user"}, {"content", message.user}}}}};
  return body.dump();
}

std::string ChatCompletionPredictor::generate(const std::string& entity_text) {
  const http::Url url = http::split_url(config_.endpoint_url);
  const std::string path = http::join_path(url.path, "chat/completions");
  const std::string body = request_body(entity_text);
  const httplib::Headers headers = {{"Authorization", "Bearer " + config_.api_key}};

  std::string failure;
  std::string code;
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto client = http::make_client(url.origin, config_.timeout_s);
    const auto res = client->Post(path, headers, body, "application/json");
    if (!res) {
      code = "transport-error";
      failure = "request to " + url.origin + path + " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      code = "http-error";
      failure = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
      continue;
    }
    if (res->status >= 300)
      throw Error("http-error", "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    const Json reply = Json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty() || !reply["choices"][0].contains("message") ||
        !reply["choices"][0]["message"].contains("content") ||
        !reply["choices"][0]["message"]["content"].is_string())
      throw Error("invalid-response", "response lacks choices[0].message.content");
    return reply["choices"][0]["message"]["content"].get<std::string>();
  }
  throw Error(code, failure);
}

}  // namespace layerlab::predictors
