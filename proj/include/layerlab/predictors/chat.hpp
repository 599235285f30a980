#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "layerlab/predict/interfaces.hpp"

namespace layerlab::predictors {

struct ChatConfig {
  std::string endpoint_url;
  std::string model;
  std::string api_key;  // resolved secret, never serialized
  std::string system_prompt;
  std::string user_prompt_template = "{entity_text}";
  double temperature = 0;
  double timeout_s = 60;

  // From a schema-validated config: the key comes from "api_key" or from the
  // environment variable named by "api_key_env". Errors: ConfigError.
  static ChatConfig from_json(const nlohmann::json& config);
};

// Client for the OpenAI-compatible /chat/completions endpoint. Transport
// failures and 5xx responses are retried once.
class ChatCompletionPredictor : public predict::TextGenerationPredictor {
 public:
  explicit ChatCompletionPredictor(ChatConfig config);

  // Compact JSON with sorted keys: {messages, model, temperature}.
  std::string request_body(const std::string& entity_text) const;

  // Errors: http-error, transport-error, invalid-response.
  std::string generate(const std::string& entity_text) override;

 private:
  ChatConfig config_;
};

}  // namespace layerlab::predictors
