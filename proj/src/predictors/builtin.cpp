#include "layerlab/predictors/builtin.hpp"

#include <fstream>
#include <sstream>

#include "layerlab/error.hpp"
#include "layerlab/predictors/chat.hpp"
#include "layerlab/predictors/gazetteer.hpp"
#include "layerlab/predictors/remote_image.hpp"
#include "layerlab/predictors/table.hpp"

namespace layerlab::predictors {

using predict::FieldSpec;
using predict::FieldType;
using predict::Json;
using predict::PredictorDescriptor;
using predict::PredictorKind;

namespace {

std::optional<std::string> optional_string(const Json& config, const std::string& key) {
  if (config.contains(key) && config[key].is_string() && !config[key].get<std::string>().empty())
    return config[key].get<std::string>();
  return std::nullopt;
}

FieldSpec concurrent_field() {
  return {"concurrent", FieldType::boolean, false, false, false, "allow parallel calls to the service"};
}

std::shared_ptr<GazetteerTagger> make_gazetteer(const Json& config) {
  const auto inline_tsv = optional_string(config, "lexicon");
  const auto path = optional_string(config, "lexicon_path");
  if (!inline_tsv && !path)
    throw ConfigError(FieldErrors{{"lexicon", "required unless lexicon_path is given"},
                                  {"lexicon_path", "required unless lexicon is given"}});
  std::string tsv;
  if (inline_tsv) {
    tsv = *inline_tsv;
  } else {
    std::ifstream in(*path, std::ios::binary);
    if (!in) throw ConfigError(FieldErrors{{"lexicon_path", "cannot read " + *path}});
    std::ostringstream ss;
    ss << in.rdbuf();
    tsv = ss.str();
  }
  try {
    return std::make_shared<GazetteerTagger>(parse_lexicon(tsv));
  } catch (const Error& e) {
    throw ConfigError(FieldErrors{{inline_tsv ? "lexicon" : "lexicon_path", e.what()}});
  }
}

}  // namespace

void register_builtin_predictors(predict::Registry& registry) {
  registry.add(
      {"gazetteer",
       PredictorKind::token_classification,
       {{"lexicon", FieldType::string, false, false, nullptr, "inline TSV lexicon: surface<TAB>label[<TAB>flags]"},
        {"lexicon_path", FieldType::string, false, false, nullptr, "path of a TSV lexicon file"}},
       "Dictionary tagger: longest whole-word match of literal or regex lexicon entries.",
       true},
      [](const Json& config) -> predict::Predictor { return make_gazetteer(config); });

  registry.add(
      {"chat",
       PredictorKind::text_generation,
       {{"endpoint_url", FieldType::string, true, false, nullptr, "base URL; /chat/completions is appended"},
        {"model", FieldType::string, true, false, nullptr, "model name sent with each request"},
        {"api_key_env", FieldType::string, false, false, nullptr, "environment variable holding the API key"},
        {"api_key", FieldType::string, false, true, nullptr, "API key, used when api_key_env is not given"},
        {"system_prompt", FieldType::string, false, false, "", "system message"},
        {"user_prompt_template", FieldType::string, false, false, "{entity_text}",
         "user message; {entity_text} is replaced by the entity's text"},
        {"temperature", FieldType::number, false, false, 0.0, "sampling temperature"},
        {"timeout_s", FieldType::number, false, false, 60.0, "request timeout in seconds"},
        concurrent_field()},
       "OpenAI-compatible chat completion client.",
       false},
      [](const Json& config) -> predict::Predictor {
        return std::make_shared<ChatCompletionPredictor>(ChatConfig::from_json(config));
      });

  registry.add(
      {"geometric_table",
       PredictorKind::image,
       {{"regions_file", FieldType::string, false, false, nullptr, "region sidecar with table geometry"},
        {"detection_url", FieldType::string, false, false, nullptr,
         "table structure service speaking the remote image schema"},
        {"timeout_s", FieldType::number, false, false, 60.0, "detection request timeout in seconds"}},
       "Cross-references table row/column/cell boxes with the extracted words.",
       true},
      [](const Json& config) -> predict::Predictor {
        GeometricTableConfig c;
        c.regions_file = optional_string(config, "regions_file");
        c.detection_url = optional_string(config, "detection_url");
        c.timeout_s = config.value("timeout_s", 60.0);
        return std::make_shared<GeometricTableParser>(std::move(c));
      });

  registry.add(
      {"remote_image",
       PredictorKind::image,
       {{"url", FieldType::string, true, false, nullptr, "service receiving the crop as multipart field \"image\""},
        {"timeout_s", FieldType::number, false, false, 60.0, "request timeout in seconds"},
        concurrent_field()},
       "Sends entity crops to an image service returning raw_text, table and/or boxes.",
       false},
      [](const Json& config) -> predict::Predictor {
        return std::make_shared<RemoteImagePredictor>(config.at("url").get<std::string>(),
                                                      config.value("timeout_s", 60.0));
      });
}

predict::Registry default_registry() {
  predict::Registry r;
  register_builtin_predictors(r);
  return r;
}

}  // namespace layerlab::predictors
