#include "layerlab/service/processing.hpp"

#include "layerlab/error.hpp"

namespace layerlab::service {

using Json = nlohmann::json;

doc::Document parse_stage(std::string_view pdf_bytes, const pipeline::PipelineConfig& config,
                          const std::string& source_filename, const std::vector<pipeline::TableHint>& hints) {
  pipeline::PipelineOptions options;
  options.source_filename = source_filename;
  options.table_hints = hints;
  return pipeline::run_core_pipeline(pdf_bytes, config, options);
}

std::vector<predict::PredictorRequest> parse_predictor_requests(const Json& list) {
  if (!list.is_array()) throw ConfigError(FieldErrors{{"predictors", "expected a list"}});
  std::vector<predict::PredictorRequest> out;
  FieldErrors errors;
  for (std::size_t i = 0; i < list.size(); ++i) {
    try {
      out.push_back(predict::PredictorRequest::from_json(list[i]));
    } catch (const ConfigError& e) {
      for (const auto& [field, problem] : e.fields()) errors["predictors[" + std::to_string(i) + "]." + field] = problem;
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
  return out;
}

std::vector<PreparedPredictor> prepare_predictors(const predict::Registry& registry,
                                                  const std::vector<predict::PredictorRequest>& requests) {
  std::vector<PreparedPredictor> out;
  FieldErrors errors;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const std::string prefix = "predictors[" + std::to_string(i) + "].";
    const auto& r = requests[i];
    try {
      const auto& descriptor = registry.descriptor(r.name);
      PreparedPredictor p{r, registry.instantiate(r.name, r.config), descriptor.concurrency_safe};
      p.concurrent = p.concurrent || r.config.value("concurrent", false);
      out.push_back(std::move(p));
    } catch (const ConfigError& e) {
      for (const auto& [field, problem] : e.fields()) errors[prefix + field] = problem;
    } catch (const Error& e) {
      errors[prefix + (e.code() == "unknown-predictor" ? "name" : "config")] = e.what();
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
  return out;
}

predict::RunResult predictor_stage(doc::Document doc, const PreparedPredictor& prepared,
                                   const pdf::PageRenderer& renderer, const pipeline::PipelineConfig& config) {
  predict::RunOptions options;
  options.target_layer = prepared.request.target_layer.value_or("");
  options.concurrent = prepared.concurrent;
  options.dpi = config.render_dpi;
  return predict::run_predictor(std::move(doc), prepared.predictor, prepared.request.name, renderer, options);
}

std::string errors_jsonl(const std::vector<predict::EntityError>& errors) {
  std::string out;
  for (const auto& e : errors) out += e.to_json().dump() + "\n";
  return out;
}

}  // namespace layerlab::service
