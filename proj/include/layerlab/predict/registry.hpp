#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "layerlab/predict/interfaces.hpp"
#include "layerlab/predict/types.hpp"

namespace layerlab::predict {

inline constexpr std::string_view kRedacted = "[redacted]";

// {"name": str, "config": {...}, "target_layer"?: str}
struct PredictorRequest {
  std::string name;
  Json config = Json::object();
  std::optional<std::string> target_layer;

  // Errors: ConfigError on shape problems.
  static PredictorRequest from_json(const Json& json);
  Json to_json() const;
};

class Registry {
 public:
  // Receives the config with defaults filled in.
  using Factory = std::function<Predictor(const Json& config)>;

  // Errors: duplicate-predictor, invalid-descriptor.
  void add(PredictorDescriptor descriptor, Factory factory);

  // Registration order.
  const std::vector<PredictorDescriptor>& list() const { return descriptors_; }
  // Errors: unknown-predictor.
  const PredictorDescriptor& descriptor(const std::string& name) const;

  // Checks `config` against the schema and fills defaults. Errors:
  // unknown-predictor, ConfigError naming each missing/invalid field.
  Json validate(const std::string& name, const Json& config) const;

  // validate() then the factory; factories may throw ConfigError too.
  Predictor instantiate(const std::string& name, const Json& config) const;

  // Copy of `config` with every secret field's value replaced by kRedacted.
  Json redact(const std::string& name, const Json& config) const;

 private:
  std::vector<PredictorDescriptor> descriptors_;
  std::map<std::string, Factory> factories_;
};

}  // namespace layerlab::predict
