#include "layerlab/predict/registry.hpp"

#include <cmath>

#include "layerlab/doc/document.hpp"
#include "layerlab/error.hpp"

namespace layerlab::predict {

PredictorRequest PredictorRequest::from_json(const Json& json) {
  if (!json.is_object()) throw ConfigError(FieldErrors{{"predictor", "expected an object"}});
  FieldErrors errors;
  PredictorRequest r;
  for (const auto& [key, value] : json.items()) {
    if (key == "name") {
      if (value.is_string() && !value.get<std::string>().empty()) r.name = value.get<std::string>();
      else errors["name"] = "expected a non-empty string";
    } else if (key == "config") {
      if (value.is_object()) r.config = value;
      else errors["config"] = "expected an object";
    } else if (key == "target_layer") {
      if (value.is_string()) r.target_layer = value.get<std::string>();
      else errors["target_layer"] = "expected a string";
    } else {
      errors[key] = "unknown field";
    }
  }
  if (!json.contains("name")) errors["name"] = "required";
  if (!errors.empty()) throw ConfigError(errors);
  return r;
}

Json PredictorRequest::to_json() const {
  Json out = {{"name", name}, {"config", config}};
  if (target_layer) out["target_layer"] = *target_layer;
  return out;
}

void Registry::add(PredictorDescriptor descriptor, Factory factory) {
  if (descriptor.name.empty() || !doc::is_valid_layer_name(descriptor.name))
    throw Error("invalid-descriptor", "predictor names must match [a-z0-9_]+: \"" + descriptor.name + "\"");
  if (!factory) throw Error("invalid-descriptor", "predictor \"" + descriptor.name + "\" has no factory");
  if (factories_.count(descriptor.name))
    throw Error("duplicate-predictor", "predictor \"" + descriptor.name + "\" is already registered");
  factories_.emplace(descriptor.name, std::move(factory));
  descriptors_.push_back(std::move(descriptor));
}

const PredictorDescriptor& Registry::descriptor(const std::string& name) const {
  for (const auto& d : descriptors_)
    if (d.name == name) return d;
  throw Error("unknown-predictor", "no predictor named \"" + name + "\"");
}

namespace {

bool matches(FieldType type, const Json& value) {
  switch (type) {
    case FieldType::string: return value.is_string();
    case FieldType::number: return value.is_number() && std::isfinite(value.get<double>());
    case FieldType::integer: return value.is_number_integer();
    case FieldType::boolean: return value.is_boolean();
  }
  return false;
}

}  // namespace

Json Registry::validate(const std::string& name, const Json& config) const {
  const PredictorDescriptor& d = descriptor(name);
  if (!config.is_object()) throw ConfigError(FieldErrors{{"config", "expected an object"}});
  FieldErrors errors;
  Json out = Json::object();
  for (const auto& [key, value] : config.items()) {
    bool known = false;
    for (const auto& f : d.config_schema) known = known || f.name == key;
    if (!known) errors[key] = "unknown field";
  }
  for (const auto& f : d.config_schema) {
    if (!config.contains(f.name) || config[f.name].is_null()) {
      if (f.required) errors[f.name] = "required";
      else if (!f.default_value.is_null()) out[f.name] = f.default_value;
      continue;
    }
    if (!matches(f.type, config[f.name])) {
      errors[f.name] = "expected " + to_string(f.type);
      continue;
    }
    out[f.name] = config[f.name];
  }
  if (!errors.empty()) throw ConfigError(errors);
  return out;
}

Predictor Registry::instantiate(const std::string& name, const Json& config) const {
  const Json checked = validate(name, config);
  return factories_.at(name)(checked);
}

Json Registry::redact(const std::string& name, const Json& config) const {
  Json out = config;
  if (!out.is_object()) return out;
  for (const auto& f : descriptor(name).config_schema)
    if (f.secret && out.contains(f.name)) out[f.name] = kRedacted;
  return out;
}

}  // namespace layerlab::predict
