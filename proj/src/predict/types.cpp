#include "layerlab/predict/types.hpp"

#include <algorithm>
#include <cmath>

#include "layerlab/doc/serialize.hpp"
#include "layerlab/error.hpp"

namespace layerlab::predict {

GenerationMessage GenerationMessage::make(const std::string& system, const std::string& user_template,
                                          const std::string& entity_text) {
  const auto at = user_template.find(kEntityTextPlaceholder);
  if (at == std::string::npos || user_template.find(kEntityTextPlaceholder, at + 1) != std::string::npos)
    throw Error("invalid-prompt-template", "user prompt template must contain {entity_text} exactly once");
  GenerationMessage m;
  m.system = system;
  m.user = user_template.substr(0, at) + entity_text + user_template.substr(at + kEntityTextPlaceholder.size());
  if (m.user.find_first_not_of(" \t\r\n") == std::string::npos)
    throw Error("empty-message", "user message is empty after substitution");
  return m;
}

void TableRecord::add_column(const std::string& name, std::vector<std::string> values) {
  if (find(name)) throw Error("duplicate-column", "column \"" + name + "\" already exists");
  if (!columns_.empty() && values.size() != row_count())
    throw Error("ragged-table", "column \"" + name + "\" has " + std::to_string(values.size()) + " cells, expected " +
                                    std::to_string(row_count()));
  columns_.emplace_back(name, std::move(values));
}

const std::vector<std::string>* TableRecord::find(const std::string& name) const {
  for (const auto& [n, v] : columns_)
    if (n == name) return &v;
  return nullptr;
}

Json TableRecord::to_json() const {
  Json names = Json::array(), data = Json::object();
  for (const auto& [n, v] : columns_) {
    names.push_back(n);
    data[n] = v;
  }
  return {{"columns", names}, {"data", data}};
}

namespace {

std::string cell_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

std::vector<std::string> cells_of(const Json& list, const std::string& column) {
  if (!list.is_array()) throw Error("invalid-table", "column \"" + column + "\" is not a list");
  std::vector<std::string> out;
  for (const auto& v : list) out.push_back(cell_text(v));
  return out;
}

}  // namespace

TableRecord TableRecord::from_json(const Json& json) {
  if (!json.is_object()) throw Error("invalid-table", "table must be an object");
  TableRecord t;
  try {
    if (json.size() == 2 && json.contains("columns") && json.contains("data") && json["columns"].is_array() &&
        json["data"].is_object()) {
      const Json& data = json["data"];
      if (data.size() != json["columns"].size()) throw Error("invalid-table", "columns and data disagree");
      for (const auto& name : json["columns"]) {
        if (!name.is_string() || !data.contains(name.get<std::string>()))
          throw Error("invalid-table", "column list names a missing column");
        t.add_column(name.get<std::string>(), cells_of(data[name.get<std::string>()], name.get<std::string>()));
      }
    } else {
      for (const auto& [name, list] : json.items()) t.add_column(name, cells_of(list, name));
    }
  } catch (const Error& e) {
    if (e.code() == "invalid-table") throw;
    throw Error("invalid-table", e.what());
  }
  return t;
}

void ImageOutput::validate() const {
  if (!raw_text && !table && !boxes)
    throw Error("empty-image-output", "image predictor returned no raw_text, table or boxes");
  if (boxes) {
    for (const auto& b : *boxes) {
      if (!(std::isfinite(b.box.x) && std::isfinite(b.box.y) && b.box.w >= 0 && b.box.h >= 0))
        throw Error("invalid-image-output", "box with invalid coordinates");
      if (!(b.score >= 0 && b.score <= 1)) throw Error("invalid-image-output", "box score outside [0,1]");
    }
  }
}

Json ImageOutput::to_json() const {
  Json out = Json::object();
  if (raw_text) out["raw_text"] = *raw_text;
  if (table) out["table"] = table->to_json();
  if (boxes) {
    Json list = Json::array();
    for (const auto& b : *boxes)
      list.push_back({{"box", doc::box_to_json(b.box)}, {"label", b.label}, {"score", b.score}});
    out["boxes"] = list;
  }
  return out;
}

ImageOutput ImageOutput::from_json(const Json& json) {
  ImageOutput out;
  if (json.contains("raw_text")) out.raw_text = json["raw_text"].get<std::string>();
  if (json.contains("table")) out.table = TableRecord::from_json(json["table"]);
  if (json.contains("boxes")) {
    out.boxes.emplace();
    for (const auto& b : json["boxes"])
      out.boxes->push_back({doc::box_from_json(b["box"]), b.value("label", ""), b.value("score", 1.0)});
  }
  return out;
}

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::token_classification: return "token_classification";
    case PredictorKind::text_generation: return "text_generation";
    case PredictorKind::image: return "image";
  }
  return "unknown";
}

std::string to_string(FieldType type) {
  switch (type) {
    case FieldType::string: return "string";
    case FieldType::number: return "number";
    case FieldType::integer: return "integer";
    case FieldType::boolean: return "boolean";
  }
  return "unknown";
}

Json PredictorDescriptor::to_json() const {
  Json schema = Json::array();
  for (const auto& f : config_schema)
    schema.push_back({{"name", f.name},
                      {"type", to_string(f.type)},
                      {"required", f.required},
                      {"secret", f.secret},
                      {"default", f.default_value},
                      {"description", f.description}});
  return {{"name", name},
          {"kind", to_string(kind)},
          {"config_schema", schema},
          {"description", description},
          {"concurrency_safe", concurrency_safe}};
}

Json EntityError::to_json() const {
  return {{"entity_id", entity_id}, {"layer", layer}, {"message", message}, {"predictor", predictor}};
}

}  // namespace layerlab::predict
