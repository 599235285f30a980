#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "layerlab/doc/document.hpp"

namespace layerlab::predict {

using Json = nlohmann::json;

// Labeled half-open interval in code points of the tagged text.
struct TaggedSpan {
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::string label;
  double score = 1.0;

  friend bool operator==(const TaggedSpan&, const TaggedSpan&) = default;
};

inline constexpr std::string_view kEntityTextPlaceholder = "{entity_text}";

struct GenerationMessage {
  std::string system;
  std::string user;

  // Substitutes `entity_text` for the single placeholder in `user_template`.
  // Errors: invalid-prompt-template, empty-message.
  static GenerationMessage make(const std::string& system, const std::string& user_template,
                                const std::string& entity_text);
};

// Column name to cell values, columns kept in insertion order.
class TableRecord {
 public:
  // Errors: duplicate-column, ragged-table (lengths differ from earlier columns).
  void add_column(const std::string& name, std::vector<std::string> values);

  const std::vector<std::pair<std::string, std::vector<std::string>>>& columns() const { return columns_; }
  std::size_t row_count() const { return columns_.empty() ? 0 : columns_.front().second.size(); }
  const std::vector<std::string>* find(const std::string& name) const;

  // {"columns": [names...], "data": {name: [cells...]}}
  Json to_json() const;
  // Accepts the to_json form or a bare {name: [cells...]} object (columns in
  // key order); non-string cells are stringified. Errors: invalid-table.
  static TableRecord from_json(const Json& json);

  friend bool operator==(const TableRecord&, const TableRecord&) = default;

 private:
  std::vector<std::pair<std::string, std::vector<std::string>>> columns_;
};

struct BoxPrediction {
  doc::Box box;
  std::string label;
  double score = 1.0;

  friend bool operator==(const BoxPrediction&, const BoxPrediction&) = default;
};

struct ImageOutput {
  std::optional<std::string> raw_text;
  std::optional<TableRecord> table;
  std::optional<std::vector<BoxPrediction>> boxes;

  // Errors: empty-image-output, invalid-image-output.
  void validate() const;
  // Only present fields are emitted; boxes as {"box": [page,x,y,w,h], "label", "score"}.
  Json to_json() const;
  static ImageOutput from_json(const Json& json);

  friend bool operator==(const ImageOutput&, const ImageOutput&) = default;
};

// Outcome of turning a model response into a record. Failure is a value:
// `record` is empty and `error` says why, `raw` always keeps the response.
struct ParsedRecord {
  std::optional<Json> record;
  std::optional<std::string> error;
  std::string raw;

  bool ok() const { return record.has_value(); }
};

enum class PredictorKind { token_classification, text_generation, image };
std::string to_string(PredictorKind kind);

enum class FieldType { string, number, integer, boolean };
std::string to_string(FieldType type);

struct FieldSpec {
  std::string name;
  FieldType type = FieldType::string;
  bool required = false;
  bool secret = false;
  Json default_value = nullptr;  // null: no default
  std::string description;
};

struct PredictorDescriptor {
  std::string name;
  PredictorKind kind = PredictorKind::token_classification;
  std::vector<FieldSpec> config_schema;
  std::string description;
  bool concurrency_safe = false;

  Json to_json() const;
};

struct EntityError {
  std::int64_t entity_id = 0;
  std::string layer;
  std::string message;
  std::string predictor;

  Json to_json() const;
  friend bool operator==(const EntityError&, const EntityError&) = default;
};

}  // namespace layerlab::predict
