#pragma once

#include <string>
#include <string_view>

#include "layerlab/doc/document.hpp"

namespace layerlab::doc {

// Canonical JSON form: layers in name order, entities in id order, object
// keys sorted, compact separators, UTF-8.
std::string serialize(const Document& doc);

// Errors: schema-version-mismatch, malformed-input (ParseError with the byte
// position reported by the JSON reader), entity/layer validation errors.
Document deserialize(std::string_view bytes);

Json to_json(const Document& doc);
Document from_json(const Json& json);

Json span_to_json(const Span& span);
Json box_to_json(const Box& box);
Box box_from_json(const Json& json);
Json entity_to_json(const Entity& entity);
Entity entity_from_json(const Json& json);

}  // namespace layerlab::doc
