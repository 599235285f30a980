#pragma once

#include <optional>
#include <string_view>

#include "layerlab/predict/types.hpp"

namespace layerlab::predict {

// Parses the whole trimmed response; only a JSON object counts as a record.
ParsedRecord parse_whole_response(std::string_view response);

// Parses the first balanced {...} or [...] region that is valid JSON,
// skipping surrounding prose and code fences. Error "no-json-found".
ParsedRecord extract_first_json_value(std::string_view response);

// Byte range [first, second) of that region, if any.
std::optional<std::pair<std::size_t, std::size_t>> find_first_json_value(std::string_view text);

}  // namespace layerlab::predict
