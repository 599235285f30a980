#include "layerlab/predict/records.hpp"

namespace layerlab::predict {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

// Index one past the bracket closing the one at `open`, skipping string
// literals; npos when unbalanced.
std::size_t matching_close(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{' || c == '[') ++depth;
    else if (c == '}' || c == ']') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

}  // namespace

ParsedRecord parse_whole_response(std::string_view response) {
  ParsedRecord out;
  out.raw = std::string(response);
  const std::string_view body = trim(response);
  if (body.empty()) {
    out.error = "empty response";
    return out;
  }
  Json parsed = Json::parse(body, nullptr, false);
  if (parsed.is_discarded()) out.error = "response is not valid JSON";
  else if (!parsed.is_object()) out.error = "response is JSON but not an object";
  else out.record = std::move(parsed);
  return out;
}

std::optional<std::pair<std::size_t, std::size_t>> find_first_json_value(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{' && text[i] != '[') continue;
    const std::size_t end = matching_close(text, i);
    if (end == std::string_view::npos) continue;
    if (Json::accept(text.substr(i, end - i))) return std::make_pair(i, end);
  }
  return std::nullopt;
}

ParsedRecord extract_first_json_value(std::string_view response) {
  ParsedRecord out;
  out.raw = std::string(response);
  if (const auto range = find_first_json_value(response))
    out.record = Json::parse(response.substr(range->first, range->second - range->first));
  else
    out.error = "no-json-found";
  return out;
}

}  // namespace layerlab::predict
