#include "layerlab/pipeline/config.hpp"

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "layerlab/error.hpp"
#include "layerlab/util/hash.hpp"

namespace layerlab::pipeline {

using Json = nlohmann::json;

std::set<std::string> default_abbreviations() {
  return {"Fig", "Eq", "et al", "e.g", "i.e", "vs", "Dr", "No", "Ref", "Tab", "approx", "ca", "wt", "at",
          "Figs", "Eqs", "cf", "Sec"};
}

void PipelineConfig::validate() const {
  std::map<std::string, std::string> bad;
  if (!(line_gap_factor > 0)) bad["line_gap_factor"] = "must be > 0";
  if (!(block_gap_factor > 0)) bad["block_gap_factor"] = "must be > 0";
  if (min_table_aligned_columns < 1) bad["min_table_aligned_columns"] = "must be >= 1";
  if (render_dpi < 72 || render_dpi > 600) bad["render_dpi"] = "must be in [72, 600]";
  if (structure_service_url && structure_service_url->empty())
    bad["structure_service_url"] = "must be non-empty when set";
  for (const auto& a : abbreviation_list)
    if (a.empty()) bad["abbreviation_list"] = "entries must be non-empty";
  if (!bad.empty()) throw ConfigError(std::move(bad));
}

Json PipelineConfig::to_json() const {
  Json j;
  j["line_gap_factor"] = line_gap_factor;
  j["block_gap_factor"] = block_gap_factor;
  j["min_table_aligned_columns"] = min_table_aligned_columns;
  j["abbreviation_list"] = Json(std::vector<std::string>(abbreviation_list.begin(), abbreviation_list.end()));
  j["structure_service_url"] = structure_service_url ? Json(*structure_service_url) : Json(nullptr);
  j["render_dpi"] = render_dpi;
  return j;
}

PipelineConfig PipelineConfig::from_json(const Json& json) {
  PipelineConfig c;
  if (json.is_null()) return c;
  if (!json.is_object()) throw ConfigError(FieldErrors{{"config", "must be a mapping"}});
  std::map<std::string, std::string> bad;
  for (const auto& [key, value] : json.items()) {
    try {
      if (key == "line_gap_factor") {
        if (!value.is_number()) throw std::invalid_argument("expected a number");
        c.line_gap_factor = value.get<double>();
      } else if (key == "block_gap_factor") {
        if (!value.is_number()) throw std::invalid_argument("expected a number");
        c.block_gap_factor = value.get<double>();
      } else if (key == "min_table_aligned_columns") {
        if (!value.is_number_integer()) throw std::invalid_argument("expected an integer");
        c.min_table_aligned_columns = value.get<int>();
      } else if (key == "render_dpi") {
        if (!value.is_number_integer()) throw std::invalid_argument("expected an integer");
        c.render_dpi = value.get<int>();
      } else if (key == "structure_service_url") {
        if (value.is_null()) c.structure_service_url.reset();
        else if (value.is_string()) c.structure_service_url = value.get<std::string>();
        else throw std::invalid_argument("expected a string or null");
      } else if (key == "abbreviation_list") {
        if (!value.is_array()) throw std::invalid_argument("expected a list of strings");
        c.abbreviation_list.clear();
        for (const auto& a : value) {
          if (!a.is_string()) throw std::invalid_argument("expected a list of strings");
          c.abbreviation_list.insert(a.get<std::string>());
        }
      } else {
        bad[key] = "unknown field";
      }
    } catch (const std::exception& e) {
      bad[key] = e.what();
    }
  }
  if (!bad.empty()) throw ConfigError(std::move(bad));
  c.validate();
  return c;
}

namespace {

Json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      Json arr = Json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      Json obj = Json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  const std::string& s = node.Scalar();
  // Quoted scalars carry the non-specific "!" tag and stay strings.
  if (node.Tag() == "!") return s;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  if (s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  try {
    std::size_t used = 0;
    const long long i = std::stoll(s, &used);
    if (used == s.size()) return i;
  } catch (const std::exception&) {
  }
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used == s.size()) return d;
  } catch (const std::exception&) {
  }
  return s;
}

}  // namespace

Json parse_yaml_or_json(const std::string& text) {
  try {
    return yaml_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(FieldErrors{{"config", "not valid YAML/JSON at line " + std::to_string(e.mark.line + 1) + ": " + e.msg}});
  }
}

Json load_yaml_or_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(FieldErrors{{"config", "cannot read " + path.string()}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_yaml_or_json(ss.str());
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  return from_json(load_yaml_or_json(path));
}

std::string PipelineConfig::hash() const { return sha256_hex(to_json().dump()); }

}  // namespace layerlab::pipeline
