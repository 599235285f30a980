#include "layerlab/service/views.hpp"

#include <set>

#include "layerlab/doc/serialize.hpp"
#include "layerlab/error.hpp"
#include "layerlab/predict/runners.hpp"

namespace layerlab::service {

using doc::Box;
using doc::Document;
using doc::Entity;
using Json = nlohmann::json;

std::string result_kind(const std::string& layer_name) {
  for (const char* prefix : {"tagged", "generated", "image"})
    if (layer_name.rfind(std::string(prefix) + "_", 0) == 0) return prefix;
  return {};
}

namespace {

Json ref(const std::string& layer, const Entity& e) { return {{"layer", layer}, {"id", e.id}}; }

bool in_section(const Entity& e, const std::optional<std::string>& section) {
  if (!section) return true;
  const Json s = e.metadata.value("section", Json(nullptr));
  return s.is_string() && s.get<std::string>() == *section;
}

std::string cell_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

Box region_of(const Entity& e) {
  if (e.metadata.contains("region")) return doc::box_from_json(e.metadata["region"]);
  return predict::entity_region(e);
}

}  // namespace

std::optional<Entity> linked_caption(const Document& doc, const Box& region) {
  if (!doc.has_layer("captions")) return std::nullopt;
  std::optional<Entity> best;
  double best_distance = 0.1;
  for (const auto& c : doc.layer("captions").entities) {
    for (const auto& b : c.boxes) {
      if (b.page != region.page) continue;
      double distance;
      if (b.bottom() <= region.y + 1e-9) distance = region.y - b.bottom();
      else if (b.y >= region.bottom() - 1e-9) distance = b.y - region.bottom();
      else continue;
      if (distance <= best_distance) {
        if (best && distance == best_distance) continue;
        best_distance = distance;
        best = c;
      }
    }
  }
  return best;
}

Json summary_payload(const Document& doc, const std::optional<std::string>& section) {
  Json sections = Json::array();
  if (doc.has_layer("sections"))
    for (const auto& s : doc.layer("sections").entities) sections.push_back(s.metadata.value("name", ""));

  Json tagging = Json::array(), generation = Json::array(), images = Json::array();
  for (const auto& [name, layer] : doc.layers) {
    const std::string kind = result_kind(name);
    if (kind == "tagged") {
      Json rows = Json::array();
      for (const auto& e : layer.entities) {
        if (!in_section(e, section)) continue;
        rows.push_back({{"text", doc::text_of(doc, e)},
                        {"label", e.metadata.value("label", "")},
                        {"score", e.metadata.value("score", 1.0)},
                        {"section", e.metadata.value("section", Json(nullptr))},
                        {"entity", ref(name, e)}});
      }
      tagging.push_back({{"layer", name}, {"rows", rows}});
    } else if (kind == "generated") {
      std::set<std::string> keys;
      Json rows = Json::array();
      for (const auto& e : layer.entities) {
        if (!in_section(e, section)) continue;
        const Json parsed = e.metadata.value("parsed", Json(nullptr));
        if (!parsed.is_object()) continue;
        for (const auto& [k, v] : parsed.items()) keys.insert(k);
        rows.push_back({{"entity", ref(name, e)}, {"section", e.metadata.value("section", Json(nullptr))}});
      }
      // Cells filled in a second pass once the key union is known.
      std::size_t r = 0;
      for (const auto& e : layer.entities) {
        if (!in_section(e, section)) continue;
        const Json parsed = e.metadata.value("parsed", Json(nullptr));
        if (!parsed.is_object()) continue;
        Json cells = Json::object();
        for (const auto& k : keys) cells[k] = parsed.contains(k) ? cell_text(parsed[k]) : "";
        rows[r++]["cells"] = cells;
      }
      Json columns = Json::array({"section"});
      for (const auto& k : keys) columns.push_back(k);
      generation.push_back({{"layer", name}, {"columns", columns}, {"rows", rows}});
    } else if (kind == "image") {
      Json entries = Json::array();
      for (const auto& e : layer.entities) {
        Json entry = {{"entity", ref(name, e)},
                      {"section", e.metadata.value("section", Json(nullptr))},
                      {"box_count", e.metadata.contains("boxes") ? e.metadata["boxes"].size() : 0},
                      {"caption", nullptr}};
        if (e.metadata.contains("table")) entry["table"] = e.metadata["table"];
        if (e.metadata.contains("raw_text")) entry["raw_text"] = e.metadata["raw_text"];
        if (!e.boxes.empty() || e.metadata.contains("region"))
          if (const auto caption = linked_caption(doc, region_of(e)))
            entry["caption"] = {{"text", doc::text_of(doc, *caption)}, {"entity", ref("captions", *caption)}};
        entries.push_back(std::move(entry));
      }
      images.push_back({{"layer", name}, {"entries", entries}});
    }
  }
  return {{"doc_id", doc.doc_id},
          {"section", section ? Json(*section) : Json(nullptr)},
          {"sections", sections},
          {"tagging", tagging},
          {"generation", generation},
          {"images", images}};
}

namespace {

bool spans_within(const Entity& inner, const Entity& outer) {
  for (const auto& s : inner.spans) {
    bool contained = false;
    for (const auto& o : outer.spans) contained = contained || o.contains(s);
    if (!contained) return false;
  }
  return true;
}

bool boxes_within(const Entity& inner, const Entity& outer) {
  for (const auto& b : inner.boxes) {
    bool contained = false;
    for (const auto& o : outer.boxes)
      contained = contained || (o.page == b.page && o.contains_point(b.x + b.w / 2, b.y + b.h / 2));
    if (!contained) return false;
  }
  return true;
}

Json entity_view(const Document& doc, const Entity& e) {
  Json j = doc::entity_to_json(e);
  j["text"] = doc::text_of(doc, e);
  return j;
}

}  // namespace

Json annotations_payload(const Document& doc, const std::string& layer_name, std::int64_t id) {
  const doc::Layer& layer = doc.layer(layer_name);
  const Entity* entity = layer.find(id);
  if (!entity) throw Error("unknown-entity", "layer \"" + layer_name + "\" has no entity " + std::to_string(id));

  Json sentences = Json::array();
  if (doc.has_layer("sentences") && !entity->spans.empty())
    for (const auto& s : doc.layer("sentences").entities)
      if (!s.spans.empty() && spans_within(s, *entity))
        sentences.push_back({{"id", s.id}, {"span", doc::span_to_json(s.spans.front())}, {"text", doc::text_of(doc, s)}});

  Json results = Json::object();
  for (const auto& [name, result_layer] : doc.layers) {
    const std::string kind = result_kind(name);
    if (kind.empty()) continue;
    Json hits = Json::array();
    for (const auto& r : result_layer.entities) {
      const bool inside = !r.spans.empty() ? (!entity->spans.empty() && spans_within(r, *entity))
                                           : (!r.boxes.empty() && !entity->boxes.empty() && boxes_within(r, *entity));
      if (inside) hits.push_back(entity_view(doc, r));
    }
    results[name] = {{"kind", kind}, {"entities", hits}};
  }
  Json view = entity_view(doc, *entity);
  view["layer"] = layer_name;
  return {{"entity", view}, {"sentences", sentences}, {"results", results}};
}

}  // namespace layerlab::service
