#include "layerlab/doc/serialize.hpp"

#include <algorithm>

#include "layerlab/doc/utf8.hpp"
#include "layerlab/error.hpp"

namespace layerlab::doc {

namespace {

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  throw Error("malformed-input", "malformed document at " + where + ": " + what);
}

const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) malformed(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) malformed(where, std::string("missing field '") + key + "'");
  return *it;
}

std::int64_t as_int(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) malformed(where, "expected an integer");
  return v.get<std::int64_t>();
}

double as_real(const Json& v, const std::string& where) {
  if (!v.is_number()) malformed(where, "expected a number");
  return v.get<double>();
}

const std::string& as_string(const Json& v, const std::string& where) {
  if (!v.is_string()) malformed(where, "expected a string");
  return v.get_ref<const std::string&>();
}

}  // namespace

Json span_to_json(const Span& span) { return Json::array({span.start, span.end}); }

Json box_to_json(const Box& box) { return Json::array({box.page, box.x, box.y, box.w, box.h}); }

Box box_from_json(const Json& json) {
  if (!json.is_array() || json.size() != 5) malformed("box", "expected [page,x,y,w,h]");
  return Box{static_cast<int>(as_int(json[0], "box/page")), as_real(json[1], "box/x"), as_real(json[2], "box/y"),
             as_real(json[3], "box/w"), as_real(json[4], "box/h")};
}

Json entity_to_json(const Entity& entity) {
  Json spans = Json::array();
  for (const auto& s : entity.spans) spans.push_back(span_to_json(s));
  Json boxes = Json::array();
  for (const auto& b : entity.boxes) boxes.push_back(box_to_json(b));
  return Json{{"id", entity.id}, {"spans", std::move(spans)}, {"boxes", std::move(boxes)},
              {"metadata", entity.metadata.is_null() ? Json::object() : entity.metadata}};
}

Entity entity_from_json(const Json& json) {
  Entity e;
  e.id = as_int(field(json, "id", "entity"), "entity/id");
  const auto where = "entity " + std::to_string(e.id);
  const Json& spans = field(json, "spans", where);
  if (!spans.is_array()) malformed(where + "/spans", "expected an array");
  for (const auto& s : spans) {
    if (!s.is_array() || s.size() != 2) malformed(where + "/spans", "expected [start,end]");
    e.spans.push_back(Span{as_int(s[0], where + "/spans"), as_int(s[1], where + "/spans")});
  }
  const Json& boxes = field(json, "boxes", where);
  if (!boxes.is_array()) malformed(where + "/boxes", "expected an array");
  for (const auto& b : boxes) e.boxes.push_back(box_from_json(b));
  auto md = json.find("metadata");
  if (md != json.end()) {
    if (!md->is_object()) malformed(where + "/metadata", "expected an object");
    e.metadata = *md;
  }
  return e;
}

Json to_json(const Document& doc) {
  Json pages = Json::array();
  for (const auto& p : doc.pages)
    pages.push_back(Json{{"index", p.index}, {"width_pts", p.width_pts}, {"height_pts", p.height_pts}});

  Json layers = Json::object();
  for (const auto& [name, layer] : doc.layers) {
    std::vector<const Entity*> ordered;
    ordered.reserve(layer.entities.size());
    for (const auto& e : layer.entities) ordered.push_back(&e);
    std::stable_sort(ordered.begin(), ordered.end(), [](const Entity* a, const Entity* b) { return a->id < b->id; });
    Json entities = Json::array();
    for (const Entity* e : ordered) entities.push_back(entity_to_json(*e));
    layers[name] = std::move(entities);
  }

  return Json{{"schema_version", std::string(kSchemaVersion)},
              {"doc_id", doc.doc_id},
              {"symbols", utf8::encode(doc.symbols)},
              {"pages", std::move(pages)},
              {"layers", std::move(layers)},
              {"metadata", doc.metadata.is_null() ? Json::object() : doc.metadata}};
}

Document from_json(const Json& json) {
  if (!json.is_object()) malformed("/", "expected a JSON object");
  const auto& version = as_string(field(json, "schema_version", "/"), "/schema_version");
  if (version != kSchemaVersion)
    throw Error("schema-version-mismatch",
                "document schema_version '" + version + "' is not the supported '" + std::string(kSchemaVersion) + "'");

  Document doc;
  doc.doc_id = as_string(field(json, "doc_id", "/"), "/doc_id");
  doc.symbols = utf8::decode(as_string(field(json, "symbols", "/"), "/symbols"));

  const Json& pages = field(json, "pages", "/");
  if (!pages.is_array()) malformed("/pages", "expected an array");
  for (std::size_t i = 0; i < pages.size(); ++i) {
    const auto where = "/pages/" + std::to_string(i);
    PageInfo p;
    p.index = static_cast<int>(as_int(field(pages[i], "index", where), where + "/index"));
    p.width_pts = as_real(field(pages[i], "width_pts", where), where + "/width_pts");
    p.height_pts = as_real(field(pages[i], "height_pts", where), where + "/height_pts");
    if (p.index != static_cast<int>(i)) malformed(where, "page indices must be contiguous from 0");
    if (!(p.width_pts > 0) || !(p.height_pts > 0)) malformed(where, "page size must be positive");
    doc.pages.push_back(p);
  }

  auto md = json.find("metadata");
  if (md != json.end()) {
    if (!md->is_object()) malformed("/metadata", "expected an object");
    doc.metadata = *md;
  }

  const Json& layers = field(json, "layers", "/");
  if (!layers.is_object()) malformed("/layers", "expected an object");
  for (const auto& [name, entities] : layers.items()) {
    if (!entities.is_array()) malformed("/layers/" + name, "expected an array");
    std::vector<Entity> parsed;
    parsed.reserve(entities.size());
    for (const auto& e : entities) parsed.push_back(entity_from_json(e));
    doc = add_layer(std::move(doc), name, std::move(parsed));
  }
  return doc;
}

std::string serialize(const Document& doc) {
  return to_json(doc).dump(-1, ' ', false, Json::error_handler_t::replace);
}

Document deserialize(std::string_view bytes) {
  Json json;
  try {
    json = Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    throw ParseError("malformed-input", std::string("invalid document JSON: ") + e.what(), e.byte);
  }
  return from_json(json);
}

}  // namespace layerlab::doc
