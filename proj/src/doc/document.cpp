#include "layerlab/doc/document.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <tuple>

#include "layerlab/doc/utf8.hpp"
#include "layerlab/error.hpp"

namespace layerlab::doc {

bool Box::within_page_bounds() const {
  return x >= -kBoxEpsilon && y >= -kBoxEpsilon && x <= 1 + kBoxEpsilon && y <= 1 + kBoxEpsilon &&
         w > 0 && h > 0 && x + w <= 1 + kBoxEpsilon && y + h <= 1 + kBoxEpsilon;
}

Box enclose(const Box& a, const Box& b) {
  const double x0 = std::min(a.x, b.x);
  const double y0 = std::min(a.y, b.y);
  const double x1 = std::max(a.right(), b.right());
  const double y1 = std::max(a.bottom(), b.bottom());
  return Box{a.page, x0, y0, x1 - x0, y1 - y0};
}

const Entity* Layer::find(std::int64_t id) const {
  auto it = std::lower_bound(entities.begin(), entities.end(), id,
                             [](const Entity& e, std::int64_t v) { return e.id < v; });
  if (it != entities.end() && it->id == id) return &*it;
  // Layers built outside add_layer may not be id-sorted.
  for (const auto& e : entities)
    if (e.id == id) return &e;
  return nullptr;
}

const Layer& Document::layer(std::string_view name) const {
  auto it = layers.find(std::string(name));
  if (it == layers.end()) throw Error("missing-layer", "document has no layer '" + std::string(name) + "'");
  return it->second;
}

std::string normalize_layer_name(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (c >= 'A' && c <= 'Z') {
      out.push_back(static_cast<char>(c + 32));
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_') {
      out.push_back(c);
    } else {
      out.push_back('_');
    }
  }
  return out;
}

bool is_valid_layer_name(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

void validate_entity(const Document& doc, const Entity& entity) {
  const auto id = std::to_string(entity.id);
  if (entity.spans.empty() && entity.boxes.empty())
    throw Error("invalid-entity", "entity " + id + " has neither spans nor boxes");
  const auto n = static_cast<std::int64_t>(doc.symbols.size());
  for (std::size_t i = 0; i < entity.spans.size(); ++i) {
    const auto& s = entity.spans[i];
    if (!s.valid()) throw Error("invalid-entity", "entity " + id + " has an empty or negative span");
    if (s.end > n)
      throw Error("entity-out-of-bounds", "entity " + id + " span [" + std::to_string(s.start) + "," +
                                              std::to_string(s.end) + ") exceeds symbols length " +
                                              std::to_string(n));
    if (i > 0 && entity.spans[i - 1].end > s.start)
      throw Error("invalid-entity", "entity " + id + " spans are unsorted or overlapping");
  }
  for (const auto& b : entity.boxes) {
    if (b.page < 0 || b.page >= static_cast<int>(doc.pages.size()))
      throw Error("entity-out-of-bounds",
                  "entity " + id + " box on page " + std::to_string(b.page) + " of " +
                      std::to_string(doc.pages.size()));
    if (!b.within_page_bounds())
      throw Error("entity-out-of-bounds", "entity " + id + " box lies outside the unit page");
  }
}

Document add_layer(Document doc, const std::string& name, std::vector<Entity> entities) {
  if (!is_valid_layer_name(name)) throw Error("invalid-layer-name", "invalid layer name '" + name + "'");
  if (doc.has_layer(name)) throw Error("duplicate-layer-name", "layer '" + name + "' already exists");
  std::set<std::int64_t> ids;
  for (const auto& e : entities) {
    validate_entity(doc, e);
    if (!ids.insert(e.id).second)
      throw Error("duplicate-entity-id", "entity id " + std::to_string(e.id) + " repeated in '" + name + "'");
  }
  std::stable_sort(entities.begin(), entities.end(),
                   [](const Entity& a, const Entity& b) { return a.id < b.id; });
  doc.layers.emplace(name, Layer{name, std::move(entities)});
  return doc;
}

std::string text_of(const Document& doc, const Entity& entity) {
  std::u32string out;
  for (std::size_t i = 0; i < entity.spans.size(); ++i) {
    if (i > 0) out.push_back(U' ');
    const auto& s = entity.spans[i];
    out.append(doc.symbols, static_cast<std::size_t>(s.start), static_cast<std::size_t>(s.length()));
  }
  return utf8::encode(out);
}

Span map_local_span(const Entity& parent, const Span& local) {
  if (parent.spans.size() != 1)
    throw Error("multi-span-parent", "parent entity must have exactly one span, has " +
                                         std::to_string(parent.spans.size()));
  const Span& p = parent.spans.front();
  if (local.start < 0 || local.start >= local.end || local.end > p.length())
    throw Error("local-span-out-of-range", "local span [" + std::to_string(local.start) + "," +
                                               std::to_string(local.end) + ") outside parent length " +
                                               std::to_string(p.length()));
  return Span{p.start + local.start, p.start + local.end};
}

namespace {

// Index of the entity whose first span contains `s`, for a layer whose
// entities are ordered by span start (lines, words).
const Entity* containing(const std::vector<const Entity*>& by_start, const Span& s) {
  auto it = std::upper_bound(by_start.begin(), by_start.end(), s.start,
                             [](std::int64_t v, const Entity* e) { return v < e->spans.front().start; });
  if (it == by_start.begin()) return nullptr;
  const Entity* e = *std::prev(it);
  for (const auto& span : e->spans)
    if (span.contains(s)) return e;
  return nullptr;
}

}  // namespace

std::vector<Box> span_to_boxes(const Document& doc, const Span& span) {
  const Layer& words = doc.layer("words");
  const Layer& lines = doc.layer("lines");

  std::vector<const Entity*> lines_by_start;
  for (const auto& line : lines.entities)
    if (!line.spans.empty()) lines_by_start.push_back(&line);
  std::sort(lines_by_start.begin(), lines_by_start.end(),
            [](const Entity* a, const Entity* b) { return a->spans.front().start < b->spans.front().start; });

  std::map<std::int64_t, Box> per_line;
  for (const auto& word : words.entities) {
    if (word.spans.empty() || word.boxes.empty()) continue;
    bool hit = std::any_of(word.spans.begin(), word.spans.end(), [&](const Span& s) { return s.overlaps(span); });
    if (!hit) continue;
    const Entity* line = containing(lines_by_start, word.spans.front());
    // Words without a line get their own group keyed below every line id.
    const std::int64_t key = line ? line->id : -1 - word.id;
    for (const auto& b : word.boxes) {
      auto it = per_line.find(key);
      if (it == per_line.end()) {
        per_line.emplace(key, b);
      } else if (it->second.page == b.page) {
        it->second = enclose(it->second, b);
      }
    }
  }

  std::vector<Box> out;
  out.reserve(per_line.size());
  for (const auto& [_, b] : per_line) out.push_back(b);
  std::sort(out.begin(), out.end(), [](const Box& a, const Box& b) {
    return std::tie(a.page, a.y, a.x) < std::tie(b.page, b.y, b.x);
  });
  return out;
}

std::optional<Entity> entity_at_position(const Document& doc, std::string_view layer_name, int page,
                                         double x, double y) {
  const Layer& layer = doc.layer(layer_name);
  const Entity* best = nullptr;
  double best_area = std::numeric_limits<double>::infinity();
  for (const auto& e : layer.entities) {
    for (const auto& b : e.boxes) {
      if (b.page != page || !b.contains_point(x, y)) continue;
      const double area = b.area();
      if (area < best_area || (area == best_area && best && e.id < best->id)) {
        best = &e;
        best_area = area;
      }
    }
  }
  if (!best) return std::nullopt;
  return *best;
}

}  // namespace layerlab::doc
