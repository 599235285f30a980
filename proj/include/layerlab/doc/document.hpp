#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace layerlab::doc {

using Json = nlohmann::json;

inline constexpr double kBoxEpsilon = 1e-6;
inline constexpr std::string_view kSchemaVersion = "1.0";

// Half-open character interval [start, end) into Document::symbols.
struct Span {
  std::int64_t start = 0;
  std::int64_t end = 0;

  std::int64_t length() const { return end - start; }
  bool valid() const { return start >= 0 && start < end; }
  bool overlaps(const Span& other) const { return start < other.end && other.start < end; }
  bool contains(const Span& other) const { return start <= other.start && other.end <= end; }

  friend bool operator==(const Span&, const Span&) = default;
};

// Page-anchored rectangle. Coordinates are normalized to the page size with
// the origin at the top-left corner and y growing downward.
struct Box {
  int page = 0;
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return w * h; }
  bool contains_point(double px, double py) const {
    return px >= x && px <= x + w && py >= y && py <= y + h;
  }
  bool within_page_bounds() const;

  friend bool operator==(const Box&, const Box&) = default;
};

// Smallest box enclosing both; both must be on the same page.
Box enclose(const Box& a, const Box& b);

struct Entity {
  std::int64_t id = 0;
  std::vector<Span> spans;
  std::vector<Box> boxes;
  Json metadata = Json::object();

  friend bool operator==(const Entity&, const Entity&) = default;
};

struct Layer {
  std::string name;
  std::vector<Entity> entities;

  const Entity* find(std::int64_t id) const;

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct PageInfo {
  int index = 0;
  double width_pts = 0;
  double height_pts = 0;

  friend bool operator==(const PageInfo&, const PageInfo&) = default;
};

struct Document {
  std::string doc_id;
  std::u32string symbols;  // spans index code points
  std::vector<PageInfo> pages;
  std::map<std::string, Layer> layers;  // sorted by name: canonical order
  Json metadata = Json::object();

  bool has_layer(std::string_view name) const { return layers.find(std::string(name)) != layers.end(); }
  // Throws Error("missing-layer") when absent.
  const Layer& layer(std::string_view name) const;

  friend bool operator==(const Document&, const Document&) = default;
};

// Lowercases and replaces every character outside [a-z0-9_] by '_'.
std::string normalize_layer_name(std::string_view raw);
bool is_valid_layer_name(std::string_view name);

// Checks every Entity invariant against the document's symbols and pages.
// Throws Error("entity-out-of-bounds") or Error("invalid-entity").
void validate_entity(const Document& doc, const Entity& entity);

// Returns a copy of `doc` with the new layer added. Existing layers are never
// touched. Errors: invalid-layer-name, duplicate-layer-name,
// entity-out-of-bounds, invalid-entity, duplicate-entity-id.
Document add_layer(Document doc, const std::string& name, std::vector<Entity> entities);

// Text covered by the entity; multiple spans are joined by one space.
std::string text_of(const Document& doc, const Entity& entity);

// Maps a span local to the parent's single span into document offsets.
// Errors: multi-span-parent, local-span-out-of-range.
Span map_local_span(const Entity& parent, const Span& local);

// Per-line enclosing boxes of the words overlapping `span`, ordered by
// (page, y, x). Requires the words and lines layers (missing-layer).
std::vector<Box> span_to_boxes(const Document& doc, const Span& span);

// Entity of `layer_name` having a box on `page` containing (x, y); the smallest
// such box wins, then the lowest id.
std::optional<Entity> entity_at_position(const Document& doc, std::string_view layer_name, int page,
                                         double x, double y);

}  // namespace layerlab::doc
