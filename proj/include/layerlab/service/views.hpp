#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "layerlab/doc/document.hpp"

// Aggregated payloads behind the overview and per-entity annotation views.
namespace layerlab::service {

// Result-layer families by name prefix: "tagged", "generated", "image", or
// empty for core layers.
std::string result_kind(const std::string& layer_name);

// Tagging rows, union-of-keys generation tables and image outputs with their
// linked captions. `section` filters tagging and generation rows.
nlohmann::json summary_payload(const doc::Document& doc, const std::optional<std::string>& section);

// Caption entity nearest to the region (above or below, same page, at most
// 0.1 of the page height away).
std::optional<doc::Entity> linked_caption(const doc::Document& doc, const doc::Box& region);

// The entity, its sentences and every result entity inside it grouped by
// result layer. Errors: missing-layer, unknown-entity.
nlohmann::json annotations_payload(const doc::Document& doc, const std::string& layer, std::int64_t id);

}  // namespace layerlab::service
