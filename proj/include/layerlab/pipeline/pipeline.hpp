#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "layerlab/doc/document.hpp"
#include "layerlab/pipeline/config.hpp"

namespace layerlab::pipeline {

inline constexpr std::array<std::string_view, 10> kCoreLayers = {
    "blocks", "captions", "headings", "lines", "pages", "paragraphs", "sections", "sentences", "tables", "words"};

// Externally supplied table region. `geometry` is either null or an object
// with optional "rows"/"columns" ([[x,y,w,h],...]) and "cells"
// ([{"row","col","box":[x,y,w,h]}]) expressed relative to `box`.
struct TableHint {
  doc::Box box;
  nlohmann::json geometry;
};

// Parses a region sidecar: {"tables": [entry, ...]} where an entry is
// [page,x,y,w,h] or {"box": [page,x,y,w,h], "geometry": {...}}.
// Errors: invalid-region-hints.
std::vector<TableHint> parse_region_hints(const nlohmann::json& sidecar);

struct PipelineOptions {
  std::string source_filename;
  std::vector<TableHint> table_hints;
};

// PDF bytes to a Document carrying every layer in kCoreLayers. Extraction
// errors (not-a-pdf, encrypted-pdf, malformed-pdf) propagate; heuristic
// stages degrade to warnings in metadata["warnings"].
doc::Document run_core_pipeline(std::string_view pdf_bytes, const PipelineConfig& config,
                                const PipelineOptions& options = {});

}  // namespace layerlab::pipeline
