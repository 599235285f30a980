#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "layerlab/doc/document.hpp"
#include "layerlab/pipeline/pipeline.hpp"
#include "layerlab/predict/interfaces.hpp"

namespace layerlab::predictors {

// Boxes below ignore Box::page and are relative to the table region.
struct CellBox {
  int row = 0;
  int col = 0;
  doc::Box box;

  friend bool operator==(const CellBox&, const CellBox&) = default;
};

struct TableGeometry {
  std::vector<doc::Box> rows;     // sorted by y
  std::vector<doc::Box> columns;  // sorted by x
  std::vector<CellBox> cells;     // takes precedence over rows x columns

  bool empty() const { return cells.empty() && (rows.empty() || columns.empty()); }

  // {"rows": [[x,y,w,h]...], "columns": [...], "cells": [{"row","col","box"}]}.
  // Errors: invalid-geometry.
  static TableGeometry from_json(const nlohmann::json& json);
  // Detector boxes labeled "row"/"table row", "column"/"table column" or "cell r,c".
  static TableGeometry from_boxes(const std::vector<predict::BoxPrediction>& boxes);

  // Same geometry re-expressed relative to another region of the page.
  TableGeometry rebased(const doc::Box& from, const doc::Box& to) const;

  // The given cells, or every row/column intersection, in row-major order.
  // Errors: degenerate-geometry (zero-area cell), invalid-geometry (repeated cell).
  std::vector<CellBox> cell_boxes() const;
};

struct CellWord {
  std::string text;
  doc::Box box;
};

struct CellAssignment {
  std::vector<std::vector<std::string>> grid;
  std::vector<CellBox> cells;
  std::vector<int> cell_of_word;   // index into `cells`, -1 when unassigned
  std::vector<std::size_t> unassigned;
};

// Each word goes to the cell covering the largest share of its area when that
// share is at least 0.5; ties go to the lower row, then the lower column.
// Cell text joins its words in input order with single spaces.
CellAssignment assign_words_to_cells(const TableGeometry& geometry, const std::vector<CellWord>& words);

// First row becomes the header; empty names become "col_<j>" (1-based) and
// repeats "<name>_<k>". Errors: empty-grid, ragged-grid.
predict::TableRecord grid_to_table_record(const std::vector<std::vector<std::string>>& grid);

// Header row then data rows, "\n" line ends, RFC-4180 quoting.
std::string table_to_csv(const predict::TableRecord& table);
// Errors: invalid-csv.
std::vector<std::vector<std::string>> parse_csv(std::string_view csv);

struct GeometricTableConfig {
  std::optional<std::string> regions_file;
  std::optional<std::string> detection_url;
  double timeout_s = 60;
};

// Table structure from geometry found in (first match wins) the entity's
// "geometry" metadata, the regions file, or a detection service, crossed
// with the document's words.
class GeometricTableParser : public predict::ImagePredictor {
 public:
  // Errors: ConfigError when the regions file cannot be read.
  explicit GeometricTableParser(GeometricTableConfig config);

  // Errors: no-geometry-available.
  predict::ImageOutput process_entity(const doc::Document& doc, const doc::Entity& entity,
                                      const pdf::PageRenderer& renderer, const predict::ImageContext& context) override;

 private:
  GeometricTableConfig config_;
  std::vector<pipeline::TableHint> hints_;
};

}  // namespace layerlab::predictors
