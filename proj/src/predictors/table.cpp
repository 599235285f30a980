#include "layerlab/predictors/table.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>

#include "layerlab/error.hpp"
#include "layerlab/pipeline/config.hpp"
#include "layerlab/predict/runners.hpp"
#include "layerlab/predictors/remote_image.hpp"

namespace layerlab::predictors {

using doc::Box;
using Json = nlohmann::json;

namespace {

[[noreturn]] void bad_geometry(const std::string& what) { throw Error("invalid-geometry", what); }

Box rect(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) bad_geometry(where + ": expected [x,y,w,h]");
  for (const auto& v : j)
    if (!v.is_number()) bad_geometry(where + ": expected numbers");
  return {0, j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

double intersection_area(const Box& a, const Box& b) {
  return overlap(a.x, a.right(), b.x, b.right()) * overlap(a.y, a.bottom(), b.y, b.bottom());
}

void sort_boxes(TableGeometry& g) {
  std::stable_sort(g.rows.begin(), g.rows.end(), [](const Box& a, const Box& b) { return a.y < b.y; });
  std::stable_sort(g.columns.begin(), g.columns.end(), [](const Box& a, const Box& b) { return a.x < b.x; });
}

double iou(const Box& a, const Box& b) {
  if (a.page != b.page) return 0;
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0;
}

}  // namespace

TableGeometry TableGeometry::from_json(const Json& json) {
  if (!json.is_object()) bad_geometry("geometry must be an object");
  TableGeometry g;
  for (const auto& [key, value] : json.items()) {
    if (key == "rows" || key == "columns") {
      if (!value.is_array()) bad_geometry(key + " must be a list");
      for (std::size_t i = 0; i < value.size(); ++i)
        (key == "rows" ? g.rows : g.columns).push_back(rect(value[i], key + "[" + std::to_string(i) + "]"));
    } else if (key == "cells") {
      if (!value.is_array()) bad_geometry("cells must be a list");
      for (std::size_t i = 0; i < value.size(); ++i) {
        const Json& c = value[i];
        const std::string where = "cells[" + std::to_string(i) + "]";
        if (!c.is_object() || !c.contains("row") || !c.contains("col") || !c.contains("box") ||
            !c["row"].is_number_integer() || !c["col"].is_number_integer() || c["row"].get<int>() < 0 ||
            c["col"].get<int>() < 0)
          bad_geometry(where + ": expected {\"row\", \"col\", \"box\"}");
        g.cells.push_back({c["row"].get<int>(), c["col"].get<int>(), rect(c["box"], where + ".box")});
      }
    } else {
      bad_geometry("unknown geometry field \"" + key + "\"");
    }
  }
  sort_boxes(g);
  return g;
}

TableGeometry TableGeometry::from_boxes(const std::vector<predict::BoxPrediction>& boxes) {
  static const std::regex cell_label(R"(cell\s+(\d+)\s*,\s*(\d+))", std::regex::icase);
  TableGeometry g;
  for (const auto& b : boxes) {
    std::string label = b.label;
    std::transform(label.begin(), label.end(), label.begin(), [](unsigned char c) { return std::tolower(c); });
    std::smatch m;
    if (label == "row" || label == "table row") g.rows.push_back(b.box);
    else if (label == "column" || label == "table column") g.columns.push_back(b.box);
    else if (std::regex_match(label, m, cell_label)) g.cells.push_back({std::stoi(m[1]), std::stoi(m[2]), b.box});
  }
  sort_boxes(g);
  return g;
}

TableGeometry TableGeometry::rebased(const Box& from, const Box& to) const {
  const auto move = [&](Box b) {
    Box page = predict::to_page_box(from, b);
    page.page = to.page;
    Box out = predict::to_crop_box(to, page);
    out.page = 0;
    return out;
  };
  TableGeometry g;
  for (const auto& b : rows) g.rows.push_back(move(b));
  for (const auto& b : columns) g.columns.push_back(move(b));
  for (const auto& c : cells) g.cells.push_back({c.row, c.col, move(c.box)});
  return g;
}

std::vector<CellBox> TableGeometry::cell_boxes() const {
  std::vector<CellBox> out;
  if (!cells.empty()) {
    std::set<std::pair<int, int>> seen;
    for (const auto& c : cells) {
      if (!seen.insert({c.row, c.col}).second)
        bad_geometry("cell (" + std::to_string(c.row) + ", " + std::to_string(c.col) + ") given twice");
      out.push_back(c);
    }
    std::sort(out.begin(), out.end(),
              [](const CellBox& a, const CellBox& b) { return std::pair(a.row, a.col) < std::pair(b.row, b.col); });
  } else {
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < columns.size(); ++c) {
        const Box& rb = rows[r];
        const Box& cb = columns[c];
        const double x0 = std::max(rb.x, cb.x), x1 = std::min(rb.right(), cb.right());
        const double y0 = std::max(rb.y, cb.y), y1 = std::min(rb.bottom(), cb.bottom());
        out.push_back({static_cast<int>(r), static_cast<int>(c), {0, x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)}});
      }
  }
  for (const auto& c : out)
    if (!(c.box.w > 0 && c.box.h > 0))
      throw Error("degenerate-geometry",
                  "cell (" + std::to_string(c.row) + ", " + std::to_string(c.col) + ") has zero area");
  return out;
}

CellAssignment assign_words_to_cells(const TableGeometry& geometry, const std::vector<CellWord>& words) {
  CellAssignment out;
  out.cells = geometry.cell_boxes();
  int rows = 0, cols = 0;
  for (const auto& c : out.cells) rows = std::max(rows, c.row + 1), cols = std::max(cols, c.col + 1);
  out.grid.assign(static_cast<std::size_t>(rows), std::vector<std::string>(static_cast<std::size_t>(cols)));

  out.cell_of_word.assign(words.size(), -1);
  for (std::size_t w = 0; w < words.size(); ++w) {
    const Box& wb = words[w].box;
    const double area = wb.area();
    double best = 0;
    int best_cell = -1;
    for (std::size_t c = 0; c < out.cells.size(); ++c) {
      const Box& cb = out.cells[c].box;
      const double share = area > 0 ? intersection_area(wb, cb) / area
                                     : (cb.contains_point(wb.x + wb.w / 2, wb.y + wb.h / 2) ? 1.0 : 0.0);
      // Cells are row-major, so strict improvement keeps the lower row/column on ties.
      if (share >= 0.5 && share > best) best = share, best_cell = static_cast<int>(c);
    }
    out.cell_of_word[w] = best_cell;
    if (best_cell < 0) {
      out.unassigned.push_back(w);
      continue;
    }
    std::string& text = out.grid[static_cast<std::size_t>(out.cells[static_cast<std::size_t>(best_cell)].row)]
                                [static_cast<std::size_t>(out.cells[static_cast<std::size_t>(best_cell)].col)];
    if (!text.empty()) text += ' ';
    text += words[w].text;
  }
  return out;
}

predict::TableRecord grid_to_table_record(const std::vector<std::vector<std::string>>& grid) {
  if (grid.empty() || grid.front().empty()) throw Error("empty-grid", "table grid has no cells");
  const std::size_t width = grid.front().size();
  for (const auto& row : grid)
    if (row.size() != width) throw Error("ragged-grid", "table grid rows differ in length");

  std::vector<std::string> names;
  std::set<std::string> used;
  std::map<std::string, int> seen;
  for (std::size_t j = 0; j < width; ++j) {
    std::string base = grid[0][j];
    if (base.find_first_not_of(" \t\r\n") == std::string::npos) base = "col_" + std::to_string(j + 1);
    std::string name = base;
    int& count = seen[base];
    ++count;
    if (count > 1 || used.count(name)) {
      int k = std::max(count, 2);
      while (used.count(base + "_" + std::to_string(k))) ++k;
      name = base + "_" + std::to_string(k);
    }
    used.insert(name);
    names.push_back(name);
  }
  predict::TableRecord record;
  for (std::size_t j = 0; j < width; ++j) {
    std::vector<std::string> values;
    for (std::size_t r = 1; r < grid.size(); ++r) values.push_back(grid[r][j]);
    record.add_column(names[j], std::move(values));
  }
  return record;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string table_to_csv(const predict::TableRecord& table) {
  std::string out;
  const auto& cols = table.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) out += (j ? "," : "") + csv_field(cols[j].first);
  out += "\n";
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) out += (j ? "," : "") + csv_field(cols[j].second[r]);
    out += "\n";
  }
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view csv) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  std::size_t i = 0;
  bool pending = false;  // a record has started
  while (i < csv.size()) {
    const char c = csv[i];
    if (c == '"' && field.empty()) {
      ++i;
      for (;;) {
        if (i >= csv.size()) throw Error("invalid-csv", "unterminated quoted field");
        if (csv[i] == '"') {
          if (i + 1 < csv.size() && csv[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += csv[i++];
      }
      if (i < csv.size() && csv[i] != ',' && csv[i] != '\n' && csv[i] != '\r')
        throw Error("invalid-csv", "text after a closing quote");
      pending = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      pending = true;
      ++i;
    } else if (c == '\n' || c == '\r') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      pending = false;
      i += (c == '\r' && i + 1 < csv.size() && csv[i + 1] == '\n') ? 2 : 1;
    } else {
      field += c;
      pending = true;
      ++i;
    }
  }
  if (pending) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

GeometricTableParser::GeometricTableParser(GeometricTableConfig config) : config_(std::move(config)) {
  if (config_.regions_file) {
    try {
      hints_ = pipeline::parse_region_hints(pipeline::load_yaml_or_json(*config_.regions_file));
    } catch (const Error& e) {
      throw ConfigError(FieldErrors{{"regions_file", e.what()}});
    }
  }
}

predict::ImageOutput GeometricTableParser::process_entity(const doc::Document& doc, const doc::Entity& entity,
                                                          const pdf::PageRenderer& renderer,
                                                          const predict::ImageContext& context) {
  const Box& region = context.region;
  std::optional<TableGeometry> geometry;
  if (entity.metadata.contains("geometry") && !entity.metadata["geometry"].is_null()) {
    // Hint geometry is relative to the hinted box, which the pipeline made the entity's box.
    geometry = TableGeometry::from_json(entity.metadata["geometry"]).rebased(entity.boxes.front(), region);
  }
  if (!geometry) {
    const pipeline::TableHint* best = nullptr;
    double best_iou = 0.5;
    for (const auto& h : hints_) {
      if (h.geometry.is_null()) continue;
      const double v = iou(h.box, region);
      if (v >= best_iou) best_iou = v, best = &h;
    }
    if (best) geometry = TableGeometry::from_json(best->geometry).rebased(best->box, region);
  }
  if (!geometry && config_.detection_url) {
    const auto detected = call_image_service(*config_.detection_url, renderer.render_region(region, context.dpi),
                                             config_.timeout_s);
    if (detected.boxes) geometry = TableGeometry::from_boxes(*detected.boxes);
  }
  if (!geometry || geometry->empty())
    throw Error("no-geometry-available",
                "no table geometry for this entity; configure detection_url or provide a regions file");

  std::vector<CellWord> words;
  if (doc.has_layer("words")) {
    for (const auto& w : doc.layer("words").entities) {
      if (w.boxes.empty()) continue;
      const Box& b = w.boxes.front();
      if (b.page != region.page || !region.contains_point(b.x + b.w / 2, b.y + b.h / 2)) continue;
      Box rel = predict::to_crop_box(region, b);
      rel.page = 0;
      words.push_back({doc::text_of(doc, w), rel});
    }
  }
  const CellAssignment assignment = assign_words_to_cells(*geometry, words);
  predict::ImageOutput out;
  out.table = grid_to_table_record(assignment.grid);
  out.boxes.emplace();
  for (const auto& c : assignment.cells) {
    Box b = c.box;
    b.page = region.page;
    out.boxes->push_back({b, "cell " + std::to_string(c.row) + "," + std::to_string(c.col), 1.0});
  }
  return out;
}

}  // namespace layerlab::predictors
