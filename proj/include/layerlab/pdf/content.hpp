#pragma once

#include <string>
#include <vector>

#include "layerlab/pdf/file.hpp"

namespace layerlab::pdf {

// Coordinates below are PDF points relative to the page box's lower-left
// corner (y grows upward), after the current transformation matrix.
struct Point {
  double x = 0;
  double y = 0;
};

struct Glyph {
  std::u32string text;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // glyph cell: advance x (descent..ascent)
  double size = 0;                        // effective font size in points
  bool visible = true;                    // false for render mode 3 (invisible OCR text)
};

struct PathShape {
  std::vector<std::vector<Point>> subpaths;
  bool stroke = false;
  bool fill = false;
  bool even_odd = false;
  double line_width = 1;
  double stroke_gray = 0;  // 0 = black, 1 = white
  double fill_gray = 0;
};

struct ImagePlacement {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct PageContent {
  double width = 0;
  double height = 0;
  std::vector<Glyph> glyphs;
  std::vector<PathShape> paths;
  std::vector<ImagePlacement> images;
  std::vector<std::string> warnings;
};

// Runs the page's content stream (including form XObjects) and collects the
// positioned glyphs, painted paths and image placements.
PageContent interpret_page(const File& file, const Page& page);

}  // namespace layerlab::pdf
