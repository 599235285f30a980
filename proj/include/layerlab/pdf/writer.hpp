#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace layerlab::pdf {

// Minimal PDF producer: Helvetica text, strokes, rectangles and placeholder
// images. Positions are in points measured from the page's top-left corner,
// which keeps fixture geometry easy to reason about.
class PdfBuilder {
 public:
  class PageBuilder {
   public:
    PageBuilder(double width, double height) : width_(width), height_(height) {}

    // `baseline` is the distance of the text baseline from the top edge.
    PageBuilder& text(double x, double baseline, double size, std::string_view utf8_text);
    PageBuilder& rect(double x, double top, double w, double h, bool fill = false);
    PageBuilder& line(double x0, double top0, double x1, double top1, double width = 1);
    PageBuilder& image(double x, double top, double w, double h);

    double width() const { return width_; }
    double height() const { return height_; }

   private:
    friend class PdfBuilder;
    double width_;
    double height_;
    std::string content_;
    bool has_image_ = false;
  };

  struct Options {
    bool compress = true;
    // Adds an /Encrypt entry to the trailer (for exercising rejection paths).
    bool mark_encrypted = false;
  };

  PageBuilder& add_page(double width = 612, double height = 792);
  std::string build() const { return build(Options{}); }
  std::string build(const Options& options) const;

  // Advance width of `utf8_text` set in Helvetica at `size` points.
  static double text_width(std::string_view utf8_text, double size);
  // Helvetica ascent/descent as fractions of the font size.
  static constexpr double kAscent = 0.718;
  static constexpr double kDescent = -0.207;

 private:
  std::vector<PageBuilder> pages_;
};

}  // namespace layerlab::pdf
