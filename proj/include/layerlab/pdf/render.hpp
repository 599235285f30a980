#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "layerlab/doc/document.hpp"
#include "layerlab/pdf/content.hpp"

namespace layerlab {

// 8-bit grayscale raster.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, width * height

  std::string to_png() const;
  static Image from_png(const std::string& png);
};

// Pixel rectangle covering a normalized box: edges are rounded independently
// so the extent is within one pixel of box extent * image size.
Image crop(const Image& page, const doc::Box& box);

namespace pdf {

// Wireframe rasterizer: paths are stroked/filled, images drawn as gray
// placeholders and text drawn with a vector stroke font fitted to each word
// box. It is meant for on-screen inspection and region crops, not fidelity.
Image render_page(const PageContent& content, int dpi);

// Renders pages of a PDF on demand; safe for concurrent use.
class PageRenderer {
 public:
  virtual ~PageRenderer() = default;
  virtual Image render_page(int page, int dpi) const = 0;
  // Crop of `box` (normalized, top-left origin) expanded by `pad` on each side
  // and clamped to the page.
  Image render_region(const doc::Box& box, int dpi, double pad = 0) const;
};

class PdfPageRenderer : public PageRenderer {
 public:
  // Errors as File::open.
  explicit PdfPageRenderer(std::string pdf_bytes);
  ~PdfPageRenderer() override;

  Image render_page(int page, int dpi) const override;
  int page_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pdf
}  // namespace layerlab
