#include "layerlab/pdf/render.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "layerlab/doc/utf8.hpp"
#include "layerlab/error.hpp"
#include "layerlab/pdf/extract.hpp"
#include "layerlab/pdf/file.hpp"

namespace layerlab {

std::string Image::to_png() const {
  cv::Mat mat(height, width, CV_8UC1, const_cast<std::uint8_t*>(pixels.data()));
  std::vector<uchar> buf;
  if (!cv::imencode(".png", mat, buf)) throw Error("render-failed", "PNG encoding failed");
  return std::string(buf.begin(), buf.end());
}

Image Image::from_png(const std::string& png) {
  std::vector<uchar> buf(png.begin(), png.end());
  cv::Mat mat = cv::imdecode(buf, cv::IMREAD_GRAYSCALE);
  if (mat.empty()) throw Error("invalid-image", "not a decodable image");
  Image img;
  img.width = mat.cols;
  img.height = mat.rows;
  img.pixels.assign(mat.datastart, mat.dataend);
  return img;
}

Image crop(const Image& page, const doc::Box& box) {
  const auto edge = [](double v, int extent) {
    return std::clamp(static_cast<int>(std::lround(v * extent)), 0, extent);
  };
  int x0 = edge(box.x, page.width), x1 = edge(box.x + box.w, page.width);
  int y0 = edge(box.y, page.height), y1 = edge(box.y + box.h, page.height);
  if (x1 <= x0) x1 = std::min(page.width, x0 + 1), x0 = x1 - 1;
  if (y1 <= y0) y1 = std::min(page.height, y0 + 1), y0 = y1 - 1;
  Image out;
  out.width = std::max(0, x1 - x0);
  out.height = std::max(0, y1 - y0);
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height);
  for (int y = 0; y < out.height; ++y)
    std::copy_n(page.pixels.begin() + static_cast<std::ptrdiff_t>(y0 + y) * page.width + x0, out.width,
                out.pixels.begin() + static_cast<std::ptrdiff_t>(y) * out.width);
  return out;
}

namespace pdf {

Image render_page(const PageContent& content, int dpi) {
  const double scale = dpi / 72.0;
  const int w = std::max(1, static_cast<int>(std::lround(content.width * scale)));
  const int h = std::max(1, static_cast<int>(std::lround(content.height * scale)));
  cv::Mat mat(h, w, CV_8UC1, cv::Scalar(255));

  const auto to_px = [&](const Point& p) {
    return cv::Point(static_cast<int>(std::lround(p.x * scale)),
                     static_cast<int>(std::lround((content.height - p.y) * scale)));
  };

  for (const auto& img : content.images) {
    cv::rectangle(mat, to_px({img.x0, img.y1}), to_px({img.x1, img.y0}), cv::Scalar(200), cv::FILLED);
  }

  for (const auto& path : content.paths) {
    std::vector<std::vector<cv::Point>> polys;
    for (const auto& sub : path.subpaths) {
      std::vector<cv::Point> poly;
      poly.reserve(sub.size());
      for (const auto& p : sub) poly.push_back(to_px(p));
      if (!poly.empty()) polys.push_back(std::move(poly));
    }
    if (polys.empty()) continue;
    if (path.fill) {
      const auto gray = static_cast<int>(std::lround(std::clamp(path.fill_gray, 0.0, 1.0) * 255));
      cv::fillPoly(mat, polys, cv::Scalar(gray));
    }
    if (path.stroke) {
      const auto gray = static_cast<int>(std::lround(std::clamp(path.stroke_gray, 0.0, 1.0) * 255));
      const int thickness = std::clamp(static_cast<int>(std::lround(path.line_width * scale)), 1, 32);
      cv::polylines(mat, polys, false, cv::Scalar(gray), thickness, cv::LINE_8);
    }
  }

  for (const auto& word : group_words(content, 0)) {
    const int x0 = static_cast<int>(std::lround(word.box.x * w));
    const int y0 = static_cast<int>(std::lround(word.box.y * h));
    const int bw = std::max(1, static_cast<int>(std::lround(word.box.w * w)));
    const int bh = std::max(1, static_cast<int>(std::lround(word.box.h * h)));
    std::string ascii;
    for (char32_t c : utf8::decode(word.text)) ascii.push_back(c >= 32 && c < 127 ? static_cast<char>(c) : '?');
    if (bh < 6 || ascii.empty()) {
      cv::rectangle(mat, cv::Rect(x0, y0 + bh / 3, bw, std::max(1, bh / 3)), cv::Scalar(90), cv::FILLED);
      continue;
    }
    int baseline = 0;
    const cv::Size unit = cv::getTextSize(ascii, cv::FONT_HERSHEY_SIMPLEX, 1.0, 1, &baseline);
    const double fit = std::min(static_cast<double>(bw) / std::max(1, unit.width),
                                0.72 * bh / std::max(1, unit.height));
    const int thickness = std::max(1, static_cast<int>(std::lround(fit * 1.5)));
    const int text_y = y0 + static_cast<int>(std::lround(0.78 * bh));
    cv::putText(mat, ascii, cv::Point(x0, text_y), cv::FONT_HERSHEY_SIMPLEX, fit, cv::Scalar(0), thickness,
                cv::LINE_AA);
  }

  Image out;
  out.width = w;
  out.height = h;
  out.pixels.assign(mat.datastart, mat.dataend);
  return out;
}

Image PageRenderer::render_region(const doc::Box& box, int dpi, double pad) const {
  const Image page = render_page(box.page, dpi);
  const double x0 = std::clamp(box.x - pad, 0.0, 1.0), y0 = std::clamp(box.y - pad, 0.0, 1.0);
  const double x1 = std::clamp(box.x + box.w + pad, 0.0, 1.0), y1 = std::clamp(box.y + box.h + pad, 0.0, 1.0);
  return crop(page, doc::Box{box.page, x0, y0, x1 - x0, y1 - y0});
}

struct PdfPageRenderer::Impl {
  explicit Impl(std::string bytes) : file(File::open(std::move(bytes))) {}
  File file;
  std::mutex mutex;
  std::map<int, PageContent> contents;
};

PdfPageRenderer::PdfPageRenderer(std::string pdf_bytes)
    : impl_(std::make_unique<Impl>(std::move(pdf_bytes))) {}

PdfPageRenderer::~PdfPageRenderer() = default;

int PdfPageRenderer::page_count() const { return static_cast<int>(impl_->file.pages().size()); }

Image PdfPageRenderer::render_page(int page, int dpi) const {
  if (page < 0 || page >= page_count())
    throw Error("page-out-of-range", "page " + std::to_string(page) + " does not exist");
  std::unique_lock lock(impl_->mutex);
  auto it = impl_->contents.find(page);
  if (it == impl_->contents.end())
    it = impl_->contents.emplace(page, interpret_page(impl_->file, impl_->file.pages()[page])).first;
  const PageContent& content = it->second;
  lock.unlock();
  return pdf::render_page(content, dpi);
}

}  // namespace pdf
}  // namespace layerlab
