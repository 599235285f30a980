#include "layerlab/pdf/extract.hpp"

#include <algorithm>
#include <cmath>

#include "layerlab/doc/utf8.hpp"
#include "layerlab/pdf/file.hpp"

namespace layerlab::pdf {

namespace {

constexpr double kWordGapEm = 0.15;
constexpr double kMinExtent = 1e-6;

struct Pending {
  std::u32string text;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double size = 0;
  double last_x1 = 0;
  double baseline = 0;
};

}  // namespace

std::vector<Word> group_words(const PageContent& content, int page_index) {
  std::vector<Word> words;
  const double pw = content.width, ph = content.height;
  if (pw <= 0 || ph <= 0) return words;

  Pending cur;
  const auto flush = [&] {
    if (cur.text.empty()) return;
    // Clip to the page; words entirely off-page are dropped.
    const double x0 = std::clamp(cur.x0, 0.0, pw), x1 = std::clamp(cur.x1, 0.0, pw);
    const double y0 = std::clamp(cur.y0, 0.0, ph), y1 = std::clamp(cur.y1, 0.0, ph);
    if (x1 > x0 && y1 > y0) {
      Word w;
      w.text = utf8::encode(cur.text);
      w.box.page = page_index;
      w.box.x = x0 / pw;
      w.box.y = (ph - y1) / ph;
      w.box.w = std::max((x1 - x0) / pw, kMinExtent);
      w.box.h = std::max((y1 - y0) / ph, kMinExtent);
      w.box.w = std::min(w.box.w, 1.0 - w.box.x);
      w.box.h = std::min(w.box.h, 1.0 - w.box.y);
      w.font_size = cur.size;
      if (w.box.w > 0 && w.box.h > 0) words.push_back(std::move(w));
    }
    cur = Pending{};
  };

  for (const Glyph& g : content.glyphs) {
    const double em = std::max(g.size, 1e-3);
    const double baseline = g.y0;
    if (!cur.text.empty()) {
      const double gap = g.x0 - cur.last_x1;
      const bool far = gap > kWordGapEm * em;
      const bool backwards = g.x0 < cur.last_x1 - 0.5 * em;
      const bool new_baseline = std::abs(baseline - cur.baseline) > 0.5 * em;
      if (far || backwards || new_baseline) flush();
    }
    for (char32_t c : g.text) {
      if (utf8::is_space(c) || c == 0) {
        flush();
        continue;
      }
      if (cur.text.empty()) {
        cur.x0 = g.x0;
        cur.y0 = g.y0;
        cur.x1 = g.x1;
        cur.y1 = g.y1;
        cur.size = g.size;
        cur.baseline = baseline;
      }
      cur.text.push_back(c);
    }
    if (!cur.text.empty()) {
      cur.x0 = std::min(cur.x0, g.x0);
      cur.y0 = std::min(cur.y0, g.y0);
      cur.x1 = std::max(cur.x1, g.x1);
      cur.y1 = std::max(cur.y1, g.y1);
      cur.size = std::max(cur.size, g.size);
      cur.last_x1 = g.x1;
    }
  }
  flush();
  return words;
}

ExtractedPdf extract_words(std::string_view pdf_bytes) {
  const File file = File::open(std::string(pdf_bytes));
  ExtractedPdf out;
  int index = 0;
  for (const Page& page : file.pages()) {
    PageContent content = interpret_page(file, page);
    PageWords pw;
    pw.info = doc::PageInfo{index, content.width, content.height};
    pw.words = group_words(content, index);
    pw.has_images = !content.images.empty();
    for (auto& w : content.warnings) out.warnings.push_back("page " + std::to_string(index) + ": " + w);
    out.pages.push_back(std::move(pw));
    ++index;
  }
  return out;
}

}  // namespace layerlab::pdf
