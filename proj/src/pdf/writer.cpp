#include "layerlab/pdf/writer.hpp"

#include <cstdio>
#include <deque>

#include "layerlab/doc/utf8.hpp"
#include "layerlab/pdf/file.hpp"
#include "layerlab/pdf/font.hpp"

namespace layerlab::pdf {

namespace {

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

// UTF-8 -> WinAnsi bytes; characters outside Latin-1 become '?'.
std::string to_win_ansi(std::string_view utf8_text) {
  std::string out;
  for (char32_t cp : utf8::decode(utf8_text)) {
    if (cp < 0x80 || (cp >= 0xA0 && cp <= 0xFF)) {
      out.push_back(static_cast<char>(cp));
      continue;
    }
    bool mapped = false;
    for (int c = 0x80; c <= 0x9F; ++c) {
      if (win_ansi_to_unicode(static_cast<unsigned char>(c)) == cp) {
        out.push_back(static_cast<char>(c));
        mapped = true;
        break;
      }
    }
    if (!mapped) out.push_back('?');
  }
  return out;
}

std::string escape_literal(std::string_view bytes) {
  std::string out = "(";
  for (char c : bytes) {
    if (c == '(' || c == ')' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back(')');
  return out;
}

}  // namespace

PdfBuilder::PageBuilder& PdfBuilder::PageBuilder::text(double x, double baseline, double size,
                                                       std::string_view utf8_text) {
  content_ += "BT /F1 " + fmt_num(size) + " Tf 1 0 0 1 " + fmt_num(x) + " " + fmt_num(height_ - baseline) +
              " Tm " + escape_literal(to_win_ansi(utf8_text)) + " Tj ET\n";
  return *this;
}

PdfBuilder::PageBuilder& PdfBuilder::PageBuilder::rect(double x, double top, double w, double h, bool fill) {
  content_ += fmt_num(x) + " " + fmt_num(height_ - top - h) + " " + fmt_num(w) + " " + fmt_num(h) + " re " +
              (fill ? "f" : "S") + "\n";
  return *this;
}

PdfBuilder::PageBuilder& PdfBuilder::PageBuilder::line(double x0, double top0, double x1, double top1,
                                                       double width) {
  content_ += fmt_num(width) + " w " + fmt_num(x0) + " " + fmt_num(height_ - top0) + " m " + fmt_num(x1) + " " +
              fmt_num(height_ - top1) + " l S\n";
  return *this;
}

PdfBuilder::PageBuilder& PdfBuilder::PageBuilder::image(double x, double top, double w, double h) {
  content_ += "q " + fmt_num(w) + " 0 0 " + fmt_num(h) + " " + fmt_num(x) + " " + fmt_num(height_ - top - h) +
              " cm /Im1 Do Q\n";
  has_image_ = true;
  return *this;
}

PdfBuilder::PageBuilder& PdfBuilder::add_page(double width, double height) {
  pages_.emplace_back(width, height);
  return pages_.back();
}

double PdfBuilder::text_width(std::string_view utf8_text, double size) {
  double total = 0;
  for (char c : to_win_ansi(utf8_text)) total += helvetica_width(static_cast<unsigned char>(c));
  return total / 1000.0 * size;
}

std::string PdfBuilder::build(const Options& options) const {
  // Object numbers: 1 catalog, 2 page tree, 3 font, 4 image, 5 encrypt,
  // then (page, contents) pairs from 6.
  std::deque<std::string> bodies(5);
  bodies[0] = "<< /Type /Catalog /Pages 2 0 R >>";
  std::string kids;
  for (std::size_t i = 0; i < pages_.size(); ++i) kids += std::to_string(6 + 2 * i) + " 0 R ";
  bodies[1] = "<< /Type /Pages /Kids [" + kids + "] /Count " + std::to_string(pages_.size()) + " >>";
  std::string widths;
  for (int c = 32; c <= 126; ++c) widths += fmt_num(helvetica_width(static_cast<unsigned char>(c))) + " ";
  bodies[2] = "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica /Encoding /WinAnsiEncoding /FirstChar 32 "
              "/LastChar 126 /Widths [" + widths + "] >>";
  const std::string pixels(64, static_cast<char>(0xB0));
  bodies[3] = "<< /Type /XObject /Subtype /Image /Width 8 /Height 8 /ColorSpace /DeviceGray "
              "/BitsPerComponent 8 /Length " + std::to_string(pixels.size()) + " >>\nstream\n" + pixels +
              "\nendstream";
  bodies[4] = "<< /Filter /Standard /V 1 /R 2 /O <00> /U <00> /P -4 >>";

  for (std::size_t i = 0; i < pages_.size(); ++i) {
    const auto& page = pages_[i];
    const std::string contents_ref = std::to_string(7 + 2 * i) + " 0 R";
    bodies.push_back("<< /Type /Page /Parent 2 0 R /MediaBox [0 0 " + fmt_num(page.width_) + " " +
                     fmt_num(page.height_) + "] /Resources << /Font << /F1 3 0 R >> /XObject << /Im1 4 0 R >> >> "
                     "/Contents " + contents_ref + " >>");
    if (options.compress) {
      const std::string packed = flate_encode(page.content_);
      bodies.push_back("<< /Length " + std::to_string(packed.size()) + " /Filter /FlateDecode >>\nstream\n" +
                       packed + "\nendstream");
    } else {
      bodies.push_back("<< /Length " + std::to_string(page.content_.size()) + " >>\nstream\n" + page.content_ +
                       "\nendstream");
    }
  }

  std::string out = "%PDF-1.4\n%\xE2\xE3\xCF\xD3\n";
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    offsets.push_back(out.size());
    out += std::to_string(i + 1) + " 0 obj\n" + bodies[i] + "\nendobj\n";
  }
  const std::size_t xref = out.size();
  out += "xref\n0 " + std::to_string(bodies.size() + 1) + "\n0000000000 65535 f \n";
  for (std::size_t off : offsets) {
    char line[32];
    std::snprintf(line, sizeof(line), "%010zu 00000 n \n", off);
    out += line;
  }
  out += "trailer\n<< /Size " + std::to_string(bodies.size() + 1) + " /Root 1 0 R";
  if (options.mark_encrypted) out += " /Encrypt 5 0 R";
  out += " >>\nstartxref\n" + std::to_string(xref) + "\n%%EOF\n";
  return out;
}

}  // namespace layerlab::pdf
