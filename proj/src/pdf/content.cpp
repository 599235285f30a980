#include "layerlab/pdf/content.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "layerlab/error.hpp"
#include "layerlab/pdf/font.hpp"

namespace layerlab::pdf {

namespace {

// Affine matrix in PDF convention: [x' y'] = [x y 1] * M.
struct Matrix {
  double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

  Point apply(double x, double y) const { return {a * x + c * y + e, b * x + d * y + f}; }
  // this * other
  Matrix times(const Matrix& o) const {
    return {a * o.a + b * o.c,       a * o.b + b * o.d,       c * o.a + d * o.c,
            c * o.b + d * o.d,       e * o.a + f * o.c + o.e, e * o.b + f * o.d + o.f};
  }
  static Matrix translate(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }
};

struct GraphicsState {
  Matrix ctm;
  double line_width = 1;
  double stroke_gray = 0;
  double fill_gray = 0;
  const Font* font = nullptr;
  double font_size = 0;
  double char_spacing = 0;
  double word_spacing = 0;
  double hscale = 1;
  double leading = 0;
  double rise = 0;
  int render_mode = 0;
};

double to_gray(const std::vector<double>& comps) {
  if (comps.size() == 1) return comps[0];
  if (comps.size() == 3) return 0.3 * comps[0] + 0.59 * comps[1] + 0.11 * comps[2];
  if (comps.size() == 4)
    return 1.0 - std::min(1.0, 0.3 * comps[0] + 0.59 * comps[1] + 0.11 * comps[2] + comps[3]);
  return 0;
}

class Interpreter {
 public:
  Interpreter(const File& file, PageContent& out) : file_(file), out_(out) {}

  void run(std::string_view content, const Dict& resources, int depth) {
    if (depth > 12) {
      out_.warnings.push_back("form_xobject_nesting_too_deep");
      return;
    }
    Parser parser(content);
    std::vector<Object> operands;
    while (true) {
      std::optional<Object> tok;
      try {
        tok = parser.next();
      } catch (const Error&) {
        out_.warnings.push_back("content_stream_syntax_error");
        return;
      }
      if (!tok) break;
      const Keyword* kw = tok->keyword();
      if (!kw) {
        operands.push_back(std::move(*tok));
        continue;
      }
      if (kw->value == "BI") {
        skip_inline_image(parser);
        operands.clear();
        continue;
      }
      execute(kw->value, operands, resources, depth);
      operands.clear();
    }
  }

  GraphicsState gs;

 private:
  double num(const std::vector<Object>& ops, std::size_t i) const {
    return i < ops.size() ? ops[i].number_or(0) : 0;
  }

  void execute(const std::string& op, const std::vector<Object>& ops, const Dict& resources, int depth) {
    if (op == "q") {
      stack_.push_back(gs);
    } else if (op == "Q") {
      if (!stack_.empty()) {
        gs = stack_.back();
        stack_.pop_back();
      }
    } else if (op == "cm") {
      if (ops.size() >= 6) {
        Matrix m{num(ops, 0), num(ops, 1), num(ops, 2), num(ops, 3), num(ops, 4), num(ops, 5)};
        gs.ctm = m.times(gs.ctm);
      }
    } else if (op == "w") {
      gs.line_width = num(ops, 0);
    } else if (op == "g" || op == "rg" || op == "k" || op == "sc" || op == "scn") {
      if (!ops.empty() && ops.back().is_number()) gs.fill_gray = to_gray(numbers(ops));
    } else if (op == "G" || op == "RG" || op == "K" || op == "SC" || op == "SCN") {
      if (!ops.empty() && ops.back().is_number()) gs.stroke_gray = to_gray(numbers(ops));
    } else if (op == "m") {
      path_.push_back({gs.ctm.apply(num(ops, 0), num(ops, 1))});
      current_ = {num(ops, 0), num(ops, 1)};
    } else if (op == "l") {
      line_to(num(ops, 0), num(ops, 1));
    } else if (op == "c") {
      curve_to(num(ops, 0), num(ops, 1), num(ops, 2), num(ops, 3), num(ops, 4), num(ops, 5));
    } else if (op == "v") {
      curve_to(current_.x, current_.y, num(ops, 0), num(ops, 1), num(ops, 2), num(ops, 3));
    } else if (op == "y") {
      curve_to(num(ops, 0), num(ops, 1), num(ops, 2), num(ops, 3), num(ops, 2), num(ops, 3));
    } else if (op == "h") {
      if (!path_.empty() && !path_.back().empty()) path_.back().push_back(path_.back().front());
    } else if (op == "re") {
      const double x = num(ops, 0), y = num(ops, 1), w = num(ops, 2), h = num(ops, 3);
      path_.push_back({gs.ctm.apply(x, y), gs.ctm.apply(x + w, y), gs.ctm.apply(x + w, y + h),
                       gs.ctm.apply(x, y + h), gs.ctm.apply(x, y)});
      current_ = {x, y};
    } else if (op == "S" || op == "s") {
      if (op == "s") execute("h", {}, resources, depth);
      paint(true, false, false);
    } else if (op == "f" || op == "F" || op == "f*") {
      paint(false, true, op == "f*");
    } else if (op == "B" || op == "B*" || op == "b" || op == "b*") {
      if (op[0] == 'b') execute("h", {}, resources, depth);
      paint(true, true, op.size() == 2);
    } else if (op == "n") {
      path_.clear();
    } else if (op == "BT") {
      tm_ = tlm_ = Matrix{};
    } else if (op == "ET") {
    } else if (op == "Tf") {
      if (ops.size() >= 2) {
        gs.font = font_for(ops[0].name() ? *ops[0].name() : "", resources);
        gs.font_size = num(ops, 1);
      }
    } else if (op == "Tc") {
      gs.char_spacing = num(ops, 0);
    } else if (op == "Tw") {
      gs.word_spacing = num(ops, 0);
    } else if (op == "Tz") {
      gs.hscale = num(ops, 0) / 100.0;
    } else if (op == "TL") {
      gs.leading = num(ops, 0);
    } else if (op == "Ts") {
      gs.rise = num(ops, 0);
    } else if (op == "Tr") {
      gs.render_mode = static_cast<int>(num(ops, 0));
    } else if (op == "Td") {
      tlm_ = Matrix::translate(num(ops, 0), num(ops, 1)).times(tlm_);
      tm_ = tlm_;
    } else if (op == "TD") {
      gs.leading = -num(ops, 1);
      tlm_ = Matrix::translate(num(ops, 0), num(ops, 1)).times(tlm_);
      tm_ = tlm_;
    } else if (op == "Tm") {
      if (ops.size() >= 6) tm_ = tlm_ = Matrix{num(ops, 0), num(ops, 1), num(ops, 2), num(ops, 3), num(ops, 4), num(ops, 5)};
    } else if (op == "T*") {
      next_line();
    } else if (op == "Tj") {
      if (!ops.empty() && ops[0].string()) show(*ops[0].string());
    } else if (op == "'") {
      next_line();
      if (!ops.empty() && ops[0].string()) show(*ops[0].string());
    } else if (op == "\"") {
      if (ops.size() >= 3) {
        gs.word_spacing = num(ops, 0);
        gs.char_spacing = num(ops, 1);
        next_line();
        if (ops[2].string()) show(*ops[2].string());
      }
    } else if (op == "TJ") {
      if (!ops.empty() && ops[0].array()) {
        for (const auto& item : *ops[0].array()) {
          if (const std::string* s = item.string()) {
            show(*s);
          } else if (item.is_number()) {
            const double tx = -item.number_or(0) / 1000.0 * gs.font_size * gs.hscale;
            tm_ = Matrix::translate(tx, 0).times(tm_);
          }
        }
      }
    } else if (op == "Do") {
      if (!ops.empty() && ops[0].name()) draw_xobject(*ops[0].name(), resources, depth);
    }
  }

  std::vector<double> numbers(const std::vector<Object>& ops) const {
    std::vector<double> out;
    for (const auto& o : ops)
      if (o.is_number()) out.push_back(o.number_or(0));
    return out;
  }

  void line_to(double x, double y) {
    if (path_.empty()) path_.push_back({gs.ctm.apply(current_.x, current_.y)});
    path_.back().push_back(gs.ctm.apply(x, y));
    current_ = {x, y};
  }

  void curve_to(double x1, double y1, double x2, double y2, double x3, double y3) {
    const Point p0 = current_;
    if (path_.empty()) path_.push_back({gs.ctm.apply(p0.x, p0.y)});
    constexpr int kSteps = 8;
    for (int i = 1; i <= kSteps; ++i) {
      const double t = static_cast<double>(i) / kSteps, u = 1 - t;
      const double x = u * u * u * p0.x + 3 * u * u * t * x1 + 3 * u * t * t * x2 + t * t * t * x3;
      const double y = u * u * u * p0.y + 3 * u * u * t * y1 + 3 * u * t * t * y2 + t * t * t * y3;
      path_.back().push_back(gs.ctm.apply(x, y));
    }
    current_ = {x3, y3};
  }

  void paint(bool stroke, bool fill, bool even_odd) {
    if (!path_.empty()) {
      PathShape shape;
      shape.subpaths = std::move(path_);
      shape.stroke = stroke;
      shape.fill = fill;
      shape.even_odd = even_odd;
      const double scale = std::sqrt(std::abs(gs.ctm.a * gs.ctm.d - gs.ctm.b * gs.ctm.c));
      shape.line_width = std::max(gs.line_width * scale, 0.0);
      shape.stroke_gray = gs.stroke_gray;
      shape.fill_gray = gs.fill_gray;
      out_.paths.push_back(std::move(shape));
    }
    path_.clear();
  }

  void next_line() {
    tlm_ = Matrix::translate(0, -gs.leading).times(tlm_);
    tm_ = tlm_;
  }

  const Font* font_for(const std::string& name, const Dict& resources) {
    const std::string key = std::to_string(reinterpret_cast<std::uintptr_t>(&resources)) + "/" + name;
    if (auto it = fonts_.find(key); it != fonts_.end()) return it->second.get();
    std::unique_ptr<Font> font;
    if (const Object* fonts = lookup(resources, "Font")) {
      if (const Dict* fd = file_.resolve(*fonts).dict()) {
        if (const Object* f = lookup(*fd, name)) {
          if (const Dict* d = file_.resolve(*f).dict()) font = std::make_unique<Font>(Font::load(file_, *d));
        }
      }
    }
    if (!font) {
      out_.warnings.push_back("missing_font:" + name);
      font = std::make_unique<Font>(Font::standard());
    }
    const Font* raw = font.get();
    fonts_.emplace(key, std::move(font));
    return raw;
  }

  void show(const std::string& bytes) {
    const Font* font = gs.font;
    if (!font) {
      if (!default_font_) default_font_ = std::make_unique<Font>(Font::standard());
      font = default_font_.get();
    }
    const double size = gs.font_size;
    for (const auto& code : font->decode(bytes)) {
      const Matrix trm = Matrix{size * gs.hscale, 0, 0, size, 0, gs.rise}.times(tm_).times(gs.ctm);
      if (!code.text.empty()) {
        const Point corners[4] = {trm.apply(0, font->descent()), trm.apply(code.width, font->descent()),
                                  trm.apply(0, font->ascent()), trm.apply(code.width, font->ascent())};
        Glyph g;
        g.text = code.text;
        g.x0 = g.x1 = corners[0].x;
        g.y0 = g.y1 = corners[0].y;
        for (const auto& p : corners) {
          g.x0 = std::min(g.x0, p.x);
          g.x1 = std::max(g.x1, p.x);
          g.y0 = std::min(g.y0, p.y);
          g.y1 = std::max(g.y1, p.y);
        }
        g.size = std::hypot(trm.c, trm.d);
        g.visible = gs.render_mode != 3 && gs.render_mode != 7;
        out_.glyphs.push_back(std::move(g));
      }
      double tx = code.width * size + gs.char_spacing;
      if (code.bytes == 1 && code.code == 32) tx += gs.word_spacing;
      tm_ = Matrix::translate(tx * gs.hscale, 0).times(tm_);
    }
  }

  void place_image() {
    const Point corners[4] = {gs.ctm.apply(0, 0), gs.ctm.apply(1, 0), gs.ctm.apply(0, 1), gs.ctm.apply(1, 1)};
    ImagePlacement img{corners[0].x, corners[0].y, corners[0].x, corners[0].y};
    for (const auto& p : corners) {
      img.x0 = std::min(img.x0, p.x);
      img.x1 = std::max(img.x1, p.x);
      img.y0 = std::min(img.y0, p.y);
      img.y1 = std::max(img.y1, p.y);
    }
    out_.images.push_back(img);
  }

  void draw_xobject(const std::string& name, const Dict& resources, int depth) {
    const Object* xobjects = lookup(resources, "XObject");
    if (!xobjects) return;
    const Dict* xd = file_.resolve(*xobjects).dict();
    if (!xd) return;
    const Object* ref = lookup(*xd, name);
    if (!ref) return;
    const Object& xo = file_.resolve(*ref);
    const Stream* s = xo.stream();
    if (!s) return;
    const Object* subtype = lookup(s->dict, "Subtype");
    const std::string* st = subtype ? file_.resolve(*subtype).name() : nullptr;
    if (st && *st == "Image") {
      place_image();
    } else if (st && *st == "Form") {
      std::string content;
      try {
        content = file_.decode_stream(*s);
      } catch (const Error& e) {
        out_.warnings.push_back(std::string("form_xobject_undecodable:") + e.code());
        return;
      }
      const GraphicsState saved = gs;
      const Matrix saved_tm = tm_, saved_tlm = tlm_;
      if (const Object* m = lookup(s->dict, "Matrix")) {
        if (const Array* a = file_.resolve(*m).array(); a && a->size() == 6) {
          Matrix mm{(*a)[0].number_or(1), (*a)[1].number_or(0), (*a)[2].number_or(0),
                    (*a)[3].number_or(1), (*a)[4].number_or(0), (*a)[5].number_or(0)};
          gs.ctm = mm.times(gs.ctm);
        }
      }
      const Dict* form_resources = &resources;
      if (const Object* r = lookup(s->dict, "Resources"))
        if (const Dict* rd = file_.resolve(*r).dict()) form_resources = rd;
      run(content, *form_resources, depth + 1);
      gs = saved;
      tm_ = saved_tm;
      tlm_ = saved_tlm;
    }
  }

  void skip_inline_image(Parser& parser) {
    // Dictionary entries up to ID, then raw data up to a delimited EI.
    while (true) {
      std::optional<Object> tok;
      try {
        tok = parser.next();
      } catch (const Error&) {
        return;
      }
      if (!tok) return;
      if (const Keyword* k = tok->keyword(); k && k->value == "ID") break;
    }
    const std::string_view data = parser.data();
    std::size_t pos = parser.position() + 1;
    while (pos + 2 <= data.size()) {
      pos = data.find("EI", pos);
      if (pos == std::string_view::npos) {
        parser.seek(data.size());
        return;
      }
      const bool before = pos > 0 && is_pdf_whitespace(data[pos - 1]);
      const bool after = pos + 2 >= data.size() || is_pdf_whitespace(data[pos + 2]);
      if (before && after) {
        parser.seek(pos + 2);
        place_image();
        return;
      }
      pos += 2;
    }
    parser.seek(data.size());
  }

  const File& file_;
  PageContent& out_;
  std::vector<GraphicsState> stack_;
  std::vector<std::vector<Point>> path_;
  Point current_;
  Matrix tm_, tlm_;
  std::map<std::string, std::unique_ptr<Font>> fonts_;
  std::unique_ptr<Font> default_font_;
};

}  // namespace

PageContent interpret_page(const File& file, const Page& page) {
  PageContent out;
  const double w = page.width(), h = page.height();
  Matrix rotation;
  switch (page.rotate) {
    case 90: rotation = {0, -1, 1, 0, 0, w}; break;
    case 180: rotation = {-1, 0, 0, -1, w, h}; break;
    case 270: rotation = {0, 1, -1, 0, h, 0}; break;
    default: break;
  }
  const bool swapped = page.rotate == 90 || page.rotate == 270;
  out.width = swapped ? h : w;
  out.height = swapped ? w : h;

  std::string content;
  try {
    content = file.page_contents(page);
  } catch (const Error& e) {
    out.warnings.push_back(std::string("page_content_undecodable:") + e.code());
    return out;
  }
  Interpreter interp(file, out);
  interp.gs.ctm = Matrix::translate(-page.x0, -page.y0).times(rotation);
  interp.run(content, page.resources, 0);
  return out;
}

}  // namespace layerlab::pdf
