#include "layerlab/pdf/font.hpp"

#include <cstdlib>
#include <unordered_map>

#include "layerlab/error.hpp"

namespace layerlab::pdf {

namespace {

// Helvetica AFM advance widths for codes 32..126.
constexpr double kHelvetica[95] = {
    278, 278, 355, 556, 556, 889, 667, 191, 333, 333, 389, 584, 278, 333, 278, 278,   // 32-47
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, 278, 278, 584, 584, 584, 556,   // 48-63
    1015, 667, 667, 722, 722, 667, 611, 778, 722, 278, 500, 667, 556, 833, 722, 778,  // 64-79
    667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, 278, 278, 278, 469, 556,   // 80-95
    333, 556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500, 222, 833, 556, 556,   // 96-111
    556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500, 334, 260, 334, 584};       // 112-126

constexpr char32_t kWinAnsiHigh[32] = {
    0x20AC, 0xFFFD, 0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
    0x2039, 0x0152, 0xFFFD, 0x017D, 0xFFFD, 0xFFFD, 0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
    0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0xFFFD, 0x017E, 0x0178};

const std::unordered_map<std::string_view, std::u32string>& glyph_names() {
  static const std::unordered_map<std::string_view, std::u32string> names = {
      {"space", U" "}, {"exclam", U"!"}, {"quotedbl", U"\""}, {"numbersign", U"#"}, {"dollar", U"$"},
      {"percent", U"%"}, {"ampersand", U"&"}, {"quotesingle", U"'"}, {"parenleft", U"("},
      {"parenright", U")"}, {"asterisk", U"*"}, {"plus", U"+"}, {"comma", U","}, {"hyphen", U"-"},
      {"period", U"."}, {"slash", U"/"}, {"zero", U"0"}, {"one", U"1"}, {"two", U"2"}, {"three", U"3"},
      {"four", U"4"}, {"five", U"5"}, {"six", U"6"}, {"seven", U"7"}, {"eight", U"8"}, {"nine", U"9"},
      {"colon", U":"}, {"semicolon", U";"}, {"less", U"<"}, {"equal", U"="}, {"greater", U">"},
      {"question", U"?"}, {"at", U"@"}, {"bracketleft", U"["}, {"backslash", U"\\"},
      {"bracketright", U"]"}, {"asciicircum", U"^"}, {"underscore", U"_"}, {"grave", U"`"},
      {"braceleft", U"{"}, {"bar", U"|"}, {"braceright", U"}"}, {"asciitilde", U"~"},
      {"quoteleft", U"‘"}, {"quoteright", U"’"}, {"quotedblleft", U"“"},
      {"quotedblright", U"”"}, {"endash", U"–"}, {"emdash", U"—"}, {"bullet", U"•"},
      {"fi", U"fi"}, {"fl", U"fl"}, {"ff", U"ff"}, {"ffi", U"ffi"}, {"ffl", U"ffl"}, {"degree", U"°"},
      {"plusminus", U"±"}, {"multiply", U"×"}, {"mu", U"µ"}, {"minus", U"−"},
      {"periodcentered", U"·"}, {"dagger", U"†"}, {"daggerdbl", U"‡"},
      {"ellipsis", U"…"}, {"copyright", U"©"}, {"registered", U"®"},
      {"section", U"§"}, {"paragraph", U"¶"}, {"eacute", U"é"}, {"egrave", U"è"},
      {"aacute", U"á"}, {"agrave", U"à"}, {"odieresis", U"ö"}, {"udieresis", U"ü"},
      {"adieresis", U"ä"}, {"germandbls", U"ß"}, {"ccedilla", U"ç"},
      {"alpha", U"α"}, {"beta", U"β"}, {"gamma", U"γ"}, {"delta", U"δ"},
      {"lambda", U"λ"}, {"sigma", U"σ"}, {"theta", U"θ"}, {"pi", U"π"},
      {"Delta", U"Δ"}, {"Omega", U"Ω"}, {"angstrom", U"Å"}, {"Aring", U"Å"},
  };
  return names;
}

std::u32string utf16be_to_u32(std::string_view bytes) {
  std::u32string out;
  for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) {
    char32_t unit = (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
    if (unit >= 0xD800 && unit <= 0xDBFF && i + 3 < bytes.size()) {
      const char32_t low =
          (static_cast<unsigned char>(bytes[i + 2]) << 8) | static_cast<unsigned char>(bytes[i + 3]);
      if (low >= 0xDC00 && low <= 0xDFFF) {
        out.push_back(0x10000 + ((unit - 0xD800) << 10) + (low - 0xDC00));
        i += 2;
        continue;
      }
    }
    out.push_back(unit);
  }
  if (bytes.size() == 1) out.push_back(static_cast<unsigned char>(bytes[0]));
  return out;
}

unsigned code_of(std::string_view bytes) {
  unsigned v = 0;
  for (char c : bytes) v = (v << 8) | static_cast<unsigned char>(c);
  return v;
}

double number(const File& file, const Object& o, double fallback) { return file.resolve(o).number_or(fallback); }

}  // namespace

double helvetica_width(unsigned char code) {
  if (code >= 32 && code <= 126) return kHelvetica[code - 32];
  return 556;
}

char32_t win_ansi_to_unicode(unsigned char code) {
  if (code >= 0x80 && code <= 0x9F) return kWinAnsiHigh[code - 0x80];
  return code;
}

std::u32string glyph_name_to_unicode(std::string_view name) {
  if (auto dot = name.find('.'); dot != std::string_view::npos && dot > 0) name = name.substr(0, dot);
  if (name.size() == 1 && ((name[0] >= 'a' && name[0] <= 'z') || (name[0] >= 'A' && name[0] <= 'Z')))
    return std::u32string(1, static_cast<char32_t>(name[0]));
  const auto& names = glyph_names();
  if (auto it = names.find(name); it != names.end()) return it->second;
  if (name.size() == 7 && name.substr(0, 3) == "uni") {
    const std::string hex(name.substr(3));
    return std::u32string(1, static_cast<char32_t>(std::strtoul(hex.c_str(), nullptr, 16)));
  }
  if (name.size() >= 5 && name.size() <= 7 && name[0] == 'u') {
    const std::string hex(name.substr(1));
    char* end = nullptr;
    const auto v = std::strtoul(hex.c_str(), &end, 16);
    if (end && *end == '\0') return std::u32string(1, static_cast<char32_t>(v));
  }
  return {};
}

std::map<unsigned, std::u32string> parse_to_unicode_cmap(std::string_view cmap, int& code_bytes) {
  std::map<unsigned, std::u32string> out;
  Parser p(cmap);
  std::vector<Object> operands;
  while (true) {
    std::optional<Object> tok;
    try {
      tok = p.next();
    } catch (const Error&) {
      break;
    }
    if (!tok) break;
    const Keyword* kw = tok->keyword();
    if (!kw) {
      operands.push_back(std::move(*tok));
      continue;
    }
    const std::string& op = kw->value;
    if (op == "begincodespacerange" || op == "beginbfchar" || op == "beginbfrange") {
      operands.clear();
    } else if (op == "endcodespacerange") {
      if (!operands.empty())
        if (const std::string* lo = operands.front().string()) code_bytes = static_cast<int>(lo->size());
      operands.clear();
    } else if (op == "endbfchar") {
      for (std::size_t i = 0; i + 1 < operands.size(); i += 2) {
        const std::string* src = operands[i].string();
        const std::string* dst = operands[i + 1].string();
        if (src && dst) out[code_of(*src)] = utf16be_to_u32(*dst);
        else if (src && operands[i + 1].name()) out[code_of(*src)] = glyph_name_to_unicode(*operands[i + 1].name());
      }
      operands.clear();
    } else if (op == "endbfrange") {
      for (std::size_t i = 0; i + 2 < operands.size(); i += 3) {
        const std::string* lo = operands[i].string();
        const std::string* hi = operands[i + 1].string();
        if (!lo || !hi) continue;
        const unsigned a = code_of(*lo), b = code_of(*hi);
        if (b < a || b - a > 65535) continue;
        if (const std::string* dst = operands[i + 2].string()) {
          std::u32string base = utf16be_to_u32(*dst);
          for (unsigned c = a; c <= b; ++c) {
            std::u32string t = base;
            if (!t.empty()) t.back() += (c - a);
            out[c] = std::move(t);
          }
        } else if (const Array* arr = operands[i + 2].array()) {
          for (unsigned c = a; c <= b && c - a < arr->size(); ++c)
            if (const std::string* d = (*arr)[c - a].string()) out[c] = utf16be_to_u32(*d);
        }
      }
      operands.clear();
    } else {
      operands.clear();
    }
  }
  return out;
}

Font Font::standard() {
  Font f;
  for (int c = 0; c < 256; ++c) f.encoding_[c] = win_ansi_to_unicode(static_cast<unsigned char>(c));
  f.helvetica_metrics_ = true;
  return f;
}

Font Font::load(const File& file, const Dict& font_dict) {
  Font f;
  for (int c = 0; c < 256; ++c) f.encoding_[c] = win_ansi_to_unicode(static_cast<unsigned char>(c));

  const auto get = [&](const Dict& d, const char* key) -> const Object* {
    const Object* o = lookup(d, key);
    return o ? &file.resolve(*o) : nullptr;
  };
  const Object* subtype = get(font_dict, "Subtype");
  const std::string sub = subtype && subtype->name() ? *subtype->name() : "Type1";
  const Object* base_font = get(font_dict, "BaseFont");
  const std::string base = base_font && base_font->name() ? *base_font->name() : "";

  const Dict* descriptor_dict = nullptr;

  if (sub == "Type0") {
    // Composite fonts are assumed to use 2-byte codes (Identity-H) unless the
    // ToUnicode codespace says otherwise.
    f.code_bytes_ = 2;
    if (const Object* desc = get(font_dict, "DescendantFonts")) {
      if (const Array* a = desc->array(); a && !a->empty()) {
        if (const Dict* cid = file.resolve(a->front()).dict()) {
          if (const Object* dw = get(*cid, "DW")) f.default_width_ = dw->number_or(1000);
          else f.default_width_ = 1000;
          if (const Object* w = get(*cid, "W"); w && w->array()) {
            const Array& arr = *w->array();
            std::size_t i = 0;
            while (i < arr.size()) {
              const auto first = static_cast<unsigned>(number(file, arr[i], 0));
              if (i + 1 < arr.size() && file.resolve(arr[i + 1]).array()) {
                const Array& ws = *file.resolve(arr[i + 1]).array();
                for (std::size_t k = 0; k < ws.size(); ++k)
                  f.widths_[first + static_cast<unsigned>(k)] = number(file, ws[k], f.default_width_);
                i += 2;
              } else if (i + 2 < arr.size()) {
                const auto last = static_cast<unsigned>(number(file, arr[i + 1], 0));
                const double width = number(file, arr[i + 2], f.default_width_);
                for (unsigned c = first; c <= last && c - first < 65536; ++c) f.widths_[c] = width;
                i += 3;
              } else {
                break;
              }
            }
          }
          if (const Object* fd = get(*cid, "FontDescriptor")) descriptor_dict = fd->dict();
        }
      }
    }
  } else {
    if (const Object* enc = get(font_dict, "Encoding")) {
      std::string base_encoding = enc->name() ? *enc->name() : "";
      const Array* differences = nullptr;
      if (const Dict* ed = enc->dict()) {
        if (const Object* be = get(*ed, "BaseEncoding"); be && be->name()) base_encoding = *be->name();
        if (const Object* diff = get(*ed, "Differences")) differences = diff->array();
      }
      if (base_encoding == "StandardEncoding") {
        f.encoding_[0x27] = 0x2019;
        f.encoding_[0x60] = 0x2018;
      }
      if (differences) {
        unsigned code = 0;
        for (const auto& item : *differences) {
          const Object& o = file.resolve(item);
          if (o.is_number()) {
            code = static_cast<unsigned>(o.int_or(0));
          } else if (const std::string* n = o.name()) {
            if (code < 256) {
              const std::u32string u = glyph_name_to_unicode(*n);
              f.encoding_[code] = u.size() == 1 ? u[0] : 0;
              if (u.size() > 1) f.to_unicode_[code] = u;
            }
            ++code;
          }
        }
      }
    }
    if (const Object* first = get(font_dict, "FirstChar")) {
      const auto fc = static_cast<unsigned>(first->int_or(0));
      if (const Object* w = get(font_dict, "Widths"); w && w->array()) {
        const Array& arr = *w->array();
        for (std::size_t i = 0; i < arr.size(); ++i) f.widths_[fc + static_cast<unsigned>(i)] = number(file, arr[i], 0);
      }
    }
    if (const Object* fd = get(font_dict, "FontDescriptor")) descriptor_dict = fd->dict();
    if (f.widths_.empty()) {
      if (base.find("Courier") != std::string::npos) {
        f.monospace_ = true;
        f.default_width_ = 600;
      } else {
        // Times/Symbol metrics are approximated by Helvetica's.
        f.helvetica_metrics_ = true;
      }
    }
    if (sub == "Type3") {
      if (const Object* fm = get(font_dict, "FontMatrix"); fm && fm->array() && !fm->array()->empty())
        f.scale_ = number(file, fm->array()->front(), 0.001);
    }
  }

  if (descriptor_dict) {
    if (const Object* a = get(*descriptor_dict, "Ascent"); a && a->is_number() && a->number_or(0) > 0)
      f.ascent_ = a->number_or(718) / 1000.0;
    if (const Object* d = get(*descriptor_dict, "Descent"); d && d->is_number() && d->number_or(0) < 0)
      f.descent_ = d->number_or(-207) / 1000.0;
    if (const Object* mw = get(*descriptor_dict, "MissingWidth"); mw && mw->number_or(0) > 0 && sub != "Type0")
      f.default_width_ = mw->number_or(500);
  }

  if (const Object* tu = get(font_dict, "ToUnicode"); tu && tu->stream()) {
    try {
      int bytes = f.code_bytes_;
      auto map = parse_to_unicode_cmap(file.decode_stream(*tu->stream()), bytes);
      for (auto& [code, text] : map) f.to_unicode_[code] = std::move(text);
      if (sub == "Type0" && (bytes == 1 || bytes == 2)) f.code_bytes_ = bytes;
    } catch (const Error&) {
    }
  }
  return f;
}

std::vector<Font::Code> Font::decode(std::string_view s) const {
  std::vector<Code> out;
  out.reserve(s.size() / static_cast<std::size_t>(code_bytes_) + 1);
  std::size_t i = 0;
  while (i < s.size()) {
    Code c;
    c.bytes = std::min<int>(code_bytes_, static_cast<int>(s.size() - i));
    c.code = code_of(s.substr(i, static_cast<std::size_t>(c.bytes)));
    i += static_cast<std::size_t>(c.bytes);
    if (auto it = to_unicode_.find(c.code); it != to_unicode_.end()) {
      c.text = it->second;
    } else if (code_bytes_ == 1) {
      const char32_t u = encoding_[c.code & 0xFF];
      if (u != 0) c.text = std::u32string(1, u);
    } else {
      // Identity-H without ToUnicode: the CID is the best guess available.
      c.text = std::u32string(1, static_cast<char32_t>(c.code));
    }
    double w = default_width_;
    if (auto it = widths_.find(c.code); it != widths_.end()) {
      w = it->second;
    } else if (helvetica_metrics_ && code_bytes_ == 1) {
      w = helvetica_width(static_cast<unsigned char>(c.code));
    } else if (monospace_) {
      w = 600;
    }
    c.width = w * scale_;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace layerlab::pdf
