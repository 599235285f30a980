#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "layerlab/pdf/file.hpp"

namespace layerlab::pdf {

// Advance width of a WinAnsi character in Helvetica, in 1/1000 em.
double helvetica_width(unsigned char code);

// WinAnsiEncoding code -> Unicode.
char32_t win_ansi_to_unicode(unsigned char code);

// Unicode value of an Adobe glyph name ("A", "zero", "uni00E9", "fi"...), or
// an empty string when the name is unknown.
std::u32string glyph_name_to_unicode(std::string_view name);

// Parses the bfchar/bfrange sections of a ToUnicode CMap. Returns the
// code -> text map and sets `code_bytes` from the codespace ranges.
std::map<unsigned, std::u32string> parse_to_unicode_cmap(std::string_view cmap, int& code_bytes);

class Font {
 public:
  struct Code {
    unsigned code = 0;
    int bytes = 1;
    std::u32string text;
    double width = 0;  // text-space units for a 1pt font
  };

  static Font load(const File& file, const Dict& font_dict);
  // Fallback when a Tf names a font missing from the resources.
  static Font standard();

  std::vector<Code> decode(std::string_view s) const;

  double ascent() const { return ascent_; }
  double descent() const { return descent_; }

 private:
  int code_bytes_ = 1;
  std::map<unsigned, std::u32string> to_unicode_;
  std::array<char32_t, 256> encoding_{};
  std::map<unsigned, double> widths_;  // glyph-space units
  double default_width_ = 500;
  bool helvetica_metrics_ = false;
  bool monospace_ = false;
  double scale_ = 0.001;  // glyph space -> text space
  double ascent_ = 0.718;
  double descent_ = -0.207;
};

}  // namespace layerlab::pdf
