#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "layerlab/doc/document.hpp"
#include "layerlab/pdf/content.hpp"

namespace layerlab::pdf {

// A whitespace-free run of glyphs with its normalized page box.
struct Word {
  std::string text;  // UTF-8, no whitespace
  doc::Box box;
  double font_size = 0;  // points
};

struct PageWords {
  doc::PageInfo info;
  std::vector<Word> words;
  bool has_images = false;
};

struct ExtractedPdf {
  std::vector<PageWords> pages;
  std::vector<std::string> warnings;
};

// Groups positioned glyphs into words: whitespace glyphs, horizontal gaps
// wider than 0.15 em, backward jumps and baseline changes all end a word.
std::vector<Word> group_words(const PageContent& content, int page_index);

// Errors: not-a-pdf, encrypted-pdf, malformed-pdf.
ExtractedPdf extract_words(std::string_view pdf_bytes);

}  // namespace layerlab::pdf
