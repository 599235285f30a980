#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "layerlab/doc/document.hpp"

namespace layerlab::pipeline {

// Rule-based splitter for scientific prose. A sentence ends after '.', '?' or
// '!' followed by whitespace and then an uppercase letter or a digit, unless
// the period closes one of `abbreviations` (compared case-insensitively).
// Returned spans are local code-point offsets, ordered and disjoint, and
// cover every non-whitespace character of `text`.
std::vector<doc::Span> segment_sentences(std::u32string_view text, const std::set<std::string>& abbreviations);

// UTF-8 convenience overload; offsets are still code points.
std::vector<doc::Span> segment_sentences(std::string_view utf8_text, const std::set<std::string>& abbreviations);

}  // namespace layerlab::pipeline
