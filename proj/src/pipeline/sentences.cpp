#include "layerlab/pipeline/sentences.hpp"

#include "layerlab/doc/utf8.hpp"

namespace layerlab::pipeline {

namespace {

bool is_upper(char32_t c) {
  if (c < 128) return c >= U'A' && c <= U'Z';
  // Latin-1 supplement, Greek and Cyrillic capitals.
  return (c >= 0xC0 && c <= 0xDE && c != 0xD7) || (c >= 0x391 && c <= 0x3A9) || (c >= 0x410 && c <= 0x42F);
}

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

bool is_boundary(char32_t c) {
  return utf8::is_space(c) || c == U'(' || c == U'[' || c == U'{' || c == U'"' || c == U'\'' || c == 0x201C ||
         c == 0x2018;
}

// True when text[0, period) ends with `abbr` starting at a token boundary.
// A space inside `abbr` matches any whitespace run ("et al").
bool ends_with_abbreviation(std::u32string_view text, std::size_t period, const std::u32string& abbr) {
  std::size_t j = period;
  for (std::size_t i = abbr.size(); i-- > 0;) {
    if (j == 0) return false;
    if (abbr[i] == U' ') {
      if (!utf8::is_space(text[j - 1])) return false;
      while (j > 0 && utf8::is_space(text[j - 1])) --j;
      continue;
    }
    if (utf8::ascii_lower(text[j - 1]) != utf8::ascii_lower(abbr[i])) return false;
    --j;
  }
  return j == 0 || is_boundary(text[j - 1]);
}

}  // namespace

std::vector<doc::Span> segment_sentences(std::u32string_view text, const std::set<std::string>& abbreviations) {
  std::vector<std::u32string> abbrs;
  for (const auto& a : abbreviations) {
    std::u32string u = utf8::decode(a);
    while (!u.empty() && u.back() == U'.') u.pop_back();
    if (!u.empty()) abbrs.push_back(std::move(u));
  }

  std::vector<doc::Span> out;
  const std::size_t n = text.size();
  std::size_t start = 0;
  const auto skip_space = [&](std::size_t i) {
    while (i < n && utf8::is_space(text[i])) ++i;
    return i;
  };
  start = skip_space(0);

  for (std::size_t i = start; i < n; ++i) {
    const char32_t c = text[i];
    if (c != U'.' && c != U'?' && c != U'!') continue;
    if (i + 1 >= n || !utf8::is_space(text[i + 1])) continue;
    const std::size_t next = skip_space(i + 1);
    if (next >= n || !(is_upper(text[next]) || is_digit(text[next]))) continue;
    if (c == U'.') {
      bool abbreviated = false;
      for (const auto& a : abbrs)
        if (ends_with_abbreviation(text, i, a)) {
          abbreviated = true;
          break;
        }
      if (abbreviated) continue;
    }
    out.push_back({static_cast<std::int64_t>(start), static_cast<std::int64_t>(i + 1)});
    start = next;
    i = next - 1;
  }
  if (start < n) {
    std::size_t end = n;
    while (end > start && utf8::is_space(text[end - 1])) --end;
    if (end > start) out.push_back({static_cast<std::int64_t>(start), static_cast<std::int64_t>(end)});
  }
  return out;
}

std::vector<doc::Span> segment_sentences(std::string_view utf8_text, const std::set<std::string>& abbreviations) {
  return segment_sentences(utf8::decode(utf8_text), abbreviations);
}

}  // namespace layerlab::pipeline
