#include "layerlab/pipeline/layout.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <regex>
#include <set>

#include "layerlab/doc/utf8.hpp"

namespace layerlab::pipeline {

namespace {

constexpr double kGutterWidth = 0.04;
constexpr double kGutterMin = 0.45;
constexpr double kGutterMax = 0.55;
constexpr double kGutterFreeFraction = 0.6;
constexpr double kColumnTolerance = 0.01;
constexpr double kCellGapEm = 1.0;

double median(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double center_y(const doc::Box& b) { return b.y + 0.5 * b.h; }

double overlap(double a0, double a1, double b0, double b1) { return std::min(a1, b1) - std::max(a0, b0); }

double vertical_overlap(const doc::Box& a, const doc::Box& b) { return overlap(a.y, a.bottom(), b.y, b.bottom()); }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

const std::regex& numbered_re() {
  static const std::regex re(R"(^\d+(\.\d+)*\.?\s+\S)");
  return re;
}

const std::regex& numbering_prefix_re() {
  static const std::regex re(R"(^\s*(\d+(\.\d+)*\.?|[IVXLC]+\.)\s+)");
  return re;
}

const std::regex& caption_re() {
  static const std::regex re(R"(^(Figure|Fig\.|Table)\s+\d+)");
  return re;
}

const std::set<std::string>& section_lexicon() {
  static const std::set<std::string> lex = {
      "abstract",       "introduction",     "method",          "methods",
      "methodology",    "results",          "result",          "discussion",
      "conclusion",     "conclusions",      "references",      "bibliography",
      "acknowledgements", "acknowledgments", "acknowledgement", "acknowledgment",
      "appendix",       "related work",     "materials and methods",
      "results and discussion", "experimental", "background"};
  return lex;
}

bool is_title_case(std::string_view text) {
  static const std::set<std::string> minor = {"a",  "an", "and", "as",  "at", "by",  "for", "from",
                                              "in", "of", "on",  "or",  "the", "to", "via", "with"};
  bool any_word = false;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) {
      const std::string word(text.substr(i, j - i));
      const unsigned char first = static_cast<unsigned char>(word[0]);
      if (std::isalpha(first)) {
        any_word = true;
        std::string lower;
        for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        if (std::islower(first) && minor.count(lower) == 0) return false;
      }
    }
    i = j;
  }
  return any_word;
}

// Numbered heading whose text after the numbering starts with a capital.
bool numbered_with_title(std::string_view text) {
  const std::string s(text);
  std::smatch m;
  if (!std::regex_search(s, m, numbered_re())) return false;
  const char first = s[static_cast<std::size_t>(m.length(0)) - 1];
  return std::isupper(static_cast<unsigned char>(first)) != 0;
}

bool is_caption_text(std::string_view text) {
  return std::regex_search(std::string(text), caption_re());
}

// Word indices starting a table cell: the first word and any word preceded by
// a gap wider than kCellGapEm.
std::vector<std::size_t> cell_starts(const Line& line) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < line.words.size(); ++i) {
    if (i == 0 || line.words[i].box.x - line.words[i - 1].box.right() > kCellGapEm * line.em) out.push_back(i);
  }
  return out;
}

void finish_line(Line& line, const doc::PageInfo& page) {
  std::stable_sort(line.words.begin(), line.words.end(),
                   [](const pdf::Word& a, const pdf::Word& b) { return a.box.x < b.box.x; });
  line.box = line.words.front().box;
  line.font_size = 0;
  for (const auto& w : line.words) {
    line.box = doc::enclose(line.box, w.box);
    line.font_size = std::max(line.font_size, w.font_size);
  }
  line.em = page.width_pts > 0 ? line.font_size / page.width_pts : 0;
}

}  // namespace

std::string_view to_string(BlockClass cls) {
  switch (cls) {
    case BlockClass::paragraph: return "paragraph";
    case BlockClass::heading: return "heading";
    case BlockClass::table_candidate: return "table_candidate";
    case BlockClass::caption: return "caption";
    case BlockClass::other: return "other";
  }
  return "other";
}

std::string Line::text() const {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w.text;
  }
  return out;
}

std::string Block::text() const {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines[i].text();
  }
  return out;
}

std::optional<double> detect_gutter(const std::vector<pdf::Word>& words) {
  if (words.size() < 4) return std::nullopt;
  double top = 1, bottom = 0;
  std::vector<double> heights;
  for (const auto& w : words) {
    top = std::min(top, w.box.y);
    bottom = std::max(bottom, w.box.bottom());
    heights.push_back(w.box.h);
  }
  const double height = bottom - top;
  if (height <= 0) return std::nullopt;
  // Interline leading is closed up so a dense paragraph counts as solid.
  const double close = 0.5 * median(heights);

  constexpr int kBins = 2000;
  const auto mark = [&](std::vector<char>& bins, const doc::Box& b) {
    const double y0 = (b.y - close - top) / height, y1 = (b.bottom() + close - top) / height;
    const int i0 = std::clamp(static_cast<int>(std::floor(y0 * kBins)), 0, kBins);
    const int i1 = std::clamp(static_cast<int>(std::ceil(y1 * kBins)), 0, kBins);
    for (int i = i0; i < i1; ++i) bins[i] = 1;
  };

  std::vector<double> candidates;
  for (int k = 0; k <= 24; ++k) candidates.push_back(kGutterMin + kGutterWidth / 2 + 0.0025 * k);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](double a, double b) { return std::abs(a - 0.5) < std::abs(b - 0.5); });

  std::optional<double> best;
  double best_free = -1;
  for (double c : candidates) {
    const double lo = c - kGutterWidth / 2, hi = c + kGutterWidth / 2;
    if (lo < kGutterMin - 1e-9 || hi > kGutterMax + 1e-9) continue;
    std::vector<char> blocked(kBins, 0), left(kBins, 0), right(kBins, 0);
    for (const auto& w : words) {
      if (w.box.right() <= lo) mark(left, w.box);
      else if (w.box.x >= hi) mark(right, w.box);
      else mark(blocked, w.box);
    }
    int free_bins = 0, both_sides = 0;
    for (int i = 0; i < kBins; ++i) {
      if (blocked[i]) continue;
      ++free_bins;
      if (left[i] && right[i]) ++both_sides;
    }
    const double free = static_cast<double>(free_bins) / kBins;
    // The free strip must actually separate text, not just run beside
    // headings and blank space.
    if (free < kGutterFreeFraction || both_sides < free_bins / 2) continue;
    if (free > best_free + 1e-12) {
      best_free = free;
      best = c;
    }
  }
  return best;
}

std::vector<Line> build_lines(const std::vector<pdf::Word>& words, const doc::PageInfo& page,
                              const PipelineConfig& config) {
  std::vector<Line> lines;
  if (words.empty()) return lines;

  std::vector<double> heights;
  for (const auto& w : words) heights.push_back(w.box.h);
  const double tolerance = config.line_gap_factor * median(heights);
  const std::optional<double> gutter = detect_gutter(words);

  const auto side_of = [&](const doc::Box& b) {
    if (!gutter) return ColumnSide::full;
    if (b.right() <= *gutter - kGutterWidth / 2) return ColumnSide::left;
    if (b.x >= *gutter + kGutterWidth / 2) return ColumnSide::right;
    return ColumnSide::full;
  };

  std::vector<std::size_t> order(words.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<ColumnSide> sides;
  for (const auto& w : words) sides.push_back(side_of(w.box));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sides[a] != sides[b]) return sides[a] < sides[b];
    const double ca = center_y(words[a].box), cb = center_y(words[b].box);
    if (ca != cb) return ca < cb;
    return words[a].box.x < words[b].box.x;
  });

  std::array<int, 3> current = {-1, -1, -1};
  for (std::size_t idx : order) {
    const pdf::Word& w = words[idx];
    const auto s = static_cast<std::size_t>(sides[idx]);
    bool joined = false;
    if (current[s] >= 0) {
      Line& line = lines[static_cast<std::size_t>(current[s])];
      const double min_h = std::min(w.box.h, line.box.h);
      if (std::abs(center_y(w.box) - center_y(line.box)) < tolerance &&
          vertical_overlap(w.box, line.box) >= 0.2 * min_h) {
        line.words.push_back(w);
        line.box = doc::enclose(line.box, w.box);
        joined = true;
      }
    }
    if (!joined) {
      Line line;
      line.page = page.index;
      line.side = sides[idx];
      line.words.push_back(w);
      line.box = w.box;
      lines.push_back(std::move(line));
      current[s] = static_cast<int>(lines.size()) - 1;
    }
  }

  // A full-width line swallows column fragments sitting in the same band
  // (e.g. a centered title whose words happen to straddle the gutter).
  if (gutter) {
    std::vector<bool> absorbed(lines.size(), false);
    for (std::size_t f = 0; f < lines.size(); ++f) {
      if (lines[f].side != ColumnSide::full) continue;
      for (std::size_t c = 0; c < lines.size(); ++c) {
        if (absorbed[c] || lines[c].side == ColumnSide::full) continue;
        const double min_h = std::min(lines[f].box.h, lines[c].box.h);
        if (vertical_overlap(lines[f].box, lines[c].box) >= 0.5 * min_h) {
          for (auto& w : lines[c].words) lines[f].words.push_back(std::move(w));
          lines[f].box = doc::enclose(lines[f].box, lines[c].box);
          absorbed[c] = true;
        }
      }
    }
    std::vector<Line> kept;
    for (std::size_t i = 0; i < lines.size(); ++i)
      if (!absorbed[i]) kept.push_back(std::move(lines[i]));
    lines = std::move(kept);
  }

  for (auto& line : lines) finish_line(line, page);

  const auto by_position = [](const Line& a, const Line& b) {
    if (a.box.y != b.box.y) return a.box.y < b.box.y;
    return a.box.x < b.box.x;
  };
  if (!gutter) {
    std::stable_sort(lines.begin(), lines.end(), by_position);
    return lines;
  }

  // Full-width lines cut the page into bands; within a band the left column
  // is read before the right one.
  std::vector<Line> full, columns;
  for (auto& line : lines) (line.side == ColumnSide::full ? full : columns).push_back(std::move(line));
  std::stable_sort(full.begin(), full.end(), by_position);
  const auto band_of = [&](const Line& line) {
    std::size_t band = 0;
    while (band < full.size() && center_y(full[band].box) < center_y(line.box)) ++band;
    return band;
  };
  std::stable_sort(columns.begin(), columns.end(), [&](const Line& a, const Line& b) {
    const std::size_t ba = band_of(a), bb = band_of(b);
    if (ba != bb) return ba < bb;
    if (a.side != b.side) return a.side < b.side;
    return by_position(a, b);
  });
  std::vector<Line> ordered;
  std::size_t ci = 0;
  for (std::size_t band = 0; band <= full.size(); ++band) {
    while (ci < columns.size() && band_of(columns[ci]) == band) ordered.push_back(std::move(columns[ci++]));
    if (band < full.size()) ordered.push_back(std::move(full[band]));
  }
  return ordered;
}

bool is_numbered_heading(std::string_view text) { return numbered_with_title(trim(text)); }

bool is_lexicon_heading(std::string_view text) {
  const std::string line = trim(text);
  if (line.empty() || utf8::decode(line).size() >= 60) return false;
  const std::string name = heading_name(line);
  if (!is_title_case(name)) return false;
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return section_lexicon().count(lower) > 0;
}

bool looks_like_heading(const Line& line) {
  const std::string text = line.text();
  if (is_lexicon_heading(text)) return true;
  if (text.size() > 100 || !is_numbered_heading(text)) return false;
  // Table rows led by a number have wide gaps between their cells.
  for (std::size_t i = 2; i < line.words.size(); ++i)
    if (line.words[i].box.x - line.words[i - 1].box.right() > 1.5 * line.em) return false;
  return true;
}

std::string heading_name(std::string_view first_line) {
  std::string s = trim(first_line);
  s = std::regex_replace(s, numbering_prefix_re(), "", std::regex_constants::format_first_only);
  while (!s.empty() && (s.back() == ':' || s.back() == '.' || std::isspace(static_cast<unsigned char>(s.back()))))
    s.pop_back();
  return trim(s);
}

int aligned_columns(const std::vector<Line>& lines) {
  struct Column {
    double anchor;
    std::set<std::size_t> lines;
  };
  std::vector<Column> columns;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    for (std::size_t wi : cell_starts(lines[li])) {
      const double x = lines[li].words[wi].box.x;
      Column* best = nullptr;
      for (auto& col : columns) {
        const double d = std::abs(col.anchor - x);
        if (d <= kColumnTolerance && (!best || d < std::abs(best->anchor - x))) best = &col;
      }
      if (best) best->lines.insert(li);
      else columns.push_back(Column{x, {li}});
    }
  }
  int count = 0;
  for (const auto& col : columns)
    if (col.lines.size() >= 3) ++count;
  return count;
}

std::vector<Block> detect_blocks(const std::vector<Line>& lines, const PipelineConfig& config) {
  std::vector<Block> blocks;
  if (lines.empty()) return blocks;
  std::vector<double> heights;
  for (const auto& l : lines) heights.push_back(l.box.h);
  const double max_gap = config.block_gap_factor * median(heights);

  std::vector<bool> heading(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) heading[i] = looks_like_heading(lines[i]);

  bool last_was_heading = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Line& next = lines[i];
    bool merge = !blocks.empty() && !heading[i] && !last_was_heading && !is_caption_text(next.text());
    if (merge) {
      const Line& prev = blocks.back().lines.back();
      const double gap = next.box.y - prev.box.bottom();
      const double min_h = std::min(prev.box.h, next.box.h);
      const double min_w = std::min(prev.box.w, next.box.w);
      const double big = std::max(prev.font_size, next.font_size), small = std::min(prev.font_size, next.font_size);
      merge = prev.page == next.page && prev.side == next.side && gap < max_gap && gap > -0.5 * min_h &&
              overlap(prev.box.x, prev.box.right(), next.box.x, next.box.right()) >= 0.5 * min_w &&
              (small <= 0 || big / small <= 1.2);
    }
    if (merge) {
      blocks.back().lines.push_back(next);
      blocks.back().box = doc::enclose(blocks.back().box, next.box);
    } else {
      Block b;
      b.page = next.page;
      b.lines.push_back(next);
      b.box = next.box;
      blocks.push_back(std::move(b));
    }
    last_was_heading = heading[i];
  }
  for (auto& b : blocks) b.cls = classify_block(b, config);
  return blocks;
}

BlockClass classify_block(const Block& block, const PipelineConfig& config) {
  if (block.lines.empty()) return BlockClass::other;
  if (block.lines.size() >= 3 && aligned_columns(block.lines) >= config.min_table_aligned_columns)
    return BlockClass::table_candidate;
  const std::string first = block.lines.front().text();
  if ((block.lines.size() <= 2 && is_numbered_heading(first)) || is_lexicon_heading(first))
    return BlockClass::heading;
  const std::string text = block.text();
  if (is_caption_text(text)) return BlockClass::caption;
  const bool has_letter = std::any_of(text.begin(), text.end(), [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || (static_cast<unsigned char>(c) & 0x80);
  });
  if (!has_letter) return BlockClass::other;
  return BlockClass::paragraph;
}

Composition compose_symbols(const std::vector<Block>& blocks) {
  Composition out;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    if (bi) out.symbols += U"\n\n";
    const auto block_start = static_cast<std::int64_t>(out.symbols.size());
    std::vector<doc::Span> lspans;
    std::vector<std::vector<doc::Span>> wspans;
    const auto& lines = blocks[bi].lines;
    for (std::size_t li = 0; li < lines.size(); ++li) {
      if (li) out.symbols.push_back(U'\n');
      const auto line_start = static_cast<std::int64_t>(out.symbols.size());
      std::vector<doc::Span> ws;
      for (std::size_t wi = 0; wi < lines[li].words.size(); ++wi) {
        if (wi) out.symbols.push_back(U' ');
        const auto start = static_cast<std::int64_t>(out.symbols.size());
        out.symbols += utf8::decode(lines[li].words[wi].text);
        ws.push_back({start, static_cast<std::int64_t>(out.symbols.size())});
      }
      lspans.push_back({line_start, static_cast<std::int64_t>(out.symbols.size())});
      wspans.push_back(std::move(ws));
    }
    out.block_spans.push_back({block_start, static_cast<std::int64_t>(out.symbols.size())});
    out.line_spans.push_back(std::move(lspans));
    out.word_spans.push_back(std::move(wspans));
  }
  return out;
}

}  // namespace layerlab::pipeline
