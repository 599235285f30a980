#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "layerlab/doc/document.hpp"
#include "layerlab/pdf/extract.hpp"
#include "layerlab/pipeline/config.hpp"

namespace layerlab::pipeline {

enum class BlockClass { paragraph, heading, table_candidate, caption, other };

std::string_view to_string(BlockClass cls);

// Which side of a detected column gutter a line sits on. Pages without a
// gutter have only `full` lines.
enum class ColumnSide { full, left, right };

struct Line {
  int page = 0;
  std::vector<pdf::Word> words;  // x-ordered
  doc::Box box;
  ColumnSide side = ColumnSide::full;
  double font_size = 0;  // largest word size, points
  double em = 0;         // font_size as a fraction of page width

  std::string text() const;
};

struct Block {
  int page = 0;
  std::vector<Line> lines;
  doc::Box box;
  BlockClass cls = BlockClass::paragraph;

  std::string text() const;  // lines joined by "\n"
};

// Center x of a whitespace gutter splitting the page into two columns, if
// one exists: a 0.04-wide vertical strip inside [0.45, 0.55] free of words
// over at least 60% of the text height, with text on both sides.
std::optional<double> detect_gutter(const std::vector<pdf::Word>& words);

// Groups one page's words into lines returned in reading order. Words join a
// line when their vertical centers differ by less than
// line_gap_factor x median word height and their extents overlap vertically.
std::vector<Line> build_lines(const std::vector<pdf::Word>& words, const doc::PageInfo& page,
                              const PipelineConfig& config);

// Merges consecutive lines of one page into blocks (see BlockClass for the
// later classification step). Headings are kept in blocks of their own.
std::vector<Block> detect_blocks(const std::vector<Line>& lines, const PipelineConfig& config);

BlockClass classify_block(const Block& block, const PipelineConfig& config);

// A single line that reads like a section heading: numbered ("2.1 Methods")
// or a title-case section-lexicon term. Used to split headings off blocks.
bool looks_like_heading(const Line& line);
bool is_numbered_heading(std::string_view text);
bool is_lexicon_heading(std::string_view text);

// Heading text without its numbering and trailing punctuation.
std::string heading_name(std::string_view first_line);

// Alignment detector behind table_candidate: number of word-start columns
// (cell starts within 0.01 of each other) present in at least three lines.
int aligned_columns(const std::vector<Line>& lines);

struct Composition {
  std::u32string symbols;
  std::vector<doc::Span> block_spans;
  std::vector<std::vector<doc::Span>> line_spans;               // [block][line]
  std::vector<std::vector<std::vector<doc::Span>>> word_spans;  // [block][line][word]
};

// Words joined by " ", lines by "\n", blocks (and so pages) by "\n\n".
Composition compose_symbols(const std::vector<Block>& blocks);

}  // namespace layerlab::pipeline
