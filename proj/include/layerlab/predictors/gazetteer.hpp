#pragma once

#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "layerlab/predict/interfaces.hpp"

namespace layerlab::predictors {

struct LexiconEntry {
  std::string surface;  // literal text, or an ECMAScript pattern when `regex`
  std::string label;
  bool regex = false;
  bool case_sensitive = false;
};

// TSV lines "surface<TAB>label[<TAB>flags]", flags a comma list of
// {regex, case_sensitive}; blank lines and "#" comments are skipped.
// Errors: lexicon-parse-error naming the line.
std::vector<LexiconEntry> parse_lexicon(std::string_view tsv);

// Dictionary tagger. Literal entries match whole words only; at each position
// the longest match wins (earlier entry on ties) and scanning resumes after it.
class GazetteerTagger : public predict::TokenClassificationPredictor {
 public:
  // Errors: invalid-lexicon.
  explicit GazetteerTagger(std::vector<LexiconEntry> entries);

  // Offsets are code points of `text`.
  std::vector<predict::TaggedSpan> tag(const std::string& text) const;
  std::vector<std::vector<predict::TaggedSpan>> tag_batch(const std::vector<std::string>& texts) override;

 private:
  struct Compiled {
    LexiconEntry entry;
    std::u32string folded;  // literal entries
    std::regex pattern;     // regex entries
  };
  std::vector<Compiled> entries_;
};

// "Word" characters for the boundary rule: ASCII alphanumerics, '_' and
// letters beyond Latin-1 punctuation.
bool is_word_char(char32_t c);

}  // namespace layerlab::predictors
