#pragma once

#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "layerlab/doc/document.hpp"
#include "layerlab/predictors/table.hpp"

// Independent reference implementations the library is checked against.
namespace layerlab::fixtures {

// Token-level reimplementation of the sentence splitting rule.
std::vector<doc::Span> sentence_oracle(const std::u32string& text, const std::set<std::string>& abbreviations);

// Hand-written sentence splits for scientific prose.
struct SentenceCase {
  std::string text;
  std::vector<std::string> sentences;
};
const std::vector<SentenceCase>& curated_sentence_cases();

// Smallest start offset at which some substring parses as a JSON object or
// array; every (start, end) pair is tried.
std::optional<nlohmann::json> brute_force_first_value(const std::string& s);
// Trimmed text is a single JSON object.
bool whole_response_oracle(const std::string& s);
// Prose, fenced and broken JSON fragments glued together.
std::string random_response(std::mt19937_64& rng);

// Exhaustive word-to-cell assignment from the raw row and column rectangles.
struct OracleAssignment {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::size_t> unassigned;
};
OracleAssignment oracle_assign(const std::vector<doc::Box>& rows, const std::vector<doc::Box>& columns,
                               const std::vector<predictors::CellWord>& words);

// Random full-width rows and full-height columns with words scattered over
// and slightly beyond the region.
struct RandomGrid {
  predictors::TableGeometry geometry;
  std::vector<predictors::CellWord> words;
};
RandomGrid random_grid(std::mt19937_64& rng);

}  // namespace layerlab::fixtures
