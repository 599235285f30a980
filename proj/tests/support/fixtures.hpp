#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "layerlab/doc/document.hpp"
#include "layerlab/pdf/writer.hpp"

namespace layerlab::fixtures {

// Lays `text` out left-aligned inside [x, x + width] starting at `baseline`,
// wrapping on spaces. Returns the baseline after the last line.
double flow_text(pdf::PdfBuilder::PageBuilder& page, double x, double baseline, double width, double size,
                 double leading, const std::string& text);

std::string hello_world_pdf();
std::string empty_page_pdf();
std::string image_only_pdf();

// Known-structure article: front-matter title, "1 Introduction" + paragraph,
// "2 Methods" + paragraph, "Table 1: ..." caption and a 4x3 aligned table.
struct GroundTruth {
  static constexpr int kSections = 3;
  static constexpr int kParagraphs = 3;
  static constexpr int kTables = 1;
  static inline const std::vector<std::string> kSectionNames = {"front_matter", "Introduction", "Methods"};
  static inline const std::string kTitle = "A Study of Zeolite Synthesis Routes";
  // MATERIAL terms planted in the Methods paragraph.
  static inline const std::vector<std::string> kPlantedMaterials = {"ZSM-5", "silica"};
  static inline const std::vector<std::vector<std::string>> kTable = {{"Material", "Temp", "Ratio"},
                                                                      {"Mordenite", "450", "0.50"},
                                                                      {"Faujasite", "420", "0.35"},
                                                                      {"Chabazite", "500", "0.80"}};
  // Table top-left and cell pitch in points, for region hints.
  static constexpr double kTableX = 72, kTableTop = 560, kColumnPitch = 140, kRowPitch = 16;
};
std::string ground_truth_pdf();
// Region sidecar for the ground-truth table: one hint with row and column
// boxes relative to the hinted region.
nlohmann::json ground_truth_regions();
// Gazetteer lexicon whose only matches in the fixture are kPlantedMaterials.
std::string ground_truth_lexicon();

// Two columns: left text in x < 0.45, right text in x > 0.55 of the page
// width, each column holding `lines_per_column` numbered lines "L<i> ..." /
// "R<i> ...".
std::string two_column_pdf(int lines_per_column = 12);

// Paragraph continued across a page break.
std::string page_break_pdf();

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

// Random valid document: symbols of random words, random pages, layers with
// sorted non-overlapping spans and in-bounds boxes.
doc::Document random_document(std::mt19937_64& rng);

}  // namespace layerlab::fixtures
