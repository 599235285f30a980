#include "fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "layerlab/doc/utf8.hpp"

namespace layerlab::fixtures {

using pdf::PdfBuilder;

double flow_text(PdfBuilder::PageBuilder& page, double x, double baseline, double width, double size,
                 double leading, const std::string& text) {
  std::istringstream in(text);
  std::string word, line;
  const auto emit = [&] {
    if (line.empty()) return;
    page.text(x, baseline, size, line);
    baseline += leading;
    line.clear();
  };
  while (in >> word) {
    const std::string candidate = line.empty() ? word : line + " " + word;
    if (!line.empty() && PdfBuilder::text_width(candidate, size) > width) {
      emit();
      line = word;
    } else {
      line = candidate;
    }
  }
  emit();
  return baseline;
}

std::string hello_world_pdf() {
  PdfBuilder b;
  b.add_page().text(72, 100, 12, "Hello world");
  return b.build();
}

std::string empty_page_pdf() {
  PdfBuilder b;
  b.add_page();
  return b.build();
}

std::string image_only_pdf() {
  PdfBuilder b;
  b.add_page().image(72, 72, 400, 300);
  b.add_page().image(100, 100, 200, 200);
  return b.build();
}

namespace {

const char* kIntro =
    "Porous aluminosilicates remain central to industrial catalysis, and the zeolite family offers a wide "
    "range of pore geometries for shape selective reactions. Recent reports describe faster crystallization "
    "under mild conditions, yet reproducible recipes are still scattered across the literature. This note "
    "collects representative routes and compares their reported conditions in a common format so that "
    "later extraction tools can be evaluated against a small known reference.";

const char* kMethods =
    "Each gel was prepared from sodium aluminate and a colloidal silica source with a structure directing "
    "agent added last under stirring. The ZSM-5 samples were aged for twelve hours before hydrothermal "
    "treatment in sealed autoclaves. Products were washed, dried overnight and calcined in flowing air. "
    "Fig. 2 summarizes the heating profile, and the ratio was 3.5 wt. % of the dry mass in every run. "
    "Yields were recorded after cooling to room temperature.";

}  // namespace

std::string ground_truth_pdf() {
  PdfBuilder b;
  auto& page = b.add_page();
  page.text(72, 90, 16, GroundTruth::kTitle);
  page.text(72, 140, 12, "1 Introduction");
  double base = flow_text(page, 72, 165, 468, 10, 12, kIntro);
  page.text(72, base + 30, 12, "2 Methods");
  flow_text(page, 72, base + 55, 468, 10, 12, kMethods);
  page.text(72, 520, 10, "Table 1: Synthesis parameters");
  for (std::size_t r = 0; r < GroundTruth::kTable.size(); ++r)
    for (std::size_t c = 0; c < GroundTruth::kTable[r].size(); ++c)
      page.text(GroundTruth::kTableX + GroundTruth::kColumnPitch * static_cast<double>(c),
                GroundTruth::kTableTop + GroundTruth::kRowPitch * static_cast<double>(r), 10,
                GroundTruth::kTable[r][c]);
  page.line(72, 740, 540, 740, 0.5);
  return b.build();
}

nlohmann::json ground_truth_regions() {
  constexpr double W = 612, H = 792;
  const int rows = static_cast<int>(GroundTruth::kTable.size());
  const int cols = static_cast<int>(GroundTruth::kTable.front().size());
  const double x0 = GroundTruth::kTableX - 6, y0 = GroundTruth::kTableTop - 12;
  const double width = GroundTruth::kColumnPitch * cols - 34, height = GroundTruth::kRowPitch * rows;
  nlohmann::json row_boxes = nlohmann::json::array(), column_boxes = nlohmann::json::array();
  for (int r = 0; r < rows; ++r)
    row_boxes.push_back({0.0, GroundTruth::kRowPitch * r / height, 1.0, GroundTruth::kRowPitch / height});
  for (int c = 0; c < cols; ++c) {
    const double left = GroundTruth::kColumnPitch * c, right = std::min(width, GroundTruth::kColumnPitch * (c + 1));
    column_boxes.push_back({left / width, 0.0, (right - left) / width, 1.0});
  }
  return {{"tables",
           {{{"box", {0, x0 / W, y0 / H, width / W, height / H}},
             {"geometry", {{"rows", row_boxes}, {"columns", column_boxes}}}}}}};
}

std::string ground_truth_lexicon() {
  return "# planted materials\nZSM-5\tMATERIAL\nsilica\tMATERIAL\nfaujasite\tMATERIAL\n";
}

std::string two_column_pdf(int lines_per_column) {
  PdfBuilder b;
  auto& page = b.add_page();
  for (int i = 0; i < lines_per_column; ++i) {
    const double base = 100 + 12.0 * i;
    page.text(50, base, 10, "L" + std::to_string(i) + " left column text runs here");
    page.text(345, base, 10, "R" + std::to_string(i) + " right column text runs here");
  }
  return b.build();
}

std::string page_break_pdf() {
  PdfBuilder b;
  auto& p1 = b.add_page();
  p1.text(72, 90, 12, "1 Introduction");
  flow_text(p1, 72, 700, 468, 10, 12,
            "The opening paragraph starts near the bottom of the first page and its final sentence is cut "
            "by the page break so that the words");
  auto& p2 = b.add_page();
  flow_text(p2, 72, 90, 468, 10, 12,
            "continue at the top of the second page. A second sentence follows here.");
  return b.build();
}

TempDir::TempDir() {
  static std::mt19937_64 rng(std::random_device{}());
  for (;;) {
    path_ = std::filesystem::temp_directory_path() / ("layerlab-test-" + std::to_string(rng()));
    if (std::filesystem::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

doc::Document random_document(std::mt19937_64& rng) {
  static const std::vector<std::string> vocab = {"zeolite", "ZSM-5", "silica", "the", "ratio", "Fig.",
                                                 "3.5",     "naïve", "αβγ",    "of",  "x",     "gel"};
  const auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  doc::Document d;
  d.doc_id = "doc" + std::to_string(rng() % 100000);
  const int page_count = 1 + static_cast<int>(rng() % 3);
  for (int p = 0; p < page_count; ++p) d.pages.push_back({p, uniform(200, 900), uniform(200, 1200)});

  std::vector<doc::Entity> words, lines;
  const int line_count = static_cast<int>(rng() % 12);
  for (int l = 0; l < line_count; ++l) {
    if (!d.symbols.empty()) d.symbols += U"\n";
    const int page = static_cast<int>(pick(static_cast<std::size_t>(page_count)));
    const double y = uniform(0, 0.95), h = uniform(0.005, 0.04);
    double x = uniform(0, 0.2);
    const int n = 1 + static_cast<int>(rng() % 6);
    doc::Entity line;
    line.id = l;
    const auto line_start = static_cast<std::int64_t>(d.symbols.size());
    for (int w = 0; w < n; ++w) {
      if (w) d.symbols += U" ";
      const std::u32string text = utf8::decode(vocab[pick(vocab.size())]);
      doc::Entity word;
      word.id = static_cast<std::int64_t>(words.size());
      const auto start = static_cast<std::int64_t>(d.symbols.size());
      d.symbols += text;
      word.spans = {{start, static_cast<std::int64_t>(d.symbols.size())}};
      const double ww = std::min(uniform(0.01, 0.12), 1.0 - x);
      word.boxes = {{page, x, y, ww, std::min(h, 1.0 - y)}};
      x = std::min(x + ww + uniform(0.001, 0.02), 0.99);
      words.push_back(std::move(word));
    }
    line.spans = {{line_start, static_cast<std::int64_t>(d.symbols.size())}};
    doc::Box box = words[words.size() - static_cast<std::size_t>(n)].boxes.front();
    for (std::size_t i = words.size() - static_cast<std::size_t>(n); i < words.size(); ++i)
      box = doc::enclose(box, words[i].boxes.front());
    line.boxes = {box};
    lines.push_back(std::move(line));
  }
  d.metadata = {{"source_filename", "random.pdf"}, {"pipeline_config_hash", std::to_string(rng() % 1000)}};
  d = doc::add_layer(std::move(d), "words", std::move(words));
  d = doc::add_layer(std::move(d), "lines", std::move(lines));

  const auto len = static_cast<std::int64_t>(d.symbols.size());
  const int extra_layers = static_cast<int>(rng() % 3);
  for (int k = 0; k < extra_layers; ++k) {
    std::vector<doc::Entity> entities;
    const int count = static_cast<int>(rng() % 6);
    for (int e = 0; e < count; ++e) {
      doc::Entity ent;
      ent.id = e * 3 + static_cast<int>(rng() % 3);
      std::int64_t cursor = 0;
      while (len > 0 && cursor < len && rng() % 3 != 0) {
        const std::int64_t start = cursor + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(len - cursor));
        if (start >= len) break;
        const std::int64_t end = start + 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(len - start));
        ent.spans.push_back({start, end});
        cursor = end;
      }
      const int boxes = ent.spans.empty() ? 1 + static_cast<int>(rng() % 2) : static_cast<int>(rng() % 3);
      for (int bx = 0; bx < boxes; ++bx) {
        const double x = uniform(0, 0.9), y = uniform(0, 0.9);
        ent.boxes.push_back({static_cast<int>(pick(static_cast<std::size_t>(page_count))), x, y,
                             uniform(0.001, 1.0 - x), uniform(0.001, 1.0 - y)});
      }
      ent.metadata = {{"label", vocab[pick(vocab.size())]},
                      {"score", uniform(0, 1)},
                      {"flag", rng() % 2 == 0},
                      {"nested", {{"n", static_cast<int>(rng() % 100)}, {"list", {1, "two", nullptr}}}}};
      entities.push_back(std::move(ent));
    }
    d = doc::add_layer(std::move(d), "extra_" + std::to_string(k), std::move(entities));
  }
  return d;
}

}  // namespace layerlab::fixtures
