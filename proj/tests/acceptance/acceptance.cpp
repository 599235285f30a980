// Runs every acceptance criterion and prints one PASS/FAIL line per
// criterion. Exit status is non-zero when any criterion fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "layerlab/cli/batch.hpp"
#include "layerlab/doc/serialize.hpp"
#include "layerlab/doc/utf8.hpp"
#include "layerlab/error.hpp"
#include "layerlab/pdf/render.hpp"
#include "layerlab/pipeline/pipeline.hpp"
#include "layerlab/pipeline/sentences.hpp"
#include "layerlab/predict/records.hpp"
#include "layerlab/predict/runners.hpp"
#include "layerlab/predictors/builtin.hpp"
#include "layerlab/predictors/table.hpp"
#include "oracles.hpp"
#include "service_harness.hpp"

namespace {

using namespace layerlab;
using Json = nlohmann::json;
namespace fs = std::filesystem;
using fixtures::GroundTruth;

// Collects failed checks of one criterion.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
  }
};

struct Criterion {
  std::string name;
  double budget_s;  // 0 means no runtime bound
  std::function<std::string(Check&)> run;  // returns a short summary
};

std::string offset_coherence(Check& c) {
  std::mt19937_64 rng(1001);
  int cases = 0;
  while (cases < 1000) {
    const doc::Document d = fixtures::random_document(rng);
    const auto n = static_cast<std::int64_t>(d.symbols.size());
    if (n < 2) continue;
    for (int k = 0; k < 20 && cases < 1000; ++k, ++cases) {
      const std::int64_t ps = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n - 1));
      const std::int64_t pe = ps + 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n - ps));
      const std::int64_t len = pe - ps;
      const std::int64_t ls = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(len));
      const std::int64_t le = ls + 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(len - ls));
      doc::Entity parent;
      parent.spans = {{ps, pe}};
      doc::Entity mapped;
      mapped.spans = {doc::map_local_span(parent, {ls, le})};
      const std::u32string slice = d.symbols.substr(static_cast<std::size_t>(ps + ls), static_cast<std::size_t>(le - ls));
      c.expect(doc::text_of(d, mapped) == utf8::encode(slice), "case " + std::to_string(cases));
    }
  }
  return std::to_string(cases) + " pairs";
}

std::string serialization(Check& c) {
  std::mt19937_64 rng(2002);
  for (int i = 0; i < 200; ++i) {
    const doc::Document d = fixtures::random_document(rng);
    const std::string bytes = doc::serialize(d);
    const doc::Document back = doc::deserialize(bytes);
    c.expect(back == d, "document " + std::to_string(i) + " round trip");
    c.expect(doc::serialize(back) == bytes, "document " + std::to_string(i) + " bytes");
  }
  return "200 documents";
}

std::string pipeline_ground_truth(Check& c) {
  const std::string pdf = fixtures::ground_truth_pdf();
  const doc::Document d = pipeline::run_core_pipeline(pdf, {});
  c.expect(d.layer("sections").entities.size() == static_cast<std::size_t>(GroundTruth::kSections), "section count");
  c.expect(d.layer("paragraphs").entities.size() == static_cast<std::size_t>(GroundTruth::kParagraphs), "paragraph count");
  c.expect(d.layer("tables").entities.size() == static_cast<std::size_t>(GroundTruth::kTables), "table count");
  std::vector<std::string> sections, paragraph_sections;
  for (const auto& s : d.layer("sections").entities) sections.push_back(s.metadata["name"]);
  for (const auto& p : d.layer("paragraphs").entities) paragraph_sections.push_back(p.metadata["section"]);
  c.expect(sections == GroundTruth::kSectionNames, "section names");
  c.expect(paragraph_sections == GroundTruth::kSectionNames, "paragraph sections");
  c.expect(d.layer("tables").entities.empty() || d.layer("tables").entities[0].metadata["section"] == "Methods",
           "table section");
  c.expect(doc::serialize(d) == doc::serialize(pipeline::run_core_pipeline(pdf, {})), "byte-identical rerun");
  return "3 sections, 3 paragraphs, 1 table";
}

std::string sentences(Check& c) {
  const auto abbr = pipeline::default_abbreviations();
  const auto& cases = fixtures::curated_sentence_cases();
  for (const auto& sc : cases) {
    const std::u32string u = utf8::decode(sc.text);
    const auto spans = pipeline::segment_sentences(std::u32string_view(u), abbr);
    c.expect(spans == fixtures::sentence_oracle(u, abbr), "oracle: " + sc.text);
    std::vector<std::string> texts;
    for (const auto& s : spans)
      texts.push_back(utf8::encode(u.substr(static_cast<std::size_t>(s.start), static_cast<std::size_t>(s.length()))));
    c.expect(texts == sc.sentences, "expected split: " + sc.text);
  }
  return std::to_string(cases.size()) + " cases";
}

std::string table_cross_reference(Check& c) {
  std::mt19937_64 rng(5005);
  for (int i = 0; i < 100; ++i) {
    const auto [g, words] = fixtures::random_grid(rng);
    const auto got = predictors::assign_words_to_cells(g, words);
    const auto expected = fixtures::oracle_assign(g.rows, g.columns, words);
    c.expect(got.grid == expected.grid && got.unassigned == expected.unassigned, "grid " + std::to_string(i));
  }
  const std::string pdf = fixtures::ground_truth_pdf();
  pipeline::PipelineOptions opts;
  opts.table_hints = pipeline::parse_region_hints(fixtures::ground_truth_regions());
  predictors::GeometricTableParser parser({});
  const auto r = predict::run_image_predictor(pipeline::run_core_pipeline(pdf, {}, opts), parser, "geometric_table",
                                              pdf::PdfPageRenderer(pdf));
  c.expect(r.errors.empty(), "fixture table parsed without errors");
  const auto& results = r.document.layer(r.layer).entities;
  c.expect(results.size() == 1 && predict::TableRecord::from_json(results[0].metadata["table"]) ==
                                      predictors::grid_to_table_record(GroundTruth::kTable),
           "fixture table equals ground truth");
  return "100 grids + fixture";
}

// Fails on every third input ("p<i> ..." with i % 3 == 2).
struct EveryThird : predict::TextGenerationPredictor, predict::TokenClassificationPredictor {
  static bool fails(const std::string& t) { return std::stoi(t.substr(1)) % 3 == 2; }
  std::string generate(const std::string& text) override {
    if (fails(text)) throw Error("stub-failure", "every third input fails");
    return "{}";
  }
  std::vector<std::vector<predict::TaggedSpan>> tag_batch(const std::vector<std::string>& texts) override {
    std::vector<std::vector<predict::TaggedSpan>> out;
    for (const auto& t : texts) {
      if (fails(t)) throw Error("stub-failure", "every third input fails");
      out.push_back({{0, 1, "X", 1.0}});
    }
    return out;
  }
};

std::string isolation(Check& c) {
  doc::Document d;
  d.doc_id = "isolation";
  d.pages = {{0, 612, 792}};
  std::vector<doc::Entity> paragraphs, sentences;
  for (int i = 0; i < 30; ++i) {
    if (i) d.symbols += U"\n";
    const auto start = static_cast<std::int64_t>(d.symbols.size());
    d.symbols += utf8::decode("p" + std::to_string(i) + " input");
    doc::Entity e;
    e.id = i;
    e.spans = {{start, static_cast<std::int64_t>(d.symbols.size())}};
    e.boxes = {{0, 0.1, 0.03 * i, 0.5, 0.02}};
    paragraphs.push_back(e);
    sentences.push_back(e);
  }
  d = doc::add_layer(std::move(d), "paragraphs", std::move(paragraphs));
  d = doc::add_layer(std::move(d), "sentences", std::move(sentences));
  EveryThird stub;
  const auto text = predict::run_text_predictor(d, stub, "stub");
  const std::size_t text_ok = text.document.layer(text.layer).entities.size();
  c.expect(text_ok == 20 && text.errors.size() == 10, "text generation 20/10");
  predict::RunOptions opts;
  opts.batch_size = 1;
  const auto tags = predict::run_token_predictor(d, stub, "stub", opts);
  const std::size_t tag_ok = tags.document.layer(tags.layer).entities.size();
  c.expect(tag_ok == 20 && tags.errors.size() == 10, "token classification 20/10");
  c.expect(text_ok + text.errors.size() == 30 && tag_ok + tags.errors.size() == 30, "successes + errors = targets");
  return std::to_string(text_ok) + " results, " + std::to_string(text.errors.size()) + " errors";
}

std::string json_extraction(Check& c) {
  std::mt19937_64 rng(7007);
  for (int i = 0; i < 500; ++i) {
    const std::string s = fixtures::random_response(rng);
    c.expect(predict::parse_whole_response(s).ok() == fixtures::whole_response_oracle(s), "whole: " + s);
  }
  for (int i = 0; i < 500; ++i) {
    const std::string s = fixtures::random_response(rng);
    const auto expected = fixtures::brute_force_first_value(s);
    const auto got = predict::extract_first_json_value(s);
    c.expect(got.ok() == expected.has_value() && (!expected || *got.record == *expected), "extract: " + s);
  }
  return "500 + 500 strings";
}

const std::string kStubKey = "sk-acceptance-7d3f0c";

std::string end_to_end(Check& c) {
  fixtures::StubServer llm;
  fixtures::serve_chat_stub(llm, [](const std::string& user) {
    return "{\"chars\": " + std::to_string(user.size()) + "}";
  });
  fixtures::ServiceHarness h;
  const Json body = {
      {"predictors",
       {{{"name", "gazetteer"}, {"config", {{"lexicon", fixtures::ground_truth_lexicon()}}}},
        {{"name", "geometric_table"}},
        {{"name", "chat"},
         {"config", {{"endpoint_url", llm.url("/v1")}, {"model", "stub"}, {"api_key", kStubKey}, {"system_prompt", "Extract."}}}}}}};
  const auto [id, job] = h.run(fixtures::ground_truth_pdf(), body, fixtures::ground_truth_regions().dump());
  for (const auto& s : job["stages"]) c.expect(s["state"] == "done", "stage " + s["name"].get<std::string>() + " done");

  const auto summary = h.get_json("/documents/" + id + "/summary");
  std::vector<std::pair<std::string, std::string>> tagged;
  for (const auto& layer : summary["tagging"])
    for (const auto& row : layer["rows"])
      if (row["label"] == "MATERIAL") tagged.emplace_back(row["text"], row["section"]);
  std::sort(tagged.begin(), tagged.end());
  c.expect(tagged == std::vector<std::pair<std::string, std::string>>{{"ZSM-5", "Methods"}, {"silica", "Methods"}},
           "summary lists exactly the planted terms in Methods");
  const auto methods = h.get_json("/documents/" + id + "/summary?section=Methods");
  c.expect(methods["tagging"].size() == 1 && methods["tagging"][0]["rows"].size() == 2, "Methods filter keeps 2 rows");

  bool table_ok = false;
  for (const auto& layer : summary["images"])
    for (const auto& entry : layer["entries"])
      if (entry.contains("table"))
        table_ok = predict::TableRecord::from_json(entry["table"]) == predictors::grid_to_table_record(GroundTruth::kTable);
  c.expect(table_ok, "parsed table equals ground truth");
  c.expect(summary["generation"].size() == 1 && summary["generation"][0]["rows"].size() == 3,
           "generation rows for 3 paragraphs");

  std::size_t files = 0, leaks = 0;
  for (const auto& entry : fs::recursive_directory_iterator(h.data_dir())) {
    if (!entry.is_regular_file()) continue;
    ++files;
    leaks += fixtures::read_file(entry.path()).find(kStubKey) != std::string::npos;
  }
  c.expect(leaks == 0, std::to_string(leaks) + " stored files contain the API key");
  return std::to_string(files) + " artifacts scanned, " + std::to_string(leaks) + " key matches";
}

std::string cli_service_equivalence(Check& c) {
  fixtures::TempDir tmp;
  fs::create_directories(tmp.path() / "in");
  const std::string pdf = fixtures::ground_truth_pdf();
  fixtures::write_file(tmp.path() / "in" / "paper.pdf", pdf);
  fixtures::write_file(tmp.path() / "in" / "paper.regions.json", fixtures::ground_truth_regions().dump());
  const Json predictors = Json::array(
      {Json{{"name", "gazetteer"}, {"config", {{"lexicon", fixtures::ground_truth_lexicon()}}}}, Json{{"name", "geometric_table"}}});
  std::ostringstream out, err;
  const int code = cli::run_batch(cli::BatchConfig::from_json({{"input_dir", (tmp.path() / "in").string()},
                                                               {"output_dir", (tmp.path() / "out").string()},
                                                               {"predictors", predictors}}),
                                  predictors::default_registry(), out, err);
  c.expect(code == cli::kOk, "batch exit 0: " + err.str());
  fixtures::ServiceHarness h;
  const auto [id, job] = h.run(pdf, {{"predictors", predictors}}, fixtures::ground_truth_regions().dump());
  const std::string service_bytes = fixtures::read_file(h.data_dir() / "documents" / id / "document.json");
  const fs::path cli_doc = tmp.path() / "out" / id / "document.json";
  c.expect(fs::exists(cli_doc), "CLI wrote " + id);
  c.expect(fs::exists(cli_doc) && fixtures::read_file(cli_doc) == service_bytes, "document.json byte-identical");
  return std::to_string(service_bytes.size()) + " bytes compared";
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"offset-coherence", 5, offset_coherence},
      {"serialization-round-trip", 10, serialization},
      {"pipeline-determinism-and-ground-truth", 30, pipeline_ground_truth},
      {"sentence-segmentation", 0, sentences},
      {"table-cross-referencing", 20, table_cross_reference},
      {"predictor-isolation", 0, isolation},
      {"json-extraction", 0, json_extraction},
      {"end-to-end-api-contract", 60, end_to_end},
      {"cli-service-equivalence", 0, cli_service_equivalence},
  };
  int failed = 0;
  for (const auto& criterion : criteria) {
    Check check;
    std::string summary;
    const auto start = std::chrono::steady_clock::now();
    try {
      summary = criterion.run(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criterion.budget_s > 0 && secs >= criterion.budget_s)
      check.failures.push_back("runtime " + std::to_string(secs) + " s over budget");
    const bool pass = check.failures.empty();
    failed += !pass;
    std::ostringstream line;
    line << (pass ? "PASS " : "FAIL ") << criterion.name << " (" << summary;
    line.precision(2);
    line << std::fixed << "; " << secs << " s";
    if (criterion.budget_s > 0) line << " < " << criterion.budget_s << " s";
    line << ")";
    std::cout << line.str() << std::endl;
    for (const auto& f : check.failures) std::cout << "  - " << f << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
