#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <random>
#include <thread>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "layerlab/doc/utf8.hpp"
#include "layerlab/error.hpp"
#include "layerlab/pipeline/pipeline.hpp"
#include "layerlab/predict/runners.hpp"
#include "layerlab/predictors/builtin.hpp"
#include "layerlab/predictors/chat.hpp"
#include "layerlab/predictors/gazetteer.hpp"
#include "layerlab/predictors/remote_image.hpp"
#include "layerlab/predictors/table.hpp"
#include "stub_server.hpp"

namespace layerlab {
namespace {

using doc::Box;
using predict::Json;
using predict::TaggedSpan;
using predictors::CellWord;
using predictors::GazetteerTagger;
using predictors::LexiconEntry;
using predictors::TableGeometry;

// --- gazetteer -------------------------------------------------------------

TEST(Gazetteer, MatchesAgreeWithStringSearch) {
  GazetteerTagger tagger({{"ZSM-5", "MATERIAL"}, {"zeolite", "MATERIAL"}});
  const std::string text = "ZSM-5 is a zeolite.";
  const auto tags = tagger.tag(text);
  ASSERT_EQ(tags.size(), 2u);
  EXPECT_EQ(tags[0], (TaggedSpan{static_cast<std::int64_t>(text.find("ZSM-5")), 5, "MATERIAL", 1.0}));
  const auto z = static_cast<std::int64_t>(text.find("zeolite"));
  EXPECT_EQ(tags[1], (TaggedSpan{z, z + 7, "MATERIAL", 1.0}));
}

TEST(Gazetteer, WordBoundaryAndLongestMatch) {
  EXPECT_TRUE(GazetteerTagger(std::vector<LexiconEntry>{{"iron", "MATERIAL"}}).tag("environment").empty());
  const auto tags = GazetteerTagger({{"iron", "MATERIAL"}, {"iron oxide", "MATERIAL"}}).tag("iron oxide");
  ASSERT_EQ(tags.size(), 1u);
  EXPECT_EQ(tags[0].start, 0);
  EXPECT_EQ(tags[0].end, 10);
}

TEST(Gazetteer, CaseFoldingRegexAndCodePointOffsets) {
  const auto entries = predictors::parse_lexicon(
      "# comment\n\nSilica\tMATERIAL\nSiO2\tFORMULA\tcase_sensitive\n[0-9]+ K\tTEMPERATURE\tregex\n");
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_TRUE(entries[1].case_sensitive);
  EXPECT_TRUE(entries[2].regex);
  GazetteerTagger tagger(entries);
  const auto tags = tagger.tag("Naïve SILICA at 450 K, not sio2 but SiO2");
  ASSERT_EQ(tags.size(), 3u);
  // "Naïve " is 6 code points although 7 bytes.
  EXPECT_EQ(tags[0], (TaggedSpan{6, 12, "MATERIAL", 1.0}));
  EXPECT_EQ(tags[1], (TaggedSpan{16, 21, "TEMPERATURE", 1.0}));
  EXPECT_EQ(tags[2].label, "FORMULA");
  EXPECT_EQ(tags[2].start, 36);
}

TEST(Gazetteer, LexiconErrorsNameTheLine) {
  try {
    predictors::parse_lexicon("ok\tL\nmissing label\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "lexicon-parse-error");
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(predictors::parse_lexicon("(unclosed\tL\tregex\n"), Error);
  EXPECT_THROW(predictors::parse_lexicon("x\tL\tbogus_flag\n"), Error);
}

// Independent matcher: enumerate every (start, entry) whole-word match, then
// pick left to right the longest (earliest entry on ties).
std::vector<TaggedSpan> brute_force_tags(const std::vector<LexiconEntry>& lexicon, const std::u32string& text) {
  const auto fold = [](std::u32string s) {
    for (auto& c : s)
      if (c >= U'A' && c <= U'Z') c = c - U'A' + U'a';
    return s;
  };
  const auto word = [](char32_t c) { return predictors::is_word_char(c); };
  struct Match {
    std::size_t start, len, entry;
  };
  std::vector<Match> all;
  for (std::size_t e = 0; e < lexicon.size(); ++e) {
    const std::u32string needle = utf8::decode(lexicon[e].surface);
    const std::u32string hay = lexicon[e].case_sensitive ? text : fold(text);
    const std::u32string pat = lexicon[e].case_sensitive ? needle : fold(needle);
    for (std::size_t i = 0; i + pat.size() <= hay.size(); ++i)
      if (hay.substr(i, pat.size()) == pat && (i == 0 || !word(text[i - 1])) &&
          (i + pat.size() == text.size() || !word(text[i + pat.size()])))
        all.push_back({i, pat.size(), e});
  }
  std::vector<TaggedSpan> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const Match* best = nullptr;
    for (const auto& m : all)
      if (m.start == pos && (!best || m.len > best->len || (m.len == best->len && m.entry < best->entry))) best = &m;
    if (!best) {
      ++pos;
      continue;
    }
    out.push_back({static_cast<std::int64_t>(pos), static_cast<std::int64_t>(pos + best->len),
                   lexicon[best->entry].label, 1.0});
    pos += best->len;
  }
  return out;
}

TEST(Gazetteer, RandomizedAgainstBruteForce) {
  std::mt19937_64 rng(21);
  const std::vector<std::string> vocab = {"iron", "Iron", "oxide", "zeolite", "ZSM-5", "x", "iron-oxide", "αβ", "ab"};
  const std::vector<std::string> seps = {" ", ", ", "-", "(", ")", ".", "", "\n"};
  for (int round = 0; round < 300; ++round) {
    std::vector<LexiconEntry> lexicon;
    const int entries = 1 + static_cast<int>(rng() % 5);
    for (int e = 0; e < entries; ++e) {
      std::string surface = vocab[rng() % vocab.size()];
      if (rng() % 3 == 0) surface += " " + vocab[rng() % vocab.size()];
      lexicon.push_back({surface, "L" + std::to_string(e), false, rng() % 4 == 0});
    }
    std::string text;
    const int words = static_cast<int>(rng() % 12);
    for (int w = 0; w < words; ++w) text += vocab[rng() % vocab.size()] + seps[rng() % seps.size()];
    const std::u32string u = utf8::decode(text);
    const auto got = GazetteerTagger(lexicon).tag(text);
    ASSERT_EQ(got, brute_force_tags(lexicon, u)) << text;
    for (std::size_t i = 1; i < got.size(); ++i) EXPECT_LE(got[i - 1].end, got[i].start);
  }
}

// --- chat ------------------------------------------------------------------

struct ChatStub {
  fixtures::StubServer srv;
  std::atomic<int> calls{0};
  std::vector<std::string> bodies;
  std::vector<std::string> auth;
  std::mutex mutex;
  std::function<void(const Json&, httplib::Response&)> reply;

  ChatStub() {
    srv.server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      {
        std::lock_guard lock(mutex);
        bodies.push_back(req.body);
        auth.push_back(req.get_header_value("Authorization"));
      }
      reply(Json::parse(req.body), res);
    });
    srv.start();
  }

  static void answer(httplib::Response& res, const std::string& content) {
    res.set_content(Json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump(),
                    "application/json");
  }
};

predictors::ChatConfig chat_config(const std::string& url) {
  predictors::ChatConfig c;
  c.endpoint_url = url;
  c.model = "m";
  c.api_key = "k-test";
  c.system_prompt = "sys";
  c.user_prompt_template = "E: {entity_text}";
  c.timeout_s = 5;
  return c;
}

TEST(Chat, EchoesUserMessageWithStableBody) {
  ChatStub stub;
  stub.reply = [](const Json& body, httplib::Response& res) {
    ChatStub::answer(res, body["messages"][1]["content"].get<std::string>());
  };
  predictors::ChatCompletionPredictor chat(chat_config(stub.srv.url("/v1")));
  EXPECT_EQ(chat.generate("x"), "E: x");
  EXPECT_EQ(chat.generate("x"), "E: x");
  ASSERT_EQ(stub.bodies.size(), 2u);
  EXPECT_EQ(stub.bodies[0], stub.bodies[1]);
  EXPECT_EQ(stub.bodies[0],
            R"({"messages":[{"content":"sys","role":"system"},{"content":"E: x","role":"user"}],"model":"m","temperature":0.0})");
  EXPECT_EQ(stub.bodies[0], chat.request_body("x"));
  EXPECT_EQ(stub.auth[0], "Bearer k-test");
}

TEST(Chat, ServerErrorIsRetriedOnceThenReported) {
  ChatStub stub;
  stub.reply = [](const Json&, httplib::Response& res) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  };
  predictors::ChatCompletionPredictor chat(chat_config(stub.srv.url("/v1")));
  const auto r = predict::run_text_predictor(pipeline::run_core_pipeline(fixtures::hello_world_pdf(), {}), chat, "chat");
  EXPECT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(stub.calls.load(), 2);
  EXPECT_NE(r.errors[0].message.find("HTTP 500"), std::string::npos);
}

TEST(Chat, TimeoutIsRetriedOnce) {
  ChatStub stub;
  stub.reply = [](const Json&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    ChatStub::answer(res, "late");
  };
  auto cfg = chat_config(stub.srv.url("/v1"));
  cfg.timeout_s = 0.3;
  predictors::ChatCompletionPredictor chat(cfg);
  try {
    chat.generate("x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "transport-error");
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  EXPECT_EQ(stub.calls.load(), 2);
}

TEST(Chat, JsonReplyIsParsedByDefaultPostprocess) {
  ChatStub stub;
  stub.reply = [](const Json&, httplib::Response& res) { ChatStub::answer(res, R"({"materials":["SiO2"]})"); };
  predictors::ChatCompletionPredictor chat(chat_config(stub.srv.url("/v1")));
  const auto r = predict::run_text_predictor(pipeline::run_core_pipeline(fixtures::ground_truth_pdf(), {}), chat, "chat");
  EXPECT_TRUE(r.errors.empty());
  const auto& entities = r.document.layer("generated_chat").entities;
  ASSERT_EQ(entities.size(), 3u);
  for (const auto& e : entities) EXPECT_EQ(e.metadata["parsed"], Json::parse(R"({"materials":["SiO2"]})"));
}

TEST(Chat, KeyFromEnvironmentAndValidation) {
  const auto registry = predictors::default_registry();
  ::setenv("LAYERLAB_TEST_CHAT_KEY", "from-env", 1);
  EXPECT_NO_THROW(registry.instantiate(
      "chat", Json::parse(R"({"endpoint_url": "http://127.0.0.1:9/v1", "model": "m", "api_key_env": "LAYERLAB_TEST_CHAT_KEY"})")));
  try {
    registry.instantiate("chat", Json::parse(
                                     R"({"endpoint_url": "http://127.0.0.1:9/v1", "model": "m", "api_key_env": "LAYERLAB_UNSET_VAR_XYZ", "user_prompt_template": "none"})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.fields().count("api_key_env"), 1u);
    EXPECT_EQ(e.fields().count("user_prompt_template"), 1u);
  }
}

// --- table cross-referencing ----------------------------------------------

TableGeometry grid2x2() {
  TableGeometry g;
  g.rows = {{0, 0, 0, 1, 0.5}, {0, 0, 0.5, 1, 0.5}};
  g.columns = {{0, 0, 0, 0.5, 1}, {0, 0.5, 0, 0.5, 1}};
  return g;
}

TEST(CellAssignment, TwoByTwo) {
  const std::vector<CellWord> words = {{"a", {0, 0.1, 0.1, 0.1, 0.1}},
                                       {"b", {0, 0.7, 0.1, 0.1, 0.1}},
                                       {"c", {0, 0.1, 0.7, 0.1, 0.1}},
                                       {"d", {0, 0.7, 0.7, 0.1, 0.1}}};
  const auto a = predictors::assign_words_to_cells(grid2x2(), words);
  EXPECT_EQ(a.grid, (std::vector<std::vector<std::string>>{{"a", "b"}, {"c", "d"}}));
  EXPECT_TRUE(a.unassigned.empty());
}

TEST(CellAssignment, TiesGoToLowerRowAndOutsideWordsAreUnassigned) {
  const std::vector<CellWord> words = {{"tie", {0, 0.125, 0.375, 0.125, 0.25}}, {"out", {0, 1.2, 1.2, 0.1, 0.1}}};
  const auto a = predictors::assign_words_to_cells(grid2x2(), words);
  EXPECT_EQ(a.grid[0][0], "tie");
  EXPECT_EQ(a.grid[1][0], "");
  EXPECT_EQ(a.unassigned, (std::vector<std::size_t>{1}));
}

TEST(CellAssignment, DegenerateGeometry) {
  TableGeometry g;
  g.rows = {{0, 0, 0, 1, 0.5}};
  g.columns = {{0, 0, 0.6, 0.5, 0.4}};  // no overlap with the row
  try {
    predictors::assign_words_to_cells(g, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "degenerate-geometry");
  }
}

TEST(CellAssignment, RandomGridsMatchOracle) {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 100; ++round) {
    const auto [g, words] = fixtures::random_grid(rng);
    const auto got = predictors::assign_words_to_cells(g, words);
    const auto expected = fixtures::oracle_assign(g.rows, g.columns, words);
    ASSERT_EQ(got.grid, expected.grid) << "round " << round;
    ASSERT_EQ(got.unassigned, expected.unassigned);
    std::size_t placed = 0;
    for (int cell : got.cell_of_word) placed += cell >= 0;
    EXPECT_EQ(placed + got.unassigned.size(), words.size());
  }
}

TEST(GridToTable, HeaderRules) {
  auto t = predictors::grid_to_table_record({{"Material", "Temp"}, {"ZSM-5", "450"}, {"Y", "500"}});
  EXPECT_EQ(t.to_json(), Json::parse(R"({"columns":["Material","Temp"],"data":{"Material":["ZSM-5","Y"],"Temp":["450","500"]}})"));
  t = predictors::grid_to_table_record({{"A", "A"}, {"1", "2"}});
  EXPECT_EQ(t.columns()[1].first, "A_2");
  t = predictors::grid_to_table_record({{"only", "header"}});
  EXPECT_EQ(t.row_count(), 0u);
  EXPECT_EQ(t.columns().size(), 2u);
  t = predictors::grid_to_table_record({{"", "x", ""}, {"1", "2", "3"}});
  EXPECT_EQ(t.columns()[0].first, "col_1");
  EXPECT_EQ(t.columns()[2].first, "col_3");
  EXPECT_THROW(predictors::grid_to_table_record({}), Error);
  EXPECT_THROW(predictors::grid_to_table_record({{"a"}, {"b", "c"}}), Error);
}

TEST(GridToTable, ColumnLengthsEqualRowsMinusOne) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    const std::size_t rows = 1 + rng() % 6, cols = 1 + rng() % 5;
    std::vector<std::vector<std::string>> grid(rows, std::vector<std::string>(cols));
    for (auto& row : grid)
      for (auto& cell : row) cell = std::string(1, static_cast<char>('a' + rng() % 3));
    const auto t = predictors::grid_to_table_record(grid);
    ASSERT_EQ(t.columns().size(), cols);
    for (const auto& [name, values] : t.columns()) EXPECT_EQ(values.size(), rows - 1);
  }
}

TEST(Csv, FormatAndRoundTrip) {
  predict::TableRecord t;
  t.add_column("A", {"1", "2"});
  t.add_column("B", {"x", "y"});
  EXPECT_EQ(predictors::table_to_csv(t), "A,B\n1,x\n2,y\n");
  predict::TableRecord tricky;
  tricky.add_column("na,me", {"say \"hi\"", "two\nlines", ""});
  tricky.add_column("ß", {"é", "", "x"});
  const std::string csv = predictors::table_to_csv(tricky);
  EXPECT_EQ(csv.substr(0, 10), "\"na,me\",ß");
  const auto rows = predictors::parse_csv(csv);
  EXPECT_EQ(predictors::grid_to_table_record(rows), tricky);
}

// --- geometric table parser and remote image service ----------------------

TEST(GeometricTable, FixtureTableFromRegionHints) {
  const std::string pdf = fixtures::ground_truth_pdf();
  pipeline::PipelineOptions opts;
  opts.table_hints = pipeline::parse_region_hints(fixtures::ground_truth_regions());
  const auto d = pipeline::run_core_pipeline(pdf, {}, opts);
  ASSERT_EQ(d.layer("tables").entities.size(), 1u);
  EXPECT_TRUE(d.layer("tables").entities[0].metadata.contains("geometry"));
  predictors::GeometricTableParser parser({});
  const pdf::PdfPageRenderer renderer(pdf);
  const auto r = predict::run_image_predictor(d, parser, "geometric_table", renderer);
  ASSERT_TRUE(r.errors.empty()) << r.errors[0].message;
  const auto& e = r.document.layer("image_geometric_table").entities.at(0);
  EXPECT_EQ(predict::TableRecord::from_json(e.metadata["table"]),
            predictors::grid_to_table_record(fixtures::GroundTruth::kTable));
  EXPECT_EQ(e.metadata["boxes"].size(), 12u);
  EXPECT_EQ(e.metadata["boxes"][5]["label"], "cell 1,2");
}

TEST(GeometricTable, RegionsFileWhenEntityHasNoGeometry) {
  fixtures::TempDir tmp;
  fixtures::write_file(tmp.path() / "r.json", fixtures::ground_truth_regions().dump());
  const std::string pdf = fixtures::ground_truth_pdf();
  const auto d = pipeline::run_core_pipeline(pdf, {});
  predictors::GeometricTableConfig cfg;
  cfg.regions_file = (tmp.path() / "r.json").string();
  predictors::GeometricTableParser parser(cfg);
  const auto r = predict::run_image_predictor(d, parser, "t", pdf::PdfPageRenderer(pdf));
  ASSERT_TRUE(r.errors.empty()) << r.errors[0].message;
  const auto table = predict::TableRecord::from_json(r.document.layer("image_t").entities[0].metadata["table"]);
  EXPECT_EQ(table.columns()[0].second, (std::vector<std::string>{"Mordenite", "Faujasite", "Chabazite"}));
}

TEST(GeometricTable, NoGeometryAvailable) {
  const std::string pdf = fixtures::ground_truth_pdf();
  predictors::GeometricTableParser parser({});
  const auto r = predict::run_image_predictor(pipeline::run_core_pipeline(pdf, {}), parser, "t",
                                              pdf::PdfPageRenderer(pdf));
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_NE(r.errors[0].message.find("no table geometry"), std::string::npos);
}

TEST(GeometricTable, GeometryOverEmptyRegionGivesEmptyCells) {
  const std::string pdf = fixtures::empty_page_pdf();
  pipeline::PipelineOptions opts;
  opts.table_hints = pipeline::parse_region_hints(Json::parse(
      R"({"tables": [{"box": [0, 0.1, 0.1, 0.5, 0.2], "geometry": {"rows": [[0,0,1,0.5],[0,0.5,1,0.5]], "columns": [[0,0,0.5,1],[0.5,0,0.5,1]]}}]})"));
  predictors::GeometricTableParser parser({});
  const auto r = predict::run_image_predictor(pipeline::run_core_pipeline(pdf, {}, opts), parser, "t",
                                              pdf::PdfPageRenderer(pdf));
  ASSERT_TRUE(r.errors.empty());
  const auto& meta = r.document.layer("image_t").entities[0].metadata;
  EXPECT_EQ(meta["table"], Json::parse(R"({"columns":["col_1","col_2"],"data":{"col_1":[""],"col_2":[""]}})"));
  EXPECT_EQ(meta["boxes"].size(), 4u);
}

TEST(GeometricTable, DetectionServiceSuppliesGeometry) {
  fixtures::StubServer srv;
  std::atomic<int> calls{0};
  srv.server.Post("/detect", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    EXPECT_TRUE(req.has_file("image"));
    Json boxes = Json::array();
    for (int r = 0; r < 4; ++r) boxes.push_back({0.0, r * 0.25, 1.0, 0.25, "table row", 0.9});
    for (int c = 0; c < 3; ++c) {
      const double width = 386.0, left = 140.0 * c, right = std::min(width, 140.0 * (c + 1));
      boxes.push_back({left / width, 0.0, (right - left) / width, 1.0, "table column", 0.9});
    }
    res.set_content(Json{{"boxes", boxes}}.dump(), "application/json");
  });
  srv.start();
  const std::string pdf = fixtures::ground_truth_pdf();
  pipeline::PipelineOptions opts;
  auto regions = fixtures::ground_truth_regions();
  regions["tables"][0].erase("geometry");
  opts.table_hints = pipeline::parse_region_hints(regions);
  predictors::GeometricTableConfig cfg;
  cfg.detection_url = srv.url("/detect");
  predictors::GeometricTableParser parser(cfg);
  const auto r = predict::run_image_predictor(pipeline::run_core_pipeline(pdf, {}, opts), parser, "t",
                                              pdf::PdfPageRenderer(pdf));
  ASSERT_TRUE(r.errors.empty()) << r.errors[0].message;
  EXPECT_EQ(calls.load(), 1);
  EXPECT_EQ(predict::TableRecord::from_json(r.document.layer("image_t").entities[0].metadata["table"]),
            predictors::grid_to_table_record(fixtures::GroundTruth::kTable));
}

TEST(RemoteImage, ResponseSchema) {
  auto out = predictors::parse_image_service_response(Json::parse(R"({"raw_text": "caption"})"));
  EXPECT_EQ(out.raw_text, "caption");
  EXPECT_FALSE(out.table || out.boxes);
  try {
    predictors::parse_image_service_response(Json::object());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "invalid-response-schema");
  }
  out = predictors::parse_image_service_response(Json::parse(R"({"boxes": [[0.1, 0.2, 0.3, 0.4, "cell", 0.5], [0, 0, 1, 1]]})"));
  ASSERT_TRUE(out.boxes);
  EXPECT_EQ(out.boxes->size(), 2u);
  EXPECT_EQ((*out.boxes)[0].label, "cell");
  EXPECT_FALSE(out.raw_text || out.table);
  EXPECT_THROW(predictors::parse_image_service_response(Json::parse(R"({"boxes": [[0.1, "x", 0.3, 0.4]]})")), Error);
  EXPECT_THROW(predictors::parse_image_service_response(Json::parse(R"({"table": {"a": [1], "b": [1, 2]}})")), Error);
}

TEST(RemoteImage, PostsCropAsMultipartPng) {
  fixtures::StubServer srv;
  std::string content_type;
  srv.server.Post("/caption", [&](const httplib::Request& req, httplib::Response& res) {
    if (req.has_file("image")) content_type = req.get_file_value("image").content_type;
    const Image img = Image::from_png(req.get_file_value("image").content);
    res.set_content(Json{{"raw_text", std::to_string(img.width) + "x" + std::to_string(img.height)}}.dump(),
                    "application/json");
  });
  srv.start();
  const std::string pdf = fixtures::ground_truth_pdf();
  auto registry = predictors::default_registry();
  auto predictor = registry.instantiate("remote_image", Json{{"url", srv.url("/caption")}});
  predict::RunOptions opts;
  opts.target_layer = "captions";
  const auto r = predict::run_predictor(pipeline::run_core_pipeline(pdf, {}), predictor, "remote_image",
                                        pdf::PdfPageRenderer(pdf), opts);
  ASSERT_TRUE(r.errors.empty()) << r.errors[0].message;
  EXPECT_EQ(content_type, "image/png");
  EXPECT_EQ(r.layer, "image_remote_image");
  EXPECT_NE(r.document.layer(r.layer).entities[0].metadata["raw_text"].get<std::string>().find('x'), std::string::npos);
}

TEST(Builtins, DefaultRegistryContents) {
  const auto r = predictors::default_registry();
  std::vector<std::string> names;
  for (const auto& d : r.list()) names.push_back(d.name);
  EXPECT_EQ(names, (std::vector<std::string>{"gazetteer", "chat", "geometric_table", "remote_image"}));
  EXPECT_TRUE(r.descriptor("gazetteer").concurrency_safe);
  EXPECT_TRUE(r.descriptor("geometric_table").concurrency_safe);
  EXPECT_FALSE(r.descriptor("chat").concurrency_safe);
  EXPECT_EQ(r.descriptor("remote_image").kind, predict::PredictorKind::image);
  try {
    r.instantiate("gazetteer", Json::object());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.fields().count("lexicon"), 1u);
  }
}

}  // namespace
}  // namespace layerlab
