#include <gtest/gtest.h>

#include <atomic>
#include <map>
#include <random>
#include <set>

#include "layerlab/doc/serialize.hpp"
#include "layerlab/error.hpp"
#include "layerlab/pdf/render.hpp"
#include "layerlab/predictors/table.hpp"
#include "layerlab/service/jobs.hpp"
#include "layerlab/service/store.hpp"
#include "layerlab/service/views.hpp"
#include "service_harness.hpp"

namespace layerlab {
namespace {

using fixtures::ServiceHarness;
using Json = nlohmann::json;
namespace fs = std::filesystem;

Json gazetteer_request() { return {{"name", "gazetteer"}, {"config", {{"lexicon", fixtures::ground_truth_lexicon()}}}}; }

Json error_of(const httplib::Result& res) { return Json::parse(res->body)["error"]; }

std::set<std::string> layer_names(ServiceHarness& h, const std::string& id) {
  return h.get_json("/documents/" + id + "/layers").get<std::set<std::string>>();
}

// Slow text generator used to observe jobs mid-run.
class SlowEcho : public predict::TextGenerationPredictor {
 public:
  std::string generate(const std::string& text) override {
    std::this_thread::sleep_for(std::chrono::milliseconds(40));
    return text.substr(0, 5);
  }
};

predict::Registry registry_with_slow() {
  auto r = predictors::default_registry();
  r.add({"slow", predict::PredictorKind::text_generation, {}, "sleeps per entity", false},
        [](const Json&) { return predict::Predictor(std::make_shared<SlowEcho>()); });
  return r;
}

TEST(ServiceUpload, ContentAddressedAndValidated) {
  ServiceHarness h(predictors::default_registry(), 1);
  const std::string pdf = fixtures::ground_truth_pdf();
  auto first = h.upload(pdf);
  ASSERT_TRUE(first);
  EXPECT_EQ(first->status, 201);
  const std::string id = Json::parse(first->body)["doc_id"];
  EXPECT_TRUE(service::is_doc_id(id));
  auto second = h.upload(pdf, "renamed.pdf");
  EXPECT_EQ(second->status, 200);
  EXPECT_EQ(Json::parse(second->body)["doc_id"], id);
  EXPECT_EQ(std::distance(fs::directory_iterator(h.data_dir() / "documents"), fs::directory_iterator{}), 1);

  auto text = h.upload("just some notes\n", "notes.txt");
  EXPECT_EQ(text->status, 400);
  EXPECT_EQ(error_of(text)["code"], "not-a-pdf");

  auto big = h.upload("%PDF-1.4\n" + std::string(1536 * 1024, 'x'), "big.pdf");
  ASSERT_TRUE(big);
  EXPECT_EQ(big->status, 413);

  auto no_file = h.client().Post("/documents", "{}", "application/json");
  EXPECT_EQ(no_file->status, 400);

  auto bad_regions = h.upload(fixtures::hello_world_pdf(), "h.pdf", "{\"tables\": [{\"box\": [0, 2, 0, 1, 1]}]}");
  EXPECT_EQ(bad_regions->status, 400);

  const auto list = h.get_json("/documents");
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list[0]["filename"], "paper.pdf");
  EXPECT_EQ(list[0]["parsed"], false);
}

TEST(ServicePredictors, ListsBuiltinsInStableOrder) {
  ServiceHarness h;
  auto a = h.client().Get("/predictors");
  auto b = h.client().Get("/predictors");
  EXPECT_EQ(a->body, b->body);
  const auto list = Json::parse(a->body);
  ASSERT_EQ(list.size(), 4u);
  const std::map<std::string, std::string> expected = {{"gazetteer", "token_classification"},
                                                       {"chat", "text_generation"},
                                                       {"geometric_table", "image"},
                                                       {"remote_image", "image"}};
  std::vector<std::string> names;
  for (const auto& d : list) {
    names.push_back(d["name"]);
    EXPECT_EQ(d["kind"], expected.at(d["name"]));
  }
  EXPECT_EQ(names, (std::vector<std::string>{"gazetteer", "chat", "geometric_table", "remote_image"}));
}

TEST(ServiceProcess, ParseOnlyThenCachedParse) {
  ServiceHarness h;
  const std::string id = h.upload_id(fixtures::ground_truth_pdf());
  auto early = h.client().Get("/documents/" + id);
  EXPECT_EQ(early->status, 409);
  EXPECT_EQ(error_of(early)["code"], "not-yet-processed");

  auto res = h.process(id, Json::object());
  ASSERT_EQ(res->status, 202);
  const std::string job_id = Json::parse(res->body)["job_id"];
  auto job = h.wait_job(job_id);
  ASSERT_EQ(job["stages"].size(), 1u);
  EXPECT_EQ(job["stages"][0]["name"], "parse");
  EXPECT_EQ(job["stages"][0]["state"], "done");
  EXPECT_EQ(job["doc_id"], id);

  const auto layers = layer_names(h, id);
  for (const char* core : {"words", "lines", "blocks", "paragraphs", "sentences", "sections", "tables", "captions"})
    EXPECT_TRUE(layers.count(core)) << core;
  EXPECT_TRUE(fs::exists(h.data_dir() / "documents" / id / "pages" / "0.png"));
  EXPECT_TRUE(fs::exists(h.data_dir() / "documents" / id / "jobs" / (job_id + ".json")));

  const std::string before = h.client().Get("/documents/" + id)->body;
  res = h.process(id, {{"predictors", {gazetteer_request()}}});
  ASSERT_EQ(res->status, 202);
  job = h.wait_job(Json::parse(res->body)["job_id"]);
  ASSERT_EQ(job["stages"].size(), 2u);
  EXPECT_EQ(job["stages"][0]["state"], "skipped");
  EXPECT_EQ(job["stages"][1]["state"], "done");
  EXPECT_EQ(job["stages"][1]["detail"]["layer"], "tagged_gazetteer");
  EXPECT_TRUE(layer_names(h, id).count("tagged_gazetteer"));
  const auto after = doc::deserialize(h.client().Get("/documents/" + id)->body);
  const auto original = doc::deserialize(before);
  EXPECT_EQ(after.layer("words"), original.layer("words"));
  EXPECT_EQ(after.layer("tagged_gazetteer").entities.size(), 2u);

  // A different pipeline config re-parses.
  res = h.process(id, {{"pipeline_config", {{"render_dpi", 100}}}});
  ASSERT_EQ(res->status, 202) << res->body;
  job = h.wait_job(Json::parse(res->body)["job_id"]);
  EXPECT_EQ(job["stages"][0]["state"], "done");
}

TEST(ServiceProcess, ValidationErrorsNameFields) {
  ServiceHarness h;
  const std::string id = h.upload_id(fixtures::hello_world_pdf());
  auto res = h.process(id, {{"predictors", {{{"name", "chat"}, {"config", {{"endpoint_url", "http://x/v1"}, {"model", "m"}}}}}}});
  ASSERT_EQ(res->status, 422);
  auto err = error_of(res);
  EXPECT_EQ(err["code"], "config-validation-error");
  EXPECT_TRUE(err["fields"].contains("predictors[0].api_key_env"));

  res = h.process(id, {{"predictors", {gazetteer_request(), {{"name", "nope"}}}}, {"pipeline_config", {{"render_dpi", -3}}}});
  ASSERT_EQ(res->status, 422);
  err = error_of(res);
  EXPECT_TRUE(err["fields"].contains("predictors[1].name"));
  EXPECT_TRUE(err["fields"].contains("pipeline_config.render_dpi"));

  res = h.process(id, {{"predictorz", Json::array()}});
  EXPECT_EQ(res->status, 422);
  EXPECT_EQ(h.client().Post("/documents/" + id + "/process", "not json", "application/json")->status, 400);
  EXPECT_EQ(h.process(std::string(64, 'a'), Json::object())->status, 404);
  EXPECT_EQ(h.client().Get("/jobs/0123456789abcdef0123")->status, 404);
}

TEST(ServiceProcess, FailedStageDoesNotStopLaterStages) {
  ServiceHarness h;
  const auto [id, job] = h.run(fixtures::ground_truth_pdf(),
                               {{"predictors",
                                 {{{"name", "remote_image"}, {"config", {{"url", "http://127.0.0.1:9/x"}}}, {"target_layer", "no_such_layer"}},
                                  gazetteer_request()}}});
  ASSERT_EQ(job["stages"].size(), 3u);
  EXPECT_EQ(job["stages"][1]["state"], "failed");
  EXPECT_FALSE(job["stages"][1]["error"].is_null());
  EXPECT_EQ(job["stages"][2]["state"], "done");
  for (const auto& s : job["stages"]) EXPECT_NE(s["state"], "running");
}

TEST(ServiceProcess, EntityErrorsArePersisted) {
  ServiceHarness h;
  const auto [id, job] = h.run(fixtures::ground_truth_pdf(),
                               {{"predictors", {{{"name", "remote_image"}, {"config", {{"url", "http://127.0.0.1:9/x"}, {"timeout_s", 2}}}}}}});
  EXPECT_EQ(job["stages"][1]["state"], "done");
  EXPECT_EQ(job["stages"][1]["detail"]["entity_errors"], 1);
  const std::string jsonl = fixtures::read_file(h.data_dir() / "documents" / id / "errors" / "remote_image.jsonl");
  EXPECT_EQ(std::count(jsonl.begin(), jsonl.end(), '\n'), 1);
  EXPECT_EQ(Json::parse(jsonl.substr(0, jsonl.find('\n')))["layer"], "tables");
}

TEST(ServiceJobs, StateNeverRegressesAcrossPolls) {
  ServiceHarness h(registry_with_slow());
  const std::string id = h.upload_id(fixtures::ground_truth_pdf());
  Json slow = {{"name", "slow"}};
  auto res = h.process(id, {{"predictors", {slow, slow, slow}}});
  const std::string job_id = Json::parse(res->body)["job_id"];
  const std::map<std::string, int> rank = {{"pending", 0}, {"running", 1}, {"done", 2}, {"failed", 2}, {"skipped", 2}};
  std::vector<int> last(4, 0);
  bool saw_mid_run = false;
  for (;;) {
    const auto job = h.get_json("/jobs/" + job_id);
    ASSERT_EQ(job["stages"].size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
      const int r = rank.at(job["stages"][i]["state"]);
      EXPECT_GE(r, last[i]) << "stage " << i;
      last[i] = r;
    }
    if (job["stages"][0]["state"] == "done" && job["stages"][1]["state"] == "running" &&
        job["stages"][2]["state"] == "pending")
      saw_mid_run = true;
    if (!job["finished_at"].is_null()) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  EXPECT_TRUE(saw_mid_run);
  const auto layers = layer_names(h, id);
  EXPECT_TRUE(layers.count("generated_slow") && layers.count("generated_slow_2") && layers.count("generated_slow_3"));
}

TEST(ServiceLayers, UnknownNamesAre404) {
  ServiceHarness h;
  const auto [id, job] = h.run(fixtures::hello_world_pdf(), Json::object());
  EXPECT_EQ(h.client().Get("/documents/" + id + "/layers/nope")->status, 404);
  EXPECT_EQ(h.client().Get("/documents/" + id + "/layers/words")->status, 200);
  EXPECT_EQ(h.client().Get("/documents/" + std::string(64, 'b') + "/layers")->status, 404);
  EXPECT_EQ(h.client().Get("/documents/" + id + "/pages/3/image")->status, 404);
  EXPECT_EQ(h.client().Get("/documents/" + id + "/entities/words/999/crop")->status, 404);
  EXPECT_EQ(h.client().Get("/documents/" + id + "/pages/0/image?dpi=abc")->status, 400);
}

TEST(ServiceImages, PageAndCropGeometry) {
  ServiceHarness h;
  const auto [id, job] = h.run(fixtures::ground_truth_pdf(), Json::object());
  const auto d = doc::deserialize(h.client().Get("/documents/" + id)->body);
  const auto& page = d.pages[0];

  for (int dpi : {72, 150}) {
    auto res = h.client().Get("/documents/" + id + "/pages/0/image?dpi=" + std::to_string(dpi));
    ASSERT_EQ(res->status, 200);
    const Image img = Image::from_png(res->body);
    EXPECT_NEAR(img.width, page.width_pts * dpi / 72.0, 1.0);
    EXPECT_NEAR(img.height, page.height_pts * dpi / 72.0, 1.0);
  }

  std::mt19937_64 rng(5);
  const auto& words = d.layer("words").entities;
  for (int i = 0; i < 50; ++i) {
    const auto& w = words[rng() % words.size()];
    const int dpi = 72 + static_cast<int>(rng() % 150);
    const double pad = (rng() % 4) * 0.01;
    auto res = h.client().Get("/documents/" + id + "/entities/words/" + std::to_string(w.id) + "/crop?dpi=" +
                              std::to_string(dpi) + "&pad=" + std::to_string(pad));
    ASSERT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("X-Page-Count"), "1");
    const Image img = Image::from_png(res->body);
    const auto& b = w.boxes[0];
    const double x0 = std::max(0.0, b.x - pad), x1 = std::min(1.0, b.x + b.w + pad);
    const double y0 = std::max(0.0, b.y - pad), y1 = std::min(1.0, b.y + b.h + pad);
    EXPECT_NEAR(img.width, (x1 - x0) * page.width_pts * dpi / 72.0, 1.0);
    EXPECT_NEAR(img.height, (y1 - y0) * page.height_pts * dpi / 72.0, 1.0);
  }

  auto whole = h.client().Get("/documents/" + id + "/entities/words/0/crop?dpi=72&pad=1");
  ASSERT_EQ(whole->status, 200);
  const Image img = Image::from_png(whole->body);
  EXPECT_NEAR(img.width, page.width_pts, 1.0);
  EXPECT_NEAR(img.height, page.height_pts, 1.0);
  EXPECT_EQ(h.client().Get("/documents/" + id + "/entities/words/0/crop?pad=-1")->status, 400);
}

// Drops a document with an extra hand-made layer into the store, as an
// externally processed result would be.
void inject_layer(ServiceHarness& h, const std::string& id, const std::string& name, std::vector<doc::Entity> entities) {
  service::Store store(h.data_dir() / "documents");
  auto d = *store.load_document(id);
  store.save_document(doc::add_layer(std::move(d), name, std::move(entities)));
}

TEST(ServiceImages, EntityWithoutBoxesIs422) {
  ServiceHarness h;
  const auto [id, job] = h.run(fixtures::hello_world_pdf(), Json::object());
  doc::Entity e;
  e.id = 0;
  e.spans = {{0, 5}};
  inject_layer(h, id, "notes", {e});
  auto res = h.client().Get("/documents/" + id + "/entities/notes/0/crop");
  EXPECT_EQ(res->status, 422);
  EXPECT_EQ(error_of(res)["code"], "entity-has-no-boxes");
}

TEST(ServiceSummary, SectionFilterAndUnionOfKeys) {
  ServiceHarness h;
  const auto [id, job] = h.run(fixtures::ground_truth_pdf(), {{"predictors", {gazetteer_request()}}});
  auto methods = h.get_json("/documents/" + id + "/summary?section=Methods");
  ASSERT_EQ(methods["tagging"].size(), 1u);
  std::vector<std::string> texts;
  for (const auto& row : methods["tagging"][0]["rows"]) {
    texts.push_back(row["text"]);
    EXPECT_EQ(row["section"], "Methods");
    EXPECT_EQ(row["label"], "MATERIAL");
  }
  std::sort(texts.begin(), texts.end());
  EXPECT_EQ(texts, (std::vector<std::string>{"ZSM-5", "silica"}));
  EXPECT_EQ(methods["sections"], Json(fixtures::GroundTruth::kSectionNames));

  auto intro = h.client().Get("/documents/" + id + "/summary?section=Introduction");
  ASSERT_EQ(intro->status, 200);
  EXPECT_TRUE(Json::parse(intro->body)["tagging"][0]["rows"].empty());

  const auto d = doc::deserialize(h.client().Get("/documents/" + id)->body);
  std::vector<doc::Entity> gen;
  for (int i = 0; i < 2; ++i) {
    doc::Entity e = d.layer("paragraphs").entities[static_cast<std::size_t>(i + 1)];
    e.metadata = {{"raw_response", "x"}, {"parsed", i == 0 ? Json{{"a", 1}} : Json{{"b", 2}}}, {"parse_error", nullptr},
                  {"section", e.metadata["section"]}};
    gen.push_back(e);
  }
  inject_layer(h, id, "generated_manual", gen);
  const auto all = h.get_json("/documents/" + id + "/summary");
  ASSERT_EQ(all["generation"].size(), 1u);
  const auto& table = all["generation"][0];
  EXPECT_EQ(table["columns"], Json::parse(R"(["section","a","b"])"));
  EXPECT_EQ(table["rows"][0]["cells"], Json::parse(R"({"a":"1","b":""})"));
  EXPECT_EQ(table["rows"][1]["cells"], Json::parse(R"({"a":"","b":"2"})"));
}

TEST(ServiceSummary, TableWithCaptionAndCells) {
  ServiceHarness h;
  const auto [id, job] = h.run(fixtures::ground_truth_pdf(), {{"predictors", {{{"name", "geometric_table"}}}}},
                               fixtures::ground_truth_regions().dump());
  ASSERT_EQ(job["stages"][1]["state"], "done") << job.dump();
  const auto summary = h.get_json("/documents/" + id + "/summary");
  ASSERT_EQ(summary["images"].size(), 1u);
  const auto& entry = summary["images"][0]["entries"][0];
  EXPECT_EQ(entry["caption"]["text"], "Table 1: Synthesis parameters");
  EXPECT_EQ(entry["box_count"], 12);
  EXPECT_EQ(predict::TableRecord::from_json(entry["table"]),
            predictors::grid_to_table_record(fixtures::GroundTruth::kTable));

  const auto ann = h.get_json("/documents/" + id + "/entities/tables/0/annotations");
  const auto& hits = ann["results"]["image_geometric_table"]["entities"];
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0]["metadata"]["boxes"].size(), 12u);
  EXPECT_TRUE(hits[0]["metadata"].contains("table"));
}

TEST(ServiceAnnotations, GroupsResultsByLayer) {
  ServiceHarness h;
  const auto [id, job] = h.run(fixtures::ground_truth_pdf(), {{"predictors", {gazetteer_request()}}});
  const auto d = doc::deserialize(h.client().Get("/documents/" + id)->body);
  std::int64_t methods = -1, intro = -1;
  for (const auto& p : d.layer("paragraphs").entities) {
    if (p.metadata["section"] == "Methods") methods = p.id;
    if (p.metadata["section"] == "Introduction") intro = p.id;
  }
  auto ann = h.get_json("/documents/" + id + "/entities/paragraphs/" + std::to_string(methods) + "/annotations");
  EXPECT_EQ(ann["entity"]["layer"], "paragraphs");
  EXPECT_EQ(ann["results"]["tagged_gazetteer"]["kind"], "tagged");
  EXPECT_EQ(ann["results"]["tagged_gazetteer"]["entities"].size(), 2u);
  EXPECT_EQ(ann["sentences"].size(), 5u);

  auto none = h.client().Get("/documents/" + id + "/entities/paragraphs/" + std::to_string(intro) + "/annotations");
  ASSERT_EQ(none->status, 200);
  EXPECT_TRUE(Json::parse(none->body)["results"]["tagged_gazetteer"]["entities"].empty());
  EXPECT_EQ(h.client().Get("/documents/" + id + "/entities/paragraphs/99/annotations")->status, 404);
}

TEST(ServicePersistence, ReloadServesIdenticalResponses) {
  fixtures::TempDir tmp;
  std::string id;
  std::map<std::string, std::string> bodies;
  const auto snapshot = [&](ServiceHarness& h) {
    std::map<std::string, std::string> out;
    out["doc"] = h.client().Get("/documents/" + id)->body;
    for (const auto& name : layer_names(h, id))
      out[name] = h.client().Get("/documents/" + id + "/layers/" + name)->body;
    out["summary"] = h.client().Get("/documents/" + id + "/summary")->body;
    return out;
  };
  {
    ServiceHarness h(predictors::default_registry(), 50, tmp.path());
    id = h.run(fixtures::ground_truth_pdf(), {{"predictors", {gazetteer_request()}}}).first;
    bodies = snapshot(h);
  }
  const std::string stored = fixtures::read_file(tmp.path() / "documents" / id / "document.json");
  EXPECT_EQ(doc::serialize(doc::deserialize(stored)), stored);
  EXPECT_EQ(bodies["doc"], stored);
  ServiceHarness reloaded(predictors::default_registry(), 50, tmp.path());
  EXPECT_EQ(snapshot(reloaded), bodies);
}

TEST(ServiceSecrets, ApiKeyNeverPersisted) {
  const std::string key = "sk-test-4f1e-very-secret";
  fixtures::StubServer llm;
  std::atomic<int> calls{0};
  fixtures::serve_chat_stub(llm, [&](const std::string&) {
    ++calls;
    return std::string(R"({"materials": ["ZSM-5"]})");
  });
  ServiceHarness h;
  const auto [id, job] =
      h.run(fixtures::ground_truth_pdf(),
            {{"predictors", {{{"name", "chat"}, {"config", {{"endpoint_url", llm.url("/v1")}, {"model", "stub"}, {"api_key", key}}}}}}});
  EXPECT_EQ(job["stages"][1]["state"], "done");
  EXPECT_EQ(calls.load(), 3);
  EXPECT_EQ(job["requested_predictors"][0]["config"]["api_key"], "[redacted]");
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(h.data_dir())) {
    if (!entry.is_regular_file()) continue;
    ++files;
    EXPECT_EQ(fixtures::read_file(entry.path()).find(key), std::string::npos) << entry.path();
  }
  EXPECT_GE(files, 5u);
  EXPECT_EQ(h.client().Get("/jobs/" + job["job_id"].get<std::string>())->body.find(key), std::string::npos);
}

TEST(ServiceConfig, Environment) {
  ::setenv("LAYERLAB_PORT", "9123", 1);
  ::setenv("LAYERLAB_MAX_UPLOAD_MB", "7", 1);
  ::setenv("LAYERLAB_DATA_DIR", "/tmp/somewhere", 1);
  auto c = service::ServiceConfig::from_env();
  EXPECT_EQ(c.port, 9123);
  EXPECT_EQ(c.max_upload_mb, 7u);
  EXPECT_EQ(c.data_dir, "/tmp/somewhere");
  ::setenv("LAYERLAB_PORT", "http", 1);
  EXPECT_THROW(service::ServiceConfig::from_env(), ConfigError);
  ::unsetenv("LAYERLAB_PORT");
  ::unsetenv("LAYERLAB_MAX_UPLOAD_MB");
  ::unsetenv("LAYERLAB_DATA_DIR");
  c = service::ServiceConfig::from_env();
  EXPECT_EQ(c.port, 8402);
  EXPECT_EQ(c.max_upload_mb, 50u);
  EXPECT_EQ(c.data_dir, "data");
}

}  // namespace
}  // namespace layerlab
