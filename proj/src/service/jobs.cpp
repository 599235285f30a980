#include "layerlab/service/jobs.hpp"

#include <chrono>
#include <ctime>
#include <random>

#include "layerlab/error.hpp"
#include "layerlab/pdf/render.hpp"

namespace layerlab::service {

namespace fs = std::filesystem;
using Json = nlohmann::json;

std::string to_string(StageState state) {
  switch (state) {
    case StageState::pending: return "pending";
    case StageState::running: return "running";
    case StageState::done: return "done";
    case StageState::failed: return "failed";
    case StageState::skipped: return "skipped";
  }
  return "unknown";
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

Json ProcessingJob::to_json() const {
  Json stage_list = Json::array();
  for (const auto& s : stages)
    stage_list.push_back({{"name", s.name},
                          {"state", to_string(s.state)},
                          {"error", s.error ? Json(*s.error) : Json(nullptr)},
                          {"detail", s.detail}});
  return {{"job_id", job_id},
          {"doc_id", doc_id},
          {"stages", stage_list},
          {"requested_predictors", requested_predictors},
          {"pipeline_config", pipeline_config},
          {"created_at", created_at},
          {"finished_at", finished_at ? Json(*finished_at) : Json(nullptr)}};
}

namespace {

fs::path job_path(const Store& store, const std::string& doc_id, const std::string& job_id) {
  return store.doc_dir(doc_id) / "jobs" / (job_id + ".json");
}

ProcessingJob job_from_json(const Json& j) {
  ProcessingJob job;
  job.job_id = j.at("job_id").get<std::string>();
  job.doc_id = j.at("doc_id").get<std::string>();
  for (const auto& s : j.at("stages")) {
    Stage stage;
    stage.name = s.at("name").get<std::string>();
    const std::string state = s.at("state").get<std::string>();
    for (auto st : {StageState::pending, StageState::running, StageState::done, StageState::failed, StageState::skipped})
      if (to_string(st) == state) stage.state = st;
    if (s.contains("error") && s["error"].is_string()) stage.error = s["error"].get<std::string>();
    stage.detail = s.value("detail", Json::object());
    job.stages.push_back(std::move(stage));
  }
  job.requested_predictors = j.value("requested_predictors", Json::array());
  job.pipeline_config = j.value("pipeline_config", Json::object());
  job.created_at = j.value("created_at", "");
  if (j.contains("finished_at") && j["finished_at"].is_string()) job.finished_at = j["finished_at"].get<std::string>();
  return job;
}

void render_pages(Store& store, const std::string& doc_id, const pdf::PdfPageRenderer& renderer, int dpi,
                  bool only_missing) {
  for (int p = 0; p < renderer.page_count(); ++p) {
    const fs::path path = store.page_path(doc_id, p);
    if (only_missing && fs::exists(path)) continue;
    write_file_atomic(path, renderer.render_page(p, dpi).to_png());
  }
}

}  // namespace

JobRunner::JobRunner(Store& store, int workers, Log log) : store_(store), log_(std::move(log)) {
  for (int i = 0; i < std::max(1, workers); ++i) threads_.emplace_back([this] { work(); });
}

JobRunner::~JobRunner() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  for (auto& t : threads_) t.join();
}

std::string JobRunner::submit(const std::string& doc_id, pipeline::PipelineConfig config,
                              std::vector<PreparedPredictor> predictors, const predict::Registry& registry) {
  auto pending = std::make_shared<Pending>();
  static thread_local std::mt19937_64 rng(std::random_device{}());
  {
    std::lock_guard lock(mutex_);
    char id[40];
    std::snprintf(id, sizeof id, "%016llx%04llx", static_cast<unsigned long long>(rng()),
                  static_cast<unsigned long long>(++counter_ & 0xffff));
    pending->job.job_id = id;
  }
  pending->job.doc_id = doc_id;
  pending->job.created_at = utc_timestamp();
  pending->job.pipeline_config = config.to_json();
  pending->job.stages.push_back(Stage{"parse", StageState::pending, std::nullopt, Json::object()});
  for (const auto& p : predictors) {
    pending->job.stages.push_back(Stage{p.request.name, StageState::pending, std::nullopt, Json::object()});
    predict::PredictorRequest shown = p.request;
    shown.config = registry.redact(p.request.name, p.request.config);
    pending->job.requested_predictors.push_back(shown.to_json());
  }
  pending->config = std::move(config);
  pending->predictors = std::move(predictors);
  write_file_atomic(job_path(store_, doc_id, pending->job.job_id), pending->job.to_json().dump());
  {
    std::lock_guard lock(mutex_);
    jobs_[pending->job.job_id] = pending;
    job_docs_[pending->job.job_id] = doc_id;
    queue_.push_back(pending);
  }
  log_("job " + pending->job.job_id + " queued for " + doc_id);
  wake_.notify_all();
  return pending->job.job_id;
}

std::optional<ProcessingJob> JobRunner::job(const std::string& job_id) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = jobs_.find(job_id); it != jobs_.end()) return it->second->job;
  }
  if (job_id.empty() || job_id.find_first_not_of("0123456789abcdef") != std::string::npos) return std::nullopt;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(store_.root(), ec)) {
    const fs::path p = entry.path() / "jobs" / (job_id + ".json");
    if (!fs::exists(p)) continue;
    const Json j = Json::parse(read_file(p), nullptr, false);
    if (!j.is_discarded()) return job_from_json(j);
  }
  return std::nullopt;
}

void JobRunner::wait_idle() {
  std::unique_lock lock(mutex_);
  idle_.wait(lock, [&] { return queue_.empty() && running_ == 0; });
}

void JobRunner::work() {
  for (;;) {
    std::shared_ptr<Pending> next;
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] {
        if (stopping_) return true;
        for (const auto& p : queue_)
          if (!busy_docs_.count(p->job.doc_id)) return true;
        return false;
      });
      if (stopping_) return;
      for (auto it = queue_.begin(); it != queue_.end(); ++it) {
        if (busy_docs_.count((*it)->job.doc_id)) continue;
        next = *it;
        queue_.erase(it);
        break;
      }
      busy_docs_.insert(next->job.doc_id);
      ++running_;
    }
    execute(*next);
    {
      std::lock_guard lock(mutex_);
      busy_docs_.erase(next->job.doc_id);
      --running_;
    }
    wake_.notify_all();
    idle_.notify_all();
  }
}

void JobRunner::update(Pending& pending, std::size_t stage, StageState state, std::optional<std::string> error,
                       Json detail) {
  Json snapshot;
  {
    std::lock_guard lock(mutex_);
    Stage& s = pending.job.stages[stage];
    s.state = state;
    s.error = std::move(error);
    if (!detail.is_null()) s.detail = std::move(detail);
    snapshot = pending.job.to_json();
  }
  write_file_atomic(job_path(store_, pending.job.doc_id, pending.job.job_id), snapshot.dump());
  log_("job " + pending.job.job_id + " stage " + std::to_string(stage) + " (" + pending.job.stages[stage].name +
       ") " + to_string(state) + (pending.job.stages[stage].error ? ": " + *pending.job.stages[stage].error : ""));
}

void JobRunner::execute(Pending& pending) {
  const std::string& doc_id = pending.job.doc_id;
  std::unique_ptr<pdf::PdfPageRenderer> renderer;
  bool parsed = false;

  update(pending, 0, StageState::running);
  try {
    const std::string pdf = store_.read_pdf(doc_id);
    renderer = std::make_unique<pdf::PdfPageRenderer>(pdf);
    const auto cached = store_.has_parsed(doc_id) ? store_.load_document(doc_id) : nullptr;
    if (cached && cached->metadata.value("pipeline_config_hash", "") == pending.config.hash()) {
      render_pages(store_, doc_id, *renderer, pending.config.render_dpi, true);
      update(pending, 0, StageState::skipped, std::nullopt, Json{{"reason", "cached parse for this pipeline config"}});
    } else {
      const doc::Document d =
          parse_stage(pdf, pending.config, store_.source_filename(doc_id), store_.region_hints(doc_id));
      store_.save_document(d);
      render_pages(store_, doc_id, *renderer, pending.config.render_dpi, false);
      update(pending, 0, StageState::done);
    }
    parsed = true;
  } catch (const std::exception& e) {
    update(pending, 0, StageState::failed, std::string(e.what()));
  }

  for (std::size_t i = 0; i < pending.predictors.size(); ++i) {
    const std::size_t stage = i + 1;
    if (!parsed) {
      update(pending, stage, StageState::failed, std::string("parse stage failed"));
      continue;
    }
    update(pending, stage, StageState::running);
    try {
      const auto current = store_.load_document(doc_id);
      if (!current) throw Error("storage-error", "document.json missing");
      auto result = predictor_stage(*current, pending.predictors[i], *renderer, pending.config);
      store_.save_document(result.document);
      store_.append_errors(doc_id, pending.predictors[i].request.name, errors_jsonl(result.errors));
      update(pending, stage, StageState::done, std::nullopt,
             Json{{"layer", result.layer}, {"entity_errors", result.errors.size()}});
    } catch (const std::exception& e) {
      update(pending, stage, StageState::failed, std::string(e.what()));
    }
  }

  Json snapshot;
  {
    std::lock_guard lock(mutex_);
    pending.job.finished_at = utc_timestamp();
    snapshot = pending.job.to_json();
  }
  write_file_atomic(job_path(store_, doc_id, pending.job.job_id), snapshot.dump());
  log_("job " + pending.job.job_id + " finished");
}

}  // namespace layerlab::service
