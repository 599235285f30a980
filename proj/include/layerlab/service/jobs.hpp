#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "layerlab/pipeline/config.hpp"
#include "layerlab/service/processing.hpp"
#include "layerlab/service/store.hpp"

namespace layerlab::service {

enum class StageState { pending, running, done, failed, skipped };
std::string to_string(StageState state);

struct Stage {
  std::string name;
  StageState state = StageState::pending;
  std::optional<std::string> error;
  nlohmann::json detail = nlohmann::json::object();  // result layer, entity error count
};

struct ProcessingJob {
  std::string job_id;
  std::string doc_id;
  std::vector<Stage> stages;
  nlohmann::json requested_predictors = nlohmann::json::array();  // secrets redacted
  nlohmann::json pipeline_config = nlohmann::json::object();
  std::string created_at;
  std::optional<std::string> finished_at;

  nlohmann::json to_json() const;
};

// Runs jobs on `workers` threads; jobs of one document never overlap.
class JobRunner {
 public:
  using Log = std::function<void(const std::string&)>;

  JobRunner(Store& store, int workers, Log log);
  ~JobRunner();
  JobRunner(const JobRunner&) = delete;
  JobRunner& operator=(const JobRunner&) = delete;

  // Persists the job record and queues it.
  std::string submit(const std::string& doc_id, pipeline::PipelineConfig config,
                     std::vector<PreparedPredictor> predictors, const predict::Registry& registry);

  // In-memory state, falling back to the persisted record.
  std::optional<ProcessingJob> job(const std::string& job_id) const;

  // Blocks until no job is queued or running.
  void wait_idle();

 private:
  struct Pending {
    ProcessingJob job;
    pipeline::PipelineConfig config;
    std::vector<PreparedPredictor> predictors;
  };

  void work();
  void execute(Pending& pending);
  void update(Pending& pending, std::size_t stage, StageState state, std::optional<std::string> error = {},
              nlohmann::json detail = nullptr);

  Store& store_;
  Log log_;
  mutable std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable idle_;
  std::deque<std::shared_ptr<Pending>> queue_;
  std::set<std::string> busy_docs_;
  std::map<std::string, std::shared_ptr<Pending>> jobs_;
  std::map<std::string, std::string> job_docs_;
  int running_ = 0;
  bool stopping_ = false;
  std::uint64_t counter_ = 0;
  std::vector<std::thread> threads_;
};

std::string utc_timestamp();

}  // namespace layerlab::service
