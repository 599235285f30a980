#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "layerlab/predict/registry.hpp"

namespace layerlab::service {

struct ServiceConfig {
  std::filesystem::path data_dir = "data";
  std::string host = "127.0.0.1";
  int port = 8402;
  std::size_t max_upload_mb = 50;
  int workers = 2;
  std::optional<std::filesystem::path> static_dir;  // webapp build, mounted at "/"

  // LAYERLAB_DATA_DIR, LAYERLAB_PORT, LAYERLAB_MAX_UPLOAD_MB over the defaults.
  // Errors: ConfigError for malformed values.
  static ServiceConfig from_env();
};

class Service {
 public:
  // Creates the data directory. `registry` is frozen from here on.
  Service(ServiceConfig config, predict::Registry registry);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds config.port (0 picks a free port) and returns the bound port.
  // Errors: bind-failed.
  int bind();
  // Serves until stop(); call bind() first.
  void serve();
  void stop();

  // Blocks until the job queue is drained.
  void wait_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace layerlab::service
