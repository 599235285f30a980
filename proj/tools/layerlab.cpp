#include <signal.h>
#include <unistd.h>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "layerlab/cli/batch.hpp"
#include "layerlab/error.hpp"
#include "layerlab/predictors/builtin.hpp"
#include "layerlab/service/server.hpp"

namespace {

using namespace layerlab;

int serve(const service::ServiceConfig& base, const std::optional<int>& port, const std::optional<std::string>& data_dir,
          const std::optional<std::string>& host, const std::optional<int>& workers,
          const std::optional<std::string>& static_dir) {
  service::ServiceConfig config = base;
  if (port) config.port = *port;
  if (data_dir) config.data_dir = *data_dir;
  if (host) config.host = *host;
  if (workers) config.workers = *workers;
  if (static_dir) config.static_dir = *static_dir;

  // Signals are consumed by a dedicated thread so stop() runs outside a handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<service::Service> svc;
  int bound = 0;
  try {
    svc = std::make_unique<service::Service>(config, predictors::default_registry());
    bound = svc->bind();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kConfigError;
  }
  std::cout << "listening on http://" << config.host << ":" << bound << std::endl;
  std::atomic<bool> signalled{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    signalled = true;
    svc->stop();
  });
  svc->serve();
  // serve() can also return on its own; the pending signal stays blocked.
  if (!signalled) kill(getpid(), SIGTERM);
  waiter.join();
  return cli::kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"layerlab: layered PDF document processing with pluggable predictors"};
  app.require_subcommand(1);

  auto* process = app.add_subcommand("process", "Batch-process a directory of PDFs");
  std::string config_path;
  std::optional<std::string> input_dir, output_dir;
  process->add_option("--config", config_path, "Batch config (YAML or JSON)")->required();
  process->add_option("--input", input_dir, "Directory of PDFs (overrides input_dir)");
  process->add_option("--output", output_dir, "Output directory (overrides output_dir)");

  auto* export_cmd = app.add_subcommand("export-tables", "Write parsed tables of a document as CSV");
  std::string doc_path, out_dir;
  export_cmd->add_option("--doc", doc_path, "document.json")->required();
  export_cmd->add_option("--out", out_dir, "Output directory")->required();

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  std::optional<int> port, workers;
  std::optional<std::string> data_dir, host, static_dir;
  serve_cmd->add_option("--port", port, "Port, 0 for any free port (env LAYERLAB_PORT, default 8402)");
  serve_cmd->add_option("--data-dir", data_dir, "Data directory (env LAYERLAB_DATA_DIR, default ./data)");
  serve_cmd->add_option("--host", host, "Bind address (default 127.0.0.1)");
  serve_cmd->add_option("--workers", workers, "Documents processed in parallel (default 2)");
  serve_cmd->add_option("--static-dir", static_dir, "Built webapp to serve at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  if (*process) {
    cli::BatchConfig config;
    try {
      config = cli::BatchConfig::load(config_path);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return cli::kConfigError;
    }
    if (input_dir) config.input_dir = *input_dir;
    if (output_dir) config.output_dir = *output_dir;
    return cli::run_batch(config, predictors::default_registry(), std::cout, std::cerr);
  }
  if (*export_cmd) return cli::export_tables(doc_path, out_dir, std::cout, std::cerr);

  service::ServiceConfig base;
  try {
    base = service::ServiceConfig::from_env();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kConfigError;
  }
  return serve(base, port, data_dir, host, workers, static_dir);
}
