#include "layerlab/service/server.hpp"

#include <charconv>
#include <cstdlib>
#include <map>
#include <set>

#include <httplib.h>

#include "layerlab/doc/serialize.hpp"
#include "layerlab/error.hpp"
#include "layerlab/pdf/render.hpp"
#include "layerlab/predict/runners.hpp"
#include "layerlab/service/jobs.hpp"
#include "layerlab/service/processing.hpp"
#include "layerlab/service/store.hpp"
#include "layerlab/service/views.hpp"

namespace layerlab::service {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

template <typename T>
T env_number(const char* name, T fallback, T min, T max) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return fallback;
  T value{};
  const std::string s(raw);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value < min || value > max)
    throw ConfigError(FieldErrors{{name, "expected an integer in [" + std::to_string(min) + ", " + std::to_string(max) + "]"}});
  return value;
}

int status_for(const std::string& code) {
  static const std::map<std::string, int> table = {
      {"not-found", 404},          {"unknown-document", 404},  {"unknown-job", 404},
      {"missing-layer", 404},      {"unknown-entity", 404},    {"page-out-of-range", 404},
      {"missing-original", 404},   {"not-yet-processed", 409}, {"config-validation-error", 422},
      {"entity-has-no-boxes", 422}, {"not-a-pdf", 400},        {"invalid-parameter", 400},
      {"invalid-json", 400},       {"invalid-region-hints", 400}, {"missing-file", 400},
      {"too-large", 413}};
  const auto it = table.find(code);
  return it == table.end() ? 500 : it->second;
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                const FieldErrors* fields = nullptr) {
  Json err = {{"code", code}, {"message", message}};
  if (fields) err["fields"] = *fields;
  send_json(res, status, {{"error", err}});
}

int int_param(const httplib::Request& req, const std::string& key, int fallback, int min, int max) {
  if (!req.has_param(key)) return fallback;
  const std::string s = req.get_param_value(key);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value < min || value > max)
    throw Error("invalid-parameter", key + " must be an integer in [" + std::to_string(min) + ", " + std::to_string(max) + "]");
  return value;
}

double double_param(const httplib::Request& req, const std::string& key, double fallback, double min, double max) {
  if (!req.has_param(key)) return fallback;
  const std::string s = req.get_param_value(key);
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (s.empty() || *end || !(value >= min && value <= max))
    throw Error("invalid-parameter", key + " must be a number in [" + std::to_string(min) + ", " + std::to_string(max) + "]");
  return value;
}

std::int64_t id_param(const std::string& s) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("unknown-entity", "entity id must be an integer");
  return value;
}

// Width and height from a PNG's IHDR chunk.
std::optional<std::pair<int, int>> png_size(const std::string& png) {
  if (png.size() < 24 || png.compare(12, 4, "IHDR") != 0) return std::nullopt;
  const auto be = [&](std::size_t at) {
    return (static_cast<unsigned char>(png[at]) << 24) | (static_cast<unsigned char>(png[at + 1]) << 16) |
           (static_cast<unsigned char>(png[at + 2]) << 8) | static_cast<unsigned char>(png[at + 3]);
  };
  return std::make_pair(static_cast<int>(be(16)), static_cast<int>(be(20)));
}

}  // namespace

ServiceConfig ServiceConfig::from_env() {
  ServiceConfig c;
  if (const char* dir = std::getenv("LAYERLAB_DATA_DIR"); dir && *dir) c.data_dir = dir;
  c.port = env_number<int>("LAYERLAB_PORT", c.port, 0, 65535);
  c.max_upload_mb = env_number<std::size_t>("LAYERLAB_MAX_UPLOAD_MB", c.max_upload_mb, 1, 1 << 20);
  return c;
}

struct Service::Impl {
  Impl(ServiceConfig cfg, predict::Registry reg)
      : config(std::move(cfg)),
        registry(std::move(reg)),
        store((fs::create_directories(config.data_dir), config.data_dir / "documents")),
        log_file(config.data_dir / "service.log", std::ios::app),
        runner(store, config.workers, [this](const std::string& line) { log(line); }) {}

  void log(const std::string& line) {
    std::lock_guard lock(log_mutex);
    log_file << utc_timestamp() << " " << line << "\n";
    log_file.flush();
  }

  std::shared_ptr<const doc::Document> parsed_document(const std::string& doc_id) {
    if (!store.has_document(doc_id)) throw Error("unknown-document", "no document " + doc_id);
    auto d = store.load_document(doc_id);
    if (!d) throw Error("not-yet-processed", "document " + doc_id + " has not been parsed yet");
    return d;
  }

  std::shared_ptr<pdf::PdfPageRenderer> renderer(const std::string& doc_id) {
    std::lock_guard lock(renderer_mutex);
    auto it = renderers.find(doc_id);
    if (it != renderers.end()) return it->second;
    if (!fs::exists(store.doc_dir(doc_id) / "original.pdf"))
      throw Error("missing-original", "document " + doc_id + " has no original PDF to render");
    auto r = std::make_shared<pdf::PdfPageRenderer>(store.read_pdf(doc_id));
    renderers[doc_id] = r;
    return r;
  }

  void routes();

  ServiceConfig config;
  const predict::Registry registry;
  Store store;
  std::mutex log_mutex;
  std::ofstream log_file;
  JobRunner runner;
  std::mutex renderer_mutex;
  std::map<std::string, std::shared_ptr<pdf::PdfPageRenderer>> renderers;
  httplib::Server server;
  int port = -1;
};

namespace {

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler handler) {
  return [handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const ConfigError& e) {
      send_error(res, 422, e.code(), e.what(), &e.fields());
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), e.code(), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal-error", e.what());
    }
  };
}

}  // namespace

void Service::Impl::routes() {
  auto& s = server;
  s.set_payload_max_length(config.max_upload_mb * 1024 * 1024 + 1024 * 1024);
  // httplib's default adds SO_REUSEPORT, which lets a second server share a busy port.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 413) send_error(res, 413, "too-large", "request body exceeds the upload limit");
    else if (res.status == 404) send_error(res, 404, "not-found", "no such resource");
    else send_error(res, res.status, "http-error", "request failed");
  });
  s.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
    log(req.method + " " + req.path + " " + std::to_string(res.status));
  });

  s.Get("/health", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"status", "ok"}}); });

  s.Get("/documents", guarded([this](const httplib::Request&, httplib::Response& res) {
    Json list = Json::array();
    for (const auto& id : store.document_ids())
      list.push_back({{"doc_id", id}, {"filename", store.source_filename(id)}, {"parsed", store.has_parsed(id)}});
    send_json(res, 200, list);
  }));

  s.Post("/documents", guarded([this](const httplib::Request& req, httplib::Response& res) {
    if (!req.is_multipart_form_data() || !req.has_file("file"))
      throw Error("missing-file", "expected multipart/form-data with a \"file\" field");
    const auto file = req.get_file_value("file");
    if (file.content.size() > config.max_upload_mb * 1024 * 1024)
      throw Error("too-large", "upload exceeds " + std::to_string(config.max_upload_mb) + " MB");
    if (file.content.substr(0, 1024).find("%PDF-") == std::string::npos)
      throw Error("not-a-pdf", "uploaded file is not a PDF");
    std::optional<std::string> regions;
    if (req.has_file("regions") && !req.get_file_value("regions").content.empty()) {
      regions = req.get_file_value("regions").content;
      const Json parsed = Json::parse(*regions, nullptr, false);
      if (parsed.is_discarded()) throw Error("invalid-region-hints", "regions field is not valid JSON");
      pipeline::parse_region_hints(parsed);
    }
    const std::string filename = file.filename.empty() ? "upload.pdf" : fs::path(file.filename).filename().string();
    const auto [id, created] = store.put_pdf(file.content, filename, regions);
    send_json(res, created ? 201 : 200, {{"doc_id", id}});
  }));

  s.Get("/predictors", guarded([this](const httplib::Request&, httplib::Response& res) {
    Json list = Json::array();
    for (const auto& d : registry.list()) list.push_back(d.to_json());
    send_json(res, 200, list);
  }));

  s.Post("/documents/:id/process", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    if (!store.has_document(id) || !fs::exists(store.doc_dir(id) / "original.pdf"))
      throw Error("unknown-document", "no document " + id);
    const Json body = req.body.empty() ? Json::object() : Json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw Error("invalid-json", "request body must be a JSON object");
    FieldErrors errors;
    for (const auto& [key, value] : body.items())
      if (key != "predictors" && key != "pipeline_config") errors[key] = "unknown field";
    pipeline::PipelineConfig config;
    try {
      if (body.contains("pipeline_config") && !body["pipeline_config"].is_null())
        config = pipeline::PipelineConfig::from_json(body["pipeline_config"]);
    } catch (const ConfigError& e) {
      for (const auto& [f, p] : e.fields()) errors["pipeline_config." + f] = p;
    }
    std::vector<PreparedPredictor> prepared;
    try {
      prepared = prepare_predictors(registry, parse_predictor_requests(body.value("predictors", Json::array())));
    } catch (const ConfigError& e) {
      for (const auto& [f, p] : e.fields()) errors[f] = p;
    }
    if (!errors.empty()) throw ConfigError(errors);
    const std::string job_id = runner.submit(id, std::move(config), std::move(prepared), registry);
    send_json(res, 202, {{"job_id", job_id}});
  }));

  s.Get("/jobs/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto job = runner.job(req.path_params.at("id"));
    if (!job) throw Error("unknown-job", "no job " + req.path_params.at("id"));
    send_json(res, 200, job->to_json());
  }));

  s.Get("/documents/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto d = parsed_document(req.path_params.at("id"));
    res.status = 200;
    res.set_content(doc::serialize(*d), "application/json");
  }));

  s.Get("/documents/:id/layers", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto d = parsed_document(req.path_params.at("id"));
    Json names = Json::array();
    for (const auto& [name, layer] : d->layers) names.push_back(name);
    send_json(res, 200, names);
  }));

  s.Get("/documents/:id/layers/:name", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto d = parsed_document(req.path_params.at("id"));
    Json entities = Json::array();
    for (const auto& e : d->layer(req.path_params.at("name")).entities) entities.push_back(doc::entity_to_json(e));
    send_json(res, 200, entities);
  }));

  s.Get("/documents/:id/pages/:n/image", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    const auto d = parsed_document(id);
    const int dpi = int_param(req, "dpi", 150, 18, 600);
    int n = -1;
    const std::string raw = req.path_params.at("n");
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), n);
    if (ec != std::errc() || ptr != raw.data() + raw.size() || n < 0 || n >= static_cast<int>(d->pages.size()))
      throw Error("page-out-of-range", "page " + raw + " does not exist");
    const doc::PageInfo& page = d->pages[static_cast<std::size_t>(n)];
    const std::pair<int, int> expected = {std::max(1, static_cast<int>(std::lround(page.width_pts * dpi / 72.0))),
                                          std::max(1, static_cast<int>(std::lround(page.height_pts * dpi / 72.0)))};
    const fs::path stored = store.page_path(id, n);
    if (fs::exists(stored)) {
      std::string png = read_file(stored);
      if (png_size(png) == expected) {
        res.set_content(std::move(png), "image/png");
        return;
      }
    }
    res.set_content(renderer(id)->render_page(n, dpi).to_png(), "image/png");
  }));

  s.Get("/documents/:id/entities/:layer/:eid/crop", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    const auto d = parsed_document(id);
    const doc::Entity* e = d->layer(req.path_params.at("layer")).find(id_param(req.path_params.at("eid")));
    if (!e) throw Error("unknown-entity", "no entity " + req.path_params.at("eid"));
    const int dpi = int_param(req, "dpi", 150, 18, 600);
    const double pad = double_param(req, "pad", 0.01, 0, 1);
    const doc::Box region = predict::entity_region(*e);
    std::set<int> pages;
    for (const auto& b : e->boxes) pages.insert(b.page);
    res.set_header("X-Page-Count", std::to_string(pages.size()));
    res.set_content(renderer(id)->render_region(region, dpi, pad).to_png(), "image/png");
  }));

  s.Get("/documents/:id/summary", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto d = parsed_document(req.path_params.at("id"));
    std::optional<std::string> section;
    if (req.has_param("section") && !req.get_param_value("section").empty()) section = req.get_param_value("section");
    send_json(res, 200, summary_payload(*d, section));
  }));

  s.Get("/documents/:id/entities/:layer/:eid/annotations",
        guarded([this](const httplib::Request& req, httplib::Response& res) {
          const auto d = parsed_document(req.path_params.at("id"));
          send_json(res, 200,
                    annotations_payload(*d, req.path_params.at("layer"), id_param(req.path_params.at("eid"))));
        }));

  if (config.static_dir && fs::is_directory(*config.static_dir)) s.set_mount_point("/", config.static_dir->string());
}

Service::Service(ServiceConfig config, predict::Registry registry)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(registry))) {
  impl_->routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  auto& c = impl_->config;
  if (c.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(c.host);
  } else {
    impl_->port = impl_->server.bind_to_port(c.host, c.port) ? c.port : -1;
  }
  if (impl_->port <= 0) throw Error("bind-failed", "cannot bind " + c.host + ":" + std::to_string(c.port));
  impl_->log("listening on " + c.host + ":" + std::to_string(impl_->port));
  return impl_->port;
}

void Service::serve() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

void Service::wait_idle() { impl_->runner.wait_idle(); }

}  // namespace layerlab::service
