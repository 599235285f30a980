#include "layerlab/cli/batch.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <sstream>

#include "layerlab/doc/serialize.hpp"
#include "layerlab/error.hpp"
#include "layerlab/pdf/render.hpp"
#include "layerlab/predict/types.hpp"
#include "layerlab/predictors/table.hpp"
#include "layerlab/service/processing.hpp"
#include "layerlab/service/store.hpp"
#include "layerlab/service/views.hpp"
#include "layerlab/util/parallel.hpp"

namespace layerlab::cli {

namespace fs = std::filesystem;
using Json = nlohmann::json;

BatchConfig BatchConfig::from_json(const Json& json) {
  if (!json.is_object()) throw ConfigError(FieldErrors{{"config", "expected an object"}});
  BatchConfig c;
  FieldErrors errors;
  for (const auto& [key, value] : json.items()) {
    if (key == "input_dir" || key == "output_dir") {
      if (value.is_string()) (key == "input_dir" ? c.input_dir : c.output_dir) = value.get<std::string>();
      else errors[key] = "expected a string";
    } else if (key == "pipeline_config") {
      try {
        if (!value.is_null()) c.pipeline_config = pipeline::PipelineConfig::from_json(value);
      } catch (const ConfigError& e) {
        for (const auto& [f, p] : e.fields()) errors["pipeline_config." + f] = p;
      }
    } else if (key == "predictors") {
      try {
        c.predictors = service::parse_predictor_requests(value);
      } catch (const ConfigError& e) {
        for (const auto& [f, p] : e.fields()) errors[f] = p;
      }
    } else if (key == "continue_on_error") {
      if (value.is_boolean()) c.continue_on_error = value.get<bool>();
      else errors[key] = "expected a boolean";
    } else if (key == "parallelism") {
      if (value.is_number_integer() && value.get<int>() >= 1) c.parallelism = value.get<int>();
      else errors[key] = "expected an integer >= 1";
    } else {
      errors[key] = "unknown field";
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
  return c;
}

BatchConfig BatchConfig::load(const fs::path& path) {
  Json json;
  try {
    json = pipeline::load_yaml_or_json(path);
  } catch (const Error& e) {
    throw ConfigError(FieldErrors{{"config", e.what()}});
  }
  return from_json(json.is_null() ? Json::object() : json);
}

namespace {

struct FileOutcome {
  bool ok = false;
  std::string line;
};

FileOutcome process_file(const fs::path& pdf_path, const BatchConfig& config,
                         const std::vector<service::PreparedPredictor>& predictors) {
  const std::string name = pdf_path.filename().string();
  const std::string pdf = service::read_file(pdf_path);
  std::vector<pipeline::TableHint> hints;
  std::optional<std::string> regions_text;
  fs::path regions_path = pdf_path;
  regions_path.replace_extension(".regions.json");
  if (fs::exists(regions_path)) {
    regions_text = service::read_file(regions_path);
    const Json j = Json::parse(*regions_text, nullptr, false);
    if (j.is_discarded()) throw Error("invalid-region-hints", regions_path.filename().string() + " is not valid JSON");
    hints = pipeline::parse_region_hints(j);
  }

  doc::Document d = service::parse_stage(pdf, config.pipeline_config, name, hints);
  const pdf::PdfPageRenderer renderer(pdf);
  const fs::path dir = config.output_dir / d.doc_id;
  fs::remove_all(dir / "errors");

  std::vector<std::string> stage_failures;
  std::map<std::string, std::string> error_logs;
  for (const auto& p : predictors) {
    try {
      auto result = service::predictor_stage(d, p, renderer, config.pipeline_config);
      d = std::move(result.document);
      error_logs[p.request.name] += service::errors_jsonl(result.errors);
    } catch (const std::exception& e) {
      stage_failures.push_back(p.request.name + ": " + e.what());
    }
  }

  service::write_file_atomic(dir / "original.pdf", pdf);
  service::write_file_atomic(dir / "upload.json", Json{{"filename", name}}.dump());
  if (regions_text) service::write_file_atomic(dir / "regions.json", *regions_text);
  for (const auto& [predictor, jsonl] : error_logs)
    if (!jsonl.empty()) service::write_file_atomic(dir / "errors" / (predictor + ".jsonl"), jsonl);
  for (int p = 0; p < renderer.page_count(); ++p)
    service::write_file_atomic(dir / "pages" / (std::to_string(p) + ".png"),
                               renderer.render_page(p, config.pipeline_config.render_dpi).to_png());
  service::write_file_atomic(dir / "document.json", doc::serialize(d));

  std::ostringstream line;
  line << "ok " << name << " " << d.doc_id;
  for (const auto& [layer_name, layer] : d.layers) line << " " << layer_name << "=" << layer.entities.size();
  for (const auto& f : stage_failures) line << " [stage failed: " << f << "]";
  return {true, line.str()};
}

}  // namespace

int run_batch(const BatchConfig& config, const predict::Registry& registry, std::ostream& out, std::ostream& err) {
  std::vector<service::PreparedPredictor> predictors;
  try {
    config.pipeline_config.validate();
    if (config.input_dir.empty() || !fs::is_directory(config.input_dir))
      throw ConfigError(FieldErrors{{"input_dir", "not a directory: " + config.input_dir.string()}});
    if (config.output_dir.empty()) throw ConfigError(FieldErrors{{"output_dir", "required"}});
    predictors = service::prepare_predictors(registry, config.predictors);
    fs::create_directories(config.output_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(config.input_dir)) {
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (entry.is_regular_file() && ext == ".pdf") inputs.push_back(entry.path());
  }
  std::sort(inputs.begin(), inputs.end());

  std::vector<std::optional<FileOutcome>> outcomes(inputs.size());
  std::atomic<bool> abort{false};
  std::mutex print;
  util::parallel_for(inputs.size(), static_cast<unsigned>(std::max(1, config.parallelism)), [&](std::size_t i) {
    if (abort) return;
    FileOutcome o;
    try {
      o = process_file(inputs[i], config, predictors);
    } catch (const std::exception& e) {
      o.line = "failed " + inputs[i].filename().string() + ": " + e.what();
      try {
        service::write_file_atomic(config.output_dir / (inputs[i].stem().string() + ".error.txt"),
                                   std::string(e.what()) + "\n");
      } catch (const std::exception&) {
      }
      if (!config.continue_on_error) abort = true;
    }
    std::lock_guard lock(print);
    out << o.line << "\n";
    outcomes[i] = std::move(o);
  });
  out.flush();
  for (const auto& o : outcomes)
    if (!o || !o->ok) return kFileFailed;
  return kOk;
}

int export_tables(const fs::path& document_json, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  doc::Document d;
  try {
    d = doc::deserialize(service::read_file(document_json));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  int written = 0;
  for (const auto& [name, layer] : d.layers) {
    if (service::result_kind(name) != "image") continue;
    for (const auto& e : layer.entities) {
      if (!e.metadata.contains("table")) continue;
      const auto table = predict::TableRecord::from_json(e.metadata["table"]);
      fs::create_directories(out_dir);
      const fs::path path = out_dir / (d.doc_id + "_" + name + "_" + std::to_string(e.id) + ".csv");
      service::write_file_atomic(path, predictors::table_to_csv(table));
      out << path.string() << "\n";
      ++written;
    }
  }
  if (written == 0) {
    err << "error: no-tables-found: " << document_json.string() << " has no parsed tables\n";
    return kNoTables;
  }
  return kOk;
}

}  // namespace layerlab::cli
