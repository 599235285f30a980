#include "layerlab/service/store.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include "layerlab/doc/serialize.hpp"
#include "layerlab/error.hpp"
#include "layerlab/util/hash.hpp"

namespace layerlab::service {

namespace fs = std::filesystem;
using Json = nlohmann::json;

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  fs::create_directories(path.parent_path());
  static std::atomic<std::uint64_t> counter{0};
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("storage-error", "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("storage-error", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_doc_id(const std::string& s) {
  return s.size() == 64 && s.find_first_not_of("0123456789abcdef") == std::string::npos;
}

Store::Store(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path Store::page_path(const std::string& doc_id, int page) const {
  return doc_dir(doc_id) / "pages" / (std::to_string(page) + ".png");
}

bool Store::has_document(const std::string& doc_id) const {
  return is_doc_id(doc_id) && (fs::exists(doc_dir(doc_id) / "original.pdf") || fs::exists(doc_dir(doc_id) / "document.json"));
}

std::vector<std::string> Store::document_ids() const {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(root_)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && has_document(name)) out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<std::string, bool> Store::put_pdf(const std::string& pdf_bytes, const std::string& filename,
                                            const std::optional<std::string>& regions_json) {
  const std::string id = sha256_hex(pdf_bytes);
  std::lock_guard lock(mutex_);
  if (fs::exists(doc_dir(id) / "original.pdf")) return {id, false};
  if (regions_json) write_file_atomic(doc_dir(id) / "regions.json", *regions_json);
  write_file_atomic(doc_dir(id) / "upload.json", Json{{"filename", filename}}.dump());
  write_file_atomic(doc_dir(id) / "original.pdf", pdf_bytes);
  return {id, true};
}

std::string Store::read_pdf(const std::string& doc_id) const { return read_file(doc_dir(doc_id) / "original.pdf"); }

std::string Store::source_filename(const std::string& doc_id) const {
  const fs::path p = doc_dir(doc_id) / "upload.json";
  if (!fs::exists(p)) return "original.pdf";
  const Json j = Json::parse(read_file(p), nullptr, false);
  return j.is_object() ? j.value("filename", "original.pdf") : "original.pdf";
}

std::vector<pipeline::TableHint> Store::region_hints(const std::string& doc_id) const {
  const fs::path p = doc_dir(doc_id) / "regions.json";
  if (!fs::exists(p)) return {};
  const Json j = Json::parse(read_file(p), nullptr, false);
  if (j.is_discarded()) throw Error("invalid-region-hints", "regions.json is not valid JSON");
  return pipeline::parse_region_hints(j);
}

bool Store::has_parsed(const std::string& doc_id) const {
  return is_doc_id(doc_id) && fs::exists(doc_dir(doc_id) / "document.json");
}

std::shared_ptr<const doc::Document> Store::load_document(const std::string& doc_id) const {
  const fs::path p = doc_dir(doc_id) / "document.json";
  std::lock_guard lock(mutex_);
  std::error_code ec;
  const auto stamp = fs::last_write_time(p, ec);
  if (ec) return nullptr;
  const auto size = fs::file_size(p, ec);
  auto it = cache_.find(doc_id);
  if (it != cache_.end() && it->second.stamp == stamp && it->second.size == size) return it->second.doc;
  auto loaded = std::make_shared<const doc::Document>(doc::deserialize(read_file(p)));
  cache_[doc_id] = {stamp, size, loaded};
  return loaded;
}

void Store::save_document(const doc::Document& doc) {
  const std::string bytes = doc::serialize(doc);
  std::lock_guard lock(mutex_);
  write_file_atomic(doc_dir(doc.doc_id) / "document.json", bytes);
  cache_.erase(doc.doc_id);
}

void Store::append_errors(const std::string& doc_id, const std::string& predictor, const std::string& jsonl) {
  if (jsonl.empty()) return;
  std::lock_guard lock(mutex_);
  const fs::path dir = doc_dir(doc_id) / "errors";
  fs::create_directories(dir);
  std::ofstream out(dir / (predictor + ".jsonl"), std::ios::binary | std::ios::app);
  out << jsonl;
}

}  // namespace layerlab::service
