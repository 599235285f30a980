#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "layerlab/doc/document.hpp"
#include "layerlab/pipeline/pipeline.hpp"

namespace layerlab::service {

// Writes to a temporary sibling then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

// Filesystem layout, one directory per document under `root`:
//   <doc_id>/original.pdf, upload.json, regions.json?, document.json,
//   pages/<n>.png, errors/<predictor>.jsonl, jobs/<job_id>.json
class Store {
 public:
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path doc_dir(const std::string& doc_id) const { return root_ / doc_id; }
  std::filesystem::path page_path(const std::string& doc_id, int page) const;

  bool has_document(const std::string& doc_id) const;
  std::vector<std::string> document_ids() const;

  // Content-addressed; returns (doc_id, newly created). An existing document
  // keeps its original upload metadata and region hints.
  std::pair<std::string, bool> put_pdf(const std::string& pdf_bytes, const std::string& filename,
                                       const std::optional<std::string>& regions_json);
  std::string read_pdf(const std::string& doc_id) const;
  std::string source_filename(const std::string& doc_id) const;
  // Errors: invalid-region-hints.
  std::vector<pipeline::TableHint> region_hints(const std::string& doc_id) const;

  bool has_parsed(const std::string& doc_id) const;
  // Last persisted snapshot; cached until document.json changes on disk.
  std::shared_ptr<const doc::Document> load_document(const std::string& doc_id) const;
  void save_document(const doc::Document& doc);

  void append_errors(const std::string& doc_id, const std::string& predictor, const std::string& jsonl);

 private:
  std::filesystem::path root_;
  mutable std::mutex mutex_;
  struct Cached {
    std::filesystem::file_time_type stamp;
    std::uintmax_t size = 0;
    std::shared_ptr<const doc::Document> doc;
  };
  mutable std::map<std::string, Cached> cache_;
};

// Lowercase hex doc ids as produced by sha256_hex.
bool is_doc_id(const std::string& s);

}  // namespace layerlab::service
