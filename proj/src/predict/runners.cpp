#include "layerlab/predict/runners.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "layerlab/doc/serialize.hpp"
#include "layerlab/error.hpp"
#include "layerlab/util/parallel.hpp"

namespace layerlab::predict {

using doc::Box;
using doc::Document;
using doc::Entity;

std::string result_layer_name(const Document& doc, const std::string& prefix, const std::string& name) {
  const std::string base = doc::normalize_layer_name(prefix + "_" + name);
  if (!doc.has_layer(base)) return base;
  for (int k = 2;; ++k) {
    const std::string candidate = base + "_" + std::to_string(k);
    if (!doc.has_layer(candidate)) return candidate;
  }
}

Box to_page_box(const Box& region, const Box& relative) {
  return {region.page, region.x + relative.x * region.w, region.y + relative.y * region.h, relative.w * region.w,
          relative.h * region.h};
}

Box to_crop_box(const Box& region, const Box& page_box) {
  return {region.page, (page_box.x - region.x) / region.w, (page_box.y - region.y) / region.h,
          page_box.w / region.w, page_box.h / region.h};
}

Box entity_region(const Entity& entity) {
  if (entity.boxes.empty())
    throw Error("entity-has-no-boxes", "entity " + std::to_string(entity.id) + " has no boxes");
  int page = entity.boxes.front().page;
  for (const auto& b : entity.boxes) page = std::min(page, b.page);
  std::optional<Box> region;
  for (const auto& b : entity.boxes)
    if (b.page == page) region = region ? doc::enclose(*region, b) : b;
  return *region;
}

namespace {

const doc::Layer& target_layer(const Document& doc, const std::string& name) {
  if (!doc.has_layer(name)) throw Error("missing-target-layer", "document has no layer \"" + name + "\"");
  return doc.layer(name);
}

unsigned threads_for(const RunOptions& options) { return options.concurrent ? util::default_threads() : 1; }

Json section_of(const Entity& e) { return e.metadata.value("section", Json(nullptr)); }

std::string check_tags(const std::vector<TaggedSpan>& tags, std::int64_t length) {
  for (const auto& t : tags) {
    if (!(t.start >= 0 && t.start < t.end && t.end <= length))
      return "tag [" + std::to_string(t.start) + ", " + std::to_string(t.end) + ") outside the sentence (length " +
             std::to_string(length) + ")";
    if (t.label.empty()) return "tag with an empty label";
    if (!(std::isfinite(t.score) && t.score >= 0 && t.score <= 1)) return "tag score outside [0,1]";
  }
  return {};
}

}  // namespace

RunResult run_token_predictor(Document doc, TokenClassificationPredictor& predictor, const std::string& name,
                              const RunOptions& options) {
  if (!doc.has_layer("sentences")) throw Error("missing-sentences-layer", "document has no sentences layer");
  const auto& sentences = doc.layer("sentences").entities;
  const std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);
  const std::size_t batch_count = (sentences.size() + batch_size - 1) / batch_size;

  struct BatchResult {
    std::vector<std::vector<TaggedSpan>> tags;
    std::string error;
  };
  std::vector<BatchResult> batches(batch_count);
  util::parallel_for(batch_count, threads_for(options), [&](std::size_t b) {
    const std::size_t first = b * batch_size, last = std::min(sentences.size(), first + batch_size);
    std::vector<std::string> texts;
    for (std::size_t i = first; i < last; ++i) texts.push_back(doc::text_of(doc, sentences[i]));
    try {
      batches[b].tags = predictor.tag_batch(texts);
      if (batches[b].tags.size() != texts.size())
        batches[b].error = "predictor returned " + std::to_string(batches[b].tags.size()) + " tag lists for " +
                           std::to_string(texts.size()) + " texts";
    } catch (const std::exception& e) {
      batches[b].error = e.what();
      if (batches[b].error.empty()) batches[b].error = "predictor failed";
    }
  });

  RunResult result;
  result.layer = result_layer_name(doc, "tagged", name);
  const bool has_geometry = doc.has_layer("words") && doc.has_layer("lines");
  std::vector<Entity> entities;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const Entity& sentence = sentences[i];
    const BatchResult& batch = batches[i / batch_size];
    const auto fail = [&](const std::string& message) {
      result.errors.push_back({sentence.id, "sentences", message, name});
    };
    if (!batch.error.empty()) {
      fail(batch.error);
      continue;
    }
    const auto& tags = batch.tags[i % batch_size];
    if (sentence.spans.size() != 1) {
      if (!tags.empty()) fail("sentence has no single span to map tags into");
      continue;
    }
    if (const std::string problem = check_tags(tags, sentence.spans.front().length()); !problem.empty()) {
      fail(problem);
      continue;
    }
    for (const auto& t : tags) {
      Entity e;
      e.id = static_cast<std::int64_t>(entities.size());
      const doc::Span span = doc::map_local_span(sentence, {t.start, t.end});
      e.spans = {span};
      if (has_geometry) e.boxes = doc::span_to_boxes(doc, span);
      e.metadata = {{"label", t.label}, {"score", t.score}, {"sentence_id", sentence.id}, {"section", section_of(sentence)}};
      entities.push_back(std::move(e));
    }
  }
  result.document = doc::add_layer(std::move(doc), result.layer, std::move(entities));
  return result;
}

RunResult run_text_predictor(Document doc, TextGenerationPredictor& predictor, const std::string& name,
                             const RunOptions& options) {
  const std::string target = options.target_layer.empty() ? "paragraphs" : options.target_layer;
  const auto& targets = target_layer(doc, target).entities;

  std::vector<std::optional<Entity>> produced(targets.size());
  std::vector<std::string> failures(targets.size());
  util::parallel_for(targets.size(), threads_for(options), [&](std::size_t i) {
    const Entity& t = targets[i];
    try {
      const std::string text = doc::text_of(doc, t);
      if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw Error("empty-entity-text", "entity has no text");
      const std::string raw = predictor.generate(text);
      ParsedRecord parsed;
      try {
        parsed = predictor.postprocess_to_record(raw);
      } catch (const std::exception& e) {
        parsed.error = e.what();
      }
      Entity e;
      e.id = t.id;
      e.spans = t.spans;
      e.boxes = t.boxes;
      e.metadata = {{"raw_response", raw},
                    {"parsed", parsed.record ? *parsed.record : Json(nullptr)},
                    {"parse_error", parsed.error ? Json(*parsed.error) : Json(nullptr)},
                    {"section", section_of(t)}};
      produced[i] = std::move(e);
    } catch (const std::exception& e) {
      failures[i] = *e.what() ? e.what() : "predictor failed";
    }
  });

  RunResult result;
  result.layer = result_layer_name(doc, "generated", name);
  std::vector<Entity> entities;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (produced[i]) entities.push_back(std::move(*produced[i]));
    else result.errors.push_back({targets[i].id, target, failures[i], name});
  }
  result.document = doc::add_layer(std::move(doc), result.layer, std::move(entities));
  return result;
}

RunResult run_image_predictor(Document doc, ImagePredictor& predictor, const std::string& name,
                              const pdf::PageRenderer& renderer, const RunOptions& options) {
  const std::string target = options.target_layer.empty() ? "tables" : options.target_layer;
  const auto& targets = target_layer(doc, target).entities;

  std::vector<std::optional<Entity>> produced(targets.size());
  std::vector<std::string> failures(targets.size());
  util::parallel_for(targets.size(), threads_for(options), [&](std::size_t i) {
    const Entity& t = targets[i];
    try {
      const ImageContext context{entity_region(t), options.dpi};
      ImageOutput out = predictor.process_entity(doc, t, renderer, context);
      out.validate();
      if (out.boxes)
        for (auto& b : *out.boxes) b.box = to_page_box(context.region, b.box);
      Entity e;
      e.id = t.id;
      e.spans = t.spans;
      e.boxes = t.boxes;
      e.metadata = out.to_json();
      e.metadata["section"] = section_of(t);
      e.metadata["region"] = doc::box_to_json(context.region);
      produced[i] = std::move(e);
    } catch (const std::exception& e) {
      failures[i] = *e.what() ? e.what() : "predictor failed";
    }
  });

  RunResult result;
  result.layer = result_layer_name(doc, "image", name);
  std::vector<Entity> entities;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (produced[i]) entities.push_back(std::move(*produced[i]));
    else result.errors.push_back({targets[i].id, target, failures[i], name});
  }
  result.document = doc::add_layer(std::move(doc), result.layer, std::move(entities));
  return result;
}

RunResult run_predictor(Document doc, const Predictor& predictor, const std::string& name,
                        const pdf::PageRenderer& renderer, const RunOptions& options) {
  switch (predictor.index()) {
    case 0: return run_token_predictor(std::move(doc), *std::get<0>(predictor), name, options);
    case 1: return run_text_predictor(std::move(doc), *std::get<1>(predictor), name, options);
    default: return run_image_predictor(std::move(doc), *std::get<2>(predictor), name, renderer, options);
  }
}

}  // namespace layerlab::predict
