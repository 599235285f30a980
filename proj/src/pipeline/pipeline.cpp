#include "layerlab/pipeline/pipeline.hpp"

#include <algorithm>
#include <map>

#include "layerlab/doc/utf8.hpp"
#include "layerlab/error.hpp"
#include "layerlab/pdf/extract.hpp"
#include "layerlab/pipeline/layout.hpp"
#include "layerlab/pipeline/sections.hpp"
#include "layerlab/pipeline/sentences.hpp"
#include "layerlab/pipeline/structure.hpp"
#include "layerlab/util/hash.hpp"

namespace layerlab::pipeline {

using Json = nlohmann::json;

namespace {

constexpr std::size_t kMaxExtractWarnings = 20;

[[noreturn]] void bad_hint(const std::string& where, const std::string& what) {
  throw Error("invalid-region-hints", where + ": " + what);
}

double number_at(const Json& arr, std::size_t i, const std::string& where) {
  if (!arr[i].is_number()) bad_hint(where, "expected a number at index " + std::to_string(i));
  return arr[i].get<double>();
}

void check_rect(const Json& rect, const std::string& where) {
  if (!rect.is_array() || rect.size() != 4) bad_hint(where, "expected [x,y,w,h]");
  const double x = number_at(rect, 0, where), y = number_at(rect, 1, where);
  const double w = number_at(rect, 2, where), h = number_at(rect, 3, where);
  const doc::Box b{0, x, y, w, h};
  if (!(w > 0 && h > 0) || !b.within_page_bounds()) bad_hint(where, "rectangle outside [0,1]");
}

doc::Box page_box(const Json& arr, const std::string& where) {
  if (!arr.is_array() || arr.size() != 5 || !arr[0].is_number_integer()) bad_hint(where, "expected [page,x,y,w,h]");
  doc::Box b{arr[0].get<int>(), number_at(arr, 1, where), number_at(arr, 2, where), number_at(arr, 3, where),
             number_at(arr, 4, where)};
  if (b.page < 0 || !(b.w > 0 && b.h > 0) || !b.within_page_bounds()) bad_hint(where, "box outside the page");
  return b;
}

Json checked_geometry(const Json& g, const std::string& where) {
  if (g.is_null()) return nullptr;
  if (!g.is_object()) bad_hint(where, "geometry must be an object");
  for (const auto& [key, value] : g.items()) {
    if (key == "rows" || key == "columns") {
      if (!value.is_array()) bad_hint(where + "." + key, "expected a list");
      for (std::size_t i = 0; i < value.size(); ++i) check_rect(value[i], where + "." + key + "[" + std::to_string(i) + "]");
    } else if (key == "cells") {
      if (!value.is_array()) bad_hint(where + ".cells", "expected a list");
      for (std::size_t i = 0; i < value.size(); ++i) {
        const Json& c = value[i];
        const std::string at = where + ".cells[" + std::to_string(i) + "]";
        if (!c.is_object() || !c.contains("row") || !c.contains("col") || !c.contains("box") ||
            !c["row"].is_number_integer() || !c["col"].is_number_integer() || c["row"].get<int>() < 0 ||
            c["col"].get<int>() < 0)
          bad_hint(at, "expected {\"row\", \"col\", \"box\"}");
        check_rect(c["box"], at + ".box");
      }
    } else {
      bad_hint(where, "unknown geometry field \"" + key + "\"");
    }
  }
  return g;
}

double iou(const doc::Box& a, const doc::Box& b) {
  if (a.page != b.page) return 0;
  const double ix = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double iy = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (ix <= 0 || iy <= 0) return 0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

bool intersects(const doc::Box& a, const doc::Box& b) {
  return a.page == b.page && a.x < b.right() && b.x < a.right() && a.y < b.bottom() && b.y < a.bottom();
}

// Union of boxes per page, in page order.
std::vector<doc::Box> per_page_union(const std::vector<doc::Box>& boxes) {
  std::map<int, doc::Box> by_page;
  for (const auto& b : boxes) {
    auto it = by_page.find(b.page);
    if (it == by_page.end()) by_page.emplace(b.page, b);
    else it->second = doc::enclose(it->second, b);
  }
  std::vector<doc::Box> out;
  for (auto& [page, b] : by_page) out.push_back(b);
  return out;
}

bool ends_sentence(const std::string& text) {
  std::size_t e = text.size();
  while (e > 0 && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  if (e == 0) return true;
  const char c = text[e - 1];
  return c == '.' || c == '?' || c == '!' || c == ':';
}

bool starts_lowercase(const std::string& text) {
  return !text.empty() && std::islower(static_cast<unsigned char>(text[0]));
}

}  // namespace

std::vector<TableHint> parse_region_hints(const Json& sidecar) {
  if (!sidecar.is_object()) bad_hint("sidecar", "expected an object");
  std::vector<TableHint> out;
  for (const auto& [key, value] : sidecar.items())
    if (key != "tables") bad_hint("sidecar", "unknown field \"" + key + "\"");
  if (!sidecar.contains("tables")) return out;
  const Json& tables = sidecar["tables"];
  if (!tables.is_array()) bad_hint("tables", "expected a list");
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const std::string where = "tables[" + std::to_string(i) + "]";
    const Json& entry = tables[i];
    TableHint hint;
    if (entry.is_array()) {
      hint.box = page_box(entry, where);
      hint.geometry = nullptr;
    } else if (entry.is_object()) {
      if (!entry.contains("box")) bad_hint(where, "missing \"box\"");
      for (const auto& [k, v] : entry.items())
        if (k != "box" && k != "geometry") bad_hint(where, "unknown field \"" + k + "\"");
      hint.box = page_box(entry["box"], where + ".box");
      hint.geometry = checked_geometry(entry.value("geometry", Json(nullptr)), where + ".geometry");
    } else {
      bad_hint(where, "expected [page,x,y,w,h] or an object");
    }
    out.push_back(std::move(hint));
  }
  return out;
}

doc::Document run_core_pipeline(std::string_view pdf_bytes, const PipelineConfig& config,
                                const PipelineOptions& options) {
  config.validate();
  const pdf::ExtractedPdf extracted = pdf::extract_words(pdf_bytes);

  doc::Document d;
  d.doc_id = sha256_hex(pdf_bytes);
  std::vector<std::string> warnings;
  std::size_t word_count = 0;
  std::vector<Block> blocks;
  for (const auto& page : extracted.pages) {
    d.pages.push_back(page.info);
    word_count += page.words.size();
    if (page.words.empty() && page.has_images) warnings.push_back("ocr_needed_page_" + std::to_string(page.info.index));
    auto page_blocks = detect_blocks(build_lines(page.words, page.info, config), config);
    for (auto& b : page_blocks) blocks.push_back(std::move(b));
  }
  if (word_count == 0) warnings.push_back("no_extractable_text");
  for (std::size_t i = 0; i < extracted.warnings.size() && i < kMaxExtractWarnings; ++i)
    warnings.push_back("pdf_warning: " + extracted.warnings[i]);

  // Heading names: structure service first, then the heuristic name.
  std::map<std::size_t, std::string> service_names;
  if (config.structure_service_url && !blocks.empty()) {
    try {
      const auto names = fetch_external_structure(pdf_bytes, *config.structure_service_url);
      std::vector<HeadingCandidate> candidates;
      for (std::size_t i = 0; i < blocks.size(); ++i) candidates.push_back({i, blocks[i].lines.front().text()});
      const auto aligned = align_headings(names, candidates);
      for (std::size_t h = 0; h < names.size(); ++h) {
        if (!aligned[h]) {
          warnings.push_back("structure_section_dropped: " + names[h]);
          continue;
        }
        std::string name = heading_name(names[h]);
        if (name.empty()) name = names[h];
        blocks[*aligned[h]].cls = BlockClass::heading;
        service_names[*aligned[h]] = std::move(name);
      }
    } catch (const Error& e) {
      warnings.push_back("structure_service_fallback");
      d.metadata["structure_service_error"] = e.code() + ": " + e.what();
    }
  }

  std::vector<HeadingMark> marks;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].cls != BlockClass::heading) continue;
    auto it = service_names.find(i);
    marks.push_back({i, it != service_names.end() ? it->second : heading_name(blocks[i].lines.front().text())});
  }
  const std::vector<SectionInfo> sections = assign_sections(blocks.size(), marks);
  const std::vector<std::size_t> block_section = section_of_blocks(blocks.size(), sections);
  const auto section_name = [&](std::size_t block) { return sections[block_section[block]].name; };

  const Composition comp = compose_symbols(blocks);
  d.symbols = comp.symbols;

  std::vector<doc::Entity> words, lines, block_entities, pages, paragraphs, headings, captions, section_entities,
      tables;

  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const Block& b = blocks[bi];
    for (std::size_t li = 0; li < b.lines.size(); ++li) {
      for (std::size_t wi = 0; wi < b.lines[li].words.size(); ++wi) {
        doc::Entity w;
        w.id = static_cast<std::int64_t>(words.size());
        w.spans = {comp.word_spans[bi][li][wi]};
        w.boxes = {b.lines[li].words[wi].box};
        words.push_back(std::move(w));
      }
      doc::Entity l;
      l.id = static_cast<std::int64_t>(lines.size());
      l.spans = {comp.line_spans[bi][li]};
      l.boxes = {b.lines[li].box};
      lines.push_back(std::move(l));
    }
    doc::Entity e;
    e.id = static_cast<std::int64_t>(bi);
    e.spans = {comp.block_spans[bi]};
    e.boxes = {b.box};
    e.metadata = {{"class", std::string(to_string(b.cls))}, {"section", section_name(bi)}};
    block_entities.push_back(std::move(e));
  }

  for (const auto& info : d.pages) {
    doc::Entity p;
    p.id = info.index;
    p.boxes = {doc::Box{info.index, 0, 0, 1, 1}};
    std::optional<doc::Span> span;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      if (blocks[bi].page != info.index) continue;
      if (!span) span = comp.block_spans[bi];
      span->end = comp.block_spans[bi].end;
    }
    if (span) p.spans = {*span};
    pages.push_back(std::move(p));
  }

  // A paragraph cut by a page break (no closing punctuation, continuation in
  // lowercase at the top of the next page) stays one entity with two boxes.
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    if (blocks[bi].cls != BlockClass::paragraph) continue;
    std::vector<std::size_t> members = {bi};
    while (true) {
      const std::size_t last = members.back(), next = last + 1;
      if (next >= blocks.size() || blocks[next].cls != BlockClass::paragraph ||
          blocks[next].page != blocks[last].page + 1 || ends_sentence(blocks[last].text()) ||
          !starts_lowercase(blocks[next].text()))
        break;
      members.push_back(next);
    }
    doc::Entity p;
    p.id = static_cast<std::int64_t>(paragraphs.size());
    p.spans = {doc::Span{comp.block_spans[members.front()].start, comp.block_spans[members.back()].end}};
    Json ids = Json::array();
    for (std::size_t m : members) {
      p.boxes.push_back(blocks[m].box);
      ids.push_back(m);
    }
    p.metadata = {{"section", section_name(bi)}, {"block_ids", ids}};
    paragraphs.push_back(std::move(p));
    bi = members.back();
  }

  for (const auto& mark : marks) {
    doc::Entity h;
    h.id = static_cast<std::int64_t>(headings.size());
    h.spans = {comp.block_spans[mark.block]};
    h.boxes = {blocks[mark.block].box};
    h.metadata = {{"name", section_name(mark.block)},
                  {"section", section_name(mark.block)},
                  {"block_id", mark.block},
                  {"source", service_names.count(mark.block) ? "structure_service" : "heuristic"}};
    headings.push_back(std::move(h));
  }

  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    if (blocks[bi].cls != BlockClass::caption) continue;
    doc::Entity c;
    c.id = static_cast<std::int64_t>(captions.size());
    c.spans = {comp.block_spans[bi]};
    c.boxes = {blocks[bi].box};
    c.metadata = {{"section", section_name(bi)}, {"block_id", bi}};
    captions.push_back(std::move(c));
  }

  const bool has_front_matter = marks.empty() || marks.front().block > 0;
  for (const auto& s : sections) {
    doc::Entity e;
    e.id = s.order;
    e.spans = {doc::Span{comp.block_spans[s.first_block].start, comp.block_spans[s.last_block].end}};
    std::vector<doc::Box> boxes;
    for (std::size_t bi = s.first_block; bi <= s.last_block; ++bi) boxes.push_back(blocks[bi].box);
    e.boxes = per_page_union(boxes);
    e.metadata = {{"name", s.name},
                  {"order", s.order},
                  {"first_block", s.first_block},
                  {"last_block", s.last_block},
                  {"source", has_front_matter && s.order == 0 ? "front_matter"
                             : service_names.count(s.first_block) ? "structure_service"
                                                                 : "heuristic"}};
    section_entities.push_back(std::move(e));
  }

  // Tables: layout candidates first, then region hints merged into an
  // overlapping candidate or added as their own entity.
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    if (blocks[bi].cls != BlockClass::table_candidate) continue;
    doc::Entity t;
    t.spans = {comp.block_spans[bi]};
    t.boxes = {blocks[bi].box};
    t.metadata = {{"source", "layout"}, {"block_id", bi}, {"section", section_name(bi)}};
    tables.push_back(std::move(t));
  }
  const std::size_t layout_tables = tables.size();
  std::vector<bool> hinted(layout_tables, false);
  for (std::size_t hi = 0; hi < options.table_hints.size(); ++hi) {
    const TableHint& hint = options.table_hints[hi];
    if (hint.box.page >= static_cast<int>(d.pages.size())) {
      warnings.push_back("region_hint_ignored: tables[" + std::to_string(hi) + "] page out of range");
      continue;
    }
    std::optional<std::size_t> match;
    for (std::size_t t = 0; t < layout_tables && !match; ++t) {
      const doc::Box& cb = tables[t].boxes.front();
      if (!hinted[t] && (iou(cb, hint.box) >= 0.5 ||
                         (cb.page == hint.box.page && hint.box.contains_point(cb.x + cb.w / 2, cb.y + cb.h / 2))))
        match = t;
    }
    if (match) {
      doc::Entity& t = tables[*match];
      hinted[*match] = true;
      t.boxes = {hint.box};
      t.metadata["source"] = "layout+region_hint";
      if (!hint.geometry.is_null()) t.metadata["geometry"] = hint.geometry;
      continue;
    }
    doc::Entity t;
    t.boxes = {hint.box};
    std::optional<std::size_t> section_block;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const Block& b = blocks[bi];
      if (intersects(b.box, hint.box)) {
        section_block = bi;
        break;
      }
      if (b.page < hint.box.page || (b.page == hint.box.page && b.box.y <= hint.box.y)) section_block = bi;
    }
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      for (std::size_t li = 0; li < blocks[bi].lines.size(); ++li) {
        std::optional<doc::Span> span;
        const auto& lw = blocks[bi].lines[li].words;
        for (std::size_t wi = 0; wi < lw.size(); ++wi) {
          const doc::Box& wb = lw[wi].box;
          if (wb.page != hint.box.page || !hint.box.contains_point(wb.x + wb.w / 2, wb.y + wb.h / 2)) continue;
          const doc::Span& ws = comp.word_spans[bi][li][wi];
          if (!span) span = ws;
          span->end = ws.end;
        }
        if (span) t.spans.push_back(*span);
      }
    }
    std::sort(t.spans.begin(), t.spans.end(), [](const doc::Span& a, const doc::Span& b) { return a.start < b.start; });
    t.metadata = {{"source", "region_hint"}};
    if (section_block) t.metadata["section"] = section_name(*section_block);
    else if (!sections.empty()) t.metadata["section"] = sections.front().name;
    if (!hint.geometry.is_null()) t.metadata["geometry"] = hint.geometry;
    tables.push_back(std::move(t));
  }
  std::stable_sort(tables.begin(), tables.end(), [](const doc::Entity& a, const doc::Entity& b) {
    const doc::Box &x = a.boxes.front(), &y = b.boxes.front();
    if (x.page != y.page) return x.page < y.page;
    if (x.y != y.y) return x.y < y.y;
    return x.x < y.x;
  });
  for (std::size_t i = 0; i < tables.size(); ++i) tables[i].id = static_cast<std::int64_t>(i);

  d.metadata["source_filename"] = options.source_filename;
  d.metadata["pipeline_config_hash"] = config.hash();

  d = doc::add_layer(std::move(d), "pages", std::move(pages));
  d = doc::add_layer(std::move(d), "words", std::move(words));
  d = doc::add_layer(std::move(d), "lines", std::move(lines));
  d = doc::add_layer(std::move(d), "blocks", std::move(block_entities));

  std::vector<doc::Entity> sentences;
  for (const auto& p : paragraphs) {
    const doc::Span& ps = p.spans.front();
    const std::u32string_view text(d.symbols.data() + ps.start, static_cast<std::size_t>(ps.length()));
    for (const doc::Span& local : segment_sentences(text, config.abbreviation_list)) {
      doc::Entity s;
      s.id = static_cast<std::int64_t>(sentences.size());
      s.spans = {doc::map_local_span(p, local)};
      s.boxes = doc::span_to_boxes(d, s.spans.front());
      s.metadata = {{"paragraph_id", p.id}, {"section", p.metadata["section"]}};
      sentences.push_back(std::move(s));
    }
  }

  d = doc::add_layer(std::move(d), "paragraphs", std::move(paragraphs));
  d = doc::add_layer(std::move(d), "headings", std::move(headings));
  d = doc::add_layer(std::move(d), "captions", std::move(captions));
  d = doc::add_layer(std::move(d), "sections", std::move(section_entities));
  d = doc::add_layer(std::move(d), "sentences", std::move(sentences));
  d = doc::add_layer(std::move(d), "tables", std::move(tables));
  d.metadata["warnings"] = warnings;
  return d;
}

}  // namespace layerlab::pipeline
