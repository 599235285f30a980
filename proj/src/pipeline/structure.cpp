#include "layerlab/pipeline/structure.hpp"

#include <httplib.h>

#include <expat.h>

#include "layerlab/doc/utf8.hpp"
#include "layerlab/error.hpp"
#include "layerlab/pipeline/layout.hpp"
#include "layerlab/util/http.hpp"

namespace layerlab::pipeline {

namespace {

std::string local_name(const XML_Char* name) {
  std::string s(name);
  const auto colon = s.find_last_of(":}");
  return colon == std::string::npos ? s : s.substr(colon + 1);
}

struct XmlState {
  std::vector<std::string> stack;
  int head_depth = -1;
  std::string text;
  std::vector<std::string> headings;
};

std::u32string collapse_space(std::string_view s) {
  std::u32string out;
  bool space = false;
  for (char32_t c : utf8::decode(s)) {
    if (utf8::is_space(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(U' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

std::u32string normalize(std::string_view s) {
  std::u32string out = collapse_space(s);
  for (auto& c : out) c = utf8::ascii_lower(c);
  return out;
}

}  // namespace

std::vector<std::string> parse_structure_xml(std::string_view xml) {
  XmlState state;
  XML_Parser parser = XML_ParserCreate("UTF-8");
  if (!parser) throw Error("internal", "cannot create XML parser");
  XML_SetUserData(parser, &state);
  XML_SetElementHandler(
      parser,
      [](void* data, const XML_Char* name, const XML_Char**) {
        auto* st = static_cast<XmlState*>(data);
        const std::string local = local_name(name);
        if (st->head_depth < 0 && local == "head" && !st->stack.empty() && st->stack.back() == "div") {
          st->head_depth = static_cast<int>(st->stack.size());
          st->text.clear();
        }
        st->stack.push_back(local);
      },
      [](void* data, const XML_Char*) {
        auto* st = static_cast<XmlState*>(data);
        st->stack.pop_back();
        if (st->head_depth == static_cast<int>(st->stack.size())) {
          st->head_depth = -1;
          std::string collapsed = utf8::encode(collapse_space(st->text));
          if (!collapsed.empty()) st->headings.push_back(std::move(collapsed));
        }
      });
  XML_SetCharacterDataHandler(parser, [](void* data, const XML_Char* s, int len) {
    auto* st = static_cast<XmlState*>(data);
    if (st->head_depth >= 0) st->text.append(s, static_cast<std::size_t>(len));
  });
  const auto status = XML_Parse(parser, xml.data(), static_cast<int>(xml.size()), XML_TRUE);
  if (status != XML_STATUS_OK) {
    const std::string msg = std::string("structure response is not valid XML: ") +
                            XML_ErrorString(XML_GetErrorCode(parser)) + " at line " +
                            std::to_string(XML_GetCurrentLineNumber(parser));
    XML_ParserFree(parser);
    throw Error("unparseable-response", msg);
  }
  XML_ParserFree(parser);
  return state.headings;
}

std::vector<std::string> fetch_external_structure(std::string_view pdf_bytes, const std::string& url,
                                                  double timeout_s) {
  const http::Url u = http::split_url(url);
  auto client = http::make_client(u.origin, timeout_s);
  httplib::MultipartFormDataItems items = {
      {"input", std::string(pdf_bytes), "document.pdf", "application/pdf"}};
  auto res = client->Post(u.path, items);
  if (!res) throw Error("service-unreachable", "structure service request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw Error("service-unreachable", "structure service answered HTTP " + std::to_string(res->status));
  return parse_structure_xml(res->body);
}

std::size_t longest_common_substring(std::u32string_view a, std::u32string_view b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : 0;
      best = std::max(best, cur[j]);
    }
    std::swap(prev, cur);
  }
  return best;
}

std::vector<std::optional<std::size_t>> align_headings(const std::vector<std::string>& headings,
                                                       const std::vector<HeadingCandidate>& candidates) {
  std::vector<std::optional<std::size_t>> out(headings.size());
  std::size_t pos = 0;
  for (std::size_t h = 0; h < headings.size(); ++h) {
    const std::u32string full = normalize(headings[h]);
    const std::u32string bare = normalize(heading_name(headings[h]));
    if (full.empty()) continue;
    std::optional<std::size_t> hit;
    for (std::size_t c = pos; c < candidates.size() && !hit; ++c) {
      const std::u32string text = normalize(candidates[c].text);
      if (text == full || (!bare.empty() && normalize(heading_name(candidates[c].text)) == bare)) hit = c;
    }
    const std::size_t needed = (9 * full.size() + 9) / 10;
    for (std::size_t c = pos; c < candidates.size() && !hit; ++c) {
      const std::u32string text = normalize(candidates[c].text);
      // Long body lines merely containing the heading word are not headings.
      if (text.size() > full.size() + 12) continue;
      if (longest_common_substring(full, text) >= needed) hit = c;
    }
    if (hit) {
      out[h] = candidates[*hit].block;
      pos = *hit + 1;
    }
  }
  return out;
}

}  // namespace layerlab::pipeline
