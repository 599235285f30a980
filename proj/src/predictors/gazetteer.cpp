#include "layerlab/predictors/gazetteer.hpp"

#include <sstream>

#include "layerlab/doc/utf8.hpp"
#include "layerlab/error.hpp"

namespace layerlab::predictors {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto at = s.find(sep, start);
    out.push_back(s.substr(start, at - start));
    if (at == std::string::npos) return out;
    start = at + 1;
  }
}

std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \r\n");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \r\n") - a + 1);
}

std::regex compile(const LexiconEntry& e) {
  auto flags = std::regex::ECMAScript;
  if (!e.case_sensitive) flags |= std::regex::icase;
  return std::regex(e.surface, flags);
}

std::u32string fold(std::u32string s, bool case_sensitive) {
  if (!case_sensitive)
    for (auto& c : s) c = utf8::ascii_lower(c);
  return s;
}

}  // namespace

bool is_word_char(char32_t c) {
  if (utf8::is_ascii_alnum(c) || c == U'_') return true;
  if (c < 0xC0 || c == 0xD7 || c == 0xF7) return false;
  return !(c >= 0x2000 && c <= 0x2BFF) && !(c >= 0x3000 && c <= 0x303F) && !utf8::is_space(c);
}

std::vector<LexiconEntry> parse_lexicon(std::string_view tsv) {
  std::vector<LexiconEntry> out;
  std::istringstream in{std::string(tsv)};
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (strip(line).empty() || strip(line).front() == '#') continue;
    const auto fail = [&](const std::string& what) {
      throw Error("lexicon-parse-error", "lexicon line " + std::to_string(number) + ": " + what);
    };
    const auto fields = split(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) fail("expected surface<TAB>label[<TAB>flags]");
    LexiconEntry e;
    e.surface = fields[0];
    e.label = strip(fields[1]);
    if (e.surface.empty()) fail("empty surface");
    if (e.label.empty()) fail("empty label");
    if (fields.size() == 3) {
      for (const auto& raw : split(fields[2], ',')) {
        const std::string flag = strip(raw);
        if (flag == "regex") e.regex = true;
        else if (flag == "case_sensitive") e.case_sensitive = true;
        else if (!flag.empty()) fail("unknown flag \"" + flag + "\"");
      }
    }
    if (e.regex) {
      try {
        compile(e);
      } catch (const std::regex_error& err) {
        fail(std::string("pattern does not compile: ") + err.what());
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

GazetteerTagger::GazetteerTagger(std::vector<LexiconEntry> entries) {
  for (auto& e : entries) {
    if (e.surface.empty() || e.label.empty()) throw Error("invalid-lexicon", "lexicon entry with empty surface or label");
    Compiled c;
    if (e.regex) {
      try {
        c.pattern = compile(e);
      } catch (const std::regex_error& err) {
        throw Error("invalid-lexicon", "pattern \"" + e.surface + "\" does not compile: " + err.what());
      }
    } else {
      c.folded = fold(utf8::decode(e.surface), e.case_sensitive);
    }
    c.entry = std::move(e);
    entries_.push_back(std::move(c));
  }
}

std::vector<predict::TaggedSpan> GazetteerTagger::tag(const std::string& text) const {
  const std::u32string cps = utf8::decode(text);
  const std::u32string lower = fold(cps, false);
  // Byte offset of every code point (and of the end) in the re-encoded text,
  // so regex matches on bytes map back to code points.
  const std::string bytes = utf8::encode(cps);
  std::vector<std::size_t> byte_at(cps.size() + 1, 0);
  std::vector<std::int64_t> cp_at(bytes.size() + 1, -1);
  {
    std::string scratch;
    for (std::size_t i = 0; i < cps.size(); ++i) {
      byte_at[i] = scratch.size();
      cp_at[scratch.size()] = static_cast<std::int64_t>(i);
      utf8::append(scratch, cps[i]);
    }
    byte_at[cps.size()] = scratch.size();
    cp_at[scratch.size()] = static_cast<std::int64_t>(cps.size());
  }

  const auto boundary_before = [&](std::size_t i) { return i == 0 || !is_word_char(cps[i - 1]); };
  const auto boundary_after = [&](std::size_t end) { return end == cps.size() || !is_word_char(cps[end]); };

  std::vector<predict::TaggedSpan> out;
  std::size_t i = 0;
  while (i < cps.size()) {
    std::size_t best_len = 0;
    const Compiled* best = nullptr;
    for (const auto& c : entries_) {
      std::size_t len = 0;
      if (c.entry.regex) {
        std::smatch m;
        auto flags = std::regex_constants::match_continuous;
        if (i > 0) flags |= std::regex_constants::match_prev_avail;
        if (std::regex_search(bytes.begin() + static_cast<std::ptrdiff_t>(byte_at[i]), bytes.end(), m, c.pattern,
                              flags) &&
            m.length(0) > 0) {
          const std::int64_t end = cp_at[byte_at[i] + static_cast<std::size_t>(m.length(0))];
          if (end > 0) len = static_cast<std::size_t>(end) - i;
        }
      } else {
        const std::u32string& hay = c.entry.case_sensitive ? cps : lower;
        const std::size_t n = c.folded.size();
        if (i + n <= hay.size() && hay.compare(i, n, c.folded) == 0 && boundary_before(i) && boundary_after(i + n))
          len = n;
      }
      if (len > best_len) best_len = len, best = &c;
    }
    if (!best) {
      ++i;
      continue;
    }
    out.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(i + best_len), best->entry.label, 1.0});
    i += best_len;
  }
  return out;
}

std::vector<std::vector<predict::TaggedSpan>> GazetteerTagger::tag_batch(const std::vector<std::string>& texts) {
  std::vector<std::vector<predict::TaggedSpan>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(tag(t));
  return out;
}

}  // namespace layerlab::predictors
