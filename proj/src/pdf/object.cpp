#include "layerlab/pdf/object.hpp"

#include <cstdlib>

#include "layerlab/error.hpp"

namespace layerlab::pdf {

bool is_pdf_whitespace(char c) {
  return c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '\f' || c == '\0';
}

bool is_pdf_delimiter(char c) {
  switch (c) {
    case '(':
    case ')':
    case '<':
    case '>':
    case '[':
    case ']':
    case '{':
    case '}':
    case '/':
    case '%':
      return true;
    default:
      return false;
  }
}

double Object::number_or(double fallback) const {
  if (auto* i = get_if<std::int64_t>()) return static_cast<double>(*i);
  if (auto* d = get_if<double>()) return *d;
  return fallback;
}

std::int64_t Object::int_or(std::int64_t fallback) const {
  if (auto* i = get_if<std::int64_t>()) return *i;
  if (auto* d = get_if<double>()) return static_cast<std::int64_t>(*d);
  return fallback;
}

const std::string* Object::name() const {
  auto* n = get_if<Name>();
  return n ? &n->value : nullptr;
}

const std::string* Object::string() const { return get_if<std::string>(); }

const Dict* Object::dict() const {
  if (auto* d = get_if<Dict>()) return d;
  if (auto* s = get_if<Stream>()) return &s->dict;
  return nullptr;
}

const Object* lookup(const Dict& dict, const std::string& key) {
  auto it = dict.find(key);
  return it == dict.end() ? nullptr : &it->second;
}

void Parser::skip_whitespace() {
  while (pos_ < data_.size()) {
    const char c = data_[pos_];
    if (is_pdf_whitespace(c)) {
      ++pos_;
    } else if (c == '%') {
      while (pos_ < data_.size() && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
    } else {
      break;
    }
  }
}

std::optional<Object> Parser::next() {
  auto token = parse_token();
  if (!token) return std::nullopt;
  return parse_after_token(std::move(*token));
}

Object Parser::parse_after_token(Object first) {
  if (const Keyword* k = first.keyword()) {
    if (k->value == "[") {
      Array items;
      while (true) {
        auto t = parse_token();
        if (!t) throw ParseError("malformed-pdf", "unterminated array", pos_);
        if (auto* kk = t->keyword(); kk && kk->value == "]") break;
        items.push_back(parse_after_token(std::move(*t)));
      }
      return items;
    }
    if (k->value == "<<") {
      Dict dict;
      while (true) {
        auto t = parse_token();
        if (!t) throw ParseError("malformed-pdf", "unterminated dictionary", pos_);
        if (auto* kk = t->keyword(); kk && kk->value == ">>") break;
        const std::string* key = t->name();
        if (!key) throw ParseError("malformed-pdf", "dictionary key is not a name", pos_);
        std::string key_copy = *key;
        auto v = parse_token();
        if (!v) throw ParseError("malformed-pdf", "dictionary value missing", pos_);
        if (auto* kv = v->keyword(); kv && kv->value == ">>") {
          dict[key_copy] = Object{};
          break;
        }
        dict[key_copy] = parse_after_token(std::move(*v));
      }
      return dict;
    }
    return first;
  }
  if (first.is<std::int64_t>()) {
    // Lookahead for an indirect reference "num gen R".
    const std::size_t save = pos_;
    auto second = parse_token();
    if (second && second->is<std::int64_t>()) {
      auto third = parse_token();
      if (third) {
        if (auto* kw = third->keyword(); kw && kw->value == "R") {
          return Ref{static_cast<int>(*first.get_if<std::int64_t>()), static_cast<int>(*second->get_if<std::int64_t>())};
        }
      }
    }
    pos_ = save;
  }
  return first;
}

std::optional<Object> Parser::parse_token() {
  skip_whitespace();
  if (pos_ >= data_.size()) return std::nullopt;
  const char c = data_[pos_];
  switch (c) {
    case '(':
      ++pos_;
      return Object{parse_literal_string()};
    case '<':
      if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '<') {
        pos_ += 2;
        return Object{Keyword{"<<"}};
      }
      ++pos_;
      return Object{parse_hex_string()};
    case '>':
      if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '>') {
        pos_ += 2;
        return Object{Keyword{">>"}};
      }
      throw ParseError("malformed-pdf", "stray '>'", pos_);
    case '[':
    case ']':
    case '{':
    case '}':
      ++pos_;
      return Object{Keyword{std::string(1, c)}};
    case '/':
      ++pos_;
      return Object{parse_name()};
    case ')':
      throw ParseError("malformed-pdf", "stray ')'", pos_);
    default:
      return parse_number_or_keyword();
  }
}

std::string Parser::parse_literal_string() {
  std::string out;
  int depth = 1;
  while (pos_ < data_.size()) {
    char c = data_[pos_++];
    if (c == '\\') {
      if (pos_ >= data_.size()) break;
      char e = data_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 't': out.push_back('\t'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case '(': out.push_back('('); break;
        case ')': out.push_back(')'); break;
        case '\\': out.push_back('\\'); break;
        case '\r':
          if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
          break;
        case '\n':
          break;
        default:
          if (e >= '0' && e <= '7') {
            int value = e - '0';
            for (int k = 0; k < 2 && pos_ < data_.size() && data_[pos_] >= '0' && data_[pos_] <= '7'; ++k)
              value = value * 8 + (data_[pos_++] - '0');
            out.push_back(static_cast<char>(value & 0xFF));
          } else {
            out.push_back(e);
          }
      }
    } else if (c == '(') {
      ++depth;
      out.push_back(c);
    } else if (c == ')') {
      if (--depth == 0) return out;
      out.push_back(c);
    } else {
      out.push_back(c);
    }
  }
  throw ParseError("malformed-pdf", "unterminated string", pos_);
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

std::string Parser::parse_hex_string() {
  std::string out;
  int hi = -1;
  while (pos_ < data_.size()) {
    const char c = data_[pos_++];
    if (c == '>') {
      if (hi >= 0) out.push_back(static_cast<char>(hi << 4));
      return out;
    }
    if (is_pdf_whitespace(c)) continue;
    const int v = hex_value(c);
    if (v < 0) throw ParseError("malformed-pdf", "bad hex digit", pos_ - 1);
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<char>((hi << 4) | v));
      hi = -1;
    }
  }
  throw ParseError("malformed-pdf", "unterminated hex string", pos_);
}

Name Parser::parse_name() {
  std::string out;
  while (pos_ < data_.size()) {
    const char c = data_[pos_];
    if (is_pdf_whitespace(c) || is_pdf_delimiter(c)) break;
    ++pos_;
    if (c == '#' && pos_ + 1 < data_.size() && hex_value(data_[pos_]) >= 0 && hex_value(data_[pos_ + 1]) >= 0) {
      out.push_back(static_cast<char>(hex_value(data_[pos_]) * 16 + hex_value(data_[pos_ + 1])));
      pos_ += 2;
    } else {
      out.push_back(c);
    }
  }
  return Name{std::move(out)};
}

Object Parser::parse_number_or_keyword() {
  const std::size_t start = pos_;
  while (pos_ < data_.size() && !is_pdf_whitespace(data_[pos_]) && !is_pdf_delimiter(data_[pos_])) ++pos_;
  if (pos_ == start) {
    // Unknown delimiter; consume a byte to guarantee progress.
    ++pos_;
    return Keyword{std::string(data_.substr(start, 1))};
  }
  const std::string_view tok = data_.substr(start, pos_ - start);
  bool numeric = true;
  bool has_dot = false;
  bool has_digit = false;
  for (std::size_t i = 0; i < tok.size(); ++i) {
    const char c = tok[i];
    if (c >= '0' && c <= '9') {
      has_digit = true;
    } else if (c == '.' && !has_dot) {
      has_dot = true;
    } else if ((c == '-' || c == '+') && i == 0) {
    } else {
      numeric = false;
      break;
    }
  }
  if (numeric && has_digit) {
    const std::string s(tok);
    if (has_dot) return std::strtod(s.c_str(), nullptr);
    return static_cast<std::int64_t>(std::strtoll(s.c_str(), nullptr, 10));
  }
  if (tok == "true") return true;
  if (tok == "false") return false;
  if (tok == "null") return Object{};
  return Keyword{std::string(tok)};
}

}  // namespace layerlab::pdf
