#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace layerlab::pdf {

class Object;

struct Ref {
  int num = 0;
  int gen = 0;
  friend bool operator==(const Ref&, const Ref&) = default;
};

struct Name {
  std::string value;
  friend bool operator==(const Name&, const Name&) = default;
};

// Bare keyword token (operators in content streams, `true`/`null` never reach here).
struct Keyword {
  std::string value;
};

using Array = std::vector<Object>;
using Dict = std::map<std::string, Object>;

// `data` holds the raw (still encoded) stream bytes.
struct Stream {
  Dict dict;
  std::string data;
};

class Object {
 public:
  using Value = std::variant<std::monostate, bool, std::int64_t, double, std::string, Name, Array, Dict, Stream,
                             Ref, Keyword>;

  Object() = default;
  template <typename T>
  Object(T v) : value_(std::move(v)) {}  // NOLINT(google-explicit-constructor)

  bool is_null() const { return std::holds_alternative<std::monostate>(value_); }
  bool is_number() const { return is<std::int64_t>() || is<double>(); }
  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(value_);
  }
  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(&value_);
  }

  double number_or(double fallback) const;
  std::int64_t int_or(std::int64_t fallback) const;
  const std::string* name() const;
  const std::string* string() const;
  const Array* array() const { return get_if<Array>(); }
  const Dict* dict() const;  // also the dictionary of a stream
  const Stream* stream() const { return get_if<Stream>(); }
  const Ref* ref() const { return get_if<Ref>(); }
  const Keyword* keyword() const { return get_if<Keyword>(); }

  const Value& value() const { return value_; }

 private:
  Value value_;
};

// Looks up `key` in a dictionary; returns nullptr when absent.
const Object* lookup(const Dict& dict, const std::string& key);

// Tokenizer/parser over PDF syntax. Used both for file-level objects and for
// content streams (where operators come back as Keyword objects).
class Parser {
 public:
  explicit Parser(std::string_view data, std::size_t pos = 0) : data_(data), pos_(pos) {}

  // Next object, or nullopt at end of input. Throws ParseError on bad syntax.
  std::optional<Object> next();
  std::size_t position() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos; }
  void skip_whitespace();
  std::string_view data() const { return data_; }

 private:
  Object parse_after_token(Object first);
  std::optional<Object> parse_token();
  std::string parse_literal_string();
  std::string parse_hex_string();
  Name parse_name();
  Object parse_number_or_keyword();

  std::string_view data_;
  std::size_t pos_;
};

bool is_pdf_whitespace(char c);
bool is_pdf_delimiter(char c);

}  // namespace layerlab::pdf
