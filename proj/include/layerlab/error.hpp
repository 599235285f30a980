#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace layerlab {

using FieldErrors = std::map<std::string, std::string>;

// Base exception carrying a stable, machine-readable error code
// (e.g. "duplicate-layer-name") alongside the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Deserialization / lexing failure with the byte offset where it happened.
class ParseError : public Error {
 public:
  ParseError(std::string code, const std::string& message, std::size_t position)
      : Error(std::move(code), message + " (at byte " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// Predictor or pipeline configuration rejected; `fields` maps each offending
// field name to what is wrong with it.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::map<std::string, std::string> fields)
      : Error("config-validation-error", describe(fields)), fields_(std::move(fields)) {}

  const std::map<std::string, std::string>& fields() const noexcept { return fields_; }

 private:
  static std::string describe(const std::map<std::string, std::string>& fields) {
    std::string out = "invalid configuration:";
    for (const auto& [name, problem] : fields) out += " " + name + " (" + problem + ");";
    return out;
  }

  std::map<std::string, std::string> fields_;
};

}  // namespace layerlab
