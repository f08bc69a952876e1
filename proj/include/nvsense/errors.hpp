#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace nvsense {

/// Input outside the domain of a physical model (e.g. NV on or outside a spin shell).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A value object was built with fields that break its invariants.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Malformed configuration text, or a key the configuration does not know.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string key, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + (key.empty() ? "" : " (" + key + ")") + ": " + what),
        line_(line),
        key_(std::move(key)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

}  // namespace nvsense
