#pragma once

#include <stdexcept>
#include <string>

namespace flagcd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments: bad parameters, points outside the guard band,
/// malformed models.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical certificate failed (positivity, eigenframe reliability,
/// residue checks).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Schema or reference problems in a job configuration. `field` is a
/// dotted path into the document ("models.A.mu") or "line:col" for syntax
/// errors.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace flagcd
