#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace n2hp {

// Base class for every error the library raises. `kind()` is the stable
// machine-readable tag used in CLI error records.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// Malformed or out-of-range input data. Carries the offending line (1-based)
// when the input came from a text file.
class InputError : public Error {
 public:
  explicit InputError(const std::string& message,
                      std::optional<std::size_t> line = std::nullopt)
      : Error(line ? "line " + std::to_string(*line) + ": " + message
                   : message),
        detail_(message),
        line_(line) {}
  const char* kind() const noexcept override { return "input"; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  // The message without the line prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::optional<std::size_t> line_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

// A request that cannot be satisfied by the data, e.g. more negatives than
// there are non-edges.
class InfeasibleError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "infeasible"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& message, std::size_t epoch)
      : Error("epoch " + std::to_string(epoch) + ": " + message),
        epoch_(epoch) {}
  const char* kind() const noexcept override { return "training"; }
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace n2hp
