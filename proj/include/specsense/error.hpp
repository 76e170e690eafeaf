#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace specsense {

// Error categories map one-to-one onto CLI exit codes (see tools/specsense.cpp).
enum class ErrorKind {
  config,       // inconsistent configuration or manifest
  domain,       // argument outside the operation's domain
  degenerate,   // input carries no information (all-zero frame, ...)
  format,       // on-disk container is malformed
  state,        // operation invoked in the wrong state (uncalibrated, no cache, ...)
  numeric,      // training divergence, ill-conditioned matrix
  calibration,  // not enough frames for the requested false-alarm target
  validity,     // experiment preconditions violated (held-out data leaked into training)
  io,           // file could not be opened, read or written
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};
struct DegenerateInputError : Error {
  explicit DegenerateInputError(const std::string& w) : Error(ErrorKind::degenerate, w) {}
};
struct FormatError : Error {
  FormatError(const std::string& w, std::uint64_t offset)
      : Error(ErrorKind::format, w + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};
struct StateError : Error {
  explicit StateError(const std::string& w) : Error(ErrorKind::state, w) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorKind::numeric, w) {}
};
struct TrainingFailure : NumericError {
  TrainingFailure(const std::string& w, std::int64_t iteration)
      : NumericError(w + " at iteration " + std::to_string(iteration)), iteration_(iteration) {}
  std::int64_t iteration() const noexcept { return iteration_; }

 private:
  std::int64_t iteration_;
};
struct CalibrationError : Error {
  explicit CalibrationError(const std::string& w) : Error(ErrorKind::calibration, w) {}
};
struct ValidityError : Error {
  explicit ValidityError(const std::string& w) : Error(ErrorKind::validity, w) {}
};
struct IoError : Error {
  IoError(const std::string& w, const std::string& path) : Error(ErrorKind::io, w + ": " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace specsense
