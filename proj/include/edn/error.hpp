#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace edn {

// Root of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not line up (channel counts, spatial sizes, lengths).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid NetworkConfig / RunConfig; the message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of a numeric function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A metric that is not defined for the given input (e.g. empty ground truth).
class UndefinedError : public Error {
 public:
  using Error::Error;
};

// Parameter set does not match the graph (missing, unknown or mis-shaped entry).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents. Carries the byte offset where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), detail_(what), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }
  // Message without the offset suffix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::uint64_t offset_;
};

// Filesystem-level failure (cannot open, cannot write).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace edn
