#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gazekit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A kernel precondition was violated by the caller's data (bad shapes,
// non-unit vectors, points behind the camera, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Malformed file content. Carries the location that triggered it: a line
// number for text formats, a byte offset for binary rasters (0 if unknown).
class ParseError : public Error {
 public:
  enum class Location { kNone, kLine, kByteOffset };

  ParseError(const std::string& source, Location kind, std::uint64_t where,
             const std::string& what)
      : Error(format(source, kind, where, what)), kind_(kind), where_(where) {}

  Location location_kind() const noexcept { return kind_; }
  std::uint64_t location() const noexcept { return where_; }

 private:
  static std::string format(const std::string& source, Location kind, std::uint64_t where,
                            const std::string& what) {
    switch (kind) {
      case Location::kLine:
        return source + ":" + std::to_string(where) + ": " + what;
      case Location::kByteOffset:
        return source + ": byte " + std::to_string(where) + ": " + what;
      case Location::kNone:
        break;
    }
    return source + ": " + what;
  }

  Location kind_;
  std::uint64_t where_;
};

// Invalid or inconsistent run configuration (missing files, conflicting flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gazekit
