#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace webnav {

// Base of every error the library throws. `kind` drives CLI exit codes:
// data problems (bad input files, corrupt datasets) vs. runtime failures.
class Error : public std::runtime_error {
 public:
  enum class Kind { kData, kRuntime };

  Error(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Kind::kData, what) {}
};

class RuntimeFailure : public Error {
 public:
  explicit RuntimeFailure(const std::string& what)
      : Error(Kind::kRuntime, what) {}
};

// Malformed link or heading markup inside a document body.
class ParseError : public DataError {
 public:
  ParseError(const std::string& title, std::size_t offset,
             const std::string& what)
      : DataError("parse error in '" + title + "' at byte " +
                  std::to_string(offset) + ": " + what),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace webnav
