#pragma once

#include <stdexcept>
#include <string>

namespace uwh {

// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  kValidation = 1,
  kIo = 2,
  kParse = 3,
  kReadOnly = 4,
  kIntegrity = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

// Syntax or semantic error in a manifest, plan, or rules document.
struct ParseError : Error {
  ParseError(const std::string& what, int line, int column)
      : Error(ErrorKind::kParse, what), line(line), column(column) {}
  int line;
  int column;
};

struct ReadOnlyError : Error {
  explicit ReadOnlyError(const std::string& what) : Error(ErrorKind::kReadOnly, what) {}
};

struct IntegrityError : Error {
  explicit IntegrityError(const std::string& what) : Error(ErrorKind::kIntegrity, what) {}
};

// Cross-tag comparison or arithmetic between incompatible values.
struct TypeError : Error {
  explicit TypeError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

}  // namespace uwh
