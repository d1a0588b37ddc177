#pragma once

#include <stdexcept>
#include <string>

namespace curekit {

// Exit-code classes used by the CLI: usage=1, data=2, internal=3.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InternalError : std::runtime_error {
  explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed source input. Line and column are 1-based.
struct SyntaxError : DataError {
  int line = 0;
  int col = 0;
  SyntaxError(int line_, int col_, const std::string& msg)
      : DataError("syntax error at " + std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
        line(line_), col(col_) {}
};

struct ShapeMismatch : InternalError {
  ShapeMismatch(const std::string& op, const std::string& lhs, const std::string& rhs)
      : InternalError(op + ": shape mismatch " + lhs + " vs " + rhs) {}
};

}  // namespace curekit
