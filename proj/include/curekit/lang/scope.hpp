#pragma once

#include <set>
#include <string>

#include "curekit/lang/ast.hpp"
#include "curekit/util/errors.hpp"

namespace curekit::lang {

struct ScopeError : DataError {
  int line, col;
  ScopeError(int line_, int col_, const std::string& msg)
      : DataError("scope error at " + std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
        line(line_), col(col_) {}
};

struct LineOutOfRange : DataError {
  explicit LineOutOfRange(int line)
      : DataError("line " + std::to_string(line) + " is not inside any function body") {}
};

// Static checks under lexical scoping: every variable reference resolves to
// a visible declaration (local, parameter, or global), every call target is
// a defined function or builtin, function names are unique, and no name is
// declared twice in the same block. "Compiles" for MiniLang means parse()
// and resolve() both succeed.
void resolve(const Program& p);

// All identifiers legally referenceable on `line`: globals and function
// names (position-independent) plus parameters and locals of the enclosing
// function declared at or before that line in blocks containing it.
// Builtins are included as function names.
std::set<std::string> scope_identifiers(const Program& p, int line);

}  // namespace curekit::lang
