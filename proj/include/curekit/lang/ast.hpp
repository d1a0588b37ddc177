#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace curekit::lang {

// MiniLang surface: integers, booleans, strings (literal-level), fixed-size
// arrays, functions, let/assignment, if/else, while, return, calls.

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class ExprKind { Int, Bool, Str, Var, Unary, Binary, Index, Call, ArrayLit };

struct Expr {
  ExprKind kind;
  int line = 0, col = 0;
  int64_t int_val = 0;
  bool bool_val = false;
  std::string text;           // Var: name; Unary/Binary: operator; Str: literal body (unquoted); Call: callee
  std::vector<ExprPtr> kids;  // operands / call args / array elements / index target+subscript
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Block {
  std::vector<StmtPtr> stmts;
  int open_line = 0;   // line of '{'
  int close_line = 0;  // line of '}'
};

enum class StmtKind { Let, Assign, If, While, Return, ExprStmt };

struct Stmt {
  StmtKind kind;
  int line = 0;
  std::string name;    // Let/Assign target variable
  ExprPtr lhs_index;   // Assign: optional subscript on the target
  ExprPtr expr;        // Let/Assign rhs, If/While condition, Return value, ExprStmt expr
  Block body;          // If then-branch / While body
  Block else_body;     // If else-branch
  bool has_else = false;
  bool has_value = false;  // Return carries a value
};

struct Function {
  std::string name;
  std::vector<std::string> params;
  Block body;
  int line = 0;  // line of 'fn'
};

struct Global {
  std::string name;
  ExprPtr init;
  int line = 0;
};

struct Program {
  std::vector<Global> globals;
  std::vector<Function> functions;
  std::vector<std::string> src_lines;  // original source, split by line

  const Function* find_function(const std::string& name) const {
    for (const auto& f : functions)
      if (f.name == name) return &f;
    return nullptr;
  }
};

// Names callable without declaration; they behave like library functions.
inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"len", "make", "min", "max", "abs"};
  return names;
}
inline bool is_builtin(const std::string& n) {
  for (const auto& b : builtin_names())
    if (b == n) return true;
  return false;
}

}  // namespace curekit::lang
