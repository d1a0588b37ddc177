// Scope resolution. The per-line oracle sets below were resolved by hand
// from the block structure before the implementation ran, and are frozen:
// a mismatch means the resolver changed, not the test.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "curekit/lang/parser.hpp"
#include "curekit/lang/scope.hpp"
#include "doctest.h"

using curekit::lang::parse;
using curekit::lang::Program;
using curekit::lang::resolve;
using curekit::lang::scope_identifiers;

namespace {

std::set<std::string> with_builtins(std::set<std::string> s) {
  for (const auto& b : curekit::lang::builtin_names()) s.insert(b);
  return s;
}

// Collect every identifier referenced (read, written, or called) per line.
void collect_refs(const curekit::lang::Expr& e, std::vector<std::pair<int, std::string>>& out) {
  using curekit::lang::ExprKind;
  if (e.kind == ExprKind::Var) out.push_back({e.line, e.text});
  if (e.kind == ExprKind::Call) out.push_back({e.line, e.text});
  for (const auto& k : e.kids) collect_refs(*k, out);
}

void collect_refs(const curekit::lang::Block& b, std::vector<std::pair<int, std::string>>& out) {
  using curekit::lang::StmtKind;
  for (const auto& s : b.stmts) {
    if (s->expr) collect_refs(*s->expr, out);
    if (s->lhs_index) collect_refs(*s->lhs_index, out);
    if (s->kind == StmtKind::Assign) out.push_back({s->line, s->name});
    if (s->kind == StmtKind::If || s->kind == StmtKind::While) {
      collect_refs(s->body, out);
      if (s->has_else) collect_refs(s->else_body, out);
    }
  }
}

}  // namespace

static const char* kLoopProgram =
    "let limit = 100;\n"           // 1
    "fn main(a) {\n"               // 2
    "  let i = 0;\n"               // 3
    "  while (i < limit) {\n"      // 4
    "    let j = i * 2;\n"         // 5
    "    i = j + a;\n"             // 6
    "  }\n"                        // 7
    "  let k = i;\n"               // 8
    "  return k;\n"                // 9
    "}\n";                         // 10

TEST_CASE("scope_identifiers: loop program, hand-resolved per line") {
  Program p = parse(kLoopProgram);
  resolve(p);
  const std::set<std::string> base = {"limit", "main", "a"};

  auto at = [&](int line) { return scope_identifiers(p, line); };

  // Function header: params + globals + function names, no locals yet.
  CHECK(at(2) == with_builtins(base));
  // `i` is visible from its own declaration line onward.
  std::set<std::string> with_i = base;
  with_i.insert("i");
  CHECK(at(3) == with_builtins(with_i));
  CHECK(at(4) == with_builtins(with_i));
  // Inside the while body `j` appears; `k` (declared later) must be absent.
  std::set<std::string> loop_body = with_i;
  loop_body.insert("j");
  CHECK(at(5) == with_builtins(loop_body));
  CHECK(at(6) == with_builtins(loop_body));
  // After the loop closes, `j` is gone and `k` arrives at line 8.
  std::set<std::string> tail = with_i;
  tail.insert("k");
  CHECK(at(8) == with_builtins(tail));
  CHECK(at(9) == with_builtins(tail));

  CHECK_THROWS_AS(scope_identifiers(p, 1), curekit::lang::LineOutOfRange);
  CHECK_THROWS_AS(scope_identifiers(p, 11), curekit::lang::LineOutOfRange);
  CHECK_THROWS_AS(scope_identifiers(p, 0), curekit::lang::LineOutOfRange);
}

static const char* kBranchProgram =
    "fn pick(x) {\n"           // 1
    "  let r = 0;\n"           // 2
    "  if (x > 0) {\n"         // 3
    "    let p = x;\n"         // 4
    "    r = p;\n"             // 5
    "  } else {\n"             // 6
    "    let q = 0 - x;\n"     // 7
    "    r = q;\n"             // 8
    "  }\n"                    // 9
    "  return r;\n"            // 10
    "}\n";                     // 11

TEST_CASE("scope_identifiers: sibling branches do not leak") {
  Program p = parse(kBranchProgram);
  resolve(p);
  const std::set<std::string> base = {"pick", "x", "r"};
  std::set<std::string> then_set = base;
  then_set.insert("p");
  std::set<std::string> else_set = base;
  else_set.insert("q");

  CHECK(scope_identifiers(p, 4) == with_builtins(then_set));
  CHECK(scope_identifiers(p, 5) == with_builtins(then_set));
  // The else branch sees q but never p, even though p was declared earlier
  // in the text.
  CHECK(scope_identifiers(p, 7) == with_builtins(else_set));
  CHECK(scope_identifiers(p, 8) == with_builtins(else_set));
  // After the if statement both branch locals are gone.
  CHECK(scope_identifiers(p, 10) == with_builtins(base));
}

TEST_CASE("scope_identifiers: soundness over a program corpus") {
  // Every identifier actually referenced on a line must be a member of
  // the reported set for that line.
  const std::vector<std::string> corpus = {
      kLoopProgram,
      kBranchProgram,
      "let base = 7;\n"
      "fn scale(v, f) {\n"
      "  let out = make(len(v), 0);\n"
      "  let i = 0;\n"
      "  while (i < len(v)) {\n"
      "    out[i] = v[i] * f + base;\n"
      "    i = i + 1;\n"
      "  }\n"
      "  return out;\n"
      "}\n"
      "fn twice(v) {\n"
      "  return scale(v, 2);\n"
      "}\n",
      "fn fib(n) {\n"
      "  if (n < 2) {\n"
      "    return n;\n"
      "  }\n"
      "  return fib(n - 1) + fib(n - 2);\n"
      "}\n",
      "fn clamp(x, lo, hi) {\n"
      "  return max(lo, min(x, hi));\n"
      "}\n",
  };
  for (const auto& src : corpus) {
    Program p = parse(src);
    resolve(p);
    for (const auto& f : p.functions) {
      std::vector<std::pair<int, std::string>> refs;
      collect_refs(f.body, refs);
      for (const auto& [line, name] : refs) {
        auto s = scope_identifiers(p, line);
        INFO("function ", f.name, " line ", line, " identifier ", name);
        CHECK(s.count(name) == 1);
      }
    }
  }
}

TEST_CASE("resolve: rejects bad programs with positions") {
  CHECK_THROWS_AS(resolve(parse("fn f() { return g(); }")), curekit::lang::ScopeError);
  CHECK_THROWS_AS(resolve(parse("fn f() { return x; }")), curekit::lang::ScopeError);
  CHECK_THROWS_AS(resolve(parse("fn f() { let a = 1; let a = 2; return a; }")),
                  curekit::lang::ScopeError);
  CHECK_THROWS_AS(resolve(parse("fn f(a, a) { return a; }")), curekit::lang::ScopeError);
  CHECK_THROWS_AS(resolve(parse("fn f() { return 0; }\nfn f() { return 1; }")),
                  curekit::lang::ScopeError);
  CHECK_THROWS_AS(resolve(parse("let g = 1;\nlet g = 2;\nfn f() { return g; }")),
                  curekit::lang::ScopeError);
  // Globals may use earlier globals and any function, not later globals.
  CHECK_NOTHROW(resolve(parse("let a = 1;\nlet b = a + 1;\nfn f() { return b; }")));
  CHECK_THROWS_AS(resolve(parse("let b = a + 1;\nlet a = 1;\nfn f() { return b; }")),
                  curekit::lang::ScopeError);
  // Shadowing a global or a param in an inner block is allowed.
  CHECK_NOTHROW(resolve(parse("let v = 1;\nfn f(x) { if (x > 0) { let v = 2; return v; } return v; }")));
}
