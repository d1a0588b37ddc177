#include "curekit/lang/scope.hpp"

#include <vector>

namespace curekit::lang {

namespace {

class Resolver {
 public:
  explicit Resolver(const Program& p) : prog_(p) {
    for (const auto& b : builtin_names()) callables_.insert(b);
    for (const auto& f : p.functions) {
      if (!callables_.insert(f.name).second)
        throw ScopeError(f.line, 1, "duplicate function name '" + f.name + "'");
    }
    for (const auto& g : p.globals) {
      if (!globals_.insert(g.name).second)
        throw ScopeError(g.line, 1, "duplicate global '" + g.name + "'");
    }
  }

  void run() {
    // Global initializers may reference earlier globals and any function.
    std::set<std::string> seen;
    for (const auto& g : prog_.globals) {
      visible_globals_ = seen;
      check_expr(*g.init);
      seen.insert(g.name);
    }
    visible_globals_ = globals_;
    for (const auto& f : prog_.functions) {
      scopes_.clear();
      scopes_.emplace_back();
      for (const auto& prm : f.params) {
        if (!scopes_.back().insert(prm).second)
          throw ScopeError(f.line, 1, "duplicate parameter '" + prm + "' in '" + f.name + "'");
      }
      check_block(f.body);
    }
  }

 private:
  const Program& prog_;
  std::set<std::string> callables_;
  std::set<std::string> globals_;
  std::set<std::string> visible_globals_;
  std::vector<std::set<std::string>> scopes_;

  bool var_visible(const std::string& n) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it)
      if (it->count(n)) return true;
    return visible_globals_.count(n) > 0;
  }

  void check_block(const Block& b) {
    scopes_.emplace_back();
    for (const auto& s : b.stmts) check_stmt(*s);
    scopes_.pop_back();
  }

  void check_stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Let:
        check_expr(*s.expr);
        if (!scopes_.back().insert(s.name).second)
          throw ScopeError(s.line, 1, "'" + s.name + "' already declared in this block");
        break;
      case StmtKind::Assign:
        if (!var_visible(s.name))
          throw ScopeError(s.line, 1, "assignment to undeclared variable '" + s.name + "'");
        if (s.lhs_index) check_expr(*s.lhs_index);
        check_expr(*s.expr);
        break;
      case StmtKind::If:
        check_expr(*s.expr);
        check_block(s.body);
        if (s.has_else) check_block(s.else_body);
        break;
      case StmtKind::While:
        check_expr(*s.expr);
        check_block(s.body);
        break;
      case StmtKind::Return:
        if (s.has_value) check_expr(*s.expr);
        break;
      case StmtKind::ExprStmt:
        check_expr(*s.expr);
        break;
    }
  }

  void check_expr(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Var:
        if (!var_visible(e.text))
          throw ScopeError(e.line, e.col, "reference to undeclared identifier '" + e.text + "'");
        break;
      case ExprKind::Call:
        if (!callables_.count(e.text))
          throw ScopeError(e.line, e.col, "call to undefined function '" + e.text + "'");
        for (const auto& k : e.kids) check_expr(*k);
        break;
      default:
        for (const auto& k : e.kids) check_expr(*k);
        break;
    }
  }
};

// Collects locals visible at `line` by walking only blocks whose span
// contains the line; a declaration counts from its own line onward.
void collect_block(const Block& b, int line, std::set<std::string>& out) {
  for (const auto& s : b.stmts) {
    if (s->kind == StmtKind::Let && s->line <= line) out.insert(s->name);
    if (s->kind == StmtKind::If || s->kind == StmtKind::While) {
      if (s->body.open_line <= line && line <= s->body.close_line) collect_block(s->body, line, out);
      if (s->has_else && s->else_body.open_line <= line && line <= s->else_body.close_line)
        collect_block(s->else_body, line, out);
    }
  }
}

}  // namespace

void resolve(const Program& p) { Resolver(p).run(); }

std::set<std::string> scope_identifiers(const Program& p, int line) {
  const Function* enclosing = nullptr;
  for (const auto& f : p.functions) {
    if (f.line <= line && line <= f.body.close_line) {
      enclosing = &f;
      break;
    }
  }
  if (!enclosing) throw LineOutOfRange(line);
  std::set<std::string> out;
  for (const auto& g : p.globals) out.insert(g.name);
  for (const auto& f : p.functions) out.insert(f.name);
  for (const auto& b : builtin_names()) out.insert(b);
  for (const auto& prm : enclosing->params) out.insert(prm);
  collect_block(enclosing->body, line, out);
  return out;
}

}  // namespace curekit::lang
