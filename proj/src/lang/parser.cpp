#include "curekit/lang/parser.hpp"

#include <sstream>

#include "curekit/lang/lexer.hpp"

namespace curekit::lang {

namespace {

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : ts_(std::move(toks)) {}

  Program parse_program() {
    Program p;
    while (!at_end()) {
      if (is_kw("fn")) {
        p.functions.push_back(parse_function());
      } else if (is_kw("let")) {
        p.globals.push_back(parse_global());
      } else {
        fail("expected 'fn' or top-level 'let'");
      }
    }
    return p;
  }

 private:
  std::vector<Token> ts_;
  size_t pos_ = 0;

  const Token& cur() const { return ts_[pos_]; }
  const Token& next() const { return ts_[pos_ + 1 < ts_.size() ? pos_ + 1 : pos_]; }
  bool at_end() const { return cur().kind == TokKind::End; }
  void bump() {
    if (!at_end()) ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(cur().line, cur().col, msg); }

  bool is_kw(const char* k) const { return cur().kind == TokKind::Keyword && cur().text == k; }
  bool is_sym(const char* s) const { return cur().kind == TokKind::Sym && cur().text == s; }
  void expect_kw(const char* k) {
    if (!is_kw(k)) fail(std::string("expected '") + k + "'");
    bump();
  }
  void expect_sym(const char* s) {
    if (!is_sym(s)) fail(std::string("expected '") + s + "'");
    bump();
  }
  std::string expect_ident(const char* what) {
    if (cur().kind != TokKind::Ident) fail(std::string("expected ") + what);
    std::string n = cur().text;
    bump();
    return n;
  }

  Global parse_global() {
    Global g;
    g.line = cur().line;
    expect_kw("let");
    g.name = expect_ident("global name");
    expect_sym("=");
    g.init = parse_expr();
    expect_sym(";");
    return g;
  }

  Function parse_function() {
    Function f;
    f.line = cur().line;
    expect_kw("fn");
    f.name = expect_ident("function name");
    expect_sym("(");
    if (!is_sym(")")) {
      f.params.push_back(expect_ident("parameter name"));
      while (is_sym(",")) {
        bump();
        f.params.push_back(expect_ident("parameter name"));
      }
    }
    expect_sym(")");
    f.body = parse_block();
    return f;
  }

  Block parse_block() {
    Block b;
    if (!is_sym("{")) fail("expected '{'");
    b.open_line = cur().line;
    bump();
    while (!is_sym("}")) {
      if (at_end()) fail("unterminated block: expected '}'");
      b.stmts.push_back(parse_statement());
    }
    b.close_line = cur().line;
    bump();
    return b;
  }

  StmtPtr parse_statement() {
    auto s = std::make_unique<Stmt>();
    s->line = cur().line;
    if (is_kw("let")) {
      bump();
      s->kind = StmtKind::Let;
      s->name = expect_ident("variable name");
      expect_sym("=");
      s->expr = parse_expr();
      expect_sym(";");
      return s;
    }
    if (is_kw("if")) {
      bump();
      s->kind = StmtKind::If;
      expect_sym("(");
      s->expr = parse_expr();
      expect_sym(")");
      s->body = parse_block();
      if (is_kw("else")) {
        bump();
        s->has_else = true;
        if (is_kw("if")) {
          // `else if` sugar: an else-block holding exactly the nested if
          s->else_body.open_line = cur().line;
          s->else_body.stmts.push_back(parse_statement());
          s->else_body.close_line =
              s->else_body.stmts.back()->body.close_line;  // best effort; positions are cosmetic here
        } else {
          s->else_body = parse_block();
        }
      }
      return s;
    }
    if (is_kw("while")) {
      bump();
      s->kind = StmtKind::While;
      expect_sym("(");
      s->expr = parse_expr();
      expect_sym(")");
      s->body = parse_block();
      return s;
    }
    if (is_kw("return")) {
      bump();
      s->kind = StmtKind::Return;
      if (!is_sym(";")) {
        s->has_value = true;
        s->expr = parse_expr();
      }
      expect_sym(";");
      return s;
    }
    // assignment forms need lookahead: IDENT = ... or IDENT [ e ] = ...
    if (cur().kind == TokKind::Ident && next().kind == TokKind::Sym && next().text == "=") {
      s->kind = StmtKind::Assign;
      s->name = expect_ident("assignment target");
      expect_sym("=");
      s->expr = parse_expr();
      expect_sym(";");
      return s;
    }
    if (cur().kind == TokKind::Ident && next().kind == TokKind::Sym && next().text == "[") {
      size_t mark = pos_;
      std::string nm = cur().text;
      bump();
      bump();  // '['
      ExprPtr idx = parse_expr();
      if (is_sym("]") && ts_[pos_ + 1].kind == TokKind::Sym && ts_[pos_ + 1].text == "=") {
        bump();  // ']'
        bump();  // '='
        s->kind = StmtKind::Assign;
        s->name = nm;
        s->lhs_index = std::move(idx);
        s->expr = parse_expr();
        expect_sym(";");
        return s;
      }
      pos_ = mark;  // not an assignment: fall through to expression statement
    }
    s->kind = StmtKind::ExprStmt;
    s->expr = parse_expr();
    expect_sym(";");
    return s;
  }

  ExprPtr mk(ExprKind k) {
    auto e = std::make_unique<Expr>();
    e->kind = k;
    e->line = cur().line;
    e->col = cur().col;
    return e;
  }

  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr e = parse_and();
    while (is_sym("||")) {
      auto b = mk(ExprKind::Binary);
      b->text = "||";
      bump();
      b->kids.push_back(std::move(e));
      b->kids.push_back(parse_and());
      e = std::move(b);
    }
    return e;
  }

  ExprPtr parse_and() {
    ExprPtr e = parse_cmp();
    while (is_sym("&&")) {
      auto b = mk(ExprKind::Binary);
      b->text = "&&";
      bump();
      b->kids.push_back(std::move(e));
      b->kids.push_back(parse_cmp());
      e = std::move(b);
    }
    return e;
  }

  bool is_cmp_op() const {
    return cur().kind == TokKind::Sym && (cur().text == "==" || cur().text == "!=" || cur().text == "<" ||
                                          cur().text == "<=" || cur().text == ">" || cur().text == ">=");
  }

  ExprPtr parse_cmp() {
    ExprPtr e = parse_add();
    if (is_cmp_op()) {
      auto b = mk(ExprKind::Binary);
      b->text = cur().text;
      bump();
      b->kids.push_back(std::move(e));
      b->kids.push_back(parse_add());
      e = std::move(b);
    }
    return e;
  }

  ExprPtr parse_add() {
    ExprPtr e = parse_mul();
    while (is_sym("+") || is_sym("-")) {
      auto b = mk(ExprKind::Binary);
      b->text = cur().text;
      bump();
      b->kids.push_back(std::move(e));
      b->kids.push_back(parse_mul());
      e = std::move(b);
    }
    return e;
  }

  ExprPtr parse_mul() {
    ExprPtr e = parse_unary();
    while (is_sym("*") || is_sym("/") || is_sym("%")) {
      auto b = mk(ExprKind::Binary);
      b->text = cur().text;
      bump();
      b->kids.push_back(std::move(e));
      b->kids.push_back(parse_unary());
      e = std::move(b);
    }
    return e;
  }

  ExprPtr parse_unary() {
    if (is_sym("!") || is_sym("-")) {
      auto u = mk(ExprKind::Unary);
      u->text = cur().text;
      bump();
      u->kids.push_back(parse_unary());
      return u;
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    for (;;) {
      if (is_sym("[")) {
        auto ix = mk(ExprKind::Index);
        bump();
        ix->kids.push_back(std::move(e));
        ix->kids.push_back(parse_expr());
        expect_sym("]");
        e = std::move(ix);
        continue;
      }
      if (is_sym("(")) {
        if (e->kind != ExprKind::Var) fail("only named functions can be called");
        auto call = mk(ExprKind::Call);
        call->text = e->text;
        call->line = e->line;
        call->col = e->col;
        bump();
        if (!is_sym(")")) {
          call->kids.push_back(parse_expr());
          while (is_sym(",")) {
            bump();
            call->kids.push_back(parse_expr());
          }
        }
        expect_sym(")");
        e = std::move(call);
        continue;
      }
      break;
    }
    return e;
  }

  ExprPtr parse_primary() {
    if (cur().kind == TokKind::Int) {
      auto e = mk(ExprKind::Int);
      e->int_val = cur().int_val;
      bump();
      return e;
    }
    if (is_kw("true") || is_kw("false")) {
      auto e = mk(ExprKind::Bool);
      e->bool_val = (cur().text == "true");
      bump();
      return e;
    }
    if (cur().kind == TokKind::Str) {
      auto e = mk(ExprKind::Str);
      e->text = cur().text;
      bump();
      return e;
    }
    if (cur().kind == TokKind::Ident) {
      auto e = mk(ExprKind::Var);
      e->text = cur().text;
      bump();
      return e;
    }
    if (is_sym("(")) {
      bump();
      ExprPtr e = parse_expr();
      expect_sym(")");
      return e;
    }
    if (is_sym("[")) {
      auto e = mk(ExprKind::ArrayLit);
      bump();
      if (!is_sym("]")) {
        e->kids.push_back(parse_expr());
        while (is_sym(",")) {
          bump();
          e->kids.push_back(parse_expr());
        }
      }
      expect_sym("]");
      return e;
    }
    fail("expected an expression");
  }
};

// ---- pretty printing ----

int prec_of(const std::string& op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=") return 3;
  if (op == "+" || op == "-") return 4;
  return 5;  // * / %
}

std::string escape_str(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      default: out += c;
    }
  }
  return out;
}

void print_expr(const Expr& e, int parent_prec, std::string& out) {
  switch (e.kind) {
    case ExprKind::Int: out += std::to_string(e.int_val); break;
    case ExprKind::Bool: out += e.bool_val ? "true" : "false"; break;
    case ExprKind::Str:
      out += '"';
      out += escape_str(e.text);
      out += '"';
      break;
    case ExprKind::Var: out += e.text; break;
    case ExprKind::Unary:
      out += e.text;
      print_expr(*e.kids[0], 6, out);
      break;
    case ExprKind::Binary: {
      int p = prec_of(e.text);
      bool wrap = p < parent_prec;
      if (wrap) out += '(';
      print_expr(*e.kids[0], p, out);
      out += ' ';
      out += e.text;
      out += ' ';
      print_expr(*e.kids[1], p + 1, out);
      if (wrap) out += ')';
      break;
    }
    case ExprKind::Index:
      print_expr(*e.kids[0], 7, out);
      out += '[';
      print_expr(*e.kids[1], 0, out);
      out += ']';
      break;
    case ExprKind::Call: {
      out += e.text;
      out += '(';
      for (size_t i = 0; i < e.kids.size(); ++i) {
        if (i) out += ", ";
        print_expr(*e.kids[i], 0, out);
      }
      out += ')';
      break;
    }
    case ExprKind::ArrayLit: {
      out += '[';
      for (size_t i = 0; i < e.kids.size(); ++i) {
        if (i) out += ", ";
        print_expr(*e.kids[i], 0, out);
      }
      out += ']';
      break;
    }
  }
}

std::string expr_str(const Expr& e) {
  std::string s;
  print_expr(e, 0, s);
  return s;
}

void print_block(const Block& b, int indent, std::string& out);

void print_stmt(const Stmt& s, int indent, std::string& out) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  switch (s.kind) {
    case StmtKind::Let:
      out += pad + "let " + s.name + " = " + expr_str(*s.expr) + ";\n";
      break;
    case StmtKind::Assign:
      if (s.lhs_index)
        out += pad + s.name + "[" + expr_str(*s.lhs_index) + "] = " + expr_str(*s.expr) + ";\n";
      else
        out += pad + s.name + " = " + expr_str(*s.expr) + ";\n";
      break;
    case StmtKind::If:
      out += pad + "if (" + expr_str(*s.expr) + ") {\n";
      print_block(s.body, indent + 1, out);
      if (s.has_else) {
        out += pad + "} else {\n";
        print_block(s.else_body, indent + 1, out);
      }
      out += pad + "}\n";
      break;
    case StmtKind::While:
      out += pad + "while (" + expr_str(*s.expr) + ") {\n";
      print_block(s.body, indent + 1, out);
      out += pad + "}\n";
      break;
    case StmtKind::Return:
      out += pad + "return" + (s.has_value ? " " + expr_str(*s.expr) : "") + ";\n";
      break;
    case StmtKind::ExprStmt:
      out += pad + expr_str(*s.expr) + ";\n";
      break;
  }
}

void print_block(const Block& b, int indent, std::string& out) {
  for (const auto& st : b.stmts) print_stmt(*st, indent, out);
}

// ---- structural signature ----

void sig_expr(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::Int: out += "(int " + std::to_string(e.int_val) + ")"; break;
    case ExprKind::Bool: out += e.bool_val ? "(bool t)" : "(bool f)"; break;
    case ExprKind::Str: out += "(str \"" + escape_str(e.text) + "\")"; break;
    case ExprKind::Var: out += "(var " + e.text + ")"; break;
    case ExprKind::Unary:
      out += "(un " + e.text + " ";
      sig_expr(*e.kids[0], out);
      out += ")";
      break;
    case ExprKind::Binary:
      out += "(bin " + e.text + " ";
      sig_expr(*e.kids[0], out);
      out += " ";
      sig_expr(*e.kids[1], out);
      out += ")";
      break;
    case ExprKind::Index:
      out += "(idx ";
      sig_expr(*e.kids[0], out);
      out += " ";
      sig_expr(*e.kids[1], out);
      out += ")";
      break;
    case ExprKind::Call:
      out += "(call " + e.text;
      for (const auto& k : e.kids) {
        out += " ";
        sig_expr(*k, out);
      }
      out += ")";
      break;
    case ExprKind::ArrayLit:
      out += "(arr";
      for (const auto& k : e.kids) {
        out += " ";
        sig_expr(*k, out);
      }
      out += ")";
      break;
  }
}

void sig_block(const Block& b, std::string& out);

void sig_stmt(const Stmt& s, std::string& out) {
  switch (s.kind) {
    case StmtKind::Let:
      out += "(let " + s.name + " ";
      sig_expr(*s.expr, out);
      out += ")";
      break;
    case StmtKind::Assign:
      out += s.lhs_index ? "(asnidx " : "(asn ";
      out += s.name + " ";
      if (s.lhs_index) {
        sig_expr(*s.lhs_index, out);
        out += " ";
      }
      sig_expr(*s.expr, out);
      out += ")";
      break;
    case StmtKind::If:
      out += "(if ";
      sig_expr(*s.expr, out);
      out += " ";
      sig_block(s.body, out);
      if (s.has_else) {
        out += " ";
        sig_block(s.else_body, out);
      }
      out += ")";
      break;
    case StmtKind::While:
      out += "(while ";
      sig_expr(*s.expr, out);
      out += " ";
      sig_block(s.body, out);
      out += ")";
      break;
    case StmtKind::Return:
      out += "(ret";
      if (s.has_value) {
        out += " ";
        sig_expr(*s.expr, out);
      }
      out += ")";
      break;
    case StmtKind::ExprStmt:
      out += "(expr ";
      sig_expr(*s.expr, out);
      out += ")";
      break;
  }
}

void sig_block(const Block& b, std::string& out) {
  out += "(blk";
  for (const auto& st : b.stmts) {
    out += " ";
    sig_stmt(*st, out);
  }
  out += ")";
}

}  // namespace

Program parse(const std::string& source) {
  Parser p(lex(source));
  Program prog = p.parse_program();
  // keep the raw lines for method extraction and patch splicing
  std::string cur;
  for (char c : source) {
    if (c == '\n') {
      prog.src_lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) prog.src_lines.push_back(cur);
  return prog;
}

std::string pretty_print(const Program& p) {
  std::string out;
  for (const auto& g : p.globals) out += "let " + g.name + " = " + expr_str(*g.init) + ";\n";
  if (!p.globals.empty() && !p.functions.empty()) out += "\n";
  for (size_t i = 0; i < p.functions.size(); ++i) {
    const auto& f = p.functions[i];
    if (i) out += "\n";
    out += "fn " + f.name + "(";
    for (size_t j = 0; j < f.params.size(); ++j) {
      if (j) out += ", ";
      out += f.params[j];
    }
    out += ") {\n";
    print_block(f.body, 1, out);
    out += "}\n";
  }
  return out;
}

std::string ast_signature(const Program& p) {
  std::string out = "(program (globals";
  for (const auto& g : p.globals) {
    out += " (g " + g.name + " ";
    sig_expr(*g.init, out);
    out += ")";
  }
  out += ") (fns";
  for (const auto& f : p.functions) {
    out += " (fn " + f.name + " (params";
    for (const auto& pr : f.params) out += " " + pr;
    out += ") ";
    sig_block(f.body, out);
    out += ")";
  }
  out += "))";
  return out;
}

}  // namespace curekit::lang
