#include "curekit/lang/mutate.hpp"

#include <algorithm>
#include <set>

#include "curekit/lang/lexer.hpp"
#include "curekit/lang/parser.hpp"
#include "curekit/lang/scope.hpp"
#include "curekit/util/rng.hpp"

namespace curekit::lang {

namespace {

struct Candidate {
  int line;           // 1-based
  std::string kind;
  // simple replacement edit
  int col = 0;        // 1-based start of replaced span
  int len = 0;        // replaced span length
  std::string text;   // replacement text
  // arg swap edit: [a0,a1) and [b0,b1) half-open column spans, a before b
  int a0 = 0, a1 = 0, b0 = 0, b1 = 0;
};

const std::vector<std::string>& rel_ops() {
  static const std::vector<std::string> v = {"<", "<=", ">", ">=", "==", "!="};
  return v;
}
const std::vector<std::string>& arith_ops() {
  static const std::vector<std::string> v = {"+", "-", "*", "/", "%"};
  return v;
}

bool in(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

// true when a '-' or '+' at token position i is a binary operator (its left
// neighbor completes an operand)
bool binary_position(const std::vector<Token>& toks, size_t i) {
  if (i == 0) return false;
  const Token& p = toks[i - 1];
  if (p.kind == TokKind::Int || p.kind == TokKind::Ident || p.kind == TokKind::Str) return true;
  if (p.kind == TokKind::Keyword) return p.text == "true" || p.text == "false";
  return p.kind == TokKind::Sym && (p.text == ")" || p.text == "]");
}

void collect_line_candidates(const Program& prog, int lineno, const std::string& line,
                             std::vector<Candidate>& out) {
  std::vector<Token> toks;
  try {
    toks = lex(line);
  } catch (const SyntaxError&) {
    return;  // line is not independently lexable (should not happen in practice)
  }
  if (!toks.empty() && toks.back().kind == TokKind::End) toks.pop_back();
  if (toks.empty()) return;

  std::set<std::string> scope_vars;
  bool scope_ready = false;
  auto scope_for_line = [&]() -> const std::set<std::string>& {
    if (!scope_ready) {
      scope_ready = true;
      try {
        std::set<std::string> all = scope_identifiers(prog, lineno);
        for (const auto& n : all) {
          if (prog.find_function(n) || is_builtin(n)) continue;
          scope_vars.insert(n);
        }
      } catch (const LineOutOfRange&) {
      }
    }
    return scope_vars;
  };

  for (size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    int col = t.col;
    if (t.kind == TokKind::Sym && in(rel_ops(), t.text)) {
      for (const auto& alt : rel_ops())
        if (alt != t.text)
          out.push_back({lineno, "rel-swap", col, static_cast<int>(t.text.size()), alt, 0, 0, 0, 0});
      continue;
    }
    if (t.kind == TokKind::Sym && in(arith_ops(), t.text)) {
      if ((t.text == "-" || t.text == "+") && !binary_position(toks, i)) continue;
      for (const auto& alt : arith_ops())
        if (alt != t.text)
          out.push_back({lineno, "arith-swap", col, static_cast<int>(t.text.size()), alt, 0, 0, 0, 0});
      continue;
    }
    if (t.kind == TokKind::Int) {
      out.push_back({lineno, "const-off-by-one", col, static_cast<int>(t.text.size()),
                     std::to_string(t.int_val + 1), 0, 0, 0, 0});
      out.push_back({lineno, "const-off-by-one", col, static_cast<int>(t.text.size()),
                     std::to_string(t.int_val - 1), 0, 0, 0, 0});
      continue;
    }
    if (t.kind == TokKind::Ident) {
      bool after_decl = i > 0 && toks[i - 1].kind == TokKind::Keyword &&
                        (toks[i - 1].text == "fn" || toks[i - 1].text == "let");
      bool call_target = i + 1 < toks.size() && toks[i + 1].kind == TokKind::Sym && toks[i + 1].text == "(";
      if (after_decl || call_target) {
        // call-argument swap candidates hang off the call target
        if (call_target) {
          int depth = 0;
          std::vector<std::pair<int, int>> args;  // column spans of top-level args
          int start = -1;
          size_t j = i + 1;
          for (; j < toks.size(); ++j) {
            const Token& u = toks[j];
            if (u.kind != TokKind::Sym) {
              if (depth == 1 && start < 0) start = u.col;
              continue;
            }
            if (u.text == "(" || u.text == "[") {
              ++depth;
              if (depth == 1 && u.text == "(") continue;  // the call's own paren
              if (depth >= 1 && start < 0) start = u.col;
              continue;
            }
            if (u.text == ")" || u.text == "]") {
              --depth;
              if (depth == 0) {
                if (start >= 0) args.emplace_back(start, u.col);
                break;
              }
              continue;
            }
            if (u.text == "," && depth == 1) {
              if (start >= 0) args.emplace_back(start, u.col);
              start = -1;
              continue;
            }
            if (depth >= 1 && start < 0) start = u.col;
          }
          for (size_t a = 0; a + 1 < args.size(); ++a) {
            Candidate c;
            c.line = lineno;
            c.kind = "arg-swap";
            c.a0 = args[a].first;
            c.a1 = args[a].second;
            c.b0 = args[a + 1].first;
            c.b1 = args[a + 1].second;
            out.push_back(std::move(c));
          }
        }
        continue;
      }
      for (const auto& alt : scope_for_line())
        if (alt != t.text)
          out.push_back({lineno, "var-sub", col, static_cast<int>(t.text.size()), alt, 0, 0, 0, 0});
      continue;
    }
  }
}

std::string apply_candidate(const std::string& line, const Candidate& c) {
  if (c.kind == "arg-swap") {
    auto seg = [&](int s, int e) { return line.substr(static_cast<size_t>(s - 1), static_cast<size_t>(e - s)); };
    std::string argA = seg(c.a0, c.a1);
    std::string mid = seg(c.a1, c.b0);
    std::string argB = seg(c.b0, c.b1);
    // trim trailing spaces of spans so the separator stays intact
    auto rtrim = [](std::string& s) {
      while (!s.empty() && s.back() == ' ') s.pop_back();
    };
    rtrim(argA);
    rtrim(argB);
    return line.substr(0, static_cast<size_t>(c.a0 - 1)) + argB + mid + argA +
           line.substr(static_cast<size_t>(c.b1 - 1));
  }
  return line.substr(0, static_cast<size_t>(c.col - 1)) + c.text +
         line.substr(static_cast<size_t>(c.col - 1 + c.len));
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

}  // namespace

BugInstance seed_bug(const std::string& source, const std::vector<TestCase>& tests, uint64_t seed,
                     int64_t budget, int max_attempts) {
  Program prog = parse(source);
  resolve(prog);
  {
    auto base = run_tests(prog, tests, budget);
    for (const auto& o : base)
      if (!o.passed()) throw DataError("seed_bug: program does not pass its own test suite");
  }

  // Mutable lines: inside a function body, below the header line.
  std::vector<Candidate> candidates;
  for (const auto& f : prog.functions) {
    for (int ln = f.line + 1; ln <= f.body.close_line; ++ln) {
      const std::string& text = prog.src_lines.at(static_cast<size_t>(ln - 1));
      collect_line_candidates(prog, ln, text, candidates);
    }
  }
  if (candidates.empty()) throw NoViableMutant("seed_bug: no mutation candidates in program");

  Rng rng(seed);
  rng.shuffle(candidates);
  int attempts = std::min<int>(max_attempts, static_cast<int>(candidates.size()));
  for (int a = 0; a < attempts; ++a) {
    const Candidate& c = candidates[static_cast<size_t>(a)];
    const std::string& old_line = prog.src_lines.at(static_cast<size_t>(c.line - 1));
    std::string new_line = apply_candidate(old_line, c);
    if (new_line == old_line) continue;
    std::vector<std::string> lines = prog.src_lines;
    lines[static_cast<size_t>(c.line - 1)] = new_line;
    std::string mutated = join_lines(lines);
    Program mp;
    try {
      mp = parse(mutated);
      resolve(mp);
    } catch (const DataError&) {
      continue;  // mutant must still compile
    }
    auto outcomes = run_tests(mp, tests, budget);
    std::vector<int> failing;
    for (size_t i = 0; i < outcomes.size(); ++i)
      if (!outcomes[i].passed()) failing.push_back(static_cast<int>(i));
    if (failing.empty()) continue;
    BugInstance bug;
    bug.source = std::move(mutated);
    bug.buggy_line = c.line;
    bug.original_line = old_line;
    bug.mutated_line = new_line;
    bug.failing = std::move(failing);
    bug.mutation_kind = c.kind;
    return bug;
  }
  throw NoViableMutant("seed_bug: no candidate produced a compiling, test-failing mutant");
}

}  // namespace curekit::lang
