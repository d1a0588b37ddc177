#include "curekit/lang/interp.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace curekit::lang {

bool value_equal(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<int64_t>(a)) return std::get<int64_t>(a) == std::get<int64_t>(b);
  if (std::holds_alternative<bool>(a)) return std::get<bool>(a) == std::get<bool>(b);
  if (std::holds_alternative<std::string>(a)) return std::get<std::string>(a) == std::get<std::string>(b);
  const auto& xa = *std::get<ArrayRef>(a);
  const auto& xb = *std::get<ArrayRef>(b);
  if (xa.size() != xb.size()) return false;
  for (size_t i = 0; i < xa.size(); ++i)
    if (!value_equal(xa[i], xb[i])) return false;
  return true;
}

std::string value_str(const Value& v) {
  if (std::holds_alternative<int64_t>(v)) return std::to_string(std::get<int64_t>(v));
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
  if (std::holds_alternative<std::string>(v)) return "\"" + std::get<std::string>(v) + "\"";
  std::string out = "[";
  const auto& xs = *std::get<ArrayRef>(v);
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += value_str(xs[i]);
  }
  return out + "]";
}

namespace {

struct TimeoutSignal {};
struct RuntimeFault {
  std::string msg;
};
struct ReturnSignal {
  Value v;
};

class Interp {
 public:
  Interp(const Program& p, int64_t budget) : prog_(p), budget_(budget) {}

  Value call_entry(const std::string& fn, const std::vector<Value>& args) {
    // fresh global state per run
    globals_.clear();
    for (const auto& g : prog_.globals) globals_[g.name] = eval(*g.init);
    return call(fn, args);
  }

 private:
  const Program& prog_;
  int64_t budget_;
  int64_t steps_ = 0;
  std::map<std::string, Value> globals_;
  // one scope stack per active call frame
  std::vector<std::vector<std::map<std::string, Value>>> frames_;

  void step() {
    if (++steps_ > budget_) throw TimeoutSignal{};
  }

  [[noreturn]] void fault(const std::string& msg) { throw RuntimeFault{msg}; }

  Value* find_var(const std::string& n) {
    auto& scopes = frames_.back();
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      auto f = it->find(n);
      if (f != it->end()) return &f->second;
    }
    auto g = globals_.find(n);
    return g == globals_.end() ? nullptr : &g->second;
  }

  int64_t want_int(const Value& v, const char* where) {
    if (!std::holds_alternative<int64_t>(v)) fault(std::string("type error: expected integer in ") + where);
    return std::get<int64_t>(v);
  }
  bool want_bool(const Value& v, const char* where) {
    if (!std::holds_alternative<bool>(v)) fault(std::string("type error: expected boolean in ") + where);
    return std::get<bool>(v);
  }

  Value call(const std::string& fn, const std::vector<Value>& args) {
    step();
    if (is_builtin(fn)) return call_builtin(fn, args);
    const Function* f = prog_.find_function(fn);
    if (!f) fault("call to unknown function '" + fn + "'");
    if (args.size() != f->params.size())
      fault("arity mismatch calling '" + fn + "': expected " + std::to_string(f->params.size()) + ", got " +
            std::to_string(args.size()));
    if (frames_.size() >= 200) fault("call stack exhausted in '" + fn + "'");
    frames_.emplace_back();
    frames_.back().emplace_back();
    for (size_t i = 0; i < args.size(); ++i) frames_.back().back()[f->params[i]] = args[i];
    Value result = static_cast<int64_t>(0);
    try {
      exec_block(f->body);
    } catch (ReturnSignal& r) {
      result = std::move(r.v);
    }
    frames_.pop_back();
    return result;
  }

  Value call_builtin(const std::string& fn, const std::vector<Value>& args) {
    auto need = [&](size_t n) {
      if (args.size() != n)
        fault("arity mismatch calling builtin '" + fn + "': expected " + std::to_string(n));
    };
    if (fn == "len") {
      need(1);
      if (!std::holds_alternative<ArrayRef>(args[0])) fault("len: argument is not an array");
      return static_cast<int64_t>(std::get<ArrayRef>(args[0])->size());
    }
    if (fn == "make") {
      need(2);
      int64_t n = want_int(args[0], "make");
      if (n < 0 || n > 65536) fault("make: invalid length " + std::to_string(n));
      return std::make_shared<std::vector<Value>>(static_cast<size_t>(n), args[1]);
    }
    if (fn == "min") {
      need(2);
      int64_t a = want_int(args[0], "min"), b = want_int(args[1], "min");
      return a < b ? a : b;
    }
    if (fn == "max") {
      need(2);
      int64_t a = want_int(args[0], "max"), b = want_int(args[1], "max");
      return a > b ? a : b;
    }
    // abs
    need(1);
    int64_t a = want_int(args[0], "abs");
    return a < 0 ? -a : a;
  }

  void exec_block(const Block& b) {
    frames_.back().emplace_back();
    for (const auto& s : b.stmts) exec(*s);
    frames_.back().pop_back();
  }

  void exec(const Stmt& s) {
    step();
    switch (s.kind) {
      case StmtKind::Let:
        frames_.back().back()[s.name] = eval(*s.expr);
        break;
      case StmtKind::Assign: {
        Value rhs = eval(*s.expr);
        Value* slot = find_var(s.name);
        if (!slot) fault("assignment to unknown variable '" + s.name + "'");
        if (s.lhs_index) {
          int64_t idx = want_int(eval(*s.lhs_index), "index");
          if (!std::holds_alternative<ArrayRef>(*slot)) fault("'" + s.name + "' is not an array");
          auto& arr = *std::get<ArrayRef>(*slot);
          if (idx < 0 || static_cast<size_t>(idx) >= arr.size())
            fault("index " + std::to_string(idx) + " out of bounds for '" + s.name + "' (size " +
                  std::to_string(arr.size()) + ")");
          arr[static_cast<size_t>(idx)] = std::move(rhs);
        } else {
          *slot = std::move(rhs);
        }
        break;
      }
      case StmtKind::If:
        if (want_bool(eval(*s.expr), "if condition")) {
          exec_block(s.body);
        } else if (s.has_else) {
          exec_block(s.else_body);
        }
        break;
      case StmtKind::While:
        while (want_bool(eval(*s.expr), "while condition")) exec_block(s.body);
        break;
      case StmtKind::Return: {
        ReturnSignal r;
        r.v = s.has_value ? eval(*s.expr) : Value(static_cast<int64_t>(0));
        throw r;
      }
      case StmtKind::ExprStmt:
        eval(*s.expr);
        break;
    }
  }

  Value eval(const Expr& e) {
    step();
    switch (e.kind) {
      case ExprKind::Int: return e.int_val;
      case ExprKind::Bool: return e.bool_val;
      case ExprKind::Str: return e.text;
      case ExprKind::Var: {
        Value* v = find_var(e.text);
        if (!v) fault("unknown variable '" + e.text + "'");
        return *v;
      }
      case ExprKind::Unary: {
        if (e.text == "!") return !want_bool(eval(*e.kids[0]), "!");
        return -want_int(eval(*e.kids[0]), "unary -");
      }
      case ExprKind::Binary: return eval_binary(e);
      case ExprKind::Index: {
        Value target = eval(*e.kids[0]);
        int64_t idx = want_int(eval(*e.kids[1]), "index");
        if (!std::holds_alternative<ArrayRef>(target)) fault("indexing a non-array value");
        const auto& arr = *std::get<ArrayRef>(target);
        if (idx < 0 || static_cast<size_t>(idx) >= arr.size())
          fault("index " + std::to_string(idx) + " out of bounds (size " + std::to_string(arr.size()) + ")");
        return arr[static_cast<size_t>(idx)];
      }
      case ExprKind::Call: {
        std::vector<Value> args;
        args.reserve(e.kids.size());
        for (const auto& k : e.kids) args.push_back(eval(*k));
        return call(e.text, args);
      }
      case ExprKind::ArrayLit: {
        auto arr = std::make_shared<std::vector<Value>>();
        arr->reserve(e.kids.size());
        for (const auto& k : e.kids) arr->push_back(eval(*k));
        return arr;
      }
    }
    fault("unreachable expression kind");
  }

  Value eval_binary(const Expr& e) {
    const std::string& op = e.text;
    if (op == "&&") {
      if (!want_bool(eval(*e.kids[0]), "&&")) return false;
      return want_bool(eval(*e.kids[1]), "&&");
    }
    if (op == "||") {
      if (want_bool(eval(*e.kids[0]), "||")) return true;
      return want_bool(eval(*e.kids[1]), "||");
    }
    Value a = eval(*e.kids[0]);
    Value b = eval(*e.kids[1]);
    if (op == "==") return value_equal(a, b);
    if (op == "!=") return !value_equal(a, b);
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
      int64_t x = want_int(a, op.c_str()), y = want_int(b, op.c_str());
      if (op == "<") return x < y;
      if (op == "<=") return x <= y;
      if (op == ">") return x > y;
      return x >= y;
    }
    int64_t x = want_int(a, op.c_str()), y = want_int(b, op.c_str());
    if (op == "+") return x + y;
    if (op == "-") return x - y;
    if (op == "*") return x * y;
    if (op == "/" || op == "%") {
      if (y == 0) fault("division by zero");
      return op == "/" ? x / y : x % y;
    }
    fault("unknown operator '" + op + "'");
  }
};

Value value_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return static_cast<int64_t>(j.get<int64_t>());
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array()) {
    auto arr = std::make_shared<std::vector<Value>>();
    for (const auto& el : j) arr->push_back(value_from_json(el));
    return arr;
  }
  throw DataError("test value must be an integer, boolean, string, or array; got: " + j.dump());
}

}  // namespace

std::vector<TestOutcome> run_tests(const Program& p, const std::vector<TestCase>& tests, int64_t budget) {
  std::vector<TestOutcome> out;
  out.reserve(tests.size());
  for (const auto& t : tests) {
    Interp in(p, budget);
    TestOutcome o{TestOutcome::Status::Pass, "", ""};
    try {
      Value got = in.call_entry(t.fn, t.args);
      if (!value_equal(got, t.expect)) {
        o.status = TestOutcome::Status::Fail;
        o.expected = value_str(t.expect);
        o.actual = value_str(got);
      }
    } catch (RuntimeFault& f) {
      o.status = TestOutcome::Status::Fail;
      o.expected = value_str(t.expect);
      o.actual = "error: " + f.msg;
    } catch (TimeoutSignal&) {
      o.status = TestOutcome::Status::Timeout;
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<TestCase> parse_tests_jsonl(const std::string& text) {
  std::vector<TestCase> tests;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("test file line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("fn") || !j.contains("args") || !j.contains("expect"))
      throw DataError("test file line " + std::to_string(lineno) + ": need {fn, args, expect}");
    TestCase t;
    t.fn = j["fn"].get<std::string>();
    if (!j["args"].is_array())
      throw DataError("test file line " + std::to_string(lineno) + ": args must be an array");
    for (const auto& a : j["args"]) t.args.push_back(value_from_json(a));
    t.expect = value_from_json(j["expect"]);
    tests.push_back(std::move(t));
  }
  return tests;
}

std::vector<TestCase> load_tests_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open test file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_tests_jsonl(ss.str());
}

}  // namespace curekit::lang
