#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "curekit/lang/ast.hpp"
#include "curekit/util/errors.hpp"

namespace curekit::lang {

struct Value;
using ArrayRef = std::shared_ptr<std::vector<Value>>;

struct Value : std::variant<int64_t, bool, std::string, ArrayRef> {
  using variant::variant;
};

bool value_equal(const Value& a, const Value& b);
std::string value_str(const Value& v);

struct TestCase {
  std::string fn;
  std::vector<Value> args;
  Value expect;
};

struct TestOutcome {
  enum class Status { Pass, Fail, Timeout } status;
  std::string expected;  // printable form, filled for Fail
  std::string actual;    // printable form or "error: ..." for Fail
  bool passed() const { return status == Status::Pass; }
};

// Interprets each test on a fresh program state (globals re-evaluated), with
// a shared per-test step budget. Runtime faults (division by zero, index out
// of bounds, type errors, bad arity) are Fail outcomes; exceeding the budget
// is Timeout. Deterministic: equal inputs give equal outcomes.
std::vector<TestOutcome> run_tests(const Program& p, const std::vector<TestCase>& tests,
                                   int64_t budget = 10000);

// Test suites are line-delimited JSON records {fn, args, expect}.
std::vector<TestCase> parse_tests_jsonl(const std::string& text);
std::vector<TestCase> load_tests_file(const std::string& path);

}  // namespace curekit::lang
