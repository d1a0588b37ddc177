// Bug seeding: every produced mutant must compile, the original must pass
// its tests, and the mutant must fail at least one. Also covers the
// external-toolchain adapter and key=value config parsing.

#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "curekit/lang/adapter.hpp"
#include "curekit/lang/interp.hpp"
#include "curekit/lang/mutate.hpp"
#include "curekit/lang/parser.hpp"
#include "curekit/lang/scope.hpp"
#include "curekit/util/config.hpp"
#include "doctest.h"

using namespace curekit::lang;

namespace {

const char* kSumSrc =
    "fn sum_upto(n) {\n"
    "  let t = 0;\n"
    "  let i = 0;\n"
    "  while (i <= n) {\n"
    "    t = t + i;\n"
    "    i = i + 1;\n"
    "  }\n"
    "  return t;\n"
    "}\n";

std::vector<TestCase> sum_tests() {
  return {
      {"sum_upto", {Value{int64_t{0}}}, Value{int64_t{0}}},
      {"sum_upto", {Value{int64_t{3}}}, Value{int64_t{6}}},
      {"sum_upto", {Value{int64_t{10}}}, Value{int64_t{55}}},
  };
}

bool compiles(const std::string& src) {
  try {
    Program p = parse(src);
    resolve(p);
    return true;
  } catch (const curekit::DataError&) {
    return false;
  }
}

}  // namespace

TEST_CASE("seed_bug: invariants hold for many seeds") {
  auto tests = sum_tests();
  for (uint64_t seed = 1; seed <= 12; ++seed) {
    BugInstance bug = seed_bug(kSumSrc, tests, seed);
    INFO("seed ", seed, " kind ", bug.mutation_kind, " line ", bug.buggy_line);
    // The mutant source still compiles.
    CHECK(compiles(bug.source));
    // Exactly one line differs, and it is the reported one.
    CHECK(bug.original_line != bug.mutated_line);
    // At least one test fails on the mutant.
    CHECK_FALSE(bug.failing.empty());
    Program m = parse(bug.source);
    resolve(m);
    auto outcomes = run_tests(m, tests);
    for (int idx : bug.failing) {
      CHECK_FALSE(outcomes[size_t(idx)].passed());
    }
    // Restoring the original line repairs the program.
    Program fixed = parse(kSumSrc);
    resolve(fixed);
    for (const auto& o : run_tests(fixed, tests)) CHECK(o.passed());
  }
}

TEST_CASE("seed_bug: deterministic per seed, varies across seeds") {
  auto tests = sum_tests();
  BugInstance a = seed_bug(kSumSrc, tests, 7);
  BugInstance b = seed_bug(kSumSrc, tests, 7);
  CHECK(a.source == b.source);
  CHECK(a.buggy_line == b.buggy_line);
  CHECK(a.mutation_kind == b.mutation_kind);
  CHECK(a.failing == b.failing);

  // Across a span of seeds at least two distinct mutants appear.
  std::set<std::string> distinct;
  for (uint64_t s = 1; s <= 10; ++s) distinct.insert(seed_bug(kSumSrc, tests, s).source);
  CHECK(distinct.size() >= 2);
}

TEST_CASE("seed_bug: rejects originals that do not pass their tests") {
  std::vector<TestCase> wrong = {{"sum_upto", {Value{int64_t{3}}}, Value{int64_t{999}}}};
  CHECK_THROWS_AS(seed_bug(kSumSrc, wrong, 1), curekit::DataError);
}

TEST_CASE("seed_bug: no viable mutant in an empty function") {
  // The body has no statement lines to mutate.
  std::string src = "fn noop() {\n}\n";
  std::vector<TestCase> tests = {{"noop", {}, Value{int64_t{0}}}};
  CHECK_THROWS_AS(seed_bug(src, tests, 1), NoViableMutant);
}

TEST_CASE("seed_bug: mutants come from the documented mutation set") {
  auto tests = sum_tests();
  const std::set<std::string> kinds = {"rel-swap", "arith-swap", "var-sub", "const-off-by-one",
                                       "arg-swap"};
  for (uint64_t s = 1; s <= 12; ++s) {
    CHECK(kinds.count(seed_bug(kSumSrc, tests, s).mutation_kind) == 1);
  }
}

TEST_CASE("seed_bug: argument swap is reachable") {
  // Mutable lines sit strictly inside a function body, so the call must
  // be on its own line.
  std::string src =
      "fn diff(a, b) {\n"
      "  return a - b;\n"
      "}\n"
      "fn wrap(x, y) {\n"
      "  return diff(x, y);\n"
      "}\n";
  std::vector<TestCase> tests = {
      {"wrap", {Value{int64_t{9}}, Value{int64_t{4}}}, Value{int64_t{5}}},
  };
  bool saw_arg_swap = false;
  for (uint64_t s = 1; s <= 40 && !saw_arg_swap; ++s) {
    try {
      saw_arg_swap = seed_bug(src, tests, s).mutation_kind == "arg-swap";
    } catch (const NoViableMutant&) {
    }
  }
  CHECK(saw_arg_swap);
}

TEST_CASE("config: key=value parsing") {
  auto cfg = curekit::parse_config(
      "# comment\n"
      "alpha = 3\n"
      "  name =  spaced value  \n"
      "empty_ok =\n");
  CHECK(cfg.at("alpha") == "3");
  CHECK(cfg.at("name") == "spaced value");
  CHECK(cfg.at("empty_ok") == "");
  CHECK_THROWS_AS(curekit::parse_config("no_equals_here\n"), curekit::DataError);
  CHECK_THROWS_AS(curekit::parse_config("= value\n"), curekit::DataError);
}

TEST_CASE("adapter: drives an external toolchain via shell commands") {
  ExternalAdapter ok = ExternalAdapter::from_config_text(
      "compile_cmd = exit 0\n"
      "test_cmd = exit 3\n"
      "pass_exit_code = 3\n");
  CHECK(ok.compiles("."));
  CHECK(ok.tests_pass("."));

  ExternalAdapter bad = ExternalAdapter::from_config_text(
      "compile_cmd = exit 1\n"
      "test_cmd = exit 1\n"
      "pass_exit_code = 0\n");
  CHECK_FALSE(bad.compiles("."));
  CHECK_FALSE(bad.tests_pass("."));

  CHECK_THROWS_AS(ExternalAdapter::from_config_text("compile_cmd = true\n"), curekit::DataError);
}
