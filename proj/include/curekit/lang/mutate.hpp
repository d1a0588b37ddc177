#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curekit/lang/interp.hpp"
#include "curekit/util/errors.hpp"

namespace curekit::lang {

struct NoViableMutant : DataError {
  explicit NoViableMutant(const std::string& msg) : DataError(msg) {}
};

// A seeded bug: one mutated line in an otherwise-correct program, plus the
// evidence (failing test indices) and the pre-mutation line, which doubles
// as the ground-truth fix.
struct BugInstance {
  std::string source;  // full mutated program text
  int buggy_line = 0;  // 1-based
  std::string original_line;
  std::string mutated_line;
  std::vector<int> failing;   // indices into the test list (non-Pass outcomes)
  std::string mutation_kind;  // rel-swap | arith-swap | var-sub | const-off-by-one | arg-swap
};

// Applies one mutation from {relational-operator swap, arithmetic-operator
// swap, in-scope variable substitution, off-by-one constant, call-argument
// swap} to one line of a program that passes all tests, retrying across
// candidate edits until the mutant still compiles (parses and
// scope-resolves) but fails at least one test. Deterministic in seed.
// Throws NoViableMutant when the attempt budget is exhausted and DataError
// when the input program does not pass its own suite.
BugInstance seed_bug(const std::string& source, const std::vector<TestCase>& tests, uint64_t seed,
                     int64_t budget = 10000, int max_attempts = 200);

}  // namespace curekit::lang
