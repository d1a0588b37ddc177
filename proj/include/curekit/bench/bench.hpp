#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curekit/corpus/corpus.hpp"
#include "curekit/lang/interp.hpp"
#include "curekit/lang/mutate.hpp"
#include "curekit/util/errors.hpp"

namespace curekit::bench {

// One held-out benchmark entry: a seeded bug plus the suite that exposes it.
struct BenchBug {
  std::string bug_id;
  lang::BugInstance bug;
  std::vector<lang::TestCase> tests;
};

struct GenOptions {
  int target_methods = 500;  // language-model corpus size
  int target_patches = 300;  // fine-tuning corpus size
  int n_bench_bugs = 20;     // held-out seeded bugs
  uint64_t seed = 17;
};

struct GeneratedCorpus {
  std::vector<std::string> methods;          // one source-text slice per function
  std::vector<corpus::PatchRecord> patches;  // buggy method -> original line
  std::vector<BenchBug> benchmark;
};

// Deterministically synthesizes training programs from a dozen loop/branch
// function families over rotating identifier pools, seeds single-line bugs
// in them for the patch corpus, and builds a disjoint held-out benchmark
// (fresh name bindings, no off-by-one constant bugs, since a replaced
// constant may survive nowhere else in the file for donor restoration).
// Every generated program is verified to pass its own tests.
GeneratedCorpus generate(const GenOptions& opt);

// Benchmark file: line-delimited {bug_id, source, buggy_line,
// original_line, mutated_line, mutation_kind, failing, tests}.
void save_benchmark(const std::string& path, const std::vector<BenchBug>& bugs);
std::vector<BenchBug> load_benchmark(const std::string& path);

// Method corpus file: line-delimited {method}.
void save_methods(const std::string& path, const std::vector<std::string>& methods);
std::vector<std::string> load_methods(const std::string& path);

}  // namespace curekit::bench
