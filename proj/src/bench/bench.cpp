#include "curekit/bench/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "curekit/lang/extract.hpp"
#include "curekit/lang/parser.hpp"
#include "curekit/lang/scope.hpp"
#include "curekit/util/rng.hpp"

namespace curekit::bench {

namespace {

using lang::TestCase;
using lang::Value;

Value iv(int64_t x) { return Value{x}; }

Value av(const std::vector<int64_t>& xs) {
  auto arr = std::make_shared<std::vector<Value>>();
  for (int64_t x : xs) arr->push_back(iv(x));
  return Value{arr};
}

// ---- identifier pools -----------------------------------------------------

const std::vector<std::string> kAcc = {"total",    "acc",    "tally",   "accum",
                                       "sumTotal", "runSum", "sum_val", "gather"};
const std::vector<std::string> kIdx = {"i", "j", "k", "idx", "pos", "cursor", "scan", "slot"};
const std::vector<std::string> kBest = {"best", "peak",      "top",      "lead",
                                        "maxVal", "bestSoFar", "max_seen", "champ"};
const std::vector<std::string> kArr = {"xs",   "vals", "items", "nums",
                                       "data", "arr",  "elems", "cells"};
const std::vector<std::string> kA = {"a", "lo", "left", "start", "low", "p", "base", "from"};
const std::vector<std::string> kB = {"b", "hi", "right", "stop", "high", "q", "bound", "upto"};
const std::vector<std::string> kV = {"v", "val", "cur", "probe", "given", "x", "raw", "item"};
const std::vector<std::string> kT = {"t", "target", "goal", "key", "want", "mark", "pivot", "seek"};
const std::vector<std::string> kTmp = {"tmp", "rem", "carry", "hold", "spare", "slack", "rest", "next_v"};
// Extra variable bindings mixed in only for held-out benchmark programs.
const std::vector<std::string> kNovel = {"curBest",  "sumLimit", "gapTotal", "hitMark",
                                         "seekPos",  "valBound", "binProbe", "charTally"};

const std::vector<std::vector<std::string>> kFnNames = {
    {"range_sum", "sum_between", "span_total", "add_range", "sumRange", "accumulate",
     "total_span", "gather_sum"},
    {"max_element", "array_peak", "largest_of", "top_value", "maxOf", "peak_find", "biggest",
     "high_mark"},
    {"count_hits", "count_equal", "match_count", "tally_equal", "countOf", "hits_in",
     "num_matches", "count_same"},
    {"find_index", "index_of", "locate", "first_pos", "findSlot", "position_of", "seek_index",
     "where_is"},
    {"clamp_value", "bound_to", "pin_range", "clampTo", "limit_val", "fit_range", "hold_within",
     "snap_range"},
    {"grade_of", "band_for", "label_of", "tier_for", "rate_band", "bucket_of", "gradeFor",
     "rank_label"},
    {"pow_int", "power_of", "raise_to", "int_pow", "powBy", "exp_loop", "mul_times",
     "repeat_mul"},
    {"gcd_of", "common_div", "gcdPair", "shared_div", "divisor_of", "gcd_calc", "reduce_pair",
     "fold_gcd"},
    {"digit_sum", "sum_digits", "digitTotal", "digit_fold", "base_sum", "digit_acc",
     "sum_base10", "digit_mass"},
    {"abs_diff", "gap_of", "distance", "diff_mag", "absGap", "span_of", "delta_abs",
     "far_apart"},
    {"array_sum", "sum_all", "total_of", "sumList", "add_all", "fold_sum", "list_total",
     "sum_items"},
    {"mix_pair", "weigh_two", "pair_score", "combine2", "blend_pair", "rate_pair", "mixWeights",
     "join_score"},
};
const std::vector<std::string> kHelperNames = {"scale_add", "mul_shift", "wsum", "base_mix",
                                               "mulAdd",    "shift_sum", "w_combine", "scale_mix"};

const std::vector<std::vector<std::string>> kStringBands = {
    {"low", "mid", "high"},
    {"cold", "warm", "hot"},
    {"small", "medium", "large"},
    {"fail", "pass", "star"},
};

constexpr int kFamilies = 12;

struct FnGen {
  std::vector<std::string> lines;
  std::vector<TestCase> tests;
};

std::string draw(const std::vector<std::string>& pool, Rng& rng, std::set<std::string>& used) {
  for (int tries = 0; tries < 64; ++tries) {
    const std::string& cand = pool[static_cast<size_t>(
        rng.uniform_int(0, static_cast<int64_t>(pool.size()) - 1))];
    if (used.insert(cand).second) return cand;
  }
  // Pool exhausted within this program; suffix a drawn name deterministically.
  std::string base = pool[static_cast<size_t>(
      rng.uniform_int(0, static_cast<int64_t>(pool.size()) - 1))];
  for (int n = 2;; ++n) {
    std::string cand = base + std::to_string(n);
    if (used.insert(cand).second) return cand;
  }
}

std::vector<int64_t> rand_array(Rng& rng, int min_len, int max_len, int64_t lo, int64_t hi) {
  int n = static_cast<int>(rng.uniform_int(min_len, max_len));
  std::vector<int64_t> xs(static_cast<size_t>(n));
  for (auto& x : xs) x = rng.uniform_int(lo, hi);
  return xs;
}

// Each family writes its body and computes expected outputs with ordinary
// C++ arithmetic; generate() re-runs everything through the interpreter, so
// a mismatch would fail fast rather than poison the corpora.
FnGen gen_family(int family, const std::string& fname, Rng& rng, std::set<std::string>& used,
                 bool novel_vars) {
  auto pool = [&](const std::vector<std::string>& p) {
    if (!novel_vars) return p;
    std::vector<std::string> ext = p;
    ext.insert(ext.end(), kNovel.begin(), kNovel.end());
    return ext;
  };
  FnGen g;
  auto& L = g.lines;
  switch (family) {
    case 0: {  // sum of the half-open range [a, b)
      std::string a = draw(pool(kA), rng, used), b = draw(pool(kB), rng, used);
      std::string acc = draw(pool(kAcc), rng, used), i = draw(pool(kIdx), rng, used);
      L = {"fn " + fname + "(" + a + ", " + b + ") {",
           "  let " + acc + " = 0;",
           "  let " + i + " = " + a + ";",
           "  while (" + i + " < " + b + ") {",
           "    " + acc + " = " + acc + " + " + i + ";",
           "    " + i + " = " + i + " + 1;",
           "  }",
           "  return " + acc + ";",
           "}"};
      auto expect = [](int64_t x, int64_t y) {
        int64_t s = 0;
        for (int64_t v = x; v < y; ++v) s += v;
        return s;
      };
      std::vector<std::pair<int64_t, int64_t>> args = {{0, 5}, {2, 7}, {3, 3}};
      args.emplace_back(rng.uniform_int(0, 4), rng.uniform_int(5, 11));
      for (auto [x, y] : args) g.tests.push_back({fname, {iv(x), iv(y)}, iv(expect(x, y))});
      break;
    }
    case 1: {  // largest element
      std::string xs = draw(pool(kArr), rng, used), best = draw(pool(kBest), rng, used);
      std::string i = draw(pool(kIdx), rng, used);
      L = {"fn " + fname + "(" + xs + ") {",
           "  let " + best + " = " + xs + "[0];",
           "  let " + i + " = 1;",
           "  while (" + i + " < len(" + xs + ")) {",
           "    if (" + xs + "[" + i + "] > " + best + ") {",
           "      " + best + " = " + xs + "[" + i + "];",
           "    }",
           "    " + i + " = " + i + " + 1;",
           "  }",
           "  return " + best + ";",
           "}"};
      std::vector<std::vector<int64_t>> cases = {{3, 9, 4}, {7}, rand_array(rng, 3, 6, 0, 20)};
      for (const auto& c : cases)
        g.tests.push_back({fname, {av(c)}, iv(*std::max_element(c.begin(), c.end()))});
      break;
    }
    case 2: {  // count of elements equal to the target
      std::string xs = draw(pool(kArr), rng, used), t = draw(pool(kT), rng, used);
      std::string cnt = draw(pool(kAcc), rng, used), i = draw(pool(kIdx), rng, used);
      L = {"fn " + fname + "(" + xs + ", " + t + ") {",
           "  let " + cnt + " = 0;",
           "  let " + i + " = 0;",
           "  while (" + i + " < len(" + xs + ")) {",
           "    if (" + xs + "[" + i + "] == " + t + ") {",
           "      " + cnt + " = " + cnt + " + 1;",
           "    }",
           "    " + i + " = " + i + " + 1;",
           "  }",
           "  return " + cnt + ";",
           "}"};
      std::vector<std::pair<std::vector<int64_t>, int64_t>> cases = {
          {{2, 5, 2, 2}, 2}, {{4, 6}, 9}, {rand_array(rng, 3, 6, 0, 4), rng.uniform_int(0, 4)}};
      for (const auto& [c, t_val] : cases)
        g.tests.push_back({fname,
                           {av(c), iv(t_val)},
                           iv(std::count(c.begin(), c.end(), t_val))});
      break;
    }
    case 3: {  // first index of the target, or -1
      std::string xs = draw(pool(kArr), rng, used), t = draw(pool(kT), rng, used);
      std::string p = draw(pool(kBest), rng, used), i = draw(pool(kIdx), rng, used);
      L = {"fn " + fname + "(" + xs + ", " + t + ") {",
           "  let " + p + " = 0 - 1;",
           "  let " + i + " = 0;",
           "  while (" + i + " < len(" + xs + ")) {",
           "    if (" + xs + "[" + i + "] == " + t + " && " + p + " < 0) {",
           "      " + p + " = " + i + ";",
           "    }",
           "    " + i + " = " + i + " + 1;",
           "  }",
           "  return " + p + ";",
           "}"};
      auto expect = [](const std::vector<int64_t>& c, int64_t t_val) -> int64_t {
        for (size_t k = 0; k < c.size(); ++k)
          if (c[k] == t_val) return static_cast<int64_t>(k);
        return -1;
      };
      std::vector<std::pair<std::vector<int64_t>, int64_t>> cases = {
          {{5, 3, 8}, 8}, {{5, 3, 8}, 4}, {{6, 6, 6}, 6}};
      for (const auto& [c, t_val] : cases)
        g.tests.push_back({fname, {av(c), iv(t_val)}, iv(expect(c, t_val))});
      break;
    }
    case 4: {  // clamp into [lo, hi]
      std::string v = draw(pool(kV), rng, used);
      std::string lo = draw(pool(kA), rng, used), hi = draw(pool(kB), rng, used);
      L = {"fn " + fname + "(" + v + ", " + lo + ", " + hi + ") {",
           "  if (" + v + " < " + lo + ") {",
           "    return " + lo + ";",
           "  }",
           "  if (" + v + " > " + hi + ") {",
           "    return " + hi + ";",
           "  }",
           "  return " + v + ";",
           "}"};
      auto expect = [](int64_t x, int64_t l, int64_t h) { return std::clamp(x, l, h); };
      std::vector<std::array<int64_t, 3>> cases = {{1, 3, 9}, {5, 3, 9}, {12, 3, 9}, {3, 3, 9}};
      for (auto [x, l, h] : cases)
        g.tests.push_back({fname, {iv(x), iv(l), iv(h)}, iv(expect(x, l, h))});
      break;
    }
    case 5: {  // banded label with two thresholds
      std::string x = draw(pool(kV), rng, used);
      int64_t k1 = rng.uniform_int(3, 6) * 10;
      int64_t k2 = k1 + rng.uniform_int(2, 4) * 10;
      const auto& band = kStringBands[static_cast<size_t>(
          rng.uniform_int(0, static_cast<int64_t>(kStringBands.size()) - 1))];
      L = {"fn " + fname + "(" + x + ") {",
           "  if (" + x + " < " + std::to_string(k1) + ") {",
           "    return \"" + band[0] + "\";",
           "  }",
           "  if (" + x + " < " + std::to_string(k2) + ") {",
           "    return \"" + band[1] + "\";",
           "  }",
           "  return \"" + band[2] + "\";",
           "}"};
      auto expect = [&](int64_t v) { return v < k1 ? band[0] : (v < k2 ? band[1] : band[2]); };
      std::vector<int64_t> cases = {k1 - 7, k1, k1 + 5, k2, k2 + 13};
      for (int64_t v : cases) g.tests.push_back({fname, {iv(v)}, Value{expect(v)}});
      break;
    }
    case 6: {  // integer power by repeated multiplication
      std::string b = draw(pool(kA), rng, used), e = draw(pool(kB), rng, used);
      std::string r = draw(pool(kAcc), rng, used), i = draw(pool(kIdx), rng, used);
      L = {"fn " + fname + "(" + b + ", " + e + ") {",
           "  let " + r + " = 1;",
           "  let " + i + " = 0;",
           "  while (" + i + " < " + e + ") {",
           "    " + r + " = " + r + " * " + b + ";",
           "    " + i + " = " + i + " + 1;",
           "  }",
           "  return " + r + ";",
           "}"};
      auto expect = [](int64_t base, int64_t exp) {
        int64_t r = 1;
        for (int64_t k = 0; k < exp; ++k) r *= base;
        return r;
      };
      std::vector<std::pair<int64_t, int64_t>> cases = {
          {2, 0}, {2, 5}, {3, 3}, {rng.uniform_int(2, 4), rng.uniform_int(1, 4)}};
      for (auto [base, exp] : cases)
        g.tests.push_back({fname, {iv(base), iv(exp)}, iv(expect(base, exp))});
      break;
    }
    case 7: {  // greatest common divisor
      std::string a = draw(pool(kA), rng, used), b = draw(pool(kB), rng, used);
      std::string x = draw(pool(kV), rng, used), y = draw(pool(kT), rng, used);
      std::string t = draw(pool(kTmp), rng, used);
      L = {"fn " + fname + "(" + a + ", " + b + ") {",
           "  let " + x + " = " + a + ";",
           "  let " + y + " = " + b + ";",
           "  while (" + y + " > 0) {",
           "    let " + t + " = " + x + " % " + y + ";",
           "    " + x + " = " + y + ";",
           "    " + y + " = " + t + ";",
           "  }",
           "  return " + x + ";",
           "}"};
      std::vector<std::pair<int64_t, int64_t>> cases = {{12, 8}, {7, 3}, {0, 5}, {18, 24}};
      for (auto [p, q] : cases)
        g.tests.push_back({fname, {iv(p), iv(q)}, iv(std::gcd(p, q))});
      break;
    }
    case 8: {  // sum of base-10 digits
      std::string n = draw(pool(kV), rng, used);
      std::string s = draw(pool(kAcc), rng, used), m = draw(pool(kTmp), rng, used);
      L = {"fn " + fname + "(" + n + ") {",
           "  let " + s + " = 0;",
           "  let " + m + " = " + n + ";",
           "  while (" + m + " > 0) {",
           "    " + s + " = " + s + " + (" + m + " % 10);",
           "    " + m + " = " + m + " / 10;",
           "  }",
           "  return " + s + ";",
           "}"};
      auto expect = [](int64_t v) {
        int64_t s = 0;
        for (; v > 0; v /= 10) s += v % 10;
        return s;
      };
      std::vector<int64_t> cases = {0, 7, 345, rng.uniform_int(10, 999)};
      for (int64_t v : cases) g.tests.push_back({fname, {iv(v)}, iv(expect(v))});
      break;
    }
    case 9: {  // absolute difference
      std::string a = draw(pool(kA), rng, used), b = draw(pool(kB), rng, used);
      std::string d = draw(pool(kTmp), rng, used);
      L = {"fn " + fname + "(" + a + ", " + b + ") {",
           "  let " + d + " = " + a + " - " + b + ";",
           "  if (" + d + " < 0) {",
           "    " + d + " = 0 - " + d + ";",
           "  }",
           "  return " + d + ";",
           "}"};
      std::vector<std::pair<int64_t, int64_t>> cases = {
          {9, 4}, {4, 9}, {6, 6}, {rng.uniform_int(0, 20), rng.uniform_int(0, 20)}};
      for (auto [p, q] : cases)
        g.tests.push_back({fname, {iv(p), iv(q)}, iv(std::llabs(p - q))});
      break;
    }
    case 10: {  // sum over an array
      std::string xs = draw(pool(kArr), rng, used);
      std::string s = draw(pool(kAcc), rng, used), i = draw(pool(kIdx), rng, used);
      L = {"fn " + fname + "(" + xs + ") {",
           "  let " + s + " = 0;",
           "  let " + i + " = 0;",
           "  while (" + i + " < len(" + xs + ")) {",
           "    " + s + " = " + s + " + " + xs + "[" + i + "];",
           "    " + i + " = " + i + " + 1;",
           "  }",
           "  return " + s + ";",
           "}"};
      std::vector<std::vector<int64_t>> cases = {{1, 2, 3}, {}, rand_array(rng, 2, 6, 0, 15)};
      for (const auto& c : cases)
        g.tests.push_back(
            {fname, {av(c)}, iv(std::accumulate(c.begin(), c.end(), int64_t{0}))});
      break;
    }
    default: {  // weighted pair through a helper call (argument order matters)
      std::string helper = draw(kHelperNames, rng, used);
      std::string a = draw(pool(kA), rng, used), b = draw(pool(kB), rng, used);
      std::string p = draw(pool(kV), rng, used), q = draw(pool(kT), rng, used);
      std::string r = draw(pool(kAcc), rng, used);
      int64_t w = 2 * rng.uniform_int(4, 8);       // 8..16
      int64_t bias = rng.uniform_int(2, 9);
      L = {"fn " + helper + "(" + a + ", " + b + ") {",
           "  return " + a + " * " + std::to_string(w) + " + " + b + ";",
           "}",
           "",
           "fn " + fname + "(" + p + ", " + q + ") {",
           "  let " + r + " = " + helper + "(" + p + ", " + q + ");",
           "  return " + r + " + " + std::to_string(bias) + ";",
           "}"};
      auto expect = [&](int64_t x, int64_t y) { return x * w + y + bias; };
      std::vector<std::pair<int64_t, int64_t>> cases = {
          {1, 2}, {3, 0}, {rng.uniform_int(0, 9), rng.uniform_int(0, 9)}};
      for (auto [x, y] : cases)
        g.tests.push_back({fname, {iv(x), iv(y)}, iv(expect(x, y))});
      break;
    }
  }
  return g;
}

struct ProgramSpec {
  std::string source;
  std::vector<TestCase> tests;
};

ProgramSpec make_program(Rng& rng, bool novel_vars) {
  std::vector<int> fams(kFamilies);
  for (int i = 0; i < kFamilies; ++i) fams[static_cast<size_t>(i)] = i;
  rng.shuffle(fams);
  int n_fns = static_cast<int>(rng.uniform_int(3, 4));

  ProgramSpec spec;
  std::set<std::string> used;
  for (int f = 0; f < n_fns; ++f) {
    int family = fams[static_cast<size_t>(f)];
    std::string fname = draw(kFnNames[static_cast<size_t>(family)], rng, used);
    FnGen g = gen_family(family, fname, rng, used, novel_vars);
    if (f > 0) spec.source += "\n";
    for (const auto& line : g.lines) spec.source += line + "\n";
    for (auto& t : g.tests) spec.tests.push_back(std::move(t));
  }
  return spec;
}

void verify_program(const ProgramSpec& spec) {
  lang::Program p = lang::parse(spec.source);
  lang::resolve(p);
  for (const auto& o : lang::run_tests(p, spec.tests)) {
    if (!o.passed())
      throw InternalError("generated program fails its own tests (expected " + o.expected +
                          ", got " + o.actual + ")");
  }
}

nlohmann::json value_to_json(const Value& v) {
  if (std::holds_alternative<int64_t>(v)) return std::get<int64_t>(v);
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& el : *std::get<lang::ArrayRef>(v)) arr.push_back(value_to_json(el));
  return arr;
}

nlohmann::json test_to_json(const TestCase& t) {
  nlohmann::ordered_json j;
  j["fn"] = t.fn;
  nlohmann::json args = nlohmann::json::array();
  for (const auto& a : t.args) args.push_back(value_to_json(a));
  j["args"] = args;
  j["expect"] = value_to_json(t.expect);
  return j;
}

std::vector<TestCase> tests_from_json(const nlohmann::json& arr) {
  // Reuse the line-delimited test parser: one dumped record per line.
  std::string text;
  for (const auto& el : arr) text += el.dump() + "\n";
  return lang::parse_tests_jsonl(text);
}

}  // namespace

GeneratedCorpus generate(const GenOptions& opt) {
  if (opt.target_methods < 1 || opt.target_patches < 0 || opt.n_bench_bugs < 0)
    throw UsageError("generate needs positive corpus sizes");
  GeneratedCorpus out;
  Rng master(opt.seed);
  Rng prog_rng = master.fork(1);
  Rng patch_rng = master.fork(2);
  Rng bench_rng = master.fork(3);

  // Training programs until the method corpus is full.
  std::vector<ProgramSpec> programs;
  while (static_cast<int>(out.methods.size()) < opt.target_methods) {
    ProgramSpec spec = make_program(prog_rng, /*novel_vars=*/false);
    verify_program(spec);
    for (auto& m : lang::extract_methods(spec.source, 512)) out.methods.push_back(std::move(m));
    programs.push_back(std::move(spec));
  }

  // Seeded patch records: cycle the programs, one fresh bug each pass.
  std::set<std::string> seen_patch;
  uint64_t salt = 0;
  int misses = 0;
  while (static_cast<int>(out.patches.size()) < opt.target_patches &&
         misses < 4 * opt.target_patches + 64) {
    const ProgramSpec& spec = programs[static_cast<size_t>(salt % programs.size())];
    ++salt;
    lang::BugInstance bug;
    try {
      bug = lang::seed_bug(spec.source, spec.tests, patch_rng.next_u64());
    } catch (const lang::NoViableMutant&) {
      ++misses;
      continue;
    }
    lang::Program prog = lang::parse(bug.source);
    const lang::MethodSpan* span = nullptr;
    for (const auto& s : lang::method_spans(prog))
      if (s.start_line <= bug.buggy_line && bug.buggy_line <= s.end_line) span = &s;
    if (!span) {
      ++misses;
      continue;
    }
    std::string context;
    {
      std::istringstream in(bug.source);
      std::string line;
      int ln = 0;
      while (std::getline(in, line)) {
        ++ln;
        if (ln >= span->start_line && ln <= span->end_line) context += line + "\n";
      }
    }
    corpus::PatchRecord rec{context, bug.buggy_line - span->start_line + 1,
                            bug.buggy_line - span->start_line + 1, bug.original_line};
    if (!seen_patch.insert(rec.context + "\x1f" + std::to_string(rec.buggy_start_line) + "\x1f" +
                           rec.fix)
             .second) {
      ++misses;
      continue;
    }
    out.patches.push_back(std::move(rec));
  }
  if (static_cast<int>(out.patches.size()) < opt.target_patches)
    throw InternalError("patch seeding stalled at " + std::to_string(out.patches.size()) +
                        " of " + std::to_string(opt.target_patches));

  // Held-out benchmark: fresh programs, one bug each. Off-by-one constant
  // bugs are skipped: the pre-mutation literal usually survives nowhere
  // else in the file, so no donor can restore the ground-truth line.
  for (int i = 0; i < opt.n_bench_bugs; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 200)
        throw InternalError("benchmark seeding stalled at bug " + std::to_string(i));
      ProgramSpec spec = make_program(bench_rng, /*novel_vars=*/true);
      try {
        verify_program(spec);
        lang::BugInstance bug = lang::seed_bug(spec.source, spec.tests, bench_rng.next_u64());
        if (bug.mutation_kind == "const-off-by-one") continue;
        char id[16];
        std::snprintf(id, sizeof id, "b%02d", i + 1);
        out.benchmark.push_back({id, std::move(bug), spec.tests});
        break;
      } catch (const lang::NoViableMutant&) {
        continue;
      }
    }
  }
  return out;
}

void save_benchmark(const std::string& path, const std::vector<BenchBug>& bugs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& b : bugs) {
    nlohmann::ordered_json j;
    j["bug_id"] = b.bug_id;
    j["source"] = b.bug.source;
    j["buggy_line"] = b.bug.buggy_line;
    j["original_line"] = b.bug.original_line;
    j["mutated_line"] = b.bug.mutated_line;
    j["mutation_kind"] = b.bug.mutation_kind;
    j["failing"] = b.bug.failing;
    nlohmann::json tests = nlohmann::json::array();
    for (const auto& t : b.tests) tests.push_back(test_to_json(t));
    j["tests"] = tests;
    out << j.dump() << "\n";
  }
}

std::vector<BenchBug> load_benchmark(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::vector<BenchBug> bugs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("bad benchmark record: ") + e.what());
    }
    BenchBug b;
    b.bug_id = j.at("bug_id").get<std::string>();
    b.bug.source = j.at("source").get<std::string>();
    b.bug.buggy_line = j.at("buggy_line").get<int>();
    b.bug.original_line = j.at("original_line").get<std::string>();
    b.bug.mutated_line = j.at("mutated_line").get<std::string>();
    b.bug.mutation_kind = j.at("mutation_kind").get<std::string>();
    b.bug.failing = j.at("failing").get<std::vector<int>>();
    b.tests = tests_from_json(j.at("tests"));
    bugs.push_back(std::move(b));
  }
  return bugs;
}

void save_methods(const std::string& path, const std::vector<std::string>& methods) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& m : methods) {
    nlohmann::json j;
    j["method"] = m;
    out << j.dump() << "\n";
  }
}

std::vector<std::string> load_methods(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::vector<std::string> methods;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      methods.push_back(nlohmann::json::parse(line).at("method").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("bad method record: ") + e.what());
    }
  }
  return methods;
}

}  // namespace curekit::bench
