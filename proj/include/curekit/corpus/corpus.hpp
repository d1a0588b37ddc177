#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "curekit/tok/bpe.hpp"
#include "curekit/util/errors.hpp"
#include "curekit/util/rng.hpp"

namespace curekit::corpus {

struct SpanNotFound : DataError {
  explicit SpanNotFound(const std::string& msg) : DataError(msg) {}
};
struct EmptyDataset : DataError {
  explicit EmptyDataset(const std::string& msg) : DataError(msg) {}
};

// One raw training record: a whole method, the 1-based line range of the
// buggy statement(s) within it, and the replacement text. Stored on disk
// as line-delimited JSON objects {context, buggy_start_line,
// buggy_end_line, fix}; the tokenized form is always derived, never stored.
struct PatchRecord {
  std::string context;
  int buggy_start_line = 1;
  int buggy_end_line = 1;
  std::string fix;
};

// Tokenized training instance. context_ids is <BOS> + method subwords +
// <EOS>, so the position just before the buggy span (y0) always exists:
// b1 >= 1 by construction. fix_ids is the fix's subwords plus a trailing
// <EOS>; a pure deletion is the one-token sequence [<EOS>].
struct PatchExample {
  std::vector<int> context_ids;
  size_t b1 = 0;  // inclusive subword span of the buggy lines, 0-based
  size_t bn = 0;
  std::vector<int> fix_ids;
  std::vector<std::string> context_donors;  // placeholder literals, in order
  std::vector<std::string> fix_donors;

  size_t y0_index() const { return b1 - 1; }
  size_t buggy_len() const { return bn - b1 + 1; }
  size_t fix_len() const { return fix_ids.size() - 1; }  // content only
};

// Tokenizes one record. Throws SpanNotFound when the line range does not
// address tokens inside the context.
PatchExample tokenize_record(const PatchRecord& rec, const tok::Codec& codec);

// Tokenizes all records and drops any whose context or fix exceeds
// max_tokens content subwords.
std::vector<PatchExample> build_patch_dataset(const std::vector<PatchRecord>& records,
                                              const tok::Codec& codec, size_t max_tokens = 1024);

// Whole-method id sequences (<BOS> ... <EOS>) for language-model training;
// methods longer than max_tokens content subwords are dropped.
std::vector<std::vector<int>> build_lm_dataset(const std::vector<std::string>& methods,
                                               const tok::Codec& codec, size_t max_tokens = 1024);

// Empirical distribution of the length difference d = buggy_len - fix_len,
// as log-probabilities. Unseen differences fall to floor_logp, which sits
// strictly below every observed value.
struct LengthModel {
  std::map<int64_t, double> table;
  double floor_logp = 0.0;

  double logp(int64_t d) const {
    auto it = table.find(d);
    return it == table.end() ? floor_logp : it->second;
  }
};

LengthModel length_diff_distribution(const std::vector<PatchExample>& dataset);

// Single JSON object {floor_logp, table: {"<d>": logp, ...}}.
void save_length_model(const std::string& path, const LengthModel& lm);
LengthModel load_length_model(const std::string& path);

// Seed-deterministic disjoint partition into (train, validation); both
// sides keep the original dataset order. fraction must lie in (0, 1).
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split(const std::vector<T>& items, double fraction,
                                                uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw DataError("validation fraction must lie strictly between 0 and 1");
  size_t n = items.size();
  size_t n_val = static_cast<size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_val == 0 && n > 0) n_val = 1;
  if (n_val >= n && n > 0) n_val = n - 1;
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  std::vector<bool> in_val(n, false);
  for (size_t i = 0; i < n_val; ++i) in_val[idx[i]] = true;
  std::pair<std::vector<T>, std::vector<T>> out;
  for (size_t i = 0; i < n; ++i) {
    (in_val[i] ? out.second : out.first).push_back(items[i]);
  }
  return out;
}

// JSONL reader/writer for PatchRecord files.
std::vector<PatchRecord> parse_patch_records(const std::string& jsonl);
std::vector<PatchRecord> load_patch_records(const std::string& path);
void save_patch_records(const std::string& path, const std::vector<PatchRecord>& records);

}  // namespace curekit::corpus
