#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "curekit/corpus/corpus.hpp"
#include "curekit/tok/bpe.hpp"
#include "curekit/util/errors.hpp"

namespace curekit::search {

struct PrefixUnknown : DataError {
  explicit PrefixUnknown(const std::string& msg) : DataError(msg) {}
};

struct NoCandidates : DataError {
  explicit NoCandidates(const std::string& msg) : DataError(msg) {}
};

// Trie over the word-level unit sequences of in-scope identifiers
// (camel-case parts, `_`, and CaMeL markers are separate units). `next`
// has an entry for every proper prefix, the empty prefix included;
// `complete` holds full identifier paths. An identifier can be both
// complete and extendable (e.g. `sum` vs `sumTotal`). `free_words` are
// alphabetic words (language keywords) that may appear anywhere an
// identifier may end; when a word reads as both, the free reading wins, so
// identifiers that start with a keyword unit are not generatable under
// checking.
struct PrefixMap {
  std::map<std::vector<std::string>, std::set<std::string>> next;
  std::set<std::vector<std::string>> complete;
  std::set<std::string> free_words;

  bool known(const std::vector<std::string>& prefix) const {
    return next.count(prefix) > 0 || complete.count(prefix) > 0 || prefix.empty();
  }
  const std::set<std::string>& next_units(const std::vector<std::string>& prefix) const {
    static const std::set<std::string> kEmpty;
    auto it = next.find(prefix);
    return it == next.end() ? kEmpty : it->second;
  }
  bool is_complete(const std::vector<std::string>& prefix) const {
    return complete.count(prefix) > 0;
  }
};

PrefixMap build_prefix_map(const std::vector<std::string>& identifiers,
                           const std::vector<std::string>& free_words = {});

// Position inside an identifier while decoding: completed units of the
// current identifier run, plus subword pieces of the unit in progress
// (empty unless the previous token carried `@@`). `in_free_word` marks a
// split non-identifier token (e.g. an operator) being assembled.
struct MaskState {
  std::vector<std::string> units;
  std::vector<std::string> word_pieces;
  bool in_free_word = false;

  bool at_boundary() const { return word_pieces.empty() && !in_free_word; }
  bool operator==(const MaskState& o) const = default;
};

// Vocabulary ids that may follow `state` under the identifier discipline:
// inside an identifier only spellings of map continuations are open; at a
// boundary non-identifier tokens are open too, and a fresh identifier may
// start only when no run is pending. <BOS>/<SEP>/<UNK> are never valid.
std::vector<bool> allowed_ids(const MaskState& state, const PrefixMap& pm, const tok::Codec& codec);

// Advances the state by one emitted token id.
MaskState advance_mask(const MaskState& state, int id, const PrefixMap& pm,
                       const tok::Codec& codec);

// Sets every invalid id's log-probability to -infinity given the units of
// the identifier in progress (empty = boundary). Throws PrefixUnknown when
// `prefix` is not a node of the map.
void mask_invalid(std::vector<double>& logp, const PrefixMap& pm,
                  const std::vector<std::string>& prefix, const tok::Codec& codec);

// Length steering. Asymmetric: inside the tolerance band no adjustment;
// a premature end-of-sequence is charged the (negative) log-probability of
// the length gap, an overdue one is credited its magnitude. Formula: the
// raw log-probability is added whenever the gap leaves the band.
enum class PenaltyMode { Asymmetric, Formula };

double length_penalty(size_t l_p, size_t l_b, const corpus::LengthModel& lm, int tolerance,
                      PenaltyMode mode);

struct SearchConfig {
  int beam_size = 50;
  int n_candidates = 200;
  int tolerance = 5;
  bool identifier_check = false;
  bool length_control = false;
  PenaltyMode penalty_mode = PenaltyMode::Asymmetric;
  bool renormalize = false;  // re-normalize the surviving distribution after masking
  int max_extra = 50;        // candidate length cap: buggy length + max_extra
};

// One beam entry. Scores are the arithmetic mean of the per-token
// log-probabilities (steering adjustments included), so long candidates
// are not drowned by sum-of-logs.
struct Hypothesis {
  std::vector<int> tokens;  // starts with y0; terminated ones end with <EOS>
  std::vector<double> logps;
  bool terminated = false;
  MaskState mask;

  double score() const {
    if (logps.empty()) return 0.0;
    double s = 0.0;
    for (double v : logps) s += v;
    return s / static_cast<double>(logps.size());
  }
  // generated tokens excluding the terminator
  size_t content_len() const {
    return tokens.size() - 1 - (terminated ? 1 : 0);
  }
};

// Scorer: partial sequence (starting with y0) to log-probabilities over
// the vocabulary for the next token.
using StepFn = std::function<std::vector<double>(const std::vector<int>&)>;

// Deterministic beam search. Ties break by token id, then by parent beam
// position. Terminated hypotheses accumulate until n_candidates are
// collected or every live hypothesis exceeds the length cap; the result is
// sorted by score (ties by token sequence) and truncated to n_candidates.
// Throws NoCandidates when nothing terminates, UsageError when a needed
// collaborator (prefix map, codec, length model) is missing.
std::vector<Hypothesis> beam_search(const StepFn& step, int y0, size_t buggy_len,
                                    const SearchConfig& cfg, const PrefixMap* pm = nullptr,
                                    const tok::Codec* codec = nullptr,
                                    const corpus::LengthModel* lenm = nullptr);

// Interleaves several ranked candidate lists round-robin (rank 0 of each
// list first), dropping duplicate token sequences (first occurrence wins),
// truncated to `limit`.
std::vector<Hypothesis> ensemble_merge(const std::vector<std::vector<Hypothesis>>& lists,
                                       size_t limit);

// One JSON object per line: {"rank": 1-based, "score": ..., "tokens":
// [token strings]}.
void write_candidates(std::ostream& out, const std::vector<Hypothesis>& candidates,
                      const tok::Codec& codec);

}  // namespace curekit::search
