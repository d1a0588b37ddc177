#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "curekit/tok/tokenizer.hpp"
#include "curekit/util/errors.hpp"

namespace curekit::tok {

// Special ids, fixed across every model and file in the toolkit.
constexpr int kBosId = 0;
constexpr int kEosId = 1;
constexpr int kSepId = 2;
constexpr int kUnkId = 3;

inline const std::string kBosTok = "<BOS>";
inline const std::string kEosTok = "<EOS>";
inline const std::string kSepTok = "<SEP>";
inline const std::string kUnkTok = "<UNK>";

struct EmptyCorpus : DataError {
  explicit EmptyCorpus(const std::string& msg) : DataError(msg) {}
};
struct AlphabetError : DataError {
  explicit AlphabetError(const std::string& msg) : DataError(msg) {}
};
struct DanglingContinuation : DataError {
  explicit DanglingContinuation(const std::string& msg) : DataError(msg) {}
};

// Dense token<->id table. Entry 0..3 are always the specials above.
struct Vocab {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> ids;

  int id_of(const std::string& t) const {
    auto it = ids.find(t);
    return it == ids.end() ? -1 : it->second;
  }
  const std::string& token(int id) const { return tokens.at(static_cast<size_t>(id)); }
  int size() const { return static_cast<int>(tokens.size()); }
  void push(const std::string& t) {
    ids.emplace(t, static_cast<int>(tokens.size()));
    tokens.push_back(t);
  }
};

// Subword model: ordered merge list over a single-character base alphabet.
// Markers (CaMeL, <NUM>, <STR>) are atomic symbols and never decompose.
// The vocabulary carries each symbol in both word-final form `s` and
// continuation form `s@@`, so any identifier over the alphabet encodes
// without an unknown token.
struct BpeModel {
  std::vector<std::pair<std::string, std::string>> merges;
  std::set<std::string> alphabet;  // single-character symbols
  Vocab vocab;

  // rank of pair (l,r); lower merges first at encode time
  std::unordered_map<std::string, int> merge_rank;

  static std::string pair_key(const std::string& l, const std::string& r) { return l + "\x1f" + r; }
  int rank_of(const std::string& l, const std::string& r) const {
    auto it = merge_rank.find(pair_key(l, r));
    return it == merge_rank.end() ? -1 : it->second;
  }
};

// Greedy pair-merge training: repeatedly merge the most frequent adjacent
// symbol pair (ties broken lexicographically on the pair) until the
// vocabulary would exceed target_vocab or no pair occurs at least twice.
BpeModel train_bpe(const std::vector<TokenSeq>& corpus, int target_vocab);

// Segments each word into in-vocab subwords; non-final subwords carry the
// `@@` suffix. Markers pass through unchanged; donors pass through.
// Throws AlphabetError on a character outside the base alphabet.
TokenSeq bpe_encode(const TokenSeq& seq, const BpeModel& model);

// Joins `@@`-continuations with their successors. Throws
// DanglingContinuation when the final token still carries `@@`.
TokenSeq bpe_decode(const TokenSeq& seq);

// Most-frequent-words vocabulary for the word-level (no BPE) configuration;
// out-of-vocabulary tokens map to <UNK> at encode time.
Vocab build_word_vocab(const std::vector<TokenSeq>& corpus, int target_vocab);

// File formats: vocab is `token<TAB>id` per line with dense ids; merges is
// `left right` per line in merge order.
void save_vocab(const std::string& path, const Vocab& v);
Vocab load_vocab(const std::string& path);
void save_merges(const std::string& path, const BpeModel& m);
// Rebuilds a usable model from the two files.
BpeModel load_bpe(const std::string& vocab_path, const std::string& merges_path);

// Token<->id codec over either a subword model or a word-level vocabulary.
class Codec {
 public:
  explicit Codec(const BpeModel& m) : bpe_(&m), vocab_(&m.vocab) {}
  explicit Codec(const Vocab& word_vocab) : vocab_(&word_vocab) {}

  bool subword_mode() const { return bpe_ != nullptr; }
  const Vocab& vocab() const { return *vocab_; }

  // Word-level tokens in, ids out. Subword mode first applies bpe_encode
  // (never <UNK> over the alphabet); word-level mode maps OOV to <UNK>.
  std::vector<int> encode(const TokenSeq& words) const;

  // ids -> token strings (no joining)
  std::vector<std::string> tokens_of(const std::vector<int>& ids) const;

  // ids -> word-level tokens: strips specials, rejoins `@@` continuations
  // in subword mode (DanglingContinuation propagates).
  std::vector<std::string> to_words(const std::vector<int>& ids) const;

 private:
  const BpeModel* bpe_ = nullptr;
  const Vocab* vocab_;
};

}  // namespace curekit::tok
