#include "curekit/tok/bpe.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace curekit::tok {

namespace {

void push_specials_and_markers(Vocab& v) {
  v.push(kBosTok);  // id 0
  v.push(kEosTok);  // id 1
  v.push(kSepTok);  // id 2
  v.push(kUnkTok);  // id 3
  v.push(kCamel);
  v.push(kNum);
  v.push(kStr);
}

void apply_merge(std::vector<std::string>& pieces, const std::string& l, const std::string& r,
                 const std::string& prod) {
  std::vector<std::string> out;
  out.reserve(pieces.size());
  size_t i = 0;
  while (i < pieces.size()) {
    if (i + 1 < pieces.size() && pieces[i] == l && pieces[i + 1] == r) {
      out.push_back(prod);
      i += 2;
    } else {
      out.push_back(pieces[i]);
      ++i;
    }
  }
  pieces = std::move(out);
}

}  // namespace

BpeModel train_bpe(const std::vector<TokenSeq>& corpus, int target_vocab) {
  // Distinct-word frequencies; markers are atomic and never decompose.
  std::map<std::string, int64_t> word_freq;  // ordered: determinism
  for (const auto& seq : corpus)
    for (const auto& t : seq.tokens)
      if (!is_marker(t)) ++word_freq[t];
  if (word_freq.empty()) throw EmptyCorpus("train_bpe: corpus has no tokens");

  BpeModel m;
  for (const auto& [w, f] : word_freq)
    for (char c : w) m.alphabet.insert(std::string(1, c));

  struct Word {
    std::vector<std::string> pieces;
    int64_t freq;
  };
  std::vector<Word> words;
  words.reserve(word_freq.size());
  for (const auto& [w, f] : word_freq) {
    Word wd;
    wd.freq = f;
    for (char c : w) wd.pieces.push_back(std::string(1, c));
    words.push_back(std::move(wd));
  }

  // Vocabulary accounting: specials + markers + both forms of every symbol.
  int vocab_size = 7 + 2 * static_cast<int>(m.alphabet.size());
  if (target_vocab <= vocab_size)
    throw DataError("train_bpe: target vocab " + std::to_string(target_vocab) +
                    " does not exceed base size " + std::to_string(vocab_size));

  std::set<std::string> products;
  while (vocab_size + 2 <= target_vocab) {
    // Count adjacent pairs; std::map iterates lexicographically, so the
    // first entry reaching the max frequency is the tie-break winner.
    std::map<std::pair<std::string, std::string>, int64_t> pair_freq;
    for (const auto& wd : words)
      for (size_t i = 0; i + 1 < wd.pieces.size(); ++i)
        pair_freq[{wd.pieces[i], wd.pieces[i + 1]}] += wd.freq;
    int64_t best_f = 0;
    const std::pair<std::string, std::string>* best = nullptr;
    for (const auto& [p, f] : pair_freq) {
      if (f > best_f) {
        best_f = f;
        best = &p;
      }
    }
    if (!best || best_f < 2) break;
    const auto [l, r] = *best;
    std::string prod = l + r;
    m.merge_rank[BpeModel::pair_key(l, r)] = static_cast<int>(m.merges.size());
    m.merges.emplace_back(l, r);
    for (auto& wd : words) apply_merge(wd.pieces, l, r, prod);
    // Two different merges can concatenate to the same product string; the
    // vocabulary gains entries only for a fresh product.
    if (!products.count(prod) && !m.alphabet.count(prod)) {
      products.insert(prod);
      vocab_size += 2;
    }
  }

  push_specials_and_markers(m.vocab);
  for (const auto& s : m.alphabet) {
    m.vocab.push(s);
    m.vocab.push(s + "@@");
  }
  for (const auto& [l, r] : m.merges) {
    std::string prod = l + r;
    if (m.vocab.id_of(prod) < 0) {
      m.vocab.push(prod);
      m.vocab.push(prod + "@@");
    }
  }
  return m;
}

TokenSeq bpe_encode(const TokenSeq& seq, const BpeModel& model) {
  TokenSeq out;
  out.donors = seq.donors;
  for (const auto& word : seq.tokens) {
    if (is_marker(word) || word == kBosTok || word == kEosTok || word == kSepTok) {
      out.tokens.push_back(word);
      continue;
    }
    std::vector<std::string> pieces;
    pieces.reserve(word.size());
    for (char c : word) {
      std::string s(1, c);
      if (!model.alphabet.count(s))
        throw AlphabetError("bpe_encode: character '" + s + "' in '" + word + "' outside the base alphabet");
      pieces.push_back(std::move(s));
    }
    // Repeatedly apply the present pair with the lowest merge rank.
    for (;;) {
      int best_rank = -1;
      for (size_t i = 0; i + 1 < pieces.size(); ++i) {
        int rk = model.rank_of(pieces[i], pieces[i + 1]);
        if (rk >= 0 && (best_rank < 0 || rk < best_rank)) best_rank = rk;
      }
      if (best_rank < 0) break;
      const auto& [l, r] = model.merges[static_cast<size_t>(best_rank)];
      apply_merge(pieces, l, r, l + r);
    }
    for (size_t i = 0; i < pieces.size(); ++i)
      out.tokens.push_back(i + 1 < pieces.size() ? pieces[i] + "@@" : pieces[i]);
  }
  return out;
}

TokenSeq bpe_decode(const TokenSeq& seq) {
  TokenSeq out;
  out.donors = seq.donors;
  std::string pending;
  for (const auto& t : seq.tokens) {
    if (t.size() >= 2 && t.compare(t.size() - 2, 2, "@@") == 0) {
      pending += t.substr(0, t.size() - 2);
    } else {
      out.tokens.push_back(pending + t);
      pending.clear();
    }
  }
  if (!pending.empty()) throw DanglingContinuation("bpe_decode: final token carries the continuation marker");
  return out;
}

Vocab build_word_vocab(const std::vector<TokenSeq>& corpus, int target_vocab) {
  std::map<std::string, int64_t> freq;
  for (const auto& seq : corpus)
    for (const auto& t : seq.tokens) ++freq[t];
  if (freq.empty()) throw EmptyCorpus("build_word_vocab: corpus has no tokens");
  std::vector<std::pair<std::string, int64_t>> order(freq.begin(), freq.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  push_specials_and_markers(v);
  for (const auto& [t, f] : order) {
    if (v.size() >= target_vocab) break;
    if (v.id_of(t) < 0) v.push(t);
  }
  return v;
}

void save_vocab(const std::string& path, const Vocab& v) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write vocab file: " + path);
  for (int i = 0; i < v.size(); ++i) os << v.tokens[static_cast<size_t>(i)] << '\t' << i << '\n';
  if (!os) throw DataError("failed writing vocab file: " + path);
}

Vocab load_vocab(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open vocab file: " + path);
  Vocab v;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected token<TAB>id");
    std::string tok = line.substr(0, tab);
    int id = std::stoi(line.substr(tab + 1));
    if (id != v.size())
      throw DataError(path + ":" + std::to_string(lineno) + ": ids must be dense from 0, got " +
                      std::to_string(id));
    v.push(tok);
  }
  if (v.size() < 4 || v.tokens[0] != kBosTok || v.tokens[1] != kEosTok || v.tokens[2] != kSepTok ||
      v.tokens[3] != kUnkTok)
    throw DataError(path + ": first four entries must be the special tokens");
  return v;
}

void save_merges(const std::string& path, const BpeModel& m) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write merges file: " + path);
  for (const auto& [l, r] : m.merges) os << l << ' ' << r << '\n';
  if (!os) throw DataError("failed writing merges file: " + path);
}

BpeModel load_bpe(const std::string& vocab_path, const std::string& merges_path) {
  BpeModel m;
  m.vocab = load_vocab(vocab_path);
  for (const auto& t : m.vocab.tokens)
    if (t.size() == 1) m.alphabet.insert(t);
  std::ifstream is(merges_path);
  if (!is) throw DataError("cannot open merges file: " + merges_path);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    size_t sp = line.find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size())
      throw DataError(merges_path + ":" + std::to_string(lineno) + ": expected `left right`");
    std::string l = line.substr(0, sp), r = line.substr(sp + 1);
    m.merge_rank[BpeModel::pair_key(l, r)] = static_cast<int>(m.merges.size());
    m.merges.emplace_back(l, r);
  }
  return m;
}

std::vector<int> Codec::encode(const TokenSeq& words) const {
  std::vector<int> ids;
  if (bpe_) {
    TokenSeq sub = bpe_encode(words, *bpe_);
    ids.reserve(sub.tokens.size());
    for (const auto& t : sub.tokens) {
      int id = vocab_->id_of(t);
      if (id < 0) throw InternalError("subword '" + t + "' missing from vocabulary");
      ids.push_back(id);
    }
  } else {
    ids.reserve(words.tokens.size());
    for (const auto& t : words.tokens) {
      int id = vocab_->id_of(t);
      ids.push_back(id < 0 ? kUnkId : id);
    }
  }
  return ids;
}

std::vector<std::string> Codec::tokens_of(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(vocab_->token(id));
  return out;
}

std::vector<std::string> Codec::to_words(const std::vector<int>& ids) const {
  TokenSeq sub;
  for (int id : ids) {
    if (id == kBosId || id == kEosId || id == kSepId) continue;
    sub.tokens.push_back(vocab_->token(id));
  }
  if (!bpe_) return sub.tokens;
  return bpe_decode(sub).tokens;
}

}  // namespace curekit::tok
