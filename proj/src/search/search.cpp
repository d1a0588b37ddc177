#include "curekit/search/search.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace curekit::search {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool starts_identifier(const std::string& s) {
  char c = s.empty() ? '\0' : s[0];
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_continuation(const std::string& s) {
  return s.size() > 2 && s.compare(s.size() - 2, 2, "@@") == 0;
}

std::string piece_core(const std::string& s) {
  return is_continuation(s) ? s.substr(0, s.size() - 2) : s;
}

// Subword spelling of one word-level unit: piece strings as they appear in
// the vocabulary (`@@` on non-final pieces). Word-level codecs spell every
// unit as itself.
std::vector<std::string> spell_unit(const std::string& unit, const tok::Codec& codec) {
  if (!codec.subword_mode()) return {unit};
  tok::TokenSeq seq;
  seq.tokens.push_back(unit);
  return codec.tokens_of(codec.encode(seq));
}

}  // namespace

PrefixMap build_prefix_map(const std::vector<std::string>& identifiers,
                           const std::vector<std::string>& free_words) {
  PrefixMap pm;
  pm.next[{}];  // the empty prefix is always a node
  for (const auto& ident : identifiers) {
    std::vector<std::string> units = tok::word_tokenize(ident).tokens;
    if (units.empty()) continue;
    std::vector<std::string> prefix;
    for (const auto& u : units) {
      pm.next[prefix].insert(u);
      prefix.push_back(u);
      pm.next[prefix];  // ensure every reachable prefix is a node
    }
    pm.complete.insert(units);
  }
  pm.free_words.insert(free_words.begin(), free_words.end());
  return pm;
}

std::vector<bool> allowed_ids(const MaskState& state, const PrefixMap& pm,
                              const tok::Codec& codec) {
  const tok::Vocab& v = codec.vocab();
  std::vector<bool> ok(static_cast<size_t>(v.size()), false);
  auto allow_piece = [&](const std::string& piece) {
    int id = v.id_of(piece);
    if (id >= 0) ok[static_cast<size_t>(id)] = true;
  };
  auto match_spelling = [&](const std::string& word) {
    // Open the next piece of `word` when the assembly so far matches.
    std::vector<std::string> spell = spell_unit(word, codec);
    if (spell.size() <= state.word_pieces.size()) return;
    for (size_t i = 0; i < state.word_pieces.size(); ++i)
      if (piece_core(spell[i]) != state.word_pieces[i]) return;
    allow_piece(spell[state.word_pieces.size()]);
  };

  if (state.in_free_word) {
    // A split non-identifier token is being assembled; any piece of the
    // same character class may continue it, so the joined word can never
    // re-lex into an identifier.
    for (int id = 0; id < v.size(); ++id) {
      const std::string& s = v.token(id);
      if (id == tok::kBosId || id == tok::kEosId || id == tok::kSepId || id == tok::kUnkId)
        continue;
      std::string core = piece_core(s);
      if (core.empty() || starts_identifier(core) || tok::is_marker(core)) continue;
      ok[static_cast<size_t>(id)] = true;
    }
    return ok;
  }

  // A free word (keyword) may start or continue only where an identifier
  // run may end.
  bool open_run = !state.units.empty();
  bool free_ok = !open_run || pm.is_complete(state.units);

  if (!state.word_pieces.empty()) {
    // Mid-word: exact spelling continuations of allowed identifier units,
    // plus keyword spellings when a keyword could stand here.
    for (const auto& unit : pm.next_units(state.units)) match_spelling(unit);
    if (free_ok)
      for (const auto& w : pm.free_words) match_spelling(w);
    return ok;
  }

  // Boundary between words. Identifier continuations from the map are
  // always open.
  for (const auto& unit : pm.next_units(state.units)) match_spelling(unit);

  if (free_ok) {
    // Non-identifier tokens may follow. A fresh identifier may not abut a
    // completed one: its first units are only offered via the empty-run
    // branch above.
    for (const auto& w : pm.free_words) match_spelling(w);
    for (int id = 0; id < v.size(); ++id) {
      if (id == tok::kBosId || id == tok::kSepId || id == tok::kUnkId) continue;
      const std::string& s = v.token(id);
      if (id == tok::kEosId) {
        ok[static_cast<size_t>(id)] = true;
        continue;
      }
      std::string core = piece_core(s);
      if (core.empty() || starts_identifier(core) || core == tok::kCamel) continue;
      ok[static_cast<size_t>(id)] = true;  // operators, digits, placeholders
    }
  }
  return ok;
}

MaskState advance_mask(const MaskState& state, int id, const PrefixMap& pm,
                       const tok::Codec& codec) {
  MaskState s = state;
  const std::string& tokstr = codec.vocab().token(id);
  bool cont = is_continuation(tokstr);
  std::string core = piece_core(tokstr);

  if (s.in_free_word) {
    if (!cont) s.in_free_word = false;
    return s;
  }
  if (s.word_pieces.empty() && !starts_identifier(core) && core != tok::kCamel) {
    // Operator, digit literal, or placeholder: a non-identifier word that
    // ends any completed identifier run.
    s.units.clear();
    s.in_free_word = cont;
    return s;
  }
  // Alphabetic piece: part of an identifier unit or of a keyword.
  bool free_ok = s.units.empty() || pm.is_complete(s.units);
  s.word_pieces.push_back(core);
  if (!cont) {
    std::string word;
    for (const auto& p : s.word_pieces) word += p;
    s.word_pieces.clear();
    if (free_ok && pm.free_words.count(word)) {
      // Keyword reading wins over starting a new identifier.
      s.units.clear();
    } else {
      s.units.push_back(word);
    }
  }
  return s;
}

void mask_invalid(std::vector<double>& logp, const PrefixMap& pm,
                  const std::vector<std::string>& prefix, const tok::Codec& codec) {
  if (!pm.known(prefix)) {
    std::string flat;
    for (const auto& u : prefix) flat += (flat.empty() ? "" : " ") + u;
    throw PrefixUnknown("identifier prefix [" + flat + "] is not in the prefix map");
  }
  MaskState state;
  state.units = prefix;
  std::vector<bool> ok = allowed_ids(state, pm, codec);
  if (logp.size() != ok.size())
    throw ShapeMismatch("mask_invalid", std::to_string(logp.size()),
                        std::to_string(ok.size()));
  for (size_t i = 0; i < logp.size(); ++i)
    if (!ok[i]) logp[i] = kNegInf;
}

double length_penalty(size_t l_p, size_t l_b, const corpus::LengthModel& lm, int tolerance,
                      PenaltyMode mode) {
  int64_t diff = static_cast<int64_t>(l_b) - static_cast<int64_t>(l_p);
  if (std::llabs(diff) <= tolerance) return 0.0;
  double f = lm.logp(diff);
  if (mode == PenaltyMode::Formula) return f;
  // Asymmetric: too-short candidates are discouraged from stopping,
  // too-long ones are pushed toward it.
  return diff > 0 ? f : -f;
}

std::vector<Hypothesis> beam_search(const StepFn& step, int y0, size_t buggy_len,
                                    const SearchConfig& cfg, const PrefixMap* pm,
                                    const tok::Codec* codec, const corpus::LengthModel* lenm) {
  if (cfg.beam_size < 1 || cfg.n_candidates < 1)
    throw UsageError("beam search needs positive beam_size and n_candidates");
  if (cfg.identifier_check && (!pm || !codec))
    throw UsageError("identifier checking needs a prefix map and a codec");
  if (cfg.length_control && !lenm)
    throw UsageError("length control needs a length model");

  size_t cap = buggy_len + static_cast<size_t>(cfg.max_extra);
  std::vector<Hypothesis> beams(1);
  beams[0].tokens.push_back(y0);
  std::vector<Hypothesis> done;

  struct Expansion {
    double score;
    int token;
    size_t parent;
    double logp;
  };

  while (!beams.empty() && done.size() < static_cast<size_t>(cfg.n_candidates)) {
    std::vector<Expansion> exp;
    for (size_t bi = 0; bi < beams.size(); ++bi) {
      const Hypothesis& h = beams[bi];
      std::vector<double> lp = step(h.tokens);
      if (cfg.identifier_check) {
        std::vector<bool> ok = allowed_ids(h.mask, *pm, *codec);
        if (lp.size() != ok.size())
          throw ShapeMismatch("beam_step", std::to_string(lp.size()),
                              std::to_string(ok.size()));
        for (size_t i = 0; i < lp.size(); ++i)
          if (!ok[i]) lp[i] = kNegInf;
      }
      if (cfg.renormalize) {
        double mx = kNegInf;
        for (double v : lp) mx = std::max(mx, v);
        if (mx > kNegInf) {
          double z = 0.0;
          for (double v : lp)
            if (v > kNegInf) z += std::exp(v - mx);
          double logz = mx + std::log(z);
          for (double& v : lp)
            if (v > kNegInf) v -= logz;
        }
      }
      if (cfg.length_control)
        lp[tok::kEosId] +=
            length_penalty(h.content_len(), buggy_len, *lenm, cfg.tolerance, cfg.penalty_mode);
      bool at_cap = h.content_len() >= cap;
      double base = 0.0;
      for (double v : h.logps) base += v;
      for (size_t id = 0; id < lp.size(); ++id) {
        if (lp[id] == kNegInf || std::isnan(lp[id])) continue;
        if (at_cap && id != static_cast<size_t>(tok::kEosId)) continue;
        double child_score =
            (base + lp[id]) / static_cast<double>(h.logps.size() + 1);
        exp.push_back({child_score, static_cast<int>(id), bi, lp[id]});
      }
    }
    if (exp.empty()) break;
    std::sort(exp.begin(), exp.end(), [](const Expansion& a, const Expansion& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.token != b.token) return a.token < b.token;
      return a.parent < b.parent;
    });
    if (exp.size() > static_cast<size_t>(cfg.beam_size)) exp.resize(static_cast<size_t>(cfg.beam_size));

    std::vector<Hypothesis> next;
    for (const auto& e : exp) {
      Hypothesis child = beams[e.parent];
      child.tokens.push_back(e.token);
      child.logps.push_back(e.logp);
      if (e.token == tok::kEosId) {
        child.terminated = true;
        done.push_back(std::move(child));
      } else {
        if (cfg.identifier_check) child.mask = advance_mask(child.mask, e.token, *pm, *codec);
        next.push_back(std::move(child));
      }
    }
    beams = std::move(next);
  }

  if (done.empty()) throw NoCandidates("beam search produced no terminated candidates");
  std::sort(done.begin(), done.end(), [](const Hypothesis& a, const Hypothesis& b) {
    double sa = a.score(), sb = b.score();
    if (sa != sb) return sa > sb;
    return a.tokens < b.tokens;
  });
  if (done.size() > static_cast<size_t>(cfg.n_candidates))
    done.resize(static_cast<size_t>(cfg.n_candidates));
  return done;
}

std::vector<Hypothesis> ensemble_merge(const std::vector<std::vector<Hypothesis>>& lists,
                                       size_t limit) {
  std::vector<Hypothesis> merged;
  std::set<std::vector<int>> seen;
  size_t depth = 0;
  bool any = true;
  while (any && merged.size() < limit) {
    any = false;
    for (const auto& list : lists) {
      if (depth < list.size()) {
        any = true;
        if (seen.insert(list[depth].tokens).second) {
          merged.push_back(list[depth]);
          if (merged.size() >= limit) return merged;
        }
      }
    }
    ++depth;
  }
  return merged;
}

void write_candidates(std::ostream& out, const std::vector<Hypothesis>& candidates,
                      const tok::Codec& codec) {
  for (size_t i = 0; i < candidates.size(); ++i) {
    nlohmann::json j;
    j["rank"] = i + 1;
    j["score"] = candidates[i].score();
    j["tokens"] = codec.tokens_of(candidates[i].tokens);
    out << j.dump() << "\n";
  }
}

}  // namespace curekit::search
