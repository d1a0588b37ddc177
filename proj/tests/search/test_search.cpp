#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "curekit/lang/lexer.hpp"
#include "curekit/search/search.hpp"

using namespace curekit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Hand vocabulary following the global layout: specials 0..3, then the
// three markers, then content words.
tok::Vocab make_vocab(const std::vector<std::string>& words) {
  tok::Vocab v;
  for (const auto& s : {tok::kBosTok, tok::kEosTok, tok::kSepTok, tok::kUnkTok, tok::kCamel,
                        tok::kNum, tok::kStr})
    v.push(s);
  for (const auto& w : words) v.push(w);
  return v;
}

// Deterministic pseudo-random scorer: the distribution depends only on the
// partial sequence and the seed.
search::StepFn make_scorer(uint64_t seed, int vocab_size) {
  return [seed, vocab_size](const std::vector<int>& partial) {
    uint64_t h = seed * 0x9E3779B97F4A7C15ull + 0x2545F4914F6CDD1Dull;
    for (int t : partial) h = (h ^ static_cast<uint64_t>(t + 1)) * 0x100000001B3ull;
    std::mt19937_64 gen(h);
    std::vector<double> lp(static_cast<size_t>(vocab_size));
    double mx = -kInf;
    for (auto& x : lp) {
      x = static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0) * 6.0 - 3.0;
      mx = std::max(mx, x);
    }
    double z = 0.0;
    for (double x : lp) z += std::exp(x - mx);
    double logz = mx + std::log(z);
    for (auto& x : lp) x -= logz;
    return lp;
  };
}

std::set<std::string> to_set(const std::set<std::string>& s) { return s; }

// All terminated sequences up to the content cap, scored like the beam
// scores them, best first.
struct Leaf {
  std::vector<int> tokens;
  double score;
};

void enumerate(const search::StepFn& step, std::vector<int>& partial, std::vector<double>& logps,
               size_t cap, int vocab_size, std::vector<Leaf>& out) {
  std::vector<double> lp = step(partial);
  {
    std::vector<int> t = partial;
    t.push_back(tok::kEosId);
    std::vector<double> l = logps;
    l.push_back(lp[tok::kEosId]);
    double s = 0.0;
    for (double v : l) s += v;
    out.push_back({t, s / static_cast<double>(l.size())});
  }
  if (partial.size() - 1 >= cap) return;
  for (int id = 0; id < vocab_size; ++id) {
    if (id == tok::kEosId) continue;
    partial.push_back(id);
    logps.push_back(lp[static_cast<size_t>(id)]);
    enumerate(step, partial, logps, cap, vocab_size, out);
    partial.pop_back();
    logps.pop_back();
  }
}

}  // namespace

TEST_CASE("search: prefix map over snake and camel identifiers") {
  auto pm = search::build_prefix_map({"max_ending_here"});
  CHECK(to_set(pm.next_units({})) == std::set<std::string>{"max"});
  CHECK(to_set(pm.next_units({"max"})) == std::set<std::string>{"_"});
  CHECK(to_set(pm.next_units({"max", "_"})) == std::set<std::string>{"ending"});
  CHECK(to_set(pm.next_units({"max", "_", "ending", "_"})) == std::set<std::string>{"here"});
  CHECK(pm.is_complete({"max", "_", "ending", "_", "here"}));
  CHECK(!pm.is_complete({"max"}));
  CHECK(pm.next_units({"max", "_", "ending", "_", "here"}).empty());

  auto pm2 = search::build_prefix_map({"sum", "sumTotal"});
  CHECK(pm2.is_complete({"sum"}));
  CHECK(to_set(pm2.next_units({"sum"})) == std::set<std::string>{"CaMeL"});
  CHECK(to_set(pm2.next_units({"sum", "CaMeL"})) == std::set<std::string>{"Total"});
  CHECK(pm2.is_complete({"sum", "CaMeL", "Total"}));
  CHECK(!pm2.known({"Total"}));
}

TEST_CASE("search: masking at boundaries, mid-identifier, and after completion") {
  tok::Vocab v = make_vocab({"sum", "Total", "max", "zzz", "+", ";", "return", "0"});
  tok::Codec codec(v);
  auto pm = search::build_prefix_map({"sum", "sumTotal", "max"}, lang::keywords());
  auto finite = [&](const std::vector<std::string>& prefix) {
    std::vector<double> lp(static_cast<size_t>(v.size()), -1.0);
    search::mask_invalid(lp, pm, prefix, codec);
    std::set<std::string> out;
    for (int i = 0; i < v.size(); ++i)
      if (lp[static_cast<size_t>(i)] != -kInf) out.insert(v.token(i));
    return out;
  };

  // Empty prefix: non-identifier tokens and identifier first units.
  auto open0 = finite({});
  CHECK(open0.count("sum"));
  CHECK(open0.count("max"));
  CHECK(open0.count("return"));  // keyword
  CHECK(open0.count("+"));
  CHECK(open0.count(";"));
  CHECK(open0.count("0"));
  CHECK(open0.count(tok::kEosTok));
  CHECK(open0.count(tok::kNum));
  CHECK(open0.count(tok::kStr));
  CHECK(!open0.count("zzz"));        // identifier, but not in scope
  CHECK(!open0.count("Total"));      // never a first unit
  CHECK(!open0.count(tok::kCamel));  // only via the map
  CHECK(!open0.count(tok::kBosTok));
  CHECK(!open0.count(tok::kSepTok));
  CHECK(!open0.count(tok::kUnkTok));

  // Complete and extendable: continuations plus non-identifier tokens.
  auto at_sum = finite({"sum"});
  CHECK(at_sum.count(tok::kCamel));
  CHECK(at_sum.count("+"));
  CHECK(at_sum.count("return"));
  CHECK(at_sum.count(tok::kEosTok));
  CHECK(!at_sum.count("sum"));  // identifiers may not abut
  CHECK(!at_sum.count("max"));
  CHECK(!at_sum.count("Total"));

  // Mid-identifier: continuations only.
  auto mid = finite({"sum", "CaMeL"});
  CHECK(mid == std::set<std::string>{"Total"});

  CHECK_THROWS_AS(
      {
        std::vector<double> lp(static_cast<size_t>(v.size()), -1.0);
        search::mask_invalid(lp, pm, {"Total"}, codec);
      },
      search::PrefixUnknown);
}

TEST_CASE("search: subword continuations bridge split identifiers") {
  // Train a subword model small enough that `charno` and `return` split
  // into several pieces.
  std::vector<tok::TokenSeq> corpus;
  for (int i = 0; i < 4; ++i) {
    corpus.push_back(tok::word_tokenize("charno = charno + line ;"));
    corpus.push_back(tok::word_tokenize("return line ;"));
    corpus.push_back(tok::word_tokenize("abcdefghijklmnopqrstuvwxyz"));
  }
  tok::BpeModel bpe = tok::train_bpe(corpus, 68);  // base alphabet is 65, so 3 merges
  tok::Codec codec(bpe);
  auto pm = search::build_prefix_map({"charno", "line"}, lang::keywords());

  tok::TokenSeq one;
  one.tokens.push_back("charno");
  std::vector<int> spell = codec.encode(one);
  REQUIRE(spell.size() >= 2);  // genuinely split at this vocabulary size

  search::MaskState st;
  for (size_t k = 0; k < spell.size(); ++k) {
    auto ok = search::allowed_ids(st, pm, codec);
    CHECK(ok[static_cast<size_t>(spell[k])]);
    if (k > 0) {
      // Mid-word, only the exact continuation pieces stay open.
      CHECK(!ok[static_cast<size_t>(tok::kEosId)]);
      int plus = codec.vocab().id_of("+");
      if (plus >= 0) CHECK(!ok[static_cast<size_t>(plus)]);
    }
    st = search::advance_mask(st, spell[k], pm, codec);
  }
  CHECK(st.units == std::vector<std::string>{"charno"});
  CHECK(search::allowed_ids(st, pm, codec)[static_cast<size_t>(tok::kEosId)]);

  // Keywords assemble through the same bridge.
  tok::TokenSeq ret;
  ret.tokens.push_back("return");
  std::vector<int> rspell = codec.encode(ret);
  search::MaskState st2;
  for (int id : rspell) {
    auto ok = search::allowed_ids(st2, pm, codec);
    CHECK(ok[static_cast<size_t>(id)]);
    st2 = search::advance_mask(st2, id, pm, codec);
  }
  // A completed keyword leaves no identifier run pending.
  CHECK(st2.units.empty());
  CHECK(st2.at_boundary());
}

TEST_CASE("search: length steering matches the gap distribution") {
  corpus::LengthModel lm;
  lm.table[0] = std::log(0.5);
  lm.table[3] = std::log(0.25);
  lm.table[-2] = std::log(0.25);
  lm.floor_logp = std::log(0.125);

  using search::PenaltyMode;
  // Inside the band: nothing.
  CHECK(search::length_penalty(10, 10, lm, 5, PenaltyMode::Asymmetric) == 0.0);
  CHECK(search::length_penalty(5, 10, lm, 5, PenaltyMode::Asymmetric) == 0.0);
  CHECK(search::length_penalty(15, 10, lm, 5, PenaltyMode::Asymmetric) == 0.0);
  // Too short: stopping is discouraged by the (negative) gap log-probability.
  double shortp = search::length_penalty(4, 10, lm, 5, PenaltyMode::Asymmetric);
  CHECK(shortp == std::log(0.125));
  CHECK(shortp < 0.0);
  // Too long: stopping is encouraged by its magnitude.
  double longp = search::length_penalty(17, 10, lm, 5, PenaltyMode::Asymmetric);
  CHECK(longp == -std::log(0.125));
  CHECK(longp > 0.0);
  // Literal formula: the raw value on both sides.
  CHECK(search::length_penalty(4, 10, lm, 5, PenaltyMode::Formula) == std::log(0.125));
  CHECK(search::length_penalty(17, 10, lm, 5, PenaltyMode::Formula) == std::log(0.125));
  // A learned gap keeps its own probability.
  CHECK(search::length_penalty(4, 7, lm, 2, PenaltyMode::Asymmetric) == std::log(0.25));
}

TEST_CASE("search: wide beams reproduce exhaustive enumeration") {
  tok::Vocab v = make_vocab({"a", "b", "c"});
  int vs = v.size();
  int y0 = v.id_of("a");
  search::SearchConfig cfg;
  cfg.beam_size = 20000;
  cfg.n_candidates = 100000;
  cfg.max_extra = 0;  // cap content length at buggy_len

  for (uint64_t seed = 0; seed < 100; ++seed) {
    auto step = make_scorer(seed, vs);
    auto got = search::beam_search(step, y0, 3, cfg);

    std::vector<Leaf> all;
    std::vector<int> partial = {y0};
    std::vector<double> logps;
    enumerate(step, partial, logps, 3, vs, all);
    std::sort(all.begin(), all.end(), [](const Leaf& a, const Leaf& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.tokens < b.tokens;
    });

    REQUIRE(got.size() >= 10);
    REQUIRE(all.size() >= 10);
    for (size_t i = 0; i < 10; ++i) {
      CAPTURE(seed);
      CAPTURE(i);
      CHECK(got[i].tokens == all[i].tokens);
      CHECK(got[i].score() == doctest::Approx(all[i].score).epsilon(1e-12));
    }
  }
}

TEST_CASE("search: deterministic results and tie handling") {
  tok::Vocab v = make_vocab({"a", "b", "c"});
  int vs = v.size();
  auto uniform = [vs](const std::vector<int>&) {
    return std::vector<double>(static_cast<size_t>(vs), -std::log(static_cast<double>(vs)));
  };
  search::SearchConfig cfg;
  cfg.beam_size = 8;
  cfg.n_candidates = 12;
  cfg.max_extra = 2;
  auto r1 = search::beam_search(uniform, v.id_of("a"), 1, cfg);
  auto r2 = search::beam_search(uniform, v.id_of("a"), 1, cfg);
  REQUIRE(r1.size() == r2.size());
  for (size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].tokens == r2[i].tokens);
    CHECK(r1[i].score() == r2[i].score());
    CHECK(r1[i].score() == doctest::Approx(-std::log(static_cast<double>(vs))));
    CHECK(r1[i].terminated);
    CHECK(r1[i].tokens.back() == tok::kEosId);
  }
  // Everything ties, so ranking falls back to the token sequence.
  for (size_t i = 1; i < r1.size(); ++i) CHECK(r1[i - 1].tokens < r1[i].tokens);
}

TEST_CASE("search: no termination raises an error") {
  tok::Vocab v = make_vocab({"a", "b"});
  int vs = v.size();
  auto never_ends = [vs](const std::vector<int>&) {
    std::vector<double> lp(static_cast<size_t>(vs), -1.0);
    lp[tok::kEosId] = -kInf;
    return lp;
  };
  search::SearchConfig cfg;
  cfg.beam_size = 4;
  cfg.n_candidates = 5;
  cfg.max_extra = 3;
  CHECK_THROWS_AS((void)search::beam_search(never_ends, v.id_of("a"), 1, cfg),
                  search::NoCandidates);
}

TEST_CASE("search: flag dependencies are validated") {
  tok::Vocab v = make_vocab({"a"});
  auto step = make_scorer(1, v.size());
  search::SearchConfig cfg;
  cfg.identifier_check = true;
  CHECK_THROWS_AS((void)search::beam_search(step, 7, 1, cfg), UsageError);
  cfg.identifier_check = false;
  cfg.length_control = true;
  CHECK_THROWS_AS((void)search::beam_search(step, 7, 1, cfg), UsageError);
}

TEST_CASE("search: checked candidates only ever name in-scope identifiers") {
  tok::Vocab v = make_vocab({"sum", "Total", "max", "zzz", "junk", "+", ";", "return", "0"});
  tok::Codec codec(v);
  std::vector<std::string> scope = {"sum", "sumTotal", "max"};
  auto pm = search::build_prefix_map(scope, lang::keywords());
  std::set<std::string> valid(scope.begin(), scope.end());

  auto is_ident_unit = [&](const std::string& u) {
    if (u == tok::kCamel || u == "_") return false;
    char c = u[0];
    bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    if (!alpha) return false;
    for (const auto& k : lang::keywords())
      if (u == k) return false;
    return true;
  };
  // Extracts identifier names the way detokenization glues units: camel
  // parts join across CaMeL, snake parts join across `_`.
  auto extract_idents = [&](const std::vector<int>& ids) {
    std::vector<std::string> units = codec.to_words(ids);
    std::vector<std::string> names;
    for (size_t i = 0; i < units.size(); ++i) {
      if (!is_ident_unit(units[i])) continue;
      std::string name = units[i];
      while (i + 2 < units.size() && (units[i + 1] == tok::kCamel || units[i + 1] == "_") &&
             is_ident_unit(units[i + 2])) {
        name += (units[i + 1] == "_" ? "_" : "") + units[i + 2];
        i += 2;
      }
      names.push_back(name);
    }
    return names;
  };

  search::SearchConfig checked;
  checked.beam_size = 16;
  checked.n_candidates = 30;
  checked.max_extra = 4;
  checked.identifier_check = true;
  search::SearchConfig unchecked = checked;
  unchecked.identifier_check = false;

  int violations_checked = 0, violations_unchecked = 0;
  for (uint64_t seed = 0; seed < 12; ++seed) {
    auto step = make_scorer(seed, v.size());
    auto with = search::beam_search(step, v.id_of("max"), 2, checked, &pm, &codec);
    for (const auto& h : with)
      for (const auto& name : extract_idents(h.tokens))
        if (!valid.count(name)) ++violations_checked;
    auto without = search::beam_search(step, v.id_of("max"), 2, unchecked);
    for (const auto& h : without)
      for (const auto& name : extract_idents(h.tokens))
        if (!valid.count(name)) ++violations_unchecked;
  }
  CHECK(violations_checked == 0);
  CHECK(violations_unchecked > 0);
}

TEST_CASE("search: forced steps renormalize to certainty when asked") {
  tok::Vocab v = make_vocab({"sum", "Total", "+", ";"});
  tok::Codec codec(v);
  auto pm = search::build_prefix_map({"sum", "sumTotal"}, lang::keywords());
  auto step = make_scorer(3, v.size());
  search::SearchConfig cfg;
  cfg.beam_size = 64;
  cfg.n_candidates = 64;
  cfg.max_extra = 4;
  cfg.identifier_check = true;
  cfg.renormalize = true;
  auto got = search::beam_search(step, v.id_of("sum"), 2, cfg, &pm, &codec);
  int camel = v.id_of(tok::kCamel), total = v.id_of("Total");
  bool saw = false;
  for (const auto& h : got) {
    for (size_t i = 0; i + 1 < h.tokens.size(); ++i) {
      if (h.tokens[i] == camel && h.tokens[i + 1] == total) {
        // After CaMeL only `Total` is open, so its renormalized
        // log-probability is exactly zero.
        CHECK(h.logps[i] == 0.0);
        saw = true;
      }
    }
  }
  CHECK(saw);
}

TEST_CASE("search: ensembles interleave ranked lists without duplicates") {
  auto mk = [](std::vector<int> toks, double lp) {
    search::Hypothesis h;
    h.tokens = std::move(toks);
    h.logps.assign(h.tokens.size() - 1, lp);
    h.terminated = true;
    return h;
  };
  std::vector<search::Hypothesis> a = {mk({7, 1}, -0.1), mk({7, 4, 1}, -0.2)};
  std::vector<search::Hypothesis> b = {mk({7, 1}, -0.3), mk({7, 5, 1}, -0.4),
                                       mk({7, 6, 1}, -0.5)};
  auto merged = search::ensemble_merge({a, b}, 10);
  REQUIRE(merged.size() == 4);
  CHECK(merged[0].tokens == std::vector<int>{7, 1});
  CHECK(merged[0].logps[0] == -0.1);  // first occurrence wins
  CHECK(merged[1].tokens == std::vector<int>{7, 4, 1});
  CHECK(merged[2].tokens == std::vector<int>{7, 5, 1});
  CHECK(merged[3].tokens == std::vector<int>{7, 6, 1});
  CHECK(search::ensemble_merge({a, b}, 2).size() == 2);
}

TEST_CASE("search: candidate dumps are one JSON object per line") {
  tok::Vocab v = make_vocab({"a", "b"});
  tok::Codec codec(v);
  search::Hypothesis h1, h2;
  h1.tokens = {v.id_of("a"), v.id_of("b"), tok::kEosId};
  h1.logps = {-0.5, -0.25};
  h1.terminated = true;
  h2.tokens = {v.id_of("a"), tok::kEosId};
  h2.logps = {-2.0};
  h2.terminated = true;
  std::ostringstream out;
  search::write_candidates(out, {h1, h2}, codec);
  std::istringstream in(out.str());
  std::string line;
  int rank = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    ++rank;
    CHECK(j["rank"] == rank);
    REQUIRE(j["tokens"].is_array());
  }
  CHECK(rank == 2);
  auto first = nlohmann::json::parse(out.str().substr(0, out.str().find('\n')));
  CHECK(first["score"] == doctest::Approx(-0.375));
  CHECK(first["tokens"][0] == "a");
  CHECK(first["tokens"][2] == tok::kEosTok);
}
