#include "curekit/repair/repair.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "curekit/lang/extract.hpp"
#include "curekit/lang/lexer.hpp"
#include "curekit/lang/parser.hpp"
#include "curekit/lang/scope.hpp"
#include "curekit/tok/tokenizer.hpp"
#include "curekit/util/threads.hpp"

namespace curekit::repair {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

void sort_donors(std::vector<Donor>& v) {
  std::stable_sort(v.begin(), v.end(), [](const Donor& a, const Donor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.line < b.line;
  });
  std::set<std::string> seen;
  std::vector<Donor> out;
  for (auto& d : v)
    if (seen.insert(d.text).second) out.push_back(std::move(d));
  v = std::move(out);
}

}  // namespace

const char* validation_name(ValidationStatus s) {
  switch (s) {
    case ValidationStatus::Untested: return "untested";
    case ValidationStatus::Uncompilable: return "uncompilable";
    case ValidationStatus::Implausible: return "implausible";
    default: return "plausible";
  }
}

DonorPool harvest_donors(const std::string& source, int buggy_line) {
  DonorPool pool;
  std::vector<std::string> lines = split_lines(source);
  for (size_t i = 0; i < lines.size(); ++i) {
    int lineno = static_cast<int>(i) + 1;
    tok::TokenSeq seq = tok::word_tokenize(lines[i]);
    size_t di = 0;
    for (const auto& t : seq.tokens) {
      if (!tok::is_placeholder(t)) continue;
      if (di >= seq.donors.size()) break;  // defensive; tokenizer keeps them aligned
      Donor d{seq.donors[di++], std::abs(lineno - buggy_line), lineno};
      (t == tok::kNum ? pool.nums : pool.strs).push_back(std::move(d));
    }
  }
  sort_donors(pool.nums);
  sort_donors(pool.strs);
  return pool;
}

std::string canonical_line(const std::string& line) {
  return tok::detokenize(tok::word_tokenize(line));
}

std::vector<std::string> reconstruct(const search::Hypothesis& hyp, const tok::Codec& codec,
                                     const DonorPool& donors, int cap) {
  if (!hyp.terminated) throw UsageError("reconstruct needs a terminated hypothesis");
  if (cap < 1) throw UsageError("reconstruct needs a positive line cap");
  // Drop the conditioning token at the front and the end marker at the back.
  std::vector<int> content(hyp.tokens.begin() + 1, hyp.tokens.end());
  std::vector<std::string> words = codec.to_words(content);

  std::vector<char> kinds;  // 'n' or 's' per placeholder, in order
  for (const auto& w : words) {
    if (w == tok::kNum) kinds.push_back('n');
    else if (w == tok::kStr) kinds.push_back('s');
  }
  if (kinds.empty()) return {tok::detokenize(words, {})};

  size_t n_num = donors.nums.size(), n_str = donors.strs.size();
  for (char k : kinds) {
    if (k == 'n' && n_num == 0)
      throw tok::MissingDonor("candidate uses <NUM> but the file has no numeric literals");
    if (k == 's' && n_str == 0)
      throw tok::MissingDonor("candidate uses <STR> but the file has no string literals");
  }

  size_t total = 1;
  for (char k : kinds) {
    size_t radix = (k == 'n') ? n_num : n_str;
    if (total > static_cast<size_t>(cap) * radix) {  // avoid overflow; cap anyway
      total = static_cast<size_t>(cap);
      break;
    }
    total *= radix;
  }
  total = std::min(total, static_cast<size_t>(cap));

  std::vector<std::string> out;
  for (size_t combo = 0; combo < total; ++combo) {
    std::vector<std::string> texts(kinds.size());
    size_t k = combo;
    for (size_t j = kinds.size(); j-- > 0;) {  // last placeholder varies fastest
      size_t radix = (kinds[j] == 'n') ? n_num : n_str;
      size_t d = k % radix;
      k /= radix;
      texts[j] = (kinds[j] == 'n') ? donors.nums[d].text : donors.strs[d].text;
    }
    out.push_back(tok::detokenize(words, texts));
  }
  return out;
}

ValidationStatus validate(const lang::BugInstance& bug, const std::vector<lang::TestCase>& tests,
                          const std::string& patch_line, int64_t budget) {
  std::vector<std::string> lines = split_lines(bug.source);
  if (bug.buggy_line < 1 || static_cast<size_t>(bug.buggy_line) > lines.size())
    return ValidationStatus::Uncompilable;
  lines[static_cast<size_t>(bug.buggy_line) - 1] = patch_line;
  std::string patched = join_lines(lines);

  lang::Program prog;
  try {
    prog = lang::parse(patched);
    lang::resolve(prog);
  } catch (const DataError&) {
    return ValidationStatus::Uncompilable;
  }

  std::vector<lang::TestOutcome> outcomes = lang::run_tests(prog, tests, budget);
  std::set<int> was_failing(bug.failing.begin(), bug.failing.end());
  bool fixed_one = false;
  for (size_t i = 0; i < outcomes.size(); ++i) {
    bool failing_before = was_failing.count(static_cast<int>(i)) > 0;
    if (failing_before) {
      if (outcomes[i].passed()) fixed_one = true;
    } else if (!outcomes[i].passed()) {
      return ValidationStatus::Implausible;  // broke a passing test
    }
  }
  return fixed_one ? ValidationStatus::Plausible : ValidationStatus::Implausible;
}

RepairResult repair(const lang::BugInstance& bug, const std::vector<lang::TestCase>& tests,
                    std::vector<TrainedModel>& ensemble, const tok::Codec& codec,
                    const corpus::LengthModel* length_model, const RepairOptions& opt) {
  if (ensemble.empty()) throw UsageError("repair needs at least one trained model");
  if (opt.length_control && !length_model)
    throw UsageError("length control needs a length model");

  lang::Program prog = lang::parse(bug.source);

  // Context is the enclosing function; the span is the buggy line within it.
  const lang::MethodSpan* span = nullptr;
  std::vector<lang::MethodSpan> spans = lang::method_spans(prog);
  for (const auto& s : spans)
    if (s.start_line <= bug.buggy_line && bug.buggy_line <= s.end_line) span = &s;
  if (!span) throw lang::LineOutOfRange(bug.buggy_line);

  std::vector<std::string> lines = split_lines(bug.source);
  std::string context;
  for (int ln = span->start_line; ln <= span->end_line; ++ln)
    context += lines[static_cast<size_t>(ln) - 1] + "\n";
  int rel = bug.buggy_line - span->start_line + 1;

  corpus::PatchRecord rec{context, rel, rel, ""};
  corpus::PatchExample ex = corpus::tokenize_record(rec, codec);

  std::set<std::string> ids = lang::scope_identifiers(prog, bug.buggy_line);
  std::vector<std::string> id_list(ids.begin(), ids.end());
  search::PrefixMap pm = search::build_prefix_map(id_list, lang::keywords());

  search::SearchConfig scfg;
  scfg.beam_size = opt.beam_size;
  scfg.n_candidates = opt.n_candidates;
  scfg.tolerance = opt.tolerance;
  scfg.identifier_check = opt.identifier_check;
  scfg.length_control = opt.length_control;
  scfg.penalty_mode = opt.penalty_mode;
  scfg.renormalize = opt.renormalize;
  scfg.max_extra = opt.max_extra;

  int y0 = ex.context_ids[ex.y0_index()];
  std::vector<std::vector<search::Hypothesis>> lists;
  for (auto& tm : ensemble) {
    apr::AprModel<float> model(tm.cfg);
    std::vector<float> memory = model.memory_values(tm.params, ex);
    search::StepFn step = [&](const std::vector<int>& partial) {
      std::vector<float> lp = model.step_logprobs(tm.params, ex, partial, &memory);
      return std::vector<double>(lp.begin(), lp.end());
    };
    lists.push_back(search::beam_search(step, y0, ex.buggy_len(), scfg, &pm, &codec,
                                        length_model));
  }
  std::vector<search::Hypothesis> merged =
      search::ensemble_merge(lists, static_cast<size_t>(opt.n_candidates));

  auto origin_of = [&](const search::Hypothesis& h) -> const std::string& {
    for (size_t m = 0; m < lists.size(); ++m)
      for (const auto& cand : lists[m])
        if (cand.tokens == h.tokens) return ensemble[m].name;
    return ensemble.front().name;  // unreachable: merged items come from the lists
  };

  RepairResult res;
  res.n_hypotheses = merged.size();
  DonorPool donors = harvest_donors(bug.source, bug.buggy_line);
  std::set<std::string> seen;
  for (const auto& hyp : merged) {
    std::vector<std::string> texts;
    try {
      texts = reconstruct(hyp, codec, donors, opt.donor_cap);
    } catch (const DataError&) {
      continue;  // no donors for a placeholder, or an undecodable tail
    }
    for (auto& text : texts) {
      if (!seen.insert(text).second) continue;  // first (best-ranked) spelling wins
      CandidatePatch p;
      p.line = std::move(text);
      p.rank = static_cast<int>(res.patches.size()) + 1;
      p.score = hyp.score();
      p.origin = origin_of(hyp);
      res.patches.push_back(std::move(p));
    }
  }

  size_t cap = std::min(res.patches.size(), static_cast<size_t>(opt.validation_cap));
  if (opt.early_stop) {
    for (size_t i = 0; i < cap; ++i) {
      res.patches[i].validation = validate(bug, tests, res.patches[i].line, opt.test_budget);
      if (res.patches[i].validation == ValidationStatus::Plausible) break;
    }
  } else {
    parallel_for(cap, [&](size_t i) {
      res.patches[i].validation = validate(bug, tests, res.patches[i].line, opt.test_budget);
    });
  }
  return res;
}

double compilable_rate(const std::vector<CandidatePatch>& patches, int k) {
  if (k < 1) throw UsageError("compilable_rate needs k >= 1");
  if (patches.size() < static_cast<size_t>(k))
    throw InsufficientPatches("asked for top-" + std::to_string(k) + " of " +
                              std::to_string(patches.size()) + " patches");
  std::vector<const CandidatePatch*> sorted;
  sorted.reserve(patches.size());
  for (const auto& p : patches) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](const CandidatePatch* a, const CandidatePatch* b) { return a->rank < b->rank; });
  int compiled = 0;
  for (int i = 0; i < k; ++i) {
    if (!sorted[static_cast<size_t>(i)]->tested())
      throw InsufficientPatches("top-" + std::to_string(k) +
                                " includes untested candidates (rank " +
                                std::to_string(sorted[static_cast<size_t>(i)]->rank) + ")");
    if (sorted[static_cast<size_t>(i)]->compiled()) ++compiled;
  }
  return static_cast<double>(compiled) / static_cast<double>(k);
}

double mean_compilable_rate(const std::vector<std::vector<CandidatePatch>>& per_bug, int k) {
  if (k < 1) throw UsageError("mean_compilable_rate needs k >= 1");
  double sum = 0.0;
  int used = 0;
  for (const auto& patches : per_bug) {
    int tested = 0;
    for (const auto& p : patches) {
      if (!p.tested()) break;  // tested prefix only
      ++tested;
    }
    int kk = std::min(k, tested);
    if (kk == 0) continue;
    sum += compilable_rate(patches, kk);
    ++used;
  }
  return used == 0 ? 0.0 : sum / static_cast<double>(used);
}

RankStats correct_rank_stats(const std::vector<std::vector<CandidatePatch>>& per_bug,
                             const std::vector<std::string>& truth_lines) {
  if (per_bug.size() != truth_lines.size())
    throw UsageError("correct_rank_stats needs one ground-truth line per bug");
  RankStats st;
  double sum = 0.0;
  for (size_t b = 0; b < per_bug.size(); ++b) {
    std::string truth = canonical_line(truth_lines[b]);
    int found = 0;
    for (const auto& p : per_bug[b]) {
      if (canonical_line(p.line) == truth) {
        found = p.rank;
        break;
      }
    }
    if (found > 0) {
      sum += found;
      ++st.matched;
    } else {
      ++st.unmatched;
    }
  }
  if (st.matched > 0) st.mean_rank = sum / static_cast<double>(st.matched);
  return st;
}

void write_repair_report(std::ostream& out, const std::string& bug_id,
                         const std::vector<CandidatePatch>& patches,
                         const std::string& truth_line) {
  std::string truth = canonical_line(truth_line);
  for (const auto& p : patches) {
    nlohmann::ordered_json j;
    j["bug_id"] = bug_id;
    j["rank"] = p.rank;
    j["patch"] = p.line;
    j["compile"] = p.compiled();
    j["plausible"] = p.validation == ValidationStatus::Plausible;
    j["correct"] = canonical_line(p.line) == truth;
    j["status"] = validation_name(p.validation);
    out << j.dump() << "\n";
  }
}

ConfigMetrics summarize(const std::string& config,
                        const std::vector<std::vector<CandidatePatch>>& per_bug,
                        const std::vector<std::string>& truth_lines) {
  ConfigMetrics m;
  m.config = config;
  for (const auto& patches : per_bug) {
    bool fixed = false;
    for (const auto& p : patches) {
      if (p.validation == ValidationStatus::Plausible) {
        fixed = true;
        ++m.plausible;
      }
    }
    if (fixed) ++m.bugs_fixed;
  }
  m.compilable_rate_30 = mean_compilable_rate(per_bug, 30);
  m.compilable_rate_100 = mean_compilable_rate(per_bug, 100);
  RankStats st = correct_rank_stats(per_bug, truth_lines);
  m.mean_correct_rank = st.mean_rank;
  m.matched = st.matched;
  m.unmatched = st.unmatched;
  return m;
}

void write_metrics(std::ostream& out, const std::vector<ConfigMetrics>& rows) {
  for (const auto& m : rows) {
    nlohmann::ordered_json j;
    j["config"] = m.config;
    j["bugs_fixed"] = m.bugs_fixed;
    j["plausible"] = m.plausible;
    j["compilable_rate_30"] = m.compilable_rate_30;
    j["compilable_rate_100"] = m.compilable_rate_100;
    j["mean_correct_rank"] = m.mean_correct_rank;
    j["matched"] = m.matched;
    j["unmatched"] = m.unmatched;
    out << j.dump() << "\n";
  }
}

std::vector<ConfigMetrics> parse_metrics(const std::string& jsonl) {
  std::vector<ConfigMetrics> rows;
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("bad metrics record: ") + e.what());
    }
    ConfigMetrics m;
    m.config = j.at("config").get<std::string>();
    m.bugs_fixed = j.at("bugs_fixed").get<int>();
    m.plausible = j.at("plausible").get<int>();
    m.compilable_rate_30 = j.at("compilable_rate_30").get<double>();
    m.compilable_rate_100 = j.at("compilable_rate_100").get<double>();
    m.mean_correct_rank = j.at("mean_correct_rank").get<double>();
    m.matched = j.at("matched").get<int>();
    m.unmatched = j.at("unmatched").get<int>();
    rows.push_back(std::move(m));
  }
  return rows;
}

}  // namespace curekit::repair
