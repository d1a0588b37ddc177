#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "curekit/apr/apr.hpp"
#include "curekit/corpus/corpus.hpp"
#include "curekit/lang/interp.hpp"
#include "curekit/lang/mutate.hpp"
#include "curekit/search/search.hpp"
#include "curekit/tok/bpe.hpp"
#include "curekit/util/errors.hpp"

namespace curekit::repair {

struct InsufficientPatches : DataError {
  explicit InsufficientPatches(const std::string& msg) : DataError(msg) {}
};

enum class ValidationStatus { Untested, Uncompilable, Implausible, Plausible };
const char* validation_name(ValidationStatus s);

// One concrete patch line with its provenance and test verdict. A patch is
// plausible only when it compiled (parse + scope resolution) and the full
// pass/fail criterion held.
struct CandidatePatch {
  std::string line;    // concrete source line text
  int rank = 0;        // 1-based, unique per bug
  double score = 0.0;  // mean per-token log-probability of the hypothesis
  std::string origin;  // name of the model that proposed it
  ValidationStatus validation = ValidationStatus::Untested;

  bool tested() const { return validation != ValidationStatus::Untested; }
  bool compiled() const {
    return validation == ValidationStatus::Implausible ||
           validation == ValidationStatus::Plausible;
  }
};

// Literals harvested from the buggy file for concretizing <NUM>/<STR>
// placeholders, nearest line first (ties: earlier line). Duplicate texts
// keep only their nearest occurrence.
struct Donor {
  std::string text;
  int distance = 0;
  int line = 0;
};

struct DonorPool {
  std::vector<Donor> nums;
  std::vector<Donor> strs;
};

DonorPool harvest_donors(const std::string& source, int buggy_line);

// Canonical single-line form: word-tokenize then rebuild, so spelling
// differences in whitespace vanish. Used for exact-match judgments.
std::string canonical_line(const std::string& line);

// Turns one terminated hypothesis into at most `cap` concrete source lines.
// Subword pieces are joined, placeholders enumerate donors nearest-first
// (multiple placeholders advance the last position fastest). Throws
// MissingDonor when a placeholder has no donor of its kind, UsageError when
// the hypothesis is not terminated.
std::vector<std::string> reconstruct(const search::Hypothesis& hyp, const tok::Codec& codec,
                                     const DonorPool& donors, int cap);

// Replaces the buggy line with patch_line, compiles (parse + scope
// resolution), and runs the suite. Plausible iff every test that passed on
// the buggy program still passes and at least one test that failed on it
// now passes. All failure modes are statuses, never exceptions.
ValidationStatus validate(const lang::BugInstance& bug, const std::vector<lang::TestCase>& tests,
                          const std::string& patch_line, int64_t budget = 10000);

// A fine-tuned translation model plus everything needed to run it.
struct TrainedModel {
  std::string name;
  apr::AprConfig cfg;
  nn::ParamStore<float> params;
};

struct RepairOptions {
  int beam_size = 50;
  int n_candidates = 200;  // hypotheses kept after the ensemble merge
  int validation_cap = 100;
  int donor_cap = 4;  // concrete lines per hypothesis
  int max_extra = 50;
  int tolerance = 5;
  bool identifier_check = false;
  bool length_control = false;
  bool renormalize = false;
  search::PenaltyMode penalty_mode = search::PenaltyMode::Asymmetric;
  // Stop validating at the first plausible patch. Off by default so that
  // top-k metrics are computable over fully tested prefixes.
  bool early_stop = false;
  int64_t test_budget = 10000;
};

struct RepairResult {
  std::vector<CandidatePatch> patches;  // rank order
  size_t n_hypotheses = 0;              // merged hypotheses before reconstruction
};

// End-to-end repair of one seeded bug: tokenize the enclosing function,
// build the in-scope identifier prefix map, beam-search every model in the
// ensemble, merge, reconstruct lines, and validate the top candidates on a
// bounded worker pool (each worker interprets its own program copy).
// Propagates NoCandidates when no model terminates any hypothesis.
RepairResult repair(const lang::BugInstance& bug, const std::vector<lang::TestCase>& tests,
                    std::vector<TrainedModel>& ensemble, const tok::Codec& codec,
                    const corpus::LengthModel* length_model, const RepairOptions& opt);

// Fraction of the top k patches (by rank) that compiled. The whole prefix
// must carry a verdict; otherwise InsufficientPatches.
double compilable_rate(const std::vector<CandidatePatch>& patches, int k);

// Across-bug mean of compilable_rate, clamping k to each bug's tested
// prefix; bugs with nothing tested are skipped.
double mean_compilable_rate(const std::vector<std::vector<CandidatePatch>>& per_bug, int k);

// Mean 1-based rank of the first candidate whose canonical form equals the
// canonical ground-truth line; bugs without any match are excluded from the
// mean and counted in `unmatched`.
struct RankStats {
  double mean_rank = 0.0;
  int matched = 0;
  int unmatched = 0;
};

RankStats correct_rank_stats(const std::vector<std::vector<CandidatePatch>>& per_bug,
                             const std::vector<std::string>& truth_lines);

// Line-delimited report records {bug_id, rank, patch, compile, plausible,
// correct} for one bug's candidate list.
void write_repair_report(std::ostream& out, const std::string& bug_id,
                         const std::vector<CandidatePatch>& patches,
                         const std::string& truth_line);

// One row of the ablation metrics report.
struct ConfigMetrics {
  std::string config;
  int bugs_fixed = 0;      // bugs with >= 1 plausible patch
  int plausible = 0;       // plausible patches across all bugs
  double compilable_rate_30 = 0.0;
  double compilable_rate_100 = 0.0;
  double mean_correct_rank = 0.0;  // 0 when nothing matched
  int matched = 0;
  int unmatched = 0;
};

ConfigMetrics summarize(const std::string& config,
                        const std::vector<std::vector<CandidatePatch>>& per_bug,
                        const std::vector<std::string>& truth_lines);

void write_metrics(std::ostream& out, const std::vector<ConfigMetrics>& rows);
std::vector<ConfigMetrics> parse_metrics(const std::string& jsonl);

}  // namespace curekit::repair
