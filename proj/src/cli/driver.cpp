#include "curekit/cli/driver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "curekit/apr/apr.hpp"
#include "curekit/bench/bench.hpp"
#include "curekit/corpus/corpus.hpp"
#include "curekit/lang/extract.hpp"
#include "curekit/lang/interp.hpp"
#include "curekit/lang/parser.hpp"
#include "curekit/lang/scope.hpp"
#include "curekit/plm/plm.hpp"
#include "curekit/repair/repair.hpp"
#include "curekit/tok/bpe.hpp"
#include "curekit/util/errors.hpp"

namespace fs = std::filesystem;

namespace curekit::cli {
namespace {

// ---- shared helpers ----

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path.string());
  return out;
}

// Word-level token sequences of every non-blank line of every method; the
// common training input for both tokenizer modes and nothing else.
std::vector<tok::TokenSeq> tokenized_lines(const std::vector<std::string>& methods) {
  std::vector<tok::TokenSeq> out;
  for (const auto& m : methods) {
    std::istringstream in(m);
    std::string line;
    while (std::getline(in, line)) {
      tok::TokenSeq seq = tok::word_tokenize(line);
      if (!seq.tokens.empty()) out.push_back(std::move(seq));
    }
  }
  return out;
}

// Owns the storage a Codec points into; keep alive as long as the codec.
struct CodecBox {
  tok::BpeModel bpe;
  tok::Vocab word_vocab;
  bool subword = false;

  tok::Codec codec() const { return subword ? tok::Codec(bpe) : tok::Codec(word_vocab); }
};

CodecBox load_codec(const std::string& vocab_path, const std::string& merges_path) {
  CodecBox box;
  if (!merges_path.empty()) {
    box.bpe = tok::load_bpe(vocab_path, merges_path);
    box.subword = true;
  } else {
    box.word_vocab = tok::load_vocab(vocab_path);
  }
  return box;
}

repair::TrainedModel load_model(const std::string& path) {
  repair::TrainedModel tm;
  tm.cfg = apr::load_apr(path, tm.params);
  tm.name = fs::path(path).stem().string();
  return tm;
}

// ---- tokenize-train ----

struct TokenizeOpts {
  std::string methods;
  std::string out;
  std::string mode = "bpe";
  int vocab_size = 200;
};

int cmd_tokenize(const TokenizeOpts& o) {
  if (o.mode != "word" && o.mode != "bpe")
    throw UsageError("tokenize-train: --mode must be word or bpe");
  auto methods = bench::load_methods(o.methods);
  auto corpus_lines = tokenized_lines(methods);
  ensure_dir(o.out);
  fs::path dir(o.out);
  if (o.mode == "word") {
    tok::Vocab v = tok::build_word_vocab(corpus_lines, o.vocab_size);
    tok::save_vocab((dir / "word.vocab.tsv").string(), v);
    std::cout << "word vocabulary: " << v.size() << " tokens -> " << (dir / "word.vocab.tsv").string()
              << "\n";
  } else {
    tok::BpeModel m = tok::train_bpe(corpus_lines, o.vocab_size);
    tok::save_vocab((dir / "bpe.vocab.tsv").string(), m.vocab);
    tok::save_merges((dir / "bpe.merges.txt").string(), m);
    std::cout << "subword vocabulary: " << m.vocab.size() << " tokens, " << m.merges.size()
              << " merges -> " << (dir / "bpe.vocab.tsv").string() << "\n";
  }
  return 0;
}

// ---- pretrain-plm ----

struct PretrainOptsCli {
  std::string methods;
  std::string vocab;
  std::string merges;
  std::string out;
  std::string name = "plm";
  int epochs = 4;
  int batch = 8;
  double lr = 2.5e-4;
  double val_fraction = 0.1;
  int embed_dim = 32;
  int layers = 1;
  int heads = 2;
  int max_seq = 256;
  int max_tokens = 200;
  uint64_t seed = 17;
};

int cmd_pretrain(const PretrainOptsCli& o) {
  auto methods = bench::load_methods(o.methods);
  CodecBox box = load_codec(o.vocab, o.merges);
  tok::Codec codec = box.codec();
  auto data = corpus::build_lm_dataset(methods, codec, static_cast<size_t>(o.max_tokens));
  if (data.empty()) throw DataError("pretrain-plm: no sequences under the token cap");
  auto [train, val] = corpus::split(data, o.val_fraction, o.seed);

  plm::PlmConfig cfg;
  cfg.embed_dim = o.embed_dim;
  cfg.n_layers = o.layers;
  cfg.n_heads = o.heads;
  cfg.max_seq_len = o.max_seq;
  cfg.vocab_size = codec.vocab().size();
  cfg.validate();

  plm::Gpt<float> model(cfg);
  nn::ParamStore<float> ps;
  Rng rng(o.seed);
  model.init(ps, rng);
  nn::Adam<float> opt;

  plm::PretrainOpts popts;
  popts.epochs = o.epochs;
  popts.batch_size = o.batch;
  popts.peak_lr = o.lr;
  popts.seed = o.seed;

  ensure_dir(o.out);
  fs::path dir(o.out);
  std::ofstream log = open_out(dir / (o.name + ".log.jsonl"));
  auto epochs = plm::pretrain(model, ps, opt, train, val, popts, &log);
  plm::save_checkpoint((dir / (o.name + ".ckpt")).string(), cfg, ps, opt);
  std::cout << "pretrained " << o.name << ": " << train.size() << " train / " << val.size()
            << " val sequences, final val nll " << epochs.back().val_nll << "\n";
  return 0;
}

// ---- search-hparams ----

struct HparamOpts {
  std::string patches;
  std::string vocab;
  std::string merges;
  std::string plm;
  std::string out;
  int trials = 8;
  int top = 4;
  int epochs = 2;
  int batch = 8;
  double lr = 6.25e-5;
  double val_fraction = 0.15;
  int max_tokens = 200;
  uint64_t seed = 17;
};

int cmd_hparams(const HparamOpts& o) {
  auto records = corpus::load_patch_records(o.patches);
  CodecBox box = load_codec(o.vocab, o.merges);
  tok::Codec codec = box.codec();
  auto dataset = corpus::build_patch_dataset(records, codec, static_cast<size_t>(o.max_tokens));
  if (dataset.empty()) throw DataError("search-hparams: no examples under the token cap");
  auto [train, val] = corpus::split(dataset, o.val_fraction, o.seed);

  nn::WeightsFile wf = nn::load_weights(o.plm);
  plm::PlmConfig plm_cfg = plm::PlmConfig::from_kv(wf.config);
  if (plm_cfg.vocab_size != codec.vocab().size())
    throw DataError("search-hparams: checkpoint vocabulary does not match the tokenizer");

  apr::FinetuneOpts fopts;
  fopts.epochs = o.epochs;
  fopts.batch_size = o.batch;
  fopts.lr = o.lr;
  fopts.seed = o.seed;

  ensure_dir(o.out);
  fs::path dir(o.out);
  std::ofstream trial_log = open_out(dir / "trials.jsonl");
  apr::SearchSpace space;
  auto picked =
      apr::random_search(plm_cfg, o.plm, train, val, space, o.trials, o.top, fopts, &trial_log);

  std::ofstream sel = open_out(dir / "selected.jsonl");
  for (const auto& tr : picked) {
    nlohmann::ordered_json j;
    j["trial"] = tr.trial;
    j["variant"] = apr::variant_name(tr.variant);
    j["conv_dim"] = tr.hp.conv_dim;
    j["kernel_size"] = tr.hp.kernel_size;
    j["n_conv_layers"] = tr.hp.n_conv_layers;
    j["dropout"] = tr.hp.dropout;
    j["lambda"] = tr.hp.lambda;
    j["val_perplexity"] = tr.val_perplexity;
    sel << j.dump() << "\n";
  }
  std::cout << "hyperparameter search: " << o.trials << " trials, kept " << picked.size()
            << " -> " << (dir / "selected.jsonl").string() << "\n";
  return 0;
}

// ---- finetune ----

struct FinetuneOptsCli {
  std::string patches;
  std::string vocab;
  std::string merges;
  std::string plm;  // checkpoint path; empty trains from a plain embedding
  std::string out;
  std::string name = "model";
  std::string variant = "dual";
  int conv_dim = 24;
  int kernel = 3;
  int conv_layers = 1;
  double dropout = 0.0;
  double lambda = 0.3;
  int epochs = 4;
  int batch = 8;
  double lr = 6.25e-5;
  double val_fraction = 0.1;
  int max_tokens = 200;
  // Network shape when training without a checkpoint (otherwise it comes
  // from the checkpoint header).
  int embed_dim = 32;
  int layers = 1;
  int heads = 2;
  int max_seq = 256;
  uint64_t seed = 17;
};

int cmd_finetune(const FinetuneOptsCli& o) {
  auto records = corpus::load_patch_records(o.patches);
  CodecBox box = load_codec(o.vocab, o.merges);
  tok::Codec codec = box.codec();
  auto dataset = corpus::build_patch_dataset(records, codec, static_cast<size_t>(o.max_tokens));
  if (dataset.empty()) throw DataError("finetune: no examples under the token cap");
  auto [train, val] = corpus::split(dataset, o.val_fraction, o.seed);

  apr::AprConfig cfg;
  nn::WeightsFile wf;
  if (!o.plm.empty()) {
    wf = nn::load_weights(o.plm);
    cfg.plm = plm::PlmConfig::from_kv(wf.config);
    cfg.use_plm = true;
  } else {
    cfg.plm.embed_dim = o.embed_dim;
    cfg.plm.n_layers = o.layers;
    cfg.plm.n_heads = o.heads;
    cfg.plm.max_seq_len = o.max_seq;
    cfg.plm.vocab_size = codec.vocab().size();
    cfg.use_plm = false;
  }
  if (cfg.plm.vocab_size != codec.vocab().size())
    throw DataError("finetune: model vocabulary does not match the tokenizer");
  cfg.hp.conv_dim = o.conv_dim;
  cfg.hp.kernel_size = o.kernel;
  cfg.hp.n_conv_layers = o.conv_layers;
  cfg.hp.dropout = o.dropout;
  cfg.hp.lambda = o.lambda;
  cfg.variant = apr::variant_from_name(o.variant);

  apr::AprModel<float> model(cfg);
  nn::ParamStore<float> ps;
  Rng rng(o.seed);
  model.init(ps, rng);
  if (cfg.use_plm) nn::fill_params_prefix(wf, ps, "plm.");

  apr::FinetuneOpts fopts;
  fopts.epochs = o.epochs;
  fopts.batch_size = o.batch;
  fopts.lr = o.lr;
  fopts.seed = o.seed;

  ensure_dir(o.out);
  fs::path dir(o.out);
  std::ofstream log = open_out(dir / (o.name + ".log.jsonl"));
  auto logs = apr::finetune(model, ps, train, val, fopts, &log);
  apr::save_apr((dir / (o.name + ".apr")).string(), cfg, ps);

  corpus::LengthModel lenm = corpus::length_diff_distribution(dataset);
  corpus::save_length_model((dir / (o.name + ".len.json")).string(), lenm);
  std::cout << "finetuned " << o.name << ": " << train.size() << " train / " << val.size()
            << " val examples, final val perplexity " << logs.back().val_perplexity << "\n";
  return 0;
}

// ---- bench-seed ----

struct BenchOpts {
  std::string out;
  int methods = 500;
  int patches = 300;
  int bugs = 20;
  uint64_t seed = 17;
};

int cmd_bench_seed(const BenchOpts& o) {
  bench::GenOptions gopt;
  gopt.target_methods = o.methods;
  gopt.target_patches = o.patches;
  gopt.n_bench_bugs = o.bugs;
  gopt.seed = o.seed;
  bench::GeneratedCorpus c = bench::generate(gopt);
  ensure_dir(o.out);
  fs::path dir(o.out);
  bench::save_methods((dir / "methods.jsonl").string(), c.methods);
  corpus::save_patch_records((dir / "patches.jsonl").string(), c.patches);
  bench::save_benchmark((dir / "bugs.jsonl").string(), c.benchmark);
  std::cout << "seeded corpus: " << c.methods.size() << " methods, " << c.patches.size()
            << " patch examples, " << c.benchmark.size() << " benchmark bugs -> " << o.out << "\n";
  return 0;
}

// ---- repair (single bug or benchmark sweep) ----

struct RepairOptsCli {
  std::string bug;        // source file (single mode)
  int line = 0;           // 1-based buggy line (single mode)
  std::string tests;      // test suite; defaults next to --bug
  std::string benchmark;  // bugs.jsonl (sweep mode)
  std::vector<std::string> models;
  std::string vocab;
  std::string merges;
  std::string length_model;
  std::string out;
  std::string report_name = "report";
  std::string config_name;  // when set, also write a one-row metrics file
  int beam = 20;
  int candidates = 100;
  int cap = 100;
  int donor_cap = 4;
  int max_extra = 12;
  int tolerance = 5;
  std::string penalty = "asymmetric";
  bool identifier_check = false;
  bool length_control = false;
  bool renormalize = false;
  bool early_stop = false;
  int64_t test_budget = 10000;
};

repair::RepairOptions to_repair_options(const RepairOptsCli& o) {
  repair::RepairOptions ropt;
  ropt.beam_size = o.beam;
  ropt.n_candidates = o.candidates;
  ropt.validation_cap = o.cap;
  ropt.donor_cap = o.donor_cap;
  ropt.max_extra = o.max_extra;
  ropt.tolerance = o.tolerance;
  ropt.identifier_check = o.identifier_check;
  ropt.length_control = o.length_control;
  ropt.renormalize = o.renormalize;
  ropt.early_stop = o.early_stop;
  ropt.test_budget = o.test_budget;
  if (o.penalty == "asymmetric") {
    ropt.penalty_mode = search::PenaltyMode::Asymmetric;
  } else if (o.penalty == "formula") {
    ropt.penalty_mode = search::PenaltyMode::Formula;
  } else {
    throw UsageError("repair: --penalty must be asymmetric or formula");
  }
  return ropt;
}

struct SweepResult {
  std::vector<std::vector<repair::CandidatePatch>> per_bug;
  std::vector<std::string> truths;
};

// Repairs every bug in order, appending report records per bug. A bug that
// yields no candidates (or whose inputs the models cannot digest) produces
// an empty candidate list rather than aborting the sweep.
SweepResult run_sweep(const std::vector<bench::BenchBug>& bugs,
                      std::vector<repair::TrainedModel>& ensemble, const tok::Codec& codec,
                      const corpus::LengthModel* lenm, const repair::RepairOptions& ropt,
                      std::ostream& report) {
  SweepResult res;
  for (const auto& b : bugs) {
    std::vector<repair::CandidatePatch> patches;
    try {
      repair::RepairResult r = repair::repair(b.bug, b.tests, ensemble, codec, lenm, ropt);
      patches = std::move(r.patches);
    } catch (const search::NoCandidates&) {
      std::cout << b.bug_id << ": no candidates\n";
    } catch (const plm::SequenceTooLong& e) {
      std::cout << b.bug_id << ": skipped (" << e.what() << ")\n";
    }
    repair::write_repair_report(report, b.bug_id, patches, b.bug.original_line);
    int plausible = 0;
    int first = 0;
    for (const auto& p : patches) {
      if (p.validation == repair::ValidationStatus::Plausible) {
        ++plausible;
        if (first == 0) first = p.rank;
      }
    }
    if (plausible > 0) {
      std::cout << b.bug_id << ": " << plausible << " plausible, first at rank " << first << " of "
                << patches.size() << " candidates\n";
    } else {
      std::cout << b.bug_id << ": no plausible patch in " << patches.size() << " candidates\n";
    }
    res.per_bug.push_back(std::move(patches));
    res.truths.push_back(b.bug.original_line);
  }
  return res;
}

int cmd_repair(const RepairOptsCli& o) {
  if (o.bug.empty() == o.benchmark.empty())
    throw UsageError("repair: give exactly one of --bug or --benchmark");
  if (o.models.empty()) throw UsageError("repair: at least one --model is required");
  if (o.length_control && o.length_model.empty())
    throw UsageError("repair: --length-control needs --length-model");

  CodecBox box = load_codec(o.vocab, o.merges);
  tok::Codec codec = box.codec();
  std::vector<repair::TrainedModel> ensemble;
  for (const auto& path : o.models) {
    ensemble.push_back(load_model(path));
    if (ensemble.back().cfg.plm.vocab_size != codec.vocab().size())
      throw DataError("repair: model " + path + " does not match the tokenizer vocabulary");
  }
  corpus::LengthModel lenm;
  if (!o.length_model.empty()) lenm = corpus::load_length_model(o.length_model);
  const corpus::LengthModel* lenp = o.length_model.empty() ? nullptr : &lenm;
  repair::RepairOptions ropt = to_repair_options(o);

  std::vector<bench::BenchBug> bugs;
  if (!o.benchmark.empty()) {
    bugs = bench::load_benchmark(o.benchmark);
  } else {
    if (o.line < 1) throw UsageError("repair: --line must be a 1-based line number");
    bench::BenchBug b;
    b.bug_id = fs::path(o.bug).stem().string();
    b.bug.source = read_text_file(o.bug);
    b.bug.buggy_line = o.line;
    std::string tests_path = o.tests;
    if (tests_path.empty())
      tests_path = fs::path(o.bug).replace_extension(".tests.jsonl").string();
    b.tests = lang::load_tests_file(tests_path);
    lang::Program prog = lang::parse(b.bug.source);
    lang::resolve(prog);
    auto outcomes = lang::run_tests(prog, b.tests, o.test_budget);
    for (size_t i = 0; i < outcomes.size(); ++i)
      if (!outcomes[i].passed()) b.bug.failing.push_back(static_cast<int>(i));
    if (b.bug.failing.empty())
      throw DataError("repair: the program already passes its whole suite");
    // The ground truth is unknown for a user-supplied bug; report records
    // carry correct=false.
    bugs.push_back(std::move(b));
  }

  ensure_dir(o.out);
  fs::path dir(o.out);
  std::ofstream report = open_out(dir / (o.report_name + ".jsonl"));
  SweepResult res = run_sweep(bugs, ensemble, codec, lenp, ropt, report);

  int fixed = 0;
  for (const auto& patches : res.per_bug)
    for (const auto& p : patches)
      if (p.validation == repair::ValidationStatus::Plausible) {
        ++fixed;
        break;
      }
  std::cout << "plausible patches for " << fixed << " of " << bugs.size() << " bugs\n";

  if (!o.config_name.empty()) {
    repair::ConfigMetrics row = repair::summarize(o.config_name, res.per_bug, res.truths);
    std::ofstream mout = open_out(dir / (o.report_name + ".metrics.jsonl"));
    repair::write_metrics(mout, {row});
  }
  return 0;
}

// ---- ablate ----

struct AblateOpts {
  std::string out;
  std::string data;  // reuse an existing bench-seed directory
  uint64_t seed = 17;
  int methods = 500;
  int patches = 300;
  int bugs = 20;
  int word_vocab = 1000;
  int bpe_vocab = 200;
  int embed_dim = 32;
  int layers = 1;
  int heads = 2;
  int max_seq = 256;
  int max_tokens = 200;
  int pretrain_epochs = 4;
  int pretrain_batch = 8;
  double pretrain_lr = 2.5e-4;
  int conv_dim = 24;
  int kernel = 3;
  int conv_layers = 1;
  double lambda = 0.3;
  int finetune_epochs = 4;
  int finetune_batch = 8;
  double finetune_lr = 6.25e-5;
  double val_fraction = 0.1;
  int beam = 20;
  int candidates = 100;
  int cap = 100;
  int donor_cap = 4;
  int max_extra = 12;
  int tolerance = 5;
  int64_t test_budget = 10000;
};

// One ablation row: which tokenizer, whether the pretrained language model
// is used, and whether the search flags (identifier checking + length
// control) are on. The last row shares the fourth row's weights.
struct AblRow {
  const char* label;
  const char* model_stem;
  bool bpe;
  bool use_plm;
  bool code_aware;
};

constexpr AblRow kAblRows[] = {
    {"vanilla", "vanilla", false, false, false},
    {"+BPE", "bpe", true, false, false},
    {"+GPT", "gpt", false, true, false},
    {"+BPE+GPT", "bpe_gpt", true, true, false},
    {"full", "bpe_gpt", true, true, true},
};

int cmd_ablate(const AblateOpts& o) {
  ensure_dir(o.out);
  fs::path dir(o.out);

  // Stage 1: corpus.
  fs::path data_dir = o.data.empty() ? dir / "corpus" : fs::path(o.data);
  if (o.data.empty()) {
    BenchOpts b;
    b.out = data_dir.string();
    b.methods = o.methods;
    b.patches = o.patches;
    b.bugs = o.bugs;
    b.seed = o.seed;
    cmd_bench_seed(b);
  }
  std::string methods_path = (data_dir / "methods.jsonl").string();
  std::string patches_path = (data_dir / "patches.jsonl").string();
  std::string bugs_path = (data_dir / "bugs.jsonl").string();

  // Stage 2: tokenizers.
  fs::path tok_dir = dir / "tok";
  {
    TokenizeOpts t;
    t.methods = methods_path;
    t.out = tok_dir.string();
    t.mode = "word";
    t.vocab_size = o.word_vocab;
    cmd_tokenize(t);
    t.mode = "bpe";
    t.vocab_size = o.bpe_vocab;
    cmd_tokenize(t);
  }
  std::string word_vocab = (tok_dir / "word.vocab.tsv").string();
  std::string bpe_vocab = (tok_dir / "bpe.vocab.tsv").string();
  std::string bpe_merges = (tok_dir / "bpe.merges.txt").string();

  // Stage 3: language-model pretraining, once per tokenizer.
  fs::path plm_dir = dir / "plm";
  for (bool bpe : {false, true}) {
    PretrainOptsCli p;
    p.methods = methods_path;
    p.vocab = bpe ? bpe_vocab : word_vocab;
    p.merges = bpe ? bpe_merges : "";
    p.out = plm_dir.string();
    p.name = bpe ? "bpe" : "word";
    p.epochs = o.pretrain_epochs;
    p.batch = o.pretrain_batch;
    p.lr = o.pretrain_lr;
    p.val_fraction = o.val_fraction;
    p.embed_dim = o.embed_dim;
    p.layers = o.layers;
    p.heads = o.heads;
    p.max_seq = o.max_seq;
    p.max_tokens = o.max_tokens;
    p.seed = o.seed;
    cmd_pretrain(p);
  }

  // Stage 4: fine-tune the four distinct weight sets.
  fs::path model_dir = dir / "model";
  for (int i = 0; i < 4; ++i) {
    const AblRow& row = kAblRows[i];
    FinetuneOptsCli f;
    f.patches = patches_path;
    f.vocab = row.bpe ? bpe_vocab : word_vocab;
    f.merges = row.bpe ? bpe_merges : "";
    f.plm = row.use_plm ? (plm_dir / (std::string(row.bpe ? "bpe" : "word") + ".ckpt")).string()
                        : "";
    f.out = model_dir.string();
    f.name = row.model_stem;
    f.conv_dim = o.conv_dim;
    f.kernel = o.kernel;
    f.conv_layers = o.conv_layers;
    f.lambda = o.lambda;
    f.epochs = o.finetune_epochs;
    f.batch = o.finetune_batch;
    f.lr = o.finetune_lr;
    f.val_fraction = o.val_fraction;
    f.max_tokens = o.max_tokens;
    f.embed_dim = o.embed_dim;
    f.layers = o.layers;
    f.heads = o.heads;
    f.max_seq = o.max_seq;
    f.seed = o.seed;
    cmd_finetune(f);
  }

  // Stage 5: repair sweeps, one per ablation row, over the same benchmark.
  auto bugs = bench::load_benchmark(bugs_path);
  fs::path rep_dir = dir / "reports";
  ensure_dir(rep_dir.string());
  std::vector<repair::ConfigMetrics> rows;
  for (const AblRow& row : kAblRows) {
    CodecBox box = load_codec(row.bpe ? bpe_vocab : word_vocab, row.bpe ? bpe_merges : "");
    tok::Codec codec = box.codec();
    std::vector<repair::TrainedModel> ensemble;
    ensemble.push_back(load_model((model_dir / (std::string(row.model_stem) + ".apr")).string()));

    corpus::LengthModel lenm;
    const corpus::LengthModel* lenp = nullptr;
    repair::RepairOptions ropt;
    ropt.beam_size = o.beam;
    ropt.n_candidates = o.candidates;
    ropt.validation_cap = o.cap;
    ropt.donor_cap = o.donor_cap;
    ropt.max_extra = o.max_extra;
    ropt.tolerance = o.tolerance;
    ropt.test_budget = o.test_budget;
    if (row.code_aware) {
      ropt.identifier_check = true;
      ropt.length_control = true;
      lenm = corpus::load_length_model(
          (model_dir / (std::string(row.model_stem) + ".len.json")).string());
      lenp = &lenm;
    }

    std::string stem = row.label[0] == '+' ? row.model_stem : row.label;
    std::cout << "-- configuration " << row.label << " --\n";
    std::ofstream report = open_out(rep_dir / (stem + std::string(".jsonl")));
    SweepResult res = run_sweep(bugs, ensemble, codec, lenp, ropt, report);
    rows.push_back(repair::summarize(row.label, res.per_bug, res.truths));
  }

  std::ofstream mout = open_out(dir / "metrics.jsonl");
  repair::write_metrics(mout, rows);
  std::cout << "metrics -> " << (dir / "metrics.jsonl").string() << "\n";
  for (const auto& r : rows)
    std::cout << r.config << ": " << r.bugs_fixed << " of " << bugs.size() << " bugs fixed\n";
  return 0;
}

// ---- report ----

struct ReportOpts {
  std::string metrics;
  std::string out;  // optional copy of the rendered table
};

std::string render_metrics(const std::vector<repair::ConfigMetrics>& rows) {
  std::string text;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %6s %10s %9s %10s %8s %8s %9s\n", "config", "fixed",
                "plausible", "comp@30", "comp@100", "rank", "matched", "unmatched");
  text += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-10s %6d %10d %9.4f %10.4f %8.2f %8d %9d\n",
                  r.config.c_str(), r.bugs_fixed, r.plausible, r.compilable_rate_30,
                  r.compilable_rate_100, r.mean_correct_rank, r.matched, r.unmatched);
    text += line;
  }
  return text;
}

int cmd_report(const ReportOpts& o) {
  auto rows = repair::parse_metrics(read_text_file(o.metrics));
  if (rows.empty()) throw DataError("report: metrics file has no rows");
  std::string text = render_metrics(rows);
  std::cout << text;
  if (!o.out.empty()) {
    std::ofstream out = open_out(o.out);
    out << text;
  }
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"code-aware neural program repair toolkit"};
  app.require_subcommand(1);

  int rc = 0;

  // tokenize-train
  TokenizeOpts topt;
  auto* tok_cmd = app.add_subcommand("tokenize-train", "train a tokenizer on a method corpus");
  tok_cmd->set_config("--config", "", "read defaults from a key = value file");
  tok_cmd->add_option("--methods", topt.methods, "method corpus (JSONL {method})")->required();
  tok_cmd->add_option("--out", topt.out, "output directory")->required();
  tok_cmd->add_option("--mode", topt.mode, "word or bpe (default bpe)");
  tok_cmd->add_option("--vocab-size", topt.vocab_size, "target vocabulary size (default 200)");
  tok_cmd->callback([&] { rc = cmd_tokenize(topt); });

  // pretrain-plm
  PretrainOptsCli popt;
  auto* pre_cmd = app.add_subcommand("pretrain-plm", "pretrain the language model on methods");
  pre_cmd->set_config("--config", "", "read defaults from a key = value file");
  pre_cmd->add_option("--methods", popt.methods, "method corpus (JSONL {method})")->required();
  pre_cmd->add_option("--vocab", popt.vocab, "vocabulary file")->required();
  pre_cmd->add_option("--merges", popt.merges, "merge file (subword mode; omit for word level)");
  pre_cmd->add_option("--out", popt.out, "output directory")->required();
  pre_cmd->add_option("--name", popt.name, "checkpoint stem (default plm)");
  pre_cmd->add_option("--epochs", popt.epochs, "training epochs (default 4)");
  pre_cmd->add_option("--batch-size", popt.batch, "sequences per update (default 8)");
  pre_cmd->add_option("--lr", popt.lr, "peak learning rate (default 2.5e-4)");
  pre_cmd->add_option("--val-fraction", popt.val_fraction, "held-out fraction (default 0.1)");
  pre_cmd->add_option("--embed-dim", popt.embed_dim, "embedding width (default 32)");
  pre_cmd->add_option("--layers", popt.layers, "decoder blocks (default 1)");
  pre_cmd->add_option("--heads", popt.heads, "attention heads (default 2)");
  pre_cmd->add_option("--max-seq", popt.max_seq, "positional table size (default 256)");
  pre_cmd->add_option("--max-tokens", popt.max_tokens,
                      "drop sequences longer than this (default 200)");
  pre_cmd->add_option("--seed", popt.seed, "random seed (default 17)");
  pre_cmd->callback([&] { rc = cmd_pretrain(popt); });

  // search-hparams
  HparamOpts hopt;
  auto* hp_cmd = app.add_subcommand("search-hparams",
                                    "random hyperparameter search over the translation network");
  hp_cmd->set_config("--config", "", "read defaults from a key = value file");
  hp_cmd->add_option("--patches", hopt.patches, "patch corpus (JSONL records)")->required();
  hp_cmd->add_option("--vocab", hopt.vocab, "vocabulary file")->required();
  hp_cmd->add_option("--merges", hopt.merges, "merge file (subword mode)");
  hp_cmd->add_option("--plm", hopt.plm, "pretrained language-model checkpoint")->required();
  hp_cmd->add_option("--out", hopt.out, "output directory")->required();
  hp_cmd->add_option("--trials", hopt.trials, "sampled configurations (default 8)");
  hp_cmd->add_option("--top", hopt.top, "configurations to keep (default 4)");
  hp_cmd->add_option("--epochs", hopt.epochs, "epochs per trial (default 2)");
  hp_cmd->add_option("--batch-size", hopt.batch, "examples per update (default 8)");
  hp_cmd->add_option("--lr", hopt.lr, "learning rate (default 6.25e-5)");
  hp_cmd->add_option("--val-fraction", hopt.val_fraction, "held-out fraction (default 0.15)");
  hp_cmd->add_option("--max-tokens", hopt.max_tokens,
                     "drop examples longer than this (default 200)");
  hp_cmd->add_option("--seed", hopt.seed, "random seed (default 17)");
  hp_cmd->callback([&] { rc = cmd_hparams(hopt); });

  // finetune
  FinetuneOptsCli fopt;
  auto* ft_cmd = app.add_subcommand("finetune", "fine-tune a repair model on patch examples");
  ft_cmd->set_config("--config", "", "read defaults from a key = value file");
  ft_cmd->add_option("--patches", fopt.patches, "patch corpus (JSONL records)")->required();
  ft_cmd->add_option("--vocab", fopt.vocab, "vocabulary file")->required();
  ft_cmd->add_option("--merges", fopt.merges, "merge file (subword mode)");
  ft_cmd->add_option("--plm", fopt.plm,
                     "pretrained checkpoint; omit to train from a plain embedding");
  ft_cmd->add_option("--out", fopt.out, "output directory")->required();
  ft_cmd->add_option("--name", fopt.name, "model stem (default model)");
  ft_cmd->add_option("--variant", fopt.variant, "dual or single encoder (default dual)");
  ft_cmd->add_option("--conv-dim", fopt.conv_dim, "encoder/decoder width (default 24)");
  ft_cmd->add_option("--kernel", fopt.kernel, "convolution kernel size (default 3)");
  ft_cmd->add_option("--conv-layers", fopt.conv_layers, "convolution stack depth (default 1)");
  ft_cmd->add_option("--dropout", fopt.dropout, "dropout rate (default 0)");
  ft_cmd->add_option("--lambda", fopt.lambda, "auxiliary language-model loss weight (default 0.3)");
  ft_cmd->add_option("--epochs", fopt.epochs, "training epochs (default 4)");
  ft_cmd->add_option("--batch-size", fopt.batch, "examples per update (default 8)");
  ft_cmd->add_option("--lr", fopt.lr, "learning rate (default 6.25e-5)");
  ft_cmd->add_option("--val-fraction", fopt.val_fraction, "held-out fraction (default 0.1)");
  ft_cmd->add_option("--max-tokens", fopt.max_tokens,
                     "drop examples longer than this (default 200)");
  ft_cmd->add_option("--embed-dim", fopt.embed_dim, "embedding width without --plm (default 32)");
  ft_cmd->add_option("--layers", fopt.layers, "decoder blocks without --plm (default 1)");
  ft_cmd->add_option("--heads", fopt.heads, "attention heads without --plm (default 2)");
  ft_cmd->add_option("--max-seq", fopt.max_seq, "positional table size without --plm");
  ft_cmd->add_option("--seed", fopt.seed, "random seed (default 17)");
  ft_cmd->callback([&] { rc = cmd_finetune(fopt); });

  // bench-seed
  BenchOpts bopt;
  auto* bs_cmd = app.add_subcommand("bench-seed", "generate a seeded-bug corpus and benchmark");
  bs_cmd->set_config("--config", "", "read defaults from a key = value file");
  bs_cmd->add_option("--out", bopt.out, "output directory")->required();
  bs_cmd->add_option("--methods", bopt.methods, "language-model corpus size (default 500)");
  bs_cmd->add_option("--patches", bopt.patches, "patch corpus size (default 300)");
  bs_cmd->add_option("--bugs", bopt.bugs, "held-out benchmark bugs (default 20)");
  bs_cmd->add_option("--seed", bopt.seed, "random seed (default 17)");
  bs_cmd->callback([&] { rc = cmd_bench_seed(bopt); });

  // repair
  RepairOptsCli ropt;
  auto* rp_cmd = app.add_subcommand("repair", "repair one bug or sweep a benchmark");
  rp_cmd->set_config("--config", "", "read defaults from a key = value file");
  rp_cmd->add_option("--bug", ropt.bug, "buggy source file (single-bug mode)");
  rp_cmd->add_option("--line", ropt.line, "1-based buggy line (single-bug mode)");
  rp_cmd->add_option("--tests", ropt.tests,
                     "test suite JSONL (default: <bug>.tests.jsonl next to --bug)");
  rp_cmd->add_option("--benchmark", ropt.benchmark, "benchmark bugs.jsonl (sweep mode)");
  rp_cmd->add_option("--model", ropt.models, "trained model weights (repeat for an ensemble)");
  rp_cmd->add_option("--vocab", ropt.vocab, "vocabulary file")->required();
  rp_cmd->add_option("--merges", ropt.merges, "merge file (subword mode)");
  rp_cmd->add_option("--length-model", ropt.length_model, "length distribution file");
  rp_cmd->add_option("--out", ropt.out, "output directory")->required();
  rp_cmd->add_option("--report-name", ropt.report_name, "report stem (default report)");
  rp_cmd->add_option("--config-name", ropt.config_name,
                     "when set, also write a one-row metrics file under this label");
  rp_cmd->add_option("--beam", ropt.beam, "beam width (default 20)");
  rp_cmd->add_option("--candidates", ropt.candidates, "hypotheses kept per bug (default 100)");
  rp_cmd->add_option("--cap", ropt.cap, "candidates validated per bug (default 100)");
  rp_cmd->add_option("--donor-cap", ropt.donor_cap, "concrete lines per hypothesis (default 4)");
  rp_cmd->add_option("--max-extra", ropt.max_extra,
                     "length cap: buggy length plus this (default 12)");
  rp_cmd->add_option("--tolerance", ropt.tolerance, "length band half-width (default 5)");
  rp_cmd->add_option("--penalty", ropt.penalty, "asymmetric or formula (default asymmetric)");
  rp_cmd->add_flag("--identifier-check", ropt.identifier_check,
                   "mask tokens that cannot extend an in-scope identifier");
  rp_cmd->add_flag("--length-control", ropt.length_control,
                   "steer candidate length toward the buggy line's length");
  rp_cmd->add_flag("--renormalize", ropt.renormalize,
                   "renormalize the distribution after masking");
  rp_cmd->add_flag("--early-stop", ropt.early_stop, "stop validating at the first plausible patch");
  rp_cmd->add_option("--test-budget", ropt.test_budget,
                     "interpreter steps per test (default 10000)");
  rp_cmd->callback([&] { rc = cmd_repair(ropt); });

  // ablate
  AblateOpts aopt;
  auto* ab_cmd = app.add_subcommand(
      "ablate", "run the five-configuration ablation end to end and emit metrics");
  ab_cmd->set_config("--config", "", "read defaults from a key = value file");
  ab_cmd->add_option("--out", aopt.out, "output directory")->required();
  ab_cmd->add_option("--data", aopt.data,
                     "reuse an existing bench-seed directory instead of generating");
  ab_cmd->add_option("--seed", aopt.seed, "random seed driving every stage (default 17)");
  ab_cmd->add_option("--methods", aopt.methods, "language-model corpus size (default 500)");
  ab_cmd->add_option("--patches", aopt.patches, "patch corpus size (default 300)");
  ab_cmd->add_option("--bugs", aopt.bugs, "held-out benchmark bugs (default 20)");
  ab_cmd->add_option("--word-vocab", aopt.word_vocab, "word vocabulary size (default 1000)");
  ab_cmd->add_option("--bpe-vocab", aopt.bpe_vocab, "subword vocabulary size (default 200)");
  ab_cmd->add_option("--embed-dim", aopt.embed_dim, "embedding width (default 32)");
  ab_cmd->add_option("--layers", aopt.layers, "decoder blocks (default 1)");
  ab_cmd->add_option("--heads", aopt.heads, "attention heads (default 2)");
  ab_cmd->add_option("--max-seq", aopt.max_seq, "positional table size (default 256)");
  ab_cmd->add_option("--max-tokens", aopt.max_tokens, "sequence length cap (default 200)");
  ab_cmd->add_option("--pretrain-epochs", aopt.pretrain_epochs, "pretraining epochs (default 4)");
  ab_cmd->add_option("--pretrain-batch", aopt.pretrain_batch, "pretraining batch (default 8)");
  ab_cmd->add_option("--pretrain-lr", aopt.pretrain_lr, "pretraining peak lr (default 2.5e-4)");
  ab_cmd->add_option("--conv-dim", aopt.conv_dim, "encoder/decoder width (default 24)");
  ab_cmd->add_option("--kernel", aopt.kernel, "convolution kernel size (default 3)");
  ab_cmd->add_option("--conv-layers", aopt.conv_layers, "convolution stack depth (default 1)");
  ab_cmd->add_option("--lambda", aopt.lambda, "auxiliary loss weight (default 0.3)");
  ab_cmd->add_option("--finetune-epochs", aopt.finetune_epochs, "fine-tuning epochs (default 4)");
  ab_cmd->add_option("--finetune-batch", aopt.finetune_batch, "fine-tuning batch (default 8)");
  ab_cmd->add_option("--finetune-lr", aopt.finetune_lr, "fine-tuning lr (default 6.25e-5)");
  ab_cmd->add_option("--val-fraction", aopt.val_fraction, "held-out fraction (default 0.1)");
  ab_cmd->add_option("--beam", aopt.beam, "beam width (default 20)");
  ab_cmd->add_option("--candidates", aopt.candidates, "hypotheses kept per bug (default 100)");
  ab_cmd->add_option("--cap", aopt.cap, "candidates validated per bug (default 100)");
  ab_cmd->add_option("--donor-cap", aopt.donor_cap, "concrete lines per hypothesis (default 4)");
  ab_cmd->add_option("--max-extra", aopt.max_extra, "length cap above buggy length (default 12)");
  ab_cmd->add_option("--tolerance", aopt.tolerance, "length band half-width (default 5)");
  ab_cmd->add_option("--test-budget", aopt.test_budget,
                     "interpreter steps per test (default 10000)");
  ab_cmd->callback([&] { rc = cmd_ablate(aopt); });

  // report
  ReportOpts repopt;
  auto* rep_cmd = app.add_subcommand("report", "render a metrics file as a fixed-width table");
  rep_cmd->set_config("--config", "", "read defaults from a key = value file");
  rep_cmd->add_option("--metrics", repopt.metrics, "metrics JSONL from ablate or repair")
      ->required();
  rep_cmd->add_option("--out", repopt.out, "also write the table to this file");
  rep_cmd->callback([&] { rc = cmd_report(repopt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "curekit: " << e.what() << "\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "curekit: " << e.what() << "\n";
    return 1;
  } catch (const InternalError& e) {
    std::cerr << "curekit: internal error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "curekit: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "curekit: internal error: " << e.what() << "\n";
    return 3;
  }
  return rc;
}

}  // namespace curekit::cli
