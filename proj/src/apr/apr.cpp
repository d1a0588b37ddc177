#include "curekit/apr/apr.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "curekit/nn/weights_io.hpp"

namespace curekit::apr {

std::string variant_name(Variant v) {
  return v == Variant::DualEncoder ? "dual-encoder" : "single-encoder";
}

Variant variant_from_name(const std::string& s) {
  if (s == "dual-encoder") return Variant::DualEncoder;
  if (s == "single-encoder") return Variant::SingleEncoder;
  throw DataError("unknown model variant '" + s + "'");
}

std::map<std::string, std::string> AprConfig::to_kv() const {
  auto kv = plm.to_kv();
  kv["apr.conv_dim"] = std::to_string(hp.conv_dim);
  kv["apr.kernel_size"] = std::to_string(hp.kernel_size);
  kv["apr.n_conv_layers"] = std::to_string(hp.n_conv_layers);
  std::ostringstream d, l;
  d << std::setprecision(17) << hp.dropout;
  l << std::setprecision(17) << hp.lambda;
  kv["apr.dropout"] = d.str();
  kv["apr.lambda"] = l.str();
  kv["apr.variant"] = variant_name(variant);
  kv["apr.use_plm"] = use_plm ? "1" : "0";
  return kv;
}

AprConfig AprConfig::from_kv(const std::map<std::string, std::string>& kv) {
  auto need = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw DataError("weights file: missing config key '" + k + "'");
    return it->second;
  };
  AprConfig cfg;
  cfg.plm = plm::PlmConfig::from_kv(kv);
  cfg.hp.conv_dim = std::stoi(need("apr.conv_dim"));
  cfg.hp.kernel_size = std::stoi(need("apr.kernel_size"));
  cfg.hp.n_conv_layers = std::stoi(need("apr.n_conv_layers"));
  cfg.hp.dropout = std::stod(need("apr.dropout"));
  cfg.hp.lambda = std::stod(need("apr.lambda"));
  cfg.variant = variant_from_name(need("apr.variant"));
  cfg.use_plm = need("apr.use_plm") == "1";
  return cfg;
}

double val_perplexity(const AprModel<float>& model, nn::ParamStore<float>& ps,
                      const std::vector<corpus::PatchExample>& val) {
  if (val.empty()) throw corpus::EmptyDataset("validation set is empty");
  double total = 0.0;
  for (const auto& ex : val) {
    nn::Graph<float> g;
    total += static_cast<double>(g.value(model.nmt_nll(g, ps, ex))[0]);
  }
  return std::exp(total / static_cast<double>(val.size()));
}

std::vector<FinetuneLog> finetune(const AprModel<float>& model, nn::ParamStore<float>& ps,
                                  const std::vector<corpus::PatchExample>& train,
                                  const std::vector<corpus::PatchExample>& val,
                                  const FinetuneOpts& opts, std::ostream* log) {
  if (train.empty()) throw corpus::EmptyDataset("training set is empty");
  nn::Adam<float> opt;
  Rng master(opts.seed);
  std::vector<FinetuneLog> logs;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::vector<size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    master.fork(2000 + static_cast<uint64_t>(epoch)).shuffle(order);
    Rng drop = master.fork(3000 + static_cast<uint64_t>(epoch));
    double epoch_nll = 0.0;
    size_t done = 0;
    while (done < order.size()) {
      size_t bsz = std::min(static_cast<size_t>(opts.batch_size), order.size() - done);
      nn::Graph<float> g;
      nn::NodeId batch_loss{};
      for (size_t i = 0; i < bsz; ++i) {
        nn::NodeId nll = model.combined_nll(g, ps, train[order[done + i]], &drop);
        batch_loss = i == 0 ? nll : g.add(batch_loss, nll);
      }
      batch_loss = g.scale(batch_loss, 1.0f / static_cast<float>(bsz));
      g.backward(batch_loss);
      epoch_nll += static_cast<double>(g.value(batch_loss)[0]) * static_cast<double>(bsz);
      opt.step(ps, opts.lr);
      ps.zero_grads();
      done += bsz;
    }
    FinetuneLog fl;
    fl.epoch = epoch;
    fl.train_nll = epoch_nll / static_cast<double>(train.size());
    fl.val_perplexity = val.empty() ? 0.0 : val_perplexity(model, ps, val);
    logs.push_back(fl);
    if (log)
      *log << "epoch " << epoch << " train_nll " << std::fixed << std::setprecision(6)
           << fl.train_nll << " val_ppl " << fl.val_perplexity << "\n"
           << std::defaultfloat;
  }
  return logs;
}

AprHyperparams sample_hyperparams(const SearchSpace& space, Rng& rng) {
  AprHyperparams hp;
  hp.conv_dim = static_cast<int>(rng.uniform_int(space.conv_dim_lo, space.conv_dim_hi));
  hp.kernel_size = static_cast<int>(rng.uniform_int(space.kernel_lo, space.kernel_hi));
  hp.n_conv_layers = static_cast<int>(rng.uniform_int(space.layers_lo, space.layers_hi));
  hp.dropout = rng.uniform(space.dropout_lo, space.dropout_hi);
  hp.lambda = space.lambda_lo == space.lambda_hi ? space.lambda_lo
                                                 : rng.uniform(space.lambda_lo, space.lambda_hi);
  return hp;
}

static nlohmann::json hp_json(const AprHyperparams& hp, Variant variant) {
  return {{"variant", variant_name(variant)},
          {"conv_dim", hp.conv_dim},
          {"kernel_size", hp.kernel_size},
          {"n_conv_layers", hp.n_conv_layers},
          {"dropout", hp.dropout},
          {"lambda", hp.lambda}};
}

std::vector<TrialResult> random_search(const plm::PlmConfig& plm_cfg,
                                       const std::string& plm_weights_path,
                                       const std::vector<corpus::PatchExample>& train,
                                       const std::vector<corpus::PatchExample>& val,
                                       const SearchSpace& space, int n_trials, int k,
                                       const FinetuneOpts& opts, std::ostream* log) {
  if (n_trials < 1 || k < 1 || k > n_trials)
    throw UsageError("hyperparameter search needs 1 <= k <= n_trials");
  nn::WeightsFile wf = nn::load_weights(plm_weights_path);
  Rng master(opts.seed);
  std::vector<TrialResult> trials;
  for (int t = 0; t < n_trials; ++t) {
    Rng trial_rng = master.fork(static_cast<uint64_t>(t));
    TrialResult tr;
    tr.trial = t;
    tr.hp = sample_hyperparams(space, trial_rng);
    tr.variant = t % 2 == 0 ? Variant::DualEncoder : Variant::SingleEncoder;

    AprConfig cfg;
    cfg.plm = plm_cfg;
    cfg.hp = tr.hp;
    cfg.variant = tr.variant;
    AprModel<float> model(cfg);
    nn::ParamStore<float> ps;
    Rng init_rng = trial_rng.fork(7);
    model.init(ps, init_rng);
    nn::fill_params_prefix(wf, ps, "plm.");

    FinetuneOpts topts = opts;
    topts.seed = trial_rng.next_u64();
    auto logs = finetune(model, ps, train, val, topts, nullptr);
    tr.val_perplexity = logs.back().val_perplexity;
    trials.push_back(tr);
    if (log) {
      nlohmann::json j = {{"trial", t},
                          {"config", hp_json(tr.hp, tr.variant)},
                          {"val_perplexity", tr.val_perplexity}};
      *log << j.dump() << "\n";
    }
  }

  // Rank by validation perplexity (ties by trial index) and keep the best
  // k split between the two architecture variants.
  std::stable_sort(trials.begin(), trials.end(), [](const TrialResult& a, const TrialResult& b) {
    if (a.val_perplexity != b.val_perplexity) return a.val_perplexity < b.val_perplexity;
    return a.trial < b.trial;
  });
  int want_dual = (k + 1) / 2, want_single = k / 2;
  std::vector<TrialResult> picked, leftover;
  int got_dual = 0, got_single = 0;
  for (const auto& tr : trials) {
    bool dual = tr.variant == Variant::DualEncoder;
    if (dual && got_dual < want_dual) {
      picked.push_back(tr);
      ++got_dual;
    } else if (!dual && got_single < want_single) {
      picked.push_back(tr);
      ++got_single;
    } else {
      leftover.push_back(tr);
    }
  }
  for (const auto& tr : leftover) {
    if (static_cast<int>(picked.size()) >= k) break;
    picked.push_back(tr);
  }
  std::stable_sort(picked.begin(), picked.end(), [](const TrialResult& a, const TrialResult& b) {
    if (a.val_perplexity != b.val_perplexity) return a.val_perplexity < b.val_perplexity;
    return a.trial < b.trial;
  });
  return picked;
}

void save_apr(const std::string& path, const AprConfig& cfg, const nn::ParamStore<float>& ps) {
  nn::save_weights(path, cfg.to_kv(), ps);
}

AprConfig load_apr(const std::string& path, nn::ParamStore<float>& ps) {
  nn::WeightsFile wf = nn::load_weights(path);
  AprConfig cfg = AprConfig::from_kv(wf.config);
  if (ps.size() == 0) {
    AprModel<float> model(cfg);
    Rng rng(0);
    model.init(ps, rng);
  }
  nn::fill_params(wf, ps);
  return cfg;
}

}  // namespace curekit::apr
