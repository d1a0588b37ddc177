#include "curekit/plm/plm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

namespace curekit::plm {

namespace {

int kv_int(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw DataError("weights config: missing key '" + key + "'");
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw DataError("weights config: key '" + key + "' is not an integer: " + it->second);
  }
}

}  // namespace

std::map<std::string, std::string> PlmConfig::to_kv() const {
  return {{"plm.embed_dim", std::to_string(embed_dim)},
          {"plm.n_layers", std::to_string(n_layers)},
          {"plm.n_heads", std::to_string(n_heads)},
          {"plm.max_seq_len", std::to_string(max_seq_len)},
          {"plm.vocab_size", std::to_string(vocab_size)}};
}

PlmConfig PlmConfig::from_kv(const std::map<std::string, std::string>& kv) {
  PlmConfig cfg;
  cfg.embed_dim = kv_int(kv, "plm.embed_dim");
  cfg.n_layers = kv_int(kv, "plm.n_layers");
  cfg.n_heads = kv_int(kv, "plm.n_heads");
  cfg.max_seq_len = kv_int(kv, "plm.max_seq_len");
  cfg.vocab_size = kv_int(kv, "plm.vocab_size");
  cfg.validate();
  return cfg;
}

double avg_loglik(const Gpt<float>& model, nn::ParamStore<float>& ps,
                  const std::vector<std::vector<int>>& data) {
  if (data.empty()) throw DataError("average log-likelihood of an empty dataset");
  double total = 0.0;
  for (const auto& seq : data) {
    nn::Graph<float> g;
    total -= static_cast<double>(g.value(model.seq_nll(g, ps, seq))[0]);
  }
  return total / static_cast<double>(data.size());
}

std::vector<EpochLog> pretrain(const Gpt<float>& model, nn::ParamStore<float>& ps,
                               nn::Adam<float>& opt, const std::vector<std::vector<int>>& train,
                               const std::vector<std::vector<int>>& val, const PretrainOpts& opts,
                               std::ostream* log) {
  if (train.empty()) throw DataError("pretraining needs a nonempty training set");
  int batch = std::max(1, opts.batch_size);
  int64_t steps_per_epoch = (static_cast<int64_t>(train.size()) + batch - 1) / batch;
  int64_t total_steps = steps_per_epoch * opts.epochs;
  int64_t warmup = opts.warmup_steps > 0 ? opts.warmup_steps : std::max<int64_t>(1, total_steps / 10);
  nn::LrSchedule sched{opts.peak_lr, warmup, total_steps};

  std::vector<EpochLog> out;
  int stop = opts.stop_epoch < 0 ? opts.epochs : std::min(opts.stop_epoch, opts.epochs);
  for (int epoch = opts.start_epoch; epoch < stop; ++epoch) {
    std::vector<size_t> order(train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng(opts.seed).fork(1000 + static_cast<uint64_t>(epoch)).shuffle(order);

    double epoch_nll = 0.0;
    size_t seen = 0;
    for (size_t b0 = 0; b0 < order.size(); b0 += static_cast<size_t>(batch)) {
      size_t b1 = std::min(order.size(), b0 + static_cast<size_t>(batch));
      nn::Graph<float> g;
      nn::NodeId sum{-1};
      for (size_t i = b0; i < b1; ++i) {
        nn::NodeId nll = model.seq_nll(g, ps, train[order[i]]);
        sum = i == b0 ? nll : g.add(sum, nll);
      }
      nn::NodeId loss = g.scale(sum, 1.0f / static_cast<float>(b1 - b0));
      epoch_nll += static_cast<double>(g.value(loss)[0]) * static_cast<double>(b1 - b0);
      seen += b1 - b0;
      g.backward(loss);
      opt.step(ps, sched.at(opt.steps_taken() + 1));
      ps.zero_grads();
    }

    EpochLog el;
    el.epoch = epoch;
    el.train_nll = epoch_nll / static_cast<double>(seen);
    el.val_nll = val.empty() ? 0.0 : -avg_loglik(model, ps, val);
    out.push_back(el);
    if (log) {
      (*log) << "epoch " << epoch << " train_nll " << std::fixed << std::setprecision(6)
             << el.train_nll << " val_nll " << el.val_nll << "\n";
    }
  }
  return out;
}

void save_checkpoint(const std::string& path, const PlmConfig& cfg,
                     const nn::ParamStore<float>& ps, const nn::Adam<float>& opt,
                     const std::map<std::string, std::string>& extra_config) {
  std::map<std::string, std::string> kv = cfg.to_kv();
  for (const auto& [k, v] : extra_config) kv[k] = v;
  kv["adam.steps"] = std::to_string(opt.steps_taken());
  // Moment blocks follow parameter-store order so the file is byte-stable.
  std::vector<nn::WeightsFile::Block> extra;
  for (const auto& up : ps) {
    auto it = opt.slots().find(up->name);
    if (it == opt.slots().end()) continue;
    int64_t n = static_cast<int64_t>(it->second.m.size());
    extra.push_back({"adam.m." + up->name, {n}, it->second.m});
    extra.push_back({"adam.v." + up->name, {n}, it->second.v});
  }
  save_weights(path, kv, ps, extra);
}

Checkpoint load_checkpoint(const std::string& path, nn::ParamStore<float>& ps,
                           nn::Adam<float>* opt) {
  nn::WeightsFile wf = nn::load_weights(path);
  Checkpoint ck;
  ck.cfg = PlmConfig::from_kv(wf.config);
  ck.config_kv = wf.config;
  if (ps.size() == 0) {
    Rng scratch(0);
    Gpt<float>(ck.cfg).init(ps, scratch);
  }
  nn::fill_params(wf, ps);
  if (opt) {
    auto it = wf.config.find("adam.steps");
    if (it != wf.config.end()) opt->set_steps_taken(std::stoll(it->second));
    for (const auto& up : ps) {
      for (const auto& b : wf.blocks) {
        if (b.name == "adam.m." + up->name) {
          const auto& v = wf.find("adam.v." + up->name);
          opt->set_slot(up->name, b.data, v.data);
        }
      }
    }
  }
  return ck;
}

}  // namespace curekit::plm
