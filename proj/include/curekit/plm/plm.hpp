#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "curekit/nn/adam.hpp"
#include "curekit/nn/graph.hpp"
#include "curekit/nn/tensor.hpp"
#include "curekit/nn/weights_io.hpp"
#include "curekit/util/errors.hpp"
#include "curekit/util/rng.hpp"

namespace curekit::plm {

struct SequenceTooLong : DataError {
  explicit SequenceTooLong(const std::string& msg) : DataError(msg) {}
};
struct SequenceTooShort : DataError {
  explicit SequenceTooShort(const std::string& msg) : DataError(msg) {}
};

struct PlmConfig {
  int embed_dim = 64;
  int n_layers = 2;
  int n_heads = 2;
  int max_seq_len = 256;
  int vocab_size = 0;

  void validate() const {
    if (vocab_size < 8) throw DataError("language model: vocab_size must cover the specials");
    if (embed_dim < 1 || n_layers < 1 || n_heads < 1 || max_seq_len < 2)
      throw DataError("language model: non-positive dimension in config");
    if (embed_dim % n_heads != 0)
      throw DataError("language model: embed_dim " + std::to_string(embed_dim) +
                      " not divisible by n_heads " + std::to_string(n_heads));
  }

  std::map<std::string, std::string> to_kv() const;
  static PlmConfig from_kv(const std::map<std::string, std::string>& kv);
};

// Decoder-only causal language model: learned token + position embeddings,
// pre-norm blocks of multi-head self-attention and a GELU feed-forward,
// untied output projection. All methods build onto a caller-owned graph,
// so larger models can stack on the hidden states and backpropagate
// through the whole assembly.
template <typename T>
class Gpt {
 public:
  explicit Gpt(PlmConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const PlmConfig& config() const { return cfg_; }

  // Creates all parameters (randomly initialized) in the store.
  void init(nn::ParamStore<T>& ps, Rng& rng) const {
    int d = cfg_.embed_dim, dh = d / cfg_.n_heads, ff = 4 * d;
    ps.create_uniform("plm.tok_emb", {cfg_.vocab_size, d}, rng);
    ps.create_uniform("plm.pos_emb", {cfg_.max_seq_len, d}, rng);
    for (int l = 0; l < cfg_.n_layers; ++l) {
      std::string p = "plm.L" + std::to_string(l) + ".";
      ones(ps.create(p + "ln1.g", {1, d}));
      ps.create(p + "ln1.b", {1, d});
      for (int h = 0; h < cfg_.n_heads; ++h) {
        std::string hp = p + "h" + std::to_string(h) + ".";
        ps.create_proj(hp + "wq", {d, dh}, d, rng);
        ps.create_proj(hp + "wk", {d, dh}, d, rng);
        ps.create_proj(hp + "wv", {d, dh}, d, rng);
      }
      ps.create_proj(p + "attn.wo", {d, d}, d, rng);
      ps.create(p + "attn.bo", {1, d});
      ones(ps.create(p + "ln2.g", {1, d}));
      ps.create(p + "ln2.b", {1, d});
      ps.create_proj(p + "ffn.w1", {d, ff}, d, rng);
      ps.create(p + "ffn.b1", {1, ff});
      ps.create_proj(p + "ffn.w2", {ff, d}, ff, rng);
      ps.create(p + "ffn.b2", {1, d});
    }
    ones(ps.create("plm.ln_f.g", {1, d}));
    ps.create("plm.ln_f.b", {1, d});
    ps.create_proj("plm.out_w", {d, cfg_.vocab_size}, d, rng);
    ps.create("plm.out_b", {1, cfg_.vocab_size});
  }

  // Final hidden states, one embed_dim row per input token. Every output
  // row i depends only on ids[0..i] (causal attention throughout).
  nn::NodeId hidden(nn::Graph<T>& g, nn::ParamStore<T>& ps, std::span<const int> ids) const {
    int64_t n = static_cast<int64_t>(ids.size());
    if (n > cfg_.max_seq_len)
      throw SequenceTooLong("sequence of " + std::to_string(n) + " tokens exceeds max_seq_len " +
                            std::to_string(cfg_.max_seq_len));
    if (n < 1) throw SequenceTooShort("empty sequence");
    std::vector<int> pos(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) pos[static_cast<size_t>(i)] = static_cast<int>(i);
    nn::NodeId h = g.add(g.embedding(*ps.find("plm.tok_emb"), ids),
                         g.embedding(*ps.find("plm.pos_emb"), pos));
    for (int l = 0; l < cfg_.n_layers; ++l) {
      std::string p = "plm.L" + std::to_string(l) + ".";
      nn::NodeId a = norm(g, ps, h, p + "ln1");
      nn::NodeId cat{-1};
      for (int hd = 0; hd < cfg_.n_heads; ++hd) {
        std::string hp = p + "h" + std::to_string(hd) + ".";
        nn::NodeId q = g.matmul(a, g.param(*ps.find(hp + "wq")));
        nn::NodeId k = g.matmul(a, g.param(*ps.find(hp + "wk")));
        nn::NodeId v = g.matmul(a, g.param(*ps.find(hp + "wv")));
        nn::NodeId head = g.attention(q, k, v, /*causal=*/true);
        cat = hd == 0 ? head : g.concat_cols(cat, head);
      }
      h = g.add(h, g.linear(cat, *ps.find(p + "attn.wo"), *ps.find(p + "attn.bo")));
      nn::NodeId f = norm(g, ps, h, p + "ln2");
      f = g.gelu(g.linear(f, *ps.find(p + "ffn.w1"), *ps.find(p + "ffn.b1")));
      f = g.linear(f, *ps.find(p + "ffn.w2"), *ps.find(p + "ffn.b2"));
      h = g.add(h, f);
    }
    return norm(g, ps, h, "plm.ln_f");
  }

  // Vocabulary logits for precomputed hidden rows.
  nn::NodeId logits_from_hidden(nn::Graph<T>& g, nn::ParamStore<T>& ps, nn::NodeId h) const {
    return g.linear(h, *ps.find("plm.out_w"), *ps.find("plm.out_b"));
  }

  nn::NodeId logits(nn::Graph<T>& g, nn::ParamStore<T>& ps, std::span<const int> ids) const {
    return logits_from_hidden(g, ps, hidden(g, ps, ids));
  }

  // Mean negative log-likelihood of predicting ids[1..n-1] from prefixes;
  // the training objective's value is the negation of this (an average
  // log-likelihood, maximized by minimizing this node).
  nn::NodeId seq_nll(nn::Graph<T>& g, nn::ParamStore<T>& ps, std::span<const int> ids) const {
    if (ids.size() < 2) throw SequenceTooShort("need at least 2 tokens to score next-token loss");
    nn::NodeId h = hidden(g, ps, ids);
    nn::NodeId pred = g.slice_rows(h, 0, static_cast<int64_t>(ids.size()) - 1);
    nn::NodeId lg = logits_from_hidden(g, ps, pred);
    std::vector<int> targets(ids.begin() + 1, ids.end());
    return g.cross_entropy(lg, targets);
  }

 private:
  static void ones(nn::Param<T>& p) {
    for (auto& v : p.t.data) v = T(1);
  }
  nn::NodeId norm(nn::Graph<T>& g, nn::ParamStore<T>& ps, nn::NodeId x,
                  const std::string& name) const {
    return g.layer_norm(x, g.param(*ps.find(name + ".g")), g.param(*ps.find(name + ".b")));
  }

  PlmConfig cfg_;
};

// Average log-likelihood (the pre-training objective's value; higher is
// better, always <= 0 in expectation) of a dataset under the model.
double avg_loglik(const Gpt<float>& model, nn::ParamStore<float>& ps,
                  const std::vector<std::vector<int>>& data);

struct EpochLog {
  int epoch = 0;
  double train_nll = 0.0;
  double val_nll = 0.0;
};

struct PretrainOpts {
  int epochs = 5;         // total planned epochs; fixes the lr schedule
  int batch_size = 12;
  double peak_lr = 2.5e-4;
  int warmup_steps = 0;   // 0: defaults to 10% of total steps
  int start_epoch = 0;    // resume point within the plan
  int stop_epoch = -1;    // exclusive pause point; -1 runs to `epochs`
  uint64_t seed = 1;
};

// Trains with Adam under a warmup+cosine schedule; per-epoch data order,
// the schedule, and every update are functions of (seed, epoch index), so
// a run resumed from a checkpoint continues the exact same trajectory.
std::vector<EpochLog> pretrain(const Gpt<float>& model, nn::ParamStore<float>& ps,
                               nn::Adam<float>& opt, const std::vector<std::vector<int>>& train,
                               const std::vector<std::vector<int>>& val, const PretrainOpts& opts,
                               std::ostream* log = nullptr);

// Checkpoint = model config + parameters + optimizer state in one weights
// file. Loading rebuilds the store (zero-initialized then filled).
void save_checkpoint(const std::string& path, const PlmConfig& cfg,
                     const nn::ParamStore<float>& ps, const nn::Adam<float>& opt,
                     const std::map<std::string, std::string>& extra_config = {});
struct Checkpoint {
  PlmConfig cfg;
  std::map<std::string, std::string> config_kv;
};
Checkpoint load_checkpoint(const std::string& path, nn::ParamStore<float>& ps,
                           nn::Adam<float>* opt);

}  // namespace curekit::plm
