#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "curekit/corpus/corpus.hpp"
#include "curekit/nn/adam.hpp"
#include "curekit/nn/graph.hpp"
#include "curekit/plm/plm.hpp"
#include "curekit/util/errors.hpp"
#include "curekit/util/rng.hpp"

namespace curekit::apr {

struct SpanMismatch : DataError {
  explicit SpanMismatch(const std::string& msg) : DataError(msg) {}
};

// Searched hyperparameters of the translation network. Desk-scale ranges;
// the corresponding full-scale ranges are conv_dim 128-512, kernel 2-10,
// layers 1-5, dropout 0-0.5.
struct AprHyperparams {
  int conv_dim = 32;
  int kernel_size = 3;
  int n_conv_layers = 1;
  double dropout = 0.0;
  double lambda = 0.3;  // auxiliary language-model loss coefficient
};

// Dual-encoder: separate convolutional encoders over the buggy-line span
// and the full method, merged by mean-pool + feature concat + projection.
// Single-encoder: one stream context ++ <SEP> ++ buggy-line.
enum class Variant { DualEncoder, SingleEncoder };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& s);

struct AprConfig {
  plm::PlmConfig plm;
  AprHyperparams hp;
  Variant variant = Variant::DualEncoder;
  // When false the network runs from a plain learned token embedding
  // instead of language-model hidden states, and the auxiliary loss term
  // is absent (the "no pre-training" ablation).
  bool use_plm = true;

  std::map<std::string, std::string> to_kv() const;
  static AprConfig from_kv(const std::map<std::string, std::string>& kv);
};

// The repair network. Builds onto a caller-owned graph so losses compose
// and the whole assembly (language model included) trains end-to-end.
template <typename T>
class AprModel {
 public:
  explicit AprModel(AprConfig cfg) : cfg_(cfg), gpt_(cfg.plm) {}

  const AprConfig& config() const { return cfg_; }

  void init(nn::ParamStore<T>& ps, Rng& rng) const {
    int d = cfg_.plm.embed_dim, c = cfg_.hp.conv_dim, kw = cfg_.hp.kernel_size;
    int v = cfg_.plm.vocab_size;
    if (cfg_.use_plm) {
      gpt_.init(ps, rng);
    } else {
      ps.create_uniform("apr.emb", {v, d}, rng);
    }
    if (cfg_.variant == Variant::DualEncoder) {
      init_conv_stack(ps, rng, "apr.enc1", d, c, kw);
      init_conv_stack(ps, rng, "apr.enc2", d, c, kw);
      ps.create_proj("apr.merge.w", {2 * c, c}, 2 * c, rng);
      ps.create("apr.merge.b", {1, c});
    } else {
      init_conv_stack(ps, rng, "apr.enc", d, c, kw);
    }
    init_conv_stack(ps, rng, "apr.dec", d, c, kw);
    ps.create_proj("apr.gen1.w", {2 * c, 2 * c}, 2 * c, rng);
    ps.create("apr.gen1.b", {1, 2 * c});
    ps.create_proj("apr.out.w", {c, v}, c, rng);
    ps.create("apr.out.b", {1, v});
  }

  // Encoder memory for one example: every decode step attends over this.
  // Does not depend on the fix, so searches compute it once per bug.
  nn::NodeId encode_context(nn::Graph<T>& g, nn::ParamStore<T>& ps,
                            const corpus::PatchExample& ex, Rng* drop) const {
    check_span(ex);
    if (cfg_.variant == Variant::DualEncoder) {
      nn::NodeId h = embed(g, ps, ex.context_ids);
      nn::NodeId hb = g.slice_rows(h, static_cast<int64_t>(ex.b1),
                                   static_cast<int64_t>(ex.bn - ex.b1 + 1));
      nn::NodeId e1 = conv_stack(g, ps, "apr.enc1", hb, /*causal=*/false, drop);
      nn::NodeId e2 = conv_stack(g, ps, "apr.enc2", h, /*causal=*/false, drop);
      nn::NodeId pooled = g.broadcast_row(g.mean_rows(e1), g.shape(e2)[0]);
      return g.linear(g.concat_cols(pooled, e2), *ps.find("apr.merge.w"),
                      *ps.find("apr.merge.b"));
    }
    std::vector<int> stream(ex.context_ids);
    stream.push_back(tok::kSepId);
    stream.insert(stream.end(), ex.context_ids.begin() + static_cast<long>(ex.b1),
                  ex.context_ids.begin() + static_cast<long>(ex.bn) + 1);
    nn::NodeId h = embed(g, ps, stream);
    return conv_stack(g, ps, "apr.enc", h, /*causal=*/false, drop);
  }

  // Teacher-forced decoder logits over the fix: row i predicts fix_ids[i]
  // from (y0, fix_ids[0..i-1]) and the encoder memory.
  nn::NodeId fix_logits(nn::Graph<T>& g, nn::ParamStore<T>& ps, const corpus::PatchExample& ex,
                        nn::NodeId memory, Rng* drop) const {
    std::vector<int> inputs;
    inputs.push_back(ex.context_ids[ex.y0_index()]);
    inputs.insert(inputs.end(), ex.fix_ids.begin(), ex.fix_ids.end() - 1);
    return decode(g, ps, ex, inputs, memory, drop);
  }

  // Eq.-style translation loss: mean NLL of the fix tokens (terminator
  // included) under teacher forcing.
  nn::NodeId nmt_nll(nn::Graph<T>& g, nn::ParamStore<T>& ps, const corpus::PatchExample& ex,
                     Rng* drop = nullptr) const {
    nn::NodeId memory = encode_context(g, ps, ex, drop);
    nn::NodeId lg = fix_logits(g, ps, ex, memory, drop);
    return g.cross_entropy(lg, ex.fix_ids);
  }

  // Combined fine-tuning loss: nmt_nll plus lambda times the language
  // model's NLL of y' = (context prefix through y0) ++ fix. Without the
  // language model this is exactly nmt_nll.
  nn::NodeId combined_nll(nn::Graph<T>& g, nn::ParamStore<T>& ps, const corpus::PatchExample& ex,
                          Rng* drop = nullptr) const {
    nn::NodeId nmt = nmt_nll(g, ps, ex, drop);
    if (!cfg_.use_plm || cfg_.hp.lambda == 0.0) return nmt;
    std::vector<int> yprime = yprime_ids(ex);
    nn::NodeId aux = gpt_.seq_nll(g, ps, yprime);
    return g.add_scaled(nmt, aux, static_cast<T>(cfg_.hp.lambda));
  }

  // Next-token log-probabilities after a partial fix. partial_fix[0] must
  // be y0 (the context token right before the buggy span); generated
  // tokens follow. `memory` may be cached from encode_context on a
  // previous graph; pass its values through `constant` for reuse.
  std::vector<T> step_logprobs(nn::ParamStore<T>& ps, const corpus::PatchExample& ex,
                               std::span<const int> partial_fix,
                               const std::vector<T>* cached_memory = nullptr) const {
    check_span(ex);
    if (partial_fix.empty() || partial_fix[0] != ex.context_ids[ex.y0_index()])
      throw DataError("partial fix must start with the token before the buggy span");
    nn::Graph<T> g;
    nn::NodeId memory = cached_memory
                            ? g.constant({static_cast<int64_t>(cached_memory->size()) /
                                              cfg_.hp.conv_dim,
                                          cfg_.hp.conv_dim},
                                         *cached_memory)
                            : encode_context(g, ps, ex, nullptr);
    std::vector<int> inputs(partial_fix.begin(), partial_fix.end());
    nn::NodeId lg = decode(g, ps, ex, inputs, memory, nullptr);
    nn::NodeId lp = g.log_softmax(lg);
    const auto& v = g.value(lp);
    size_t n = static_cast<size_t>(g.shape(lp)[0]);
    size_t vs = static_cast<size_t>(cfg_.plm.vocab_size);
    return std::vector<T>(v.begin() + static_cast<long>((n - 1) * vs), v.end());
  }

  // Plain values of the encoder memory, for caching across decode steps.
  std::vector<T> memory_values(nn::ParamStore<T>& ps, const corpus::PatchExample& ex) const {
    nn::Graph<T> g;
    nn::NodeId m = encode_context(g, ps, ex, nullptr);
    return g.value(m);
  }

  std::vector<int> yprime_ids(const corpus::PatchExample& ex) const {
    std::vector<int> y(ex.context_ids.begin(), ex.context_ids.begin() + static_cast<long>(ex.b1));
    y.insert(y.end(), ex.fix_ids.begin(), ex.fix_ids.end());
    return y;
  }

 private:
  void check_span(const corpus::PatchExample& ex) const {
    if (ex.b1 < 1 || ex.bn < ex.b1 || ex.bn >= ex.context_ids.size())
      throw SpanMismatch("buggy span " + std::to_string(ex.b1) + ".." + std::to_string(ex.bn) +
                         " does not fit a context of " + std::to_string(ex.context_ids.size()) +
                         " tokens");
  }

  // Token representations: language-model hidden states or a plain
  // embedding table, depending on configuration.
  nn::NodeId embed(nn::Graph<T>& g, nn::ParamStore<T>& ps, std::span<const int> ids) const {
    if (cfg_.use_plm) return gpt_.hidden(g, ps, ids);
    return g.embedding(*ps.find("apr.emb"), ids);
  }

  void init_conv_stack(nn::ParamStore<T>& ps, Rng& rng, const std::string& name, int d, int c,
                       int kw) const {
    ps.create_proj(name + ".in_w", {d, c}, d, rng);
    ps.create(name + ".in_b", {1, c});
    for (int l = 0; l < cfg_.hp.n_conv_layers; ++l) {
      std::string p = name + ".L" + std::to_string(l);
      ps.create_proj(p + ".w", {kw, c, 2 * c}, kw * c, rng);
      ps.create(p + ".b", {1, 2 * c});
    }
  }

  // Input projection followed by gated convolution layers with residual
  // connections. Causal stacks pad only on the left, so output row i sees
  // input rows <= i. Dropout (training only) hits the projected embedding
  // and each layer's gated output.
  nn::NodeId conv_stack(nn::Graph<T>& g, nn::ParamStore<T>& ps, const std::string& name,
                        nn::NodeId x, bool causal, Rng* drop) const {
    int kw = cfg_.hp.kernel_size;
    nn::NodeId h = g.linear(x, *ps.find(name + ".in_w"), *ps.find(name + ".in_b"));
    h = maybe_dropout(g, h, drop);
    for (int l = 0; l < cfg_.hp.n_conv_layers; ++l) {
      std::string p = name + ".L" + std::to_string(l);
      int64_t pl = causal ? kw - 1 : (kw - 1) / 2;
      int64_t pr = causal ? 0 : (kw - 1) - pl;
      nn::NodeId y =
          g.glu(g.conv1d(h, g.param(*ps.find(p + ".w")), g.param(*ps.find(p + ".b")), kw, pl, pr));
      y = maybe_dropout(g, y, drop);
      h = g.add(h, y);
    }
    return h;
  }

  // Causal decoder + single-head attention over the memory + gated
  // generator head.
  nn::NodeId decode(nn::Graph<T>& g, nn::ParamStore<T>& ps, const corpus::PatchExample& ex,
                    std::span<const int> input_ids, nn::NodeId memory, Rng* drop) const {
    nn::NodeId din;
    if (cfg_.use_plm) {
      std::vector<int> yprime(ex.context_ids.begin(),
                              ex.context_ids.begin() + static_cast<long>(ex.b1) - 1);
      yprime.insert(yprime.end(), input_ids.begin(), input_ids.end());
      nn::NodeId p = gpt_.hidden(g, ps, yprime);
      din = g.slice_rows(p, static_cast<int64_t>(ex.b1) - 1,
                         static_cast<int64_t>(input_ids.size()));
    } else {
      din = g.embedding(*ps.find("apr.emb"), input_ids);
    }
    nn::NodeId d = conv_stack(g, ps, "apr.dec", din, /*causal=*/true, drop);
    nn::NodeId c = g.attention(d, memory, memory, /*causal=*/false);
    nn::NodeId gen =
        g.glu(g.linear(g.concat_cols(d, c), *ps.find("apr.gen1.w"), *ps.find("apr.gen1.b")));
    return g.linear(gen, *ps.find("apr.out.w"), *ps.find("apr.out.b"));
  }

  nn::NodeId maybe_dropout(nn::Graph<T>& g, nn::NodeId x, Rng* drop) const {
    if (!drop || cfg_.hp.dropout <= 0.0) return x;
    return g.dropout(x, cfg_.hp.dropout, *drop);
  }

  AprConfig cfg_;
  plm::Gpt<T> gpt_;
};

// ---- training and search (float only) ----

struct FinetuneOpts {
  int epochs = 1;
  int batch_size = 12;
  double lr = 6.25e-5;
  uint64_t seed = 1;
};

struct FinetuneLog {
  int epoch = 0;
  double train_nll = 0.0;       // combined objective
  double val_perplexity = 0.0;  // exp(mean translation NLL) on validation
};

// Fine-tunes all parameters (language model included) with the combined
// objective at a constant learning rate.
std::vector<FinetuneLog> finetune(const AprModel<float>& model, nn::ParamStore<float>& ps,
                                  const std::vector<corpus::PatchExample>& train,
                                  const std::vector<corpus::PatchExample>& val,
                                  const FinetuneOpts& opts, std::ostream* log = nullptr);

double val_perplexity(const AprModel<float>& model, nn::ParamStore<float>& ps,
                      const std::vector<corpus::PatchExample>& val);

struct SearchSpace {
  int conv_dim_lo = 16, conv_dim_hi = 64;
  int kernel_lo = 2, kernel_hi = 5;
  int layers_lo = 1, layers_hi = 2;
  double dropout_lo = 0.0, dropout_hi = 0.5;
  // Fixed by default; widen to search the auxiliary-loss weight too.
  double lambda_lo = 0.3, lambda_hi = 0.3;
};

AprHyperparams sample_hyperparams(const SearchSpace& space, Rng& rng);

struct TrialResult {
  int trial = 0;
  AprHyperparams hp;
  Variant variant = Variant::DualEncoder;
  double val_perplexity = 0.0;
};

// Random hyperparameter search: alternates architecture variants across
// trials, fine-tunes each sampled config from the given pre-trained
// language-model weights for `opts.epochs`, and returns the k best by
// validation perplexity, split between the two variants. Appends one JSON
// line per trial to `log` when given.
std::vector<TrialResult> random_search(const plm::PlmConfig& plm_cfg,
                                       const std::string& plm_weights_path,
                                       const std::vector<corpus::PatchExample>& train,
                                       const std::vector<corpus::PatchExample>& val,
                                       const SearchSpace& space, int n_trials, int k,
                                       const FinetuneOpts& opts, std::ostream* log = nullptr);

// Weights round trip including the full model configuration.
void save_apr(const std::string& path, const AprConfig& cfg, const nn::ParamStore<float>& ps);
AprConfig load_apr(const std::string& path, nn::ParamStore<float>& ps);

}  // namespace curekit::apr
