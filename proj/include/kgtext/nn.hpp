#pragma once

// Neural network building blocks on top of the autodiff tape: a named
// parameter store with deterministic per-name initialization, linear /
// layernorm / embedding layers, multi-head attention with windowed
// relative-position biases, and pre-norm transformer encoder/decoder
// stacks.
//
// Every parameter is initialized from an RNG stream derived from
// (store seed, parameter name), so initialization is independent of
// creation order and identical across runs.

#include <map>
#include <string>
#include <vector>

#include "kgtext/autodiff.hpp"
#include "kgtext/common.hpp"

namespace kgtext {

enum class InitKind { kNormalSmall, kZero, kOne };

class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

  Parameter& get(const std::string& name, int rows, int cols, InitKind kind) {
    auto it = params_.find(name);
    if (it != params_.end()) {
      if (it->second.value.rows() != rows || it->second.value.cols() != cols)
        throw UsageError("parameter shape mismatch for " + name);
      return it->second;
    }
    Parameter p;
    p.name = name;
    p.value = MatrixXd(rows, cols);
    switch (kind) {
      case InitKind::kZero:
        p.value.setZero();
        break;
      case InitKind::kOne:
        p.value.setOnes();
        break;
      case InitKind::kNormalSmall: {
        std::mt19937_64 rng = make_rng(seed_, name);
        std::normal_distribution<double> d(0.0, 0.02);
        for (Eigen::Index i = 0; i < p.value.rows(); ++i)
          for (Eigen::Index j = 0; j < p.value.cols(); ++j) p.value(i, j) = d(rng);
        break;
      }
    }
    p.zero_grad();
    p.m = MatrixXd::Zero(rows, cols);
    p.v = MatrixXd::Zero(rows, cols);
    return params_.emplace(name, std::move(p)).first->second;
  }

  std::map<std::string, Parameter>& all() { return params_; }
  const std::map<std::string, Parameter>& all() const { return params_; }
  std::uint64_t seed() const { return seed_; }

  void zero_grads() {
    for (auto& [n, p] : params_) p.zero_grad();
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, p] : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

 private:
  std::map<std::string, Parameter> params_;
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Layers.  Each holds stable pointers into the ParamStore (std::map nodes
// never move) and is cheap to copy.

struct LinearLayer {
  Parameter* W = nullptr;
  Parameter* b = nullptr;

  LinearLayer() = default;
  LinearLayer(ParamStore& ps, const std::string& prefix, int in, int out)
      : W(&ps.get(prefix + ".W", out, in, InitKind::kNormalSmall)),
        b(&ps.get(prefix + ".b", 1, out, InitKind::kZero)) {}

  Var forward(Tape& t, const Var& x) const {
    return t.linear(x, t.param(*W), t.param(*b));
  }
};

struct LayerNormLayer {
  Parameter* g = nullptr;
  Parameter* b = nullptr;

  LayerNormLayer() = default;
  LayerNormLayer(ParamStore& ps, const std::string& prefix, int d)
      : g(&ps.get(prefix + ".g", 1, d, InitKind::kOne)),
        b(&ps.get(prefix + ".b", 1, d, InitKind::kZero)) {}

  Var forward(Tape& t, const Var& x) const {
    return t.layernorm(x, t.param(*g), t.param(*b));
  }
};

struct EmbeddingLayer {
  Parameter* table = nullptr;

  EmbeddingLayer() = default;
  EmbeddingLayer(ParamStore& ps, const std::string& name, int vocab, int d)
      : table(&ps.get(name, vocab, d, InitKind::kNormalSmall)) {}

  Var forward(Tape& t, const std::vector<int>& ids) const {
    return t.gather_rows(t.param(*table), ids);
  }
};

inline MatrixXd causal_mask(int T) {
  MatrixXd m = MatrixXd::Zero(T, T);
  for (int i = 0; i < T; ++i)
    for (int j = i + 1; j < T; ++j) m(i, j) = -1e9;
  return m;
}

// Multi-head attention.  Self-attention adds a learned relative-position
// bias per head over offsets clipped to [-window, window] and an optional
// causal mask; cross-attention uses plain scaled dot-product and can
// expose head-averaged attention weights (values only, for the copy gate).
struct AttentionBlock {
  LinearLayer q, k, v, o;
  Parameter* rel_bias = nullptr;  // (n_heads, rel_n_buckets(window)); self-attn only
  int n_heads = 1;
  int d_model = 0;
  int window = 0;

  AttentionBlock() = default;
  AttentionBlock(ParamStore& ps, const std::string& prefix, int d, int heads, int rel_window)
      : q(ps, prefix + ".q", d, d),
        k(ps, prefix + ".k", d, d),
        v(ps, prefix + ".v", d, d),
        o(ps, prefix + ".o", d, d),
        n_heads(heads),
        d_model(d),
        window(rel_window) {
    if (d % heads != 0) throw UsageError("d_model must be divisible by n_heads");
    if (rel_window > 0)
      rel_bias = &ps.get(prefix + ".relb", heads, rel_n_buckets(rel_window), InitKind::kZero);
  }

  Var self_forward(Tape& t, const Var& x, bool causal) const {
    const int T = static_cast<int>(x->value.rows());
    const int dk = d_model / n_heads;
    Var Q = q.forward(t, x), K = k.forward(t, x), V = v.forward(t, x);
    Var relb = rel_bias ? t.param(*rel_bias) : nullptr;
    MatrixXd cm;
    if (causal) cm = causal_mask(T);
    std::vector<Var> heads;
    for (int h = 0; h < n_heads; ++h) {
      Var Qh = t.slice_cols(Q, h * dk, dk);
      Var Kh = t.slice_cols(K, h * dk, dk);
      Var Vh = t.slice_cols(V, h * dk, dk);
      Var S = t.scale(t.matmul_nt(Qh, Kh), 1.0 / std::sqrt(static_cast<double>(dk)));
      if (relb) S = t.add_rel_bias(S, relb, h, window);
      if (causal) S = t.add_const(S, cm);
      heads.push_back(t.matmul(t.softmax_rows(S), Vh));
    }
    return o.forward(t, t.concat_cols(heads));
  }

  // mem provides keys/values; attn_avg (optional) receives the
  // head-averaged attention weight matrix (T_q, T_mem).
  Var cross_forward(Tape& t, const Var& x, const Var& mem, MatrixXd* attn_avg = nullptr) const {
    const int dk = d_model / n_heads;
    Var Q = q.forward(t, x), K = k.forward(t, mem), V = v.forward(t, mem);
    std::vector<Var> heads;
    MatrixXd avg;
    for (int h = 0; h < n_heads; ++h) {
      Var Qh = t.slice_cols(Q, h * dk, dk);
      Var Kh = t.slice_cols(K, h * dk, dk);
      Var Vh = t.slice_cols(V, h * dk, dk);
      Var S = t.scale(t.matmul_nt(Qh, Kh), 1.0 / std::sqrt(static_cast<double>(dk)));
      Var A = t.softmax_rows(S);
      if (attn_avg) {
        if (h == 0)
          avg = A->value;
        else
          avg += A->value;
      }
      heads.push_back(t.matmul(A, Vh));
    }
    if (attn_avg) *attn_avg = avg / static_cast<double>(n_heads);
    return o.forward(t, t.concat_cols(heads));
  }
};

struct FeedForward {
  LinearLayer up, down;

  FeedForward() = default;
  FeedForward(ParamStore& ps, const std::string& prefix, int d, int ff)
      : up(ps, prefix + ".up", d, ff), down(ps, prefix + ".down", ff, d) {}

  Var forward(Tape& t, const Var& x) const {
    return down.forward(t, t.gelu(up.forward(t, x)));
  }
};

// Pre-norm encoder layer: x += SelfAttn(LN(x)); x += FFN(LN(x)).
struct EncoderLayer {
  LayerNormLayer ln1, ln2;
  AttentionBlock attn;
  FeedForward ffn;

  EncoderLayer() = default;
  EncoderLayer(ParamStore& ps, const std::string& prefix, int d, int heads, int ff, int window)
      : ln1(ps, prefix + ".ln1", d),
        ln2(ps, prefix + ".ln2", d),
        attn(ps, prefix + ".attn", d, heads, window),
        ffn(ps, prefix + ".ffn", d, ff) {}

  Var forward(Tape& t, Var x) const {
    x = t.add(x, attn.self_forward(t, ln1.forward(t, x), /*causal=*/false));
    x = t.add(x, ffn.forward(t, ln2.forward(t, x)));
    return x;
  }
};

struct TransformerEncoder {
  std::vector<EncoderLayer> layers;
  LayerNormLayer final_ln;

  TransformerEncoder() = default;
  TransformerEncoder(ParamStore& ps, const std::string& prefix, int n_layers, int d, int heads,
                     int ff, int window) {
    for (int l = 0; l < n_layers; ++l)
      layers.emplace_back(ps, prefix + ".layer" + std::to_string(l), d, heads, ff, window);
    final_ln = LayerNormLayer(ps, prefix + ".final_ln", d);
  }

  Var forward(Tape& t, Var x) const {
    for (const EncoderLayer& l : layers) x = l.forward(t, x);
    return final_ln.forward(t, x);
  }
};

// Pre-norm decoder layer: causal self-attention, cross-attention, FFN.
struct DecoderLayer {
  LayerNormLayer ln1, ln2, ln3;
  AttentionBlock self_attn, cross_attn;
  FeedForward ffn;

  DecoderLayer() = default;
  DecoderLayer(ParamStore& ps, const std::string& prefix, int d, int heads, int ff, int window)
      : ln1(ps, prefix + ".ln1", d),
        ln2(ps, prefix + ".ln2", d),
        ln3(ps, prefix + ".ln3", d),
        self_attn(ps, prefix + ".self", d, heads, window),
        cross_attn(ps, prefix + ".cross", d, heads, /*rel_window=*/0),
        ffn(ps, prefix + ".ffn", d, ff) {}

  Var forward(Tape& t, Var x, const Var& mem, MatrixXd* attn_avg = nullptr) const {
    x = t.add(x, self_attn.self_forward(t, ln1.forward(t, x), /*causal=*/true));
    x = t.add(x, cross_attn.cross_forward(t, ln2.forward(t, x), mem, attn_avg));
    x = t.add(x, ffn.forward(t, ln3.forward(t, x)));
    return x;
  }
};

struct TransformerDecoder {
  std::vector<DecoderLayer> layers;
  LayerNormLayer final_ln;

  TransformerDecoder() = default;
  TransformerDecoder(ParamStore& ps, const std::string& prefix, int n_layers, int d, int heads,
                     int ff, int window) {
    for (int l = 0; l < n_layers; ++l)
      layers.emplace_back(ps, prefix + ".layer" + std::to_string(l), d, heads, ff, window);
    final_ln = LayerNormLayer(ps, prefix + ".final_ln", d);
  }

  // attn_avg (optional) receives head-averaged cross-attention weights from
  // the last layer.
  Var forward(Tape& t, Var x, const Var& mem, MatrixXd* attn_avg = nullptr) const {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      MatrixXd* sink = (attn_avg && l + 1 == layers.size()) ? attn_avg : nullptr;
      x = layers[l].forward(t, x, mem, sink);
    }
    return final_ln.forward(t, x);
  }
};

}  // namespace kgtext
