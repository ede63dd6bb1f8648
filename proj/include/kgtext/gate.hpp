#pragma once

// Copy-or-predict gate: a semantic context score over a sliding window of
// recent decoder-input embeddings, a syntax-aware gate score over the
// current word embedding / POS embedding / decoder state, and their blend
//   p_copy = lambda * x_semantic + (1 - lambda) * t_copy.
// Also the inference-time threshold rule that turns p_copy into a discrete
// copy-vs-generate decision with source provenance.

#include <map>
#include <optional>

#include "kgtext/data.hpp"
#include "kgtext/nn.hpp"

namespace kgtext {

struct GateConfig {
  int d_model = 0;
  int window = 3;                  // sliding window size w
  std::vector<int> extra_windows;  // optional multi-size ensemble (averaged)
  double lambda_blend = 0.3;
  bool use_pos = true;       // include the POS embedding term in t_copy
  bool use_semantic = true;  // blend in x_semantic; off -> p_copy = t_copy
};

// For each step k, the decoder-input token at offset o back in time
// (o = w-1 .. 0, oldest first), pad-filled before the sequence start:
// block o holds ids[k - (w-1-o)] or pad_id.
inline std::vector<std::vector<int>> window_id_blocks(const std::vector<int>& input_ids,
                                                      int steps, int w, int pad_id) {
  if (w < 1) throw UsageError("window size must be >= 1");
  if (steps > static_cast<int>(input_ids.size()))
    throw UsageError("window_id_blocks: more steps than input ids");
  std::vector<std::vector<int>> blocks(static_cast<std::size_t>(w));
  for (int o = 0; o < w; ++o) {
    int back = w - 1 - o;
    auto& blk = blocks[static_cast<std::size_t>(o)];
    for (int k = 0; k < steps; ++k)
      blk.push_back(k - back >= 0 ? input_ids[static_cast<std::size_t>(k - back)] : pad_id);
  }
  return blocks;
}

class CopyGate {
 public:
  CopyGate() = default;
  CopyGate(ParamStore& ps, const GateConfig& cfg) : cfg_(cfg) {
    if (cfg.lambda_blend < 0.0 || cfg.lambda_blend > 1.0)
      throw UsageError("gate lambda must lie in [0,1]");
    W1_ = &ps.get("gate.W1", 1, cfg.d_model, InitKind::kNormalSmall);
    W2_ = &ps.get("gate.W2", 1, cfg.d_model, InitKind::kNormalSmall);
    W3_ = &ps.get("gate.W3", 1, cfg.d_model, InitKind::kNormalSmall);
    b_ = &ps.get("gate.b", 1, 1, InitKind::kZero);
    for (int w : windows())
      sem_.emplace(w, LinearLayer(ps, "gate.sem.w" + std::to_string(w), w * cfg.d_model, 1));
  }

  const GateConfig& config() const { return cfg_; }

  std::vector<int> windows() const {
    std::vector<int> ws = {cfg_.window};
    for (int w : cfg_.extra_windows)
      if (std::find(ws.begin(), ws.end(), w) == ws.end()) ws.push_back(w);
    return ws;
  }

  // t_copy over a batch of steps: v_w, s are (K, d); v_p likewise unless the
  // POS term is disabled (pass empty Var).
  Var gate_score(Tape& t, const Var& v_w, const Var& v_p, const Var& s) const {
    Var z = t.matmul_nt(v_w, t.param(*W1_));
    if (cfg_.use_pos) {
      if (!v_p) throw UsageError("gate: POS term enabled but no POS embedding given");
      z = t.add(z, t.matmul_nt(v_p, t.param(*W2_)));
    }
    z = t.add(z, t.matmul_nt(s, t.param(*W3_)));
    MatrixXd ones = MatrixXd::Ones(z->value.rows(), 1);
    z = t.add(z, t.matmul(t.constant(ones), t.param(*b_)));
    return t.sigmoid(z);
  }

  // x_semantic over a batch of steps.  Builds window features from the
  // decoder-input embedding table: emb must map ids -> (steps, d) rows.
  Var semantic_score(Tape& t, const EmbeddingLayer& emb, const std::vector<int>& input_ids,
                     int steps, int pad_id) const {
    Var acc;
    int n = 0;
    for (int w : windows()) {
      std::vector<Var> blocks;
      for (const auto& ids : window_id_blocks(input_ids, steps, w, pad_id))
        blocks.push_back(emb.forward(t, ids));
      Var feats = t.concat_cols(blocks);  // (steps, w*d), oldest block first
      Var score = t.sigmoid(sem_.at(w).forward(t, feats));
      acc = acc ? t.add(acc, score) : score;
      ++n;
    }
    return n == 1 ? acc : t.scale(acc, 1.0 / n);
  }

  // p_copy = lambda * x_sem + (1 - lambda) * t_copy, associativity fixed.
  Var blend(Tape& t, const Var& x_sem, const Var& t_copy) const {
    if (!cfg_.use_semantic) return t_copy;
    return t.add(t.scale(x_sem, cfg_.lambda_blend), t.scale(t_copy, 1.0 - cfg_.lambda_blend));
  }

  // Binary cross-entropy against 0/1 copy labels, summed over steps.
  Var loss(Tape& t, const Var& p_copy, const std::vector<int>& labels) const {
    return t.bce_sum(p_copy, labels);
  }

 private:
  GateConfig cfg_;
  Parameter* W1_ = nullptr;
  Parameter* W2_ = nullptr;
  Parameter* W3_ = nullptr;
  Parameter* b_ = nullptr;
  std::map<int, LinearLayer> sem_;
};

// ---------------------------------------------------------------------------
// Inference-time discrete choice.

struct CopyDecision {
  double t_copy = 0.0;
  double x_sem = 0.0;
  double p_copy = 0.0;
  bool copied = false;
  std::string token;     // emitted surface form
  int token_id = -1;     // vocabulary id fed back into the decoder
  int source_index = -1; // position in the linearized input when copied
  int source_slot = -1;  // triplet slot when copied
  bool fallback = false; // copy requested but no attendable source token
};

// Threshold rule: copy when p_copy >= threshold, emitting the source token
// with maximal attention among non-marker positions (ties -> lower index);
// otherwise emit the argmax generated token.  A threshold above 1 disables
// copying entirely.
inline CopyDecision select_token(double p_copy, double x_sem, double t_copy,
                                 const Eigen::VectorXd& word_logp,
                                 const Eigen::VectorXd& attn, const LinearizedKG& lin,
                                 const Vocabulary& vocab, double threshold) {
  CopyDecision d;
  d.p_copy = p_copy;
  d.x_sem = x_sem;
  d.t_copy = t_copy;
  if (p_copy >= threshold) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(lin.provenance.size()); ++i) {
      if (lin.provenance[static_cast<std::size_t>(i)] < 0) continue;  // marker/pad
      if (best < 0 || attn(i) > attn(best)) best = i;  // strict > keeps lower index on ties
    }
    if (best >= 0) {
      d.copied = true;
      d.source_index = best;
      d.source_slot = lin.provenance[static_cast<std::size_t>(best)];
      d.token = lin.surfaces[static_cast<std::size_t>(best)];
      d.token_id = lin.tokens[static_cast<std::size_t>(best)];
      return d;
    }
    d.fallback = true;  // nothing attendable; fall through to generation
  }
  int best_v = 0;
  for (int v2 = 1; v2 < word_logp.size(); ++v2)
    if (word_logp(v2) > word_logp(best_v)) best_v = v2;
  d.copied = false;
  d.token_id = best_v;
  d.token = vocab.token(best_v);
  return d;
}

}  // namespace kgtext
