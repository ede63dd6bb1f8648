#pragma once

// The generation model: a word encoder over the linearized graph, a POS
// branch (own encoder + decoder over the same source), per-position fusion
//   fused_i = LayerNorm(Affine([w_i ; p_i]) + w_i),
// a word decoder with cross-attention into the fused states, and the copy
// gate.  Provides a teacher-forced training pass producing the three
// sequence losses, plus value-only source encoding and stepping for
// decoding.

#include <json.hpp>

#include "kgtext/gate.hpp"
#include "kgtext/nn.hpp"
#include "kgtext/pos.hpp"
#include "kgtext/vocab.hpp"

namespace kgtext {

struct ModelConfig {
  int d_model = 128;
  int n_enc_layers = 2;
  int n_dec_layers = 2;
  int n_heads = 4;
  int d_ff = 256;
  int m_max = 256;   // max source (linearized) length
  int k_max = 64;    // max target length
  int rel_window = 8;
  double dropout = 0.0;
  int vocab_size = 0;
  int tagset_size = PosTagset::size();

  // copy gate
  int window = 3;
  std::vector<int> extra_windows;
  double lambda_blend = 0.3;
  double copy_threshold = 0.5;

  // structure switches (resolved from ablation flags before construction)
  std::string pos_scope = "local";  // local | global
  bool use_copy = true;
  bool use_pos_branch = true;
  bool use_pos_fusion = true;
  bool use_pos_in_gate = true;
  bool use_semantic = true;

  void validate() const {
    if (d_model <= 0 || n_heads <= 0 || d_model % n_heads != 0)
      throw UsageError("d_model must be positive and divisible by n_heads");
    if (vocab_size <= 0) throw UsageError("vocab_size must be set");
    if (m_max <= 0 || k_max <= 0 || d_ff <= 0 || rel_window < 1 || window < 1)
      throw UsageError("model dimensions must be positive");
    if (pos_scope != "local" && pos_scope != "global")
      throw UsageError("pos_scope must be local or global");
    if ((use_pos_fusion || use_pos_in_gate) && !use_pos_branch)
      throw UsageError("POS fusion/gate require the POS branch");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["d_model"] = d_model;
    j["n_enc_layers"] = n_enc_layers;
    j["n_dec_layers"] = n_dec_layers;
    j["n_heads"] = n_heads;
    j["d_ff"] = d_ff;
    j["m_max"] = m_max;
    j["k_max"] = k_max;
    j["rel_window"] = rel_window;
    j["dropout"] = dropout;
    j["vocab_size"] = vocab_size;
    j["tagset_size"] = tagset_size;
    j["window"] = window;
    j["extra_windows"] = extra_windows;
    j["lambda_blend"] = lambda_blend;
    j["copy_threshold"] = copy_threshold;
    j["pos_scope"] = pos_scope;
    j["use_copy"] = use_copy;
    j["use_pos_branch"] = use_pos_branch;
    j["use_pos_fusion"] = use_pos_fusion;
    j["use_pos_in_gate"] = use_pos_in_gate;
    j["use_semantic"] = use_semantic;
    return j;
  }

  static ModelConfig from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.d_model = j.value("d_model", c.d_model);
    c.n_enc_layers = j.value("n_enc_layers", c.n_enc_layers);
    c.n_dec_layers = j.value("n_dec_layers", c.n_dec_layers);
    c.n_heads = j.value("n_heads", c.n_heads);
    c.d_ff = j.value("d_ff", c.d_ff);
    c.m_max = j.value("m_max", c.m_max);
    c.k_max = j.value("k_max", c.k_max);
    c.rel_window = j.value("rel_window", c.rel_window);
    c.dropout = j.value("dropout", c.dropout);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.tagset_size = j.value("tagset_size", c.tagset_size);
    c.window = j.value("window", c.window);
    c.extra_windows = j.value("extra_windows", c.extra_windows);
    c.lambda_blend = j.value("lambda_blend", c.lambda_blend);
    c.copy_threshold = j.value("copy_threshold", c.copy_threshold);
    c.pos_scope = j.value("pos_scope", c.pos_scope);
    c.use_copy = j.value("use_copy", c.use_copy);
    c.use_pos_branch = j.value("use_pos_branch", c.use_pos_branch);
    c.use_pos_fusion = j.value("use_pos_fusion", c.use_pos_fusion);
    c.use_pos_in_gate = j.value("use_pos_in_gate", c.use_pos_in_gate);
    c.use_semantic = j.value("use_semantic", c.use_semantic);
    return c;
  }
};

// Value-only encoding of one source, reused across decode steps.
struct EncodedSource {
  LinearizedKG lin;
  MatrixXd fused;    // (m, d) word-decoder memory
  MatrixXd pos_mem;  // (m, d) POS-decoder memory (empty if no POS branch)
};

// Value-only outputs of one decode step.
struct InferStep {
  Eigen::VectorXd word_logp;  // (V) log-probabilities for the next token
  Eigen::VectorXd pos_logp;   // (tagset) or empty
  int pos_argmax = PosTagset::kX;
  Eigen::VectorXd attn;  // (m) head-averaged cross-attention of the last step
  double p_copy = 0.0, x_sem = 0.0, t_copy = 0.0;
};

struct TeacherForward {
  Var l_token, l_pos, l_copy;  // scalars on the tape
  int k_steps = 0;             // word/POS loss steps (M + 1)
  int m_steps = 0;             // copy loss steps (M)
  MatrixXd cross_attn;         // (K, m) head-averaged, for inspection
};

class Generator {
  static const ModelConfig& validated(const ModelConfig& cfg) {
    cfg.validate();
    return cfg;
  }

 public:
  Generator(ParamStore& ps, const ModelConfig& cfg)
      : cfg_(validated(cfg)),
        tok_emb_(ps, "gen.tok_emb", cfg.vocab_size, cfg.d_model),
        wenc_(ps, "gen.wenc", cfg.n_enc_layers, cfg.d_model, cfg.n_heads, cfg.d_ff,
              cfg.rel_window),
        wdec_(ps, "gen.wdec", cfg.n_dec_layers, cfg.d_model, cfg.n_heads, cfg.d_ff,
              cfg.rel_window),
        wout_(ps, "gen.wout", cfg.d_model, cfg.vocab_size) {
    if (cfg.use_pos_branch) {
      tag_emb_ = EmbeddingLayer(ps, "gen.tag_emb", cfg.tagset_size, cfg.d_model);
      penc_ = TransformerEncoder(ps, "gen.penc", cfg.n_enc_layers, cfg.d_model, cfg.n_heads,
                                 cfg.d_ff, cfg.rel_window);
      pdec_ = TransformerDecoder(ps, "gen.pdec", cfg.n_dec_layers, cfg.d_model, cfg.n_heads,
                                 cfg.d_ff, cfg.rel_window);
      pout_ = LinearLayer(ps, "gen.pout", cfg.d_model, cfg.tagset_size);
    }
    if (cfg.use_pos_fusion) {
      fuse_ = LinearLayer(ps, "gen.fuse", 2 * cfg.d_model, cfg.d_model);
      fuse_ln_ = LayerNormLayer(ps, "gen.fuse_ln", cfg.d_model);
    }
    if (cfg.use_copy) {
      GateConfig gc;
      gc.d_model = cfg.d_model;
      gc.window = cfg.window;
      gc.extra_windows = cfg.extra_windows;
      gc.lambda_blend = cfg.lambda_blend;
      gc.use_pos = cfg.use_pos_in_gate;
      gc.use_semantic = cfg.use_semantic;
      gate_ = CopyGate(ps, gc);
    }
  }

  const ModelConfig& config() const { return cfg_; }
  const CopyGate& gate() const { return gate_; }

  // Encoder side: word states, optional POS states, fused memory.
  Var encode(Tape& t, const std::vector<int>& src_ids, Var* pos_states_out = nullptr) const {
    if (static_cast<int>(src_ids.size()) > cfg_.m_max)
      throw DataError("source length " + std::to_string(src_ids.size()) + " exceeds m_max=" +
                      std::to_string(cfg_.m_max));
    if (src_ids.empty()) throw DataError("empty source");
    Var wi = wenc_.forward(t, tok_emb_.forward(t, src_ids));
    Var pi;
    if (cfg_.use_pos_branch) {
      pi = penc_.forward(t, tok_emb_.forward(t, src_ids));
      if (pos_states_out) *pos_states_out = pi;
    }
    if (!cfg_.use_pos_fusion) return wi;
    Var fused = fuse_.forward(t, t.concat_cols({wi, pi}));
    return fuse_ln_.forward(t, t.add(fused, wi));
  }

  // Teacher-forced pass over one example.  ref_ids are the M reference
  // token ids, tag_ids the M gold POS tags, copy_labels the M 0/1 labels.
  // Losses are sums over steps: K = M + 1 word/POS steps (the extra step
  // predicts <eos>), M copy steps.
  TeacherForward forward_teacher(Tape& t, const std::vector<int>& src_ids,
                                 const std::vector<int>& ref_ids,
                                 const std::vector<int>& tag_ids,
                                 const std::vector<int>& copy_labels,
                                 std::mt19937_64* dropout_rng = nullptr) const {
    const int M = static_cast<int>(ref_ids.size());
    if (M == 0) throw DataError("empty reference");
    if (M + 1 > cfg_.k_max)
      throw DataError("target length " + std::to_string(M + 1) + " exceeds k_max=" +
                      std::to_string(cfg_.k_max));
    if (cfg_.use_pos_branch && static_cast<int>(tag_ids.size()) != M)
      throw DataError("POS tags do not match reference length");
    if (cfg_.use_copy && static_cast<int>(copy_labels.size()) != M)
      throw DataError("copy labels do not match reference length");

    TeacherForward out;
    out.k_steps = M + 1;
    out.m_steps = M;

    Var pos_states;
    Var mem = encode(t, src_ids, &pos_states);
    if (dropout_rng && cfg_.dropout > 0.0) mem = t.dropout(mem, cfg_.dropout, *dropout_rng);

    // word decoder: inputs <bos> + ref, targets ref + <eos>
    std::vector<int> dec_in = {Vocabulary::kBos};
    dec_in.insert(dec_in.end(), ref_ids.begin(), ref_ids.end());
    std::vector<int> targets = ref_ids;
    targets.push_back(Vocabulary::kEos);

    Var dec_emb = tok_emb_.forward(t, dec_in);
    if (dropout_rng && cfg_.dropout > 0.0) dec_emb = t.dropout(dec_emb, cfg_.dropout, *dropout_rng);
    Var s = wdec_.forward(t, dec_emb, mem, &out.cross_attn);
    Var word_logp = t.log_softmax_rows(wout_.forward(t, s));
    out.l_token = t.nll_pick(word_logp, targets);

    // POS decoder: inputs <bos>-tag + tags, targets tags + <eos>-tag
    if (cfg_.use_pos_branch) {
      std::vector<int> pos_in = {PosTagset::kBos};
      pos_in.insert(pos_in.end(), tag_ids.begin(), tag_ids.end());
      std::vector<int> pos_targets = tag_ids;
      pos_targets.push_back(PosTagset::kEos);
      Var pemb = tag_emb_.forward(t, pos_in);
      Var ps_states = pdec_.forward(t, pemb, pos_states);
      Var pos_logp = t.log_softmax_rows(pout_.forward(t, ps_states));
      out.l_pos = t.nll_pick(pos_logp, pos_targets);
    } else {
      out.l_pos = t.scalar(0.0);
    }

    // copy gate over the M reference-token steps
    if (cfg_.use_copy) {
      Var v_w = t.slice_rows(dec_emb, 0, M);
      Var s_k = t.slice_rows(s, 0, M);
      Var v_p;
      if (cfg_.use_pos_in_gate) {
        if (cfg_.pos_scope == "local") {
          v_p = tag_emb_.forward(t, std::vector<int>(tag_ids.begin(), tag_ids.begin() + M));
        } else {
          std::vector<int> last(static_cast<std::size_t>(M),
                                static_cast<int>(src_ids.size()) - 1);
          v_p = t.gather_rows(pos_states, last);
        }
      }
      Var t_copy = gate_.gate_score(t, v_w, v_p, s_k);
      Var p_copy = t_copy;
      if (cfg_.use_semantic) {
        Var x_sem = gate_.semantic_score(t, tok_emb_, dec_in, M, Vocabulary::kPad);
        p_copy = gate_.blend(t, x_sem, t_copy);
      }
      out.l_copy = gate_.loss(t, p_copy, copy_labels);
    } else {
      out.l_copy = t.scalar(0.0);
    }
    return out;
  }

  // --- inference ----------------------------------------------------------

  EncodedSource encode_source(const LinearizedKG& lin) const {
    Tape t(/*grad_enabled=*/false);
    EncodedSource enc;
    enc.lin = lin;
    Var pos_states;
    Var mem = encode(t, lin.tokens, &pos_states);
    enc.fused = mem->value;
    if (cfg_.use_pos_branch) enc.pos_mem = pos_states->value;
    return enc;
  }

  // One decode step: full-prefix recompute on a forward-only tape.
  // word_prefix starts with <bos>; tag_prefix starts with the <bos> tag and
  // carries the POS decoder's own history.
  InferStep step(const EncodedSource& src, const std::vector<int>& word_prefix,
                 const std::vector<int>& tag_prefix) const {
    if (word_prefix.empty() || word_prefix.front() != Vocabulary::kBos)
      throw UsageError("word prefix must start with <bos>");
    Tape t(/*grad_enabled=*/false);
    InferStep out;
    const int K = static_cast<int>(word_prefix.size());

    Var mem = t.constant(src.fused);
    Var dec_emb = tok_emb_.forward(t, word_prefix);
    MatrixXd attn;
    Var s = wdec_.forward(t, dec_emb, mem, &attn);
    Var word_logp = t.log_softmax_rows(wout_.forward(t, s));
    out.word_logp = word_logp->value.row(K - 1).transpose();
    out.attn = attn.row(K - 1).transpose();

    Var v_p;
    if (cfg_.use_pos_branch) {
      if (static_cast<int>(tag_prefix.size()) != K)
        throw UsageError("POS prefix must be step-synchronized with the word prefix");
      Var pemb = tag_emb_.forward(t, tag_prefix);
      Var ps_states = pdec_.forward(t, pemb, t.constant(src.pos_mem));
      Var pos_logp = t.log_softmax_rows(pout_.forward(t, ps_states));
      out.pos_logp = pos_logp->value.row(K - 1).transpose();
      out.pos_argmax = 0;
      for (int c = 1; c < out.pos_logp.size(); ++c)
        if (out.pos_logp(c) > out.pos_logp(out.pos_argmax)) out.pos_argmax = c;
      if (cfg_.use_pos_in_gate) {
        if (cfg_.pos_scope == "local")
          v_p = tag_emb_.forward(t, {out.pos_argmax});
        else
          v_p = t.constant(src.pos_mem.bottomRows(1));
      }
    }

    if (cfg_.use_copy) {
      Var v_w = t.slice_rows(dec_emb, K - 1, 1);
      Var s_k = t.slice_rows(s, K - 1, 1);
      Var t_copy = gate_.gate_score(t, v_w, v_p, s_k);
      out.t_copy = t_copy->value(0, 0);
      Var p_copy = t_copy;
      if (cfg_.use_semantic) {
        // windows look at the last w decoder inputs ending at this step
        std::vector<int> tail_ids(word_prefix.end() - std::min<std::size_t>(word_prefix.size(),
                                                                            max_window()),
                                  word_prefix.end());
        Var x_sem =
            gate_.semantic_score(t, tok_emb_, tail_ids, static_cast<int>(tail_ids.size()),
                                 Vocabulary::kPad);
        out.x_sem = x_sem->value(static_cast<Eigen::Index>(tail_ids.size()) - 1, 0);
        Var x_last = t.slice_rows(x_sem, static_cast<int>(tail_ids.size()) - 1, 1);
        p_copy = gate_.blend(t, x_last, t_copy);
        out.p_copy = p_copy->value(0, 0);
      } else {
        out.p_copy = out.t_copy;
      }
    }
    return out;
  }

  int max_window() const {
    int w = cfg_.window;
    for (int e : cfg_.extra_windows) w = std::max(w, e);
    return w;
  }

 private:
  ModelConfig cfg_;
  EmbeddingLayer tok_emb_, tag_emb_;
  TransformerEncoder wenc_, penc_;
  LinearLayer fuse_;
  LayerNormLayer fuse_ln_;
  TransformerDecoder wdec_, pdec_;
  LinearLayer wout_, pout_;
  CopyGate gate_;
};

}  // namespace kgtext
