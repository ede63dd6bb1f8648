#pragma once

// Decoding and evaluation.  Beam search scores each candidate emission by
// the copy/generate mixture
//   P(token) = (1 - p_copy) * p_gen(token) + p_copy * sum attn(src)
// where the sum runs over source positions whose token matches the
// candidate: in-vocabulary source tokens merge with the generator
// distribution under their vocabulary id, while out-of-vocabulary sources
// form their own candidates keyed by exact surface (feeding <unk> back to
// the decoder), so distinct unknown entities can coexist in the beam.
// Sequence termination is not a copy decision, so <eos> is scored on the
// word distribution alone.  A token counts as copied when the copy share
// of its mixture dominates; copies emit the surface of their
// strongest-attended source.  Greedy decoding is beam width 1.  Pruning
// compares raw cumulative log-probabilities; the final answer maximizes
// length-normalized score over the finished pool (finished hypotheses are
// never pruned).  A separate trace decoder applies the hard copy-threshold
// rule step by step for inspection.  evaluate() runs a whole corpus under a
// chosen triplet-ordering mode and reports the four text metrics plus
// order statistics and KG-size bucket breakdowns.

#include <array>
#include <map>
#include <set>

#include "kgtext/metrics.hpp"
#include "kgtext/model.hpp"
#include "kgtext/sorter.hpp"
#include "kgtext/train.hpp"

namespace kgtext {

struct DecodeConfig {
  int beam_width = 4;
  int max_len = 0;         // 0 -> model k_max - 1
  double threshold = -1.0; // <0 -> model copy_threshold; >1 disables copying
  std::vector<int> restrict_to;  // optional whitelist of generatable ids (tests)
  std::uint64_t seed = 1;        // used by the random order mode
};

struct BeamResult {
  std::vector<std::string> surfaces;  // emitted tokens, copies keep casing
  std::vector<int> token_ids;         // decoder feedback ids (no <bos>/<eos>)
  double score = 0.0;                 // cumulative log-probability
  int steps = 0;                      // scored decisions including <eos>
  int n_copied = 0;
  bool finished = false;

  double normalized() const { return score / std::max(1, steps); }

  std::string text() const {
    std::string s;
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
      if (i) s += ' ';
      s += surfaces[i];
    }
    return s;
  }
};

namespace decode_detail {

// Ids that are never proposed as generated tokens.
inline bool generatable(int id, const std::vector<int>& whitelist) {
  if (!whitelist.empty())
    return std::find(whitelist.begin(), whitelist.end(), id) != whitelist.end();
  switch (id) {
    case Vocabulary::kPad:
    case Vocabulary::kBos:
    case Vocabulary::kHead:
    case Vocabulary::kRelation:
    case Vocabulary::kTail:
    case Vocabulary::kPlaceholder:
      return false;
  }
  return true;
}

// Attention mass aggregated over the source positions sharing one emission
// key, remembering the strongest-attended contributor (ties: lower index).
struct CopyMass {
  double mass = 0.0;
  int best_src = -1;
  double best_attn = -1.0;

  void add(int src, double attn) {
    mass += attn;
    if (attn > best_attn) {
      best_attn = attn;
      best_src = src;
    }
  }
};

inline void accumulate_copy_mass(const Eigen::VectorXd& attn, const LinearizedKG& lin,
                                 std::map<int, CopyMass>& by_id,
                                 std::map<std::string, CopyMass>& by_surface) {
  for (int i = 0; i < static_cast<int>(lin.provenance.size()); ++i) {
    auto idx = static_cast<std::size_t>(i);
    if (lin.provenance[idx] < 0) continue;
    int id = lin.tokens[idx];
    CopyMass& m = id == Vocabulary::kUnk ? by_surface[lin.surfaces[idx]] : by_id[id];
    m.add(i, attn(i));
  }
}

}  // namespace decode_detail

inline BeamResult beam_search(const Generator& gen, const EncodedSource& enc,
                              const Vocabulary& vocab, const DecodeConfig& dcfg) {
  const ModelConfig& mc = gen.config();
  const int width = std::max(1, dcfg.beam_width);
  const int max_len = dcfg.max_len > 0 ? dcfg.max_len : mc.k_max - 1;
  const double threshold = dcfg.threshold >= 0.0 ? dcfg.threshold : mc.copy_threshold;
  const bool copy_on = mc.use_copy && threshold <= 1.0;

  struct Hyp {
    std::vector<int> ids = {Vocabulary::kBos};
    std::vector<int> tags;
    std::vector<std::string> surfaces;
    std::vector<int> out_ids;
    double score = 0.0;
    int steps = 0;
    int n_copied = 0;
  };
  struct Cand {
    int parent = 0;
    double total = 0.0;
    int feed_id = Vocabulary::kUnk;
    int token_key = 0;  // deterministic tie-break key for generated tokens
    int src = -1;       // source position for copies
    bool is_copy = false;
    bool is_eos = false;
    std::string surface;
  };

  Hyp root;
  if (mc.use_pos_branch) root.tags = {PosTagset::kBos};
  std::vector<Hyp> live = {root};
  std::vector<BeamResult> finished;

  for (int pos = 0; pos < max_len && !live.empty(); ++pos) {
    std::vector<Cand> cands;
    std::vector<InferStep> steps(live.size());
    for (std::size_t h = 0; h < live.size(); ++h) {
      steps[h] = gen.step(enc, live[h].ids, live[h].tags);
      const InferStep& st = steps[h];
      const double p = copy_on ? st.p_copy : 0.0;
      std::map<int, decode_detail::CopyMass> copy_by_id;
      std::map<std::string, decode_detail::CopyMass> copy_by_surface;
      if (copy_on) decode_detail::accumulate_copy_mass(st.attn, enc.lin, copy_by_id, copy_by_surface);

      // <eos>: always offered so finishing stays an option, and exempt from
      // the mixture because ending the sequence is not a copy decision.
      if (decode_detail::generatable(Vocabulary::kEos, dcfg.restrict_to)) {
        Cand c;
        c.parent = static_cast<int>(h);
        c.is_eos = true;
        c.total = live[h].score + st.word_logp(Vocabulary::kEos);
        c.feed_id = Vocabulary::kEos;
        c.token_key = Vocabulary::kEos;
        cands.push_back(c);
      }

      // One candidate per vocabulary id: generator share plus any attention
      // mass from matching source tokens.
      auto push_vocab_key = [&](int v) {
        double gen_share = decode_detail::generatable(v, dcfg.restrict_to)
                               ? (1.0 - p) * std::exp(st.word_logp(v))
                               : 0.0;
        double copy_share = 0.0;
        int src = -1;
        auto it = copy_by_id.find(v);
        if (it != copy_by_id.end()) {
          copy_share = p * it->second.mass;
          src = it->second.best_src;
        }
        Cand c;
        c.parent = static_cast<int>(h);
        c.total = live[h].score + std::log(std::max(1e-300, gen_share + copy_share));
        c.feed_id = v;
        c.token_key = v;
        c.is_copy = copy_share > gen_share;
        c.src = c.is_copy ? src : -1;
        c.surface = c.is_copy ? enc.lin.surfaces[static_cast<std::size_t>(src)] : vocab.token(v);
        cands.push_back(c);
      };

      // The per-beam top width+1 generator ids cover every candidate that
      // could survive global pruning without copy mass; ids carrying copy
      // mass are always proposed because the mixture can rerank them.
      std::vector<int> order(static_cast<std::size_t>(st.word_logp.size()));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (st.word_logp(a) != st.word_logp(b)) return st.word_logp(a) > st.word_logp(b);
        return a < b;
      });
      std::set<int> proposed;
      int taken = 0;
      for (int v : order) {
        if (v == Vocabulary::kEos || !decode_detail::generatable(v, dcfg.restrict_to)) continue;
        push_vocab_key(v);
        proposed.insert(v);
        if (++taken > width) break;
      }
      for (const auto& [v, m] : copy_by_id)
        if (!proposed.count(v)) push_vocab_key(v);

      // Out-of-vocabulary sources: copy-only candidates keyed by surface.
      for (const auto& [surface, m] : copy_by_surface) {
        Cand c;
        c.parent = static_cast<int>(h);
        c.total = live[h].score + std::log(std::max(1e-300, p * m.mass));
        c.feed_id = Vocabulary::kUnk;
        c.token_key = Vocabulary::kUnk;
        c.is_copy = true;
        c.src = m.best_src;
        c.surface = surface;
        cands.push_back(c);
      }
    }

    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.total != b.total) return a.total > b.total;
      if (a.is_copy != b.is_copy) return !a.is_copy;  // generated first on ties
      if (a.is_copy && a.src != b.src) return a.src < b.src;
      if (a.token_key != b.token_key) return a.token_key < b.token_key;
      return a.parent < b.parent;
    });

    std::vector<Hyp> next;
    for (const Cand& c : cands) {
      if (c.is_eos) {
        const Hyp& p = live[static_cast<std::size_t>(c.parent)];
        BeamResult r;
        r.surfaces = p.surfaces;
        r.token_ids = p.out_ids;
        r.score = c.total;
        r.steps = p.steps + 1;
        r.n_copied = p.n_copied;
        r.finished = true;
        finished.push_back(std::move(r));  // the finished pool is never pruned
        continue;
      }
      if (static_cast<int>(next.size()) >= width) continue;
      Hyp h = live[static_cast<std::size_t>(c.parent)];
      h.ids.push_back(c.feed_id);
      if (mc.use_pos_branch) h.tags.push_back(steps[static_cast<std::size_t>(c.parent)].pos_argmax);
      h.surfaces.push_back(c.surface);
      h.out_ids.push_back(c.feed_id);
      h.score = c.total;
      h.steps += 1;
      h.n_copied += c.is_copy ? 1 : 0;
      next.push_back(std::move(h));
    }
    live = std::move(next);
  }

  auto hyp_to_result = [](const Hyp& h) {
    BeamResult r;
    r.surfaces = h.surfaces;
    r.token_ids = h.out_ids;
    r.score = h.score;
    r.steps = h.steps;
    r.n_copied = h.n_copied;
    r.finished = false;
    return r;
  };
  std::vector<BeamResult> pool = finished;
  if (pool.empty())
    for (const Hyp& h : live) pool.push_back(hyp_to_result(h));
  if (pool.empty()) throw DataError("beam search produced no hypotheses");

  std::size_t best = 0;
  for (std::size_t i = 1; i < pool.size(); ++i) {
    double a = pool[i].normalized(), b = pool[best].normalized();
    if (a > b || (a == b && pool[i].token_ids < pool[best].token_ids)) best = i;
  }
  return pool[best];
}

inline BeamResult greedy_decode(const Generator& gen, const EncodedSource& enc,
                                const Vocabulary& vocab, DecodeConfig dcfg) {
  dcfg.beam_width = 1;
  return beam_search(gen, enc, vocab, dcfg);
}

// Step-by-step decode applying the hard copy-threshold rule, recording one
// CopyDecision per emitted token for inspection.
struct TraceResult {
  std::vector<std::string> surfaces;
  std::vector<CopyDecision> decisions;

  std::string text() const {
    std::string s;
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
      if (i) s += ' ';
      s += surfaces[i];
    }
    return s;
  }
};

inline TraceResult threshold_decode(const Generator& gen, const EncodedSource& enc,
                                    const Vocabulary& vocab, const DecodeConfig& dcfg) {
  const ModelConfig& mc = gen.config();
  const int max_len = dcfg.max_len > 0 ? dcfg.max_len : mc.k_max - 1;
  const double threshold = dcfg.threshold >= 0.0 ? dcfg.threshold : mc.copy_threshold;

  TraceResult out;
  std::vector<int> ids = {Vocabulary::kBos};
  std::vector<int> tags;
  if (mc.use_pos_branch) tags = {PosTagset::kBos};
  for (int pos = 0; pos < max_len; ++pos) {
    InferStep st = gen.step(enc, ids, tags);
    double p_copy = mc.use_copy ? st.p_copy : 0.0;
    CopyDecision d = select_token(p_copy, st.x_sem, st.t_copy, st.word_logp, st.attn, enc.lin,
                                  vocab, mc.use_copy ? threshold : 2.0);
    if (!d.copied && d.token_id == Vocabulary::kEos) break;
    out.surfaces.push_back(d.token);
    out.decisions.push_back(d);
    ids.push_back(d.token_id);
    if (mc.use_pos_branch) tags.push_back(st.pos_argmax);
  }
  return out;
}

// --- corpus evaluation -----------------------------------------------------

struct ExampleEval {
  std::string id;
  std::string text;
  std::vector<std::string> hyp_tokens;
  int bucket = 0;
  int n_copied = 0;
  int n_emitted = 0;
  double sent_bleu = 0.0;
  double kendall = std::numeric_limits<double>::quiet_NaN();
  bool order_exact = false;
  OrderLabel order_used;
};

struct EvalReport {
  int n_examples = 0;
  double bleu4 = 0.0, rouge_l = 0.0, chrf_pp = 0.0, cider = 0.0;
  std::array<double, 3> bucket_bleu = {0.0, 0.0, 0.0};
  std::array<int, 3> bucket_counts = {0, 0, 0};
  double mean_kendall = std::numeric_limits<double>::quiet_NaN();
  double order_exact_rate = std::numeric_limits<double>::quiet_NaN();
  double copy_token_rate = 0.0;
  std::vector<ExampleEval> examples;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["n_examples"] = n_examples;
    j["bleu4"] = bleu4;
    j["rouge_l"] = rouge_l;
    j["chrf_pp"] = chrf_pp;
    j["cider"] = cider;
    for (int b = 0; b < 3; ++b) {
      j["buckets"][kg_size_bucket_name(b)]["bleu4"] = bucket_bleu[static_cast<std::size_t>(b)];
      j["buckets"][kg_size_bucket_name(b)]["count"] = bucket_counts[static_cast<std::size_t>(b)];
    }
    if (std::isfinite(mean_kendall)) j["mean_kendall"] = mean_kendall;
    if (std::isfinite(order_exact_rate)) j["order_exact_rate"] = order_exact_rate;
    j["copy_token_rate"] = copy_token_rate;
    return j;
  }
};

struct EvalOptions {
  OrderMode order_mode = OrderMode::kLearned;
  DecodeConfig decode;
  OversizePolicy oversize = OversizePolicy::kTruncate;
};

// Generates for every example under the requested ordering mode and scores
// the whole corpus.  Supervision (when given) supplies gold orders for the
// gold mode and for the order-agreement statistics.
inline EvalReport evaluate(const Pipeline& pipe, const std::vector<Example>& examples,
                           const SupervisionSet* sup, const EvalOptions& opts) {
  if (examples.empty()) throw DataError("evaluate: empty corpus");
  EvalReport rep;
  EvalCorpus corpus;
  std::array<EvalCorpus, 3> bucket_corpus;
  long long copied = 0, emitted = 0;
  double kendall_sum = 0.0;
  int kendall_n = 0, exact_n = 0;

  for (const Example& raw : examples) {
    Example ex = apply_oversize_policy(raw, pipe.n_slots(), opts.oversize);
    const SupervisionRecord* rec = sup ? sup->find(ex.graph.id) : nullptr;
    const OrderLabel* gold = rec ? &rec->order : nullptr;

    OrderLabel order = order_for_mode(
        opts.order_mode, ex.graph, pipe.n_slots(), gold,
        pipe.sorter ? &*pipe.sorter : nullptr,
        pipe.node_sorter ? &*pipe.node_sorter : nullptr, opts.decode.seed);

    LinearizedKG lin = linearize(ex.graph, order, pipe.vocab);
    EncodedSource enc = pipe.gen->encode_source(lin);
    BeamResult best = beam_search(*pipe.gen, enc, pipe.vocab, opts.decode);

    ExampleEval ee;
    ee.id = ex.graph.id;
    ee.text = best.text();
    ee.hyp_tokens = tokenize(ee.text);
    ee.bucket = kg_size_bucket(raw.graph.size());  // bucket by the true size
    ee.n_copied = best.n_copied;
    ee.n_emitted = static_cast<int>(best.surfaces.size());
    ee.order_used = order;

    std::vector<std::string> ref = rec ? rec->tokens : tokenize(ex.reference);
    ee.sent_bleu = sentence_bleu4(ee.hyp_tokens, {ref});
    if (gold && gold->n_real() == order.n_real()) {
      ee.kendall = kendall_tau(order.listing(), gold->listing());
      ee.order_exact = order == *gold;
      kendall_sum += ee.kendall;
      ++kendall_n;
      exact_n += ee.order_exact ? 1 : 0;
    }

    corpus.hyps.push_back(ee.hyp_tokens);
    corpus.refs.push_back({ref});
    auto& bc = bucket_corpus[static_cast<std::size_t>(ee.bucket)];
    bc.hyps.push_back(ee.hyp_tokens);
    bc.refs.push_back({ref});
    ++rep.bucket_counts[static_cast<std::size_t>(ee.bucket)];
    copied += best.n_copied;
    emitted += ee.n_emitted;
    rep.examples.push_back(std::move(ee));
  }

  rep.n_examples = static_cast<int>(examples.size());
  rep.bleu4 = bleu4(corpus);
  rep.rouge_l = rouge_l(corpus);
  rep.chrf_pp = chrf_pp(corpus);
  rep.cider = cider(corpus);
  for (int b = 0; b < 3; ++b)
    if (rep.bucket_counts[static_cast<std::size_t>(b)] > 0)
      rep.bucket_bleu[static_cast<std::size_t>(b)] = bleu4(bucket_corpus[static_cast<std::size_t>(b)]);
  if (kendall_n > 0) {
    rep.mean_kendall = kendall_sum / kendall_n;
    rep.order_exact_rate = static_cast<double>(exact_n) / kendall_n;
  }
  rep.copy_token_rate = emitted > 0 ? static_cast<double>(copied) / static_cast<double>(emitted) : 0.0;
  return rep;
}

}  // namespace kgtext
