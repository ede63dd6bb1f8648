#pragma once

// Joint training: the four-part weighted objective
//   l_total = l_token + lambda1*l_pos + lambda2*l_sort + lambda3*l_copy
// evaluated left-to-right in that exact order so logged totals are bit
// reproducible, AdamW with decoupled weight decay, global-norm gradient
// clipping, linear learning-rate warmup, deterministic per-epoch shuffling,
// JSONL step logs, and binary checkpoints with checksummed parameter blobs.
//
// Per-example losses are sums over steps; a batch averages the per-example
// sums.  The generator is always teacher-forced on the gold order; the two
// sorting networks are trained alongside from the same gold labels and serve
// decoding / ablations.  AdamW deliberately skips any parameter whose
// gradient is exactly zero everywhere, so a weight of zero on a loss leaves
// that subsystem's parameters and optimizer moments untouched.

#include <algorithm>
#include <cstring>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <numeric>
#include <optional>
#include <sstream>

#include "kgtext/model.hpp"
#include "kgtext/sorter.hpp"
#include "kgtext/supervision.hpp"

namespace kgtext {

// --- loss bookkeeping ------------------------------------------------------

struct LossBundle {
  double l_token = 0.0;
  double l_pos = 0.0;
  double l_sort = 0.0;
  double l_copy = 0.0;
  double lambda1 = 0.7, lambda2 = 0.4, lambda3 = 0.3;
  double l_total = 0.0;

  // Fixed left-to-right association; the training tape combines its loss
  // scalars with the same coefficient list, so this identity is exact in
  // floating point, not just analytically.
  static double combine(double lt, double l1, double lp, double l2, double ls, double l3,
                        double lc) {
    return ((lt + l1 * lp) + l2 * ls) + l3 * lc;
  }

  void refresh_total() {
    l_total = combine(l_token, lambda1, l_pos, lambda2, l_sort, lambda3, l_copy);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["l_token"] = l_token;
    j["l_pos"] = l_pos;
    j["l_sort"] = l_sort;
    j["l_copy"] = l_copy;
    j["lambda1"] = lambda1;
    j["lambda2"] = lambda2;
    j["lambda3"] = lambda3;
    j["l_total"] = l_total;
    return j;
  }

  static LossBundle from_json(const nlohmann::json& j) {
    LossBundle b;
    b.l_token = j.at("l_token").get<double>();
    b.l_pos = j.at("l_pos").get<double>();
    b.l_sort = j.at("l_sort").get<double>();
    b.l_copy = j.at("l_copy").get<double>();
    b.lambda1 = j.at("lambda1").get<double>();
    b.lambda2 = j.at("lambda2").get<double>();
    b.lambda3 = j.at("lambda3").get<double>();
    b.l_total = j.at("l_total").get<double>();
    return b;
  }
};

// --- configuration ---------------------------------------------------------

struct TrainConfig {
  double lambda1 = 0.7;  // POS loss weight
  double lambda2 = 0.4;  // order loss weight
  double lambda3 = 0.3;  // copy loss weight
  double lr = 3e-4;
  double weight_decay = 0.01;
  double clip_norm = 1.0;
  double warmup_frac = 0.05;
  int batch_size = 8;
  int epochs = 20;
  std::uint64_t seed = 1;

  // ablation switches
  bool no_cp = false;      // drop the copy mechanism entirely
  bool no_pos = false;     // drop the POS branch (fusion + gate term + loss)
  bool no_sc = false;      // drop the semantic component of the gate
  bool no_fusion = false;  // keep the POS branch but skip encoder fusion
  std::string pos_scope = "local";
  std::string order_mode = "learned";  // inference-time linearization
  bool train_node_sorter = true;

  void validate() const {
    if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0)
      throw UsageError("loss weights must be non-negative");
    if (lr <= 0 || batch_size < 1 || epochs < 1)
      throw UsageError("lr, batch_size and epochs must be positive");
    if (warmup_frac < 0 || warmup_frac > 1) throw UsageError("warmup_frac must be in [0,1]");
    order_mode_from_name(order_mode);  // throws on bad value
  }

  // Loss weights actually used, after ablations zero out detached branches.
  double effective_lambda1() const { return no_pos ? 0.0 : lambda1; }
  double effective_lambda3() const { return no_cp ? 0.0 : lambda3; }

  // Applies the ablation switches to a base architecture description.
  ModelConfig resolve(ModelConfig base) const {
    base.pos_scope = pos_scope;
    if (no_pos) {
      base.use_pos_branch = false;
      base.use_pos_fusion = false;
      base.use_pos_in_gate = false;
    }
    if (no_fusion) base.use_pos_fusion = false;
    if (no_sc) base.use_semantic = false;
    if (no_cp) base.use_copy = false;
    return base;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["lambda1"] = lambda1;
    j["lambda2"] = lambda2;
    j["lambda3"] = lambda3;
    j["lr"] = lr;
    j["weight_decay"] = weight_decay;
    j["clip_norm"] = clip_norm;
    j["warmup_frac"] = warmup_frac;
    j["batch_size"] = batch_size;
    j["epochs"] = epochs;
    j["seed"] = seed;
    j["no_cp"] = no_cp;
    j["no_pos"] = no_pos;
    j["no_sc"] = no_sc;
    j["no_fusion"] = no_fusion;
    j["pos_scope"] = pos_scope;
    j["order_mode"] = order_mode;
    j["train_node_sorter"] = train_node_sorter;
    return j;
  }

  static TrainConfig from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.lambda1 = j.value("lambda1", c.lambda1);
    c.lambda2 = j.value("lambda2", c.lambda2);
    c.lambda3 = j.value("lambda3", c.lambda3);
    c.lr = j.value("lr", c.lr);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.warmup_frac = j.value("warmup_frac", c.warmup_frac);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.seed = j.value("seed", c.seed);
    c.no_cp = j.value("no_cp", c.no_cp);
    c.no_pos = j.value("no_pos", c.no_pos);
    c.no_sc = j.value("no_sc", c.no_sc);
    c.no_fusion = j.value("no_fusion", c.no_fusion);
    c.pos_scope = j.value("pos_scope", c.pos_scope);
    c.order_mode = j.value("order_mode", c.order_mode);
    c.train_node_sorter = j.value("train_node_sorter", c.train_node_sorter);
    return c;
  }
};

// --- optimizer -------------------------------------------------------------

// Scales all gradients so their global L2 norm is at most max_norm;
// returns the pre-clip norm.
inline double clip_global_norm(ParamStore& ps, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, p] : ps.all()) sq += p.grad.squaredNorm();
  double norm = std::sqrt(sq);
  if (!std::isfinite(norm))
    throw NumericError("gradient norm is not finite (" + std::to_string(norm) + ")");
  if (max_norm > 0 && norm > max_norm) {
    double f = max_norm / norm;
    for (auto& [name, p] : ps.all()) p.grad *= f;
  }
  return norm;
}

class AdamW {
 public:
  AdamW(double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
        double eps = 1e-8)
      : lr_(lr), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  long long steps_taken() const { return t_; }

  // lr_scale carries the warmup multiplier.  Parameters whose gradient is
  // exactly zero are skipped entirely: no moment update, no weight decay.
  void step(ParamStore& ps, double lr_scale) {
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    double lr = lr_ * lr_scale;
    for (auto& [name, p] : ps.all()) {
      if (p.grad.isZero(0.0)) continue;
      p.m = beta1_ * p.m + (1.0 - beta1_) * p.grad;
      p.v = beta2_ * p.v + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
      MatrixXd mhat = p.m / bc1;
      MatrixXd vhat = p.v / bc2;
      p.value -=
          lr * (mhat.array() / (vhat.array().sqrt() + eps_) + wd_ * p.value.array()).matrix();
    }
  }

 private:
  double lr_, wd_, beta1_, beta2_, eps_;
  long long t_ = 0;
};

// Linear warmup to full lr over ceil(warmup_frac * total_steps) steps, then
// constant.  step is 1-based.
inline double warmup_scale(long long step, long long total_steps, double warmup_frac) {
  long long warm = static_cast<long long>(
      std::ceil(warmup_frac * static_cast<double>(std::max<long long>(total_steps, 1))));
  if (warm <= 0) return 1.0;
  return std::min(1.0, static_cast<double>(step) / static_cast<double>(warm));
}

// --- data preparation ------------------------------------------------------

// Everything the training loop needs for one example, precomputed once.
struct TrainSample {
  std::string id;
  KnowledgeGraph graph;
  PaddedGraph padded;
  OrderLabel gold_order;             // padded to n_slots
  LinearizedKG gold_lin;             // linearization in gold order
  std::vector<std::string> ref_tokens;
  std::vector<int> ref_ids;
  std::vector<int> tag_ids;
  std::vector<int> copy_labels;
};

inline TrainSample make_sample(const Example& ex, const SupervisionRecord& rec,
                               const Vocabulary& vocab, int n_slots) {
  TrainSample s;
  s.id = ex.graph.id;
  s.graph = ex.graph;
  s.padded = pad_graph(ex.graph, n_slots);
  s.gold_order = rec.order;
  s.gold_lin = linearize(ex.graph, rec.order, vocab);
  s.ref_tokens = rec.tokens;
  for (const auto& tok : rec.tokens) s.ref_ids.push_back(vocab.id(lowercase(tok)));
  s.tag_ids = rec.pos.tags;
  s.copy_labels = rec.copy_labels;
  if (s.ref_ids.empty()) throw DataError("example " + s.id + " has an empty reference");
  return s;
}

inline std::vector<TrainSample> prepare_samples(const std::vector<Example>& examples,
                                                const SupervisionSet& sup,
                                                const Vocabulary& vocab) {
  std::vector<TrainSample> out;
  out.reserve(examples.size());
  for (const Example& ex : examples) {
    const SupervisionRecord* rec = sup.find(ex.graph.id);
    if (!rec) throw DataError("no supervision record for example " + ex.graph.id);
    out.push_back(make_sample(ex, *rec, vocab, sup.n_slots));
  }
  return out;
}

// --- pipeline --------------------------------------------------------------

// One trained system: configs, vocabulary, parameters, and the model objects
// wired on top of them.  Not copyable; the model objects hold pointers into
// the parameter store.
struct Pipeline {
  ModelConfig model_cfg;
  TrainConfig train_cfg;
  SorterConfig sorter_cfg;
  Vocabulary vocab;
  ParamStore store;
  std::optional<Generator> gen;
  std::optional<TripletSorter> sorter;
  std::optional<NodeSorter> node_sorter;

  Pipeline(ModelConfig m, TrainConfig t, SorterConfig s, Vocabulary v, std::uint64_t param_seed)
      : model_cfg(std::move(m)),
        train_cfg(std::move(t)),
        sorter_cfg(std::move(s)),
        vocab(std::move(v)),
        store(param_seed) {
    model_cfg.vocab_size = vocab.size();
    gen.emplace(store, model_cfg);
    sorter.emplace(store, sorter_cfg);
    if (train_cfg.train_node_sorter) node_sorter.emplace(store, sorter_cfg);
  }

  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  int n_slots() const { return sorter_cfg.n_slots; }
};

// Convenience constructor from raw configs; applies ablation resolution.
inline std::unique_ptr<Pipeline> make_pipeline(const ModelConfig& base_model,
                                               const TrainConfig& tcfg,
                                               const SorterConfig& scfg, Vocabulary vocab) {
  tcfg.validate();
  ModelConfig resolved = tcfg.resolve(base_model);
  return std::make_unique<Pipeline>(resolved, tcfg, scfg, std::move(vocab), tcfg.seed);
}

// --- training loop ---------------------------------------------------------

struct EpochStats {
  int epoch = 0;
  LossBundle mean;        // mean of the step bundles
  double order_acc = 0.0;  // exact-match accuracy of the triplet sorter
  double grad_norm = 0.0;  // last pre-clip norm of the epoch
  double val_metric = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  std::vector<LossBundle> steps;
  std::vector<EpochStats> epochs;
};

namespace train_detail {

inline std::string diagnose_batch(const std::vector<const TrainSample*>& batch,
                                  const LossBundle& b, int epoch, int step) {
  std::ostringstream os;
  os << "non-finite loss at epoch " << epoch << " step " << step << ": l_token=" << b.l_token
     << " l_pos=" << b.l_pos << " l_sort=" << b.l_sort << " l_copy=" << b.l_copy
     << "; batch ids:";
  for (const TrainSample* s : batch) os << " " << s->id;
  return os.str();
}

}  // namespace train_detail

// Runs the full training loop.  step_log (optional) receives one JSON line
// per optimizer step and one per epoch summary.  val_metric (optional) is
// invoked after each epoch with the live pipeline.
inline TrainResult train(Pipeline& pipe, const std::vector<TrainSample>& samples,
                         std::ostream* step_log = nullptr,
                         const std::function<double(Pipeline&)>& val_metric = nullptr) {
  if (samples.empty()) throw DataError("no training samples");
  const TrainConfig& cfg = pipe.train_cfg;
  cfg.validate();
  const double l1 = cfg.effective_lambda1();
  const double l2 = cfg.lambda2;
  const double l3 = cfg.effective_lambda3();

  AdamW opt(cfg.lr, cfg.weight_decay);
  const long long steps_per_epoch =
      (static_cast<long long>(samples.size()) + cfg.batch_size - 1) / cfg.batch_size;
  const long long total_steps = steps_per_epoch * cfg.epochs;

  TrainResult result;
  long long global_step = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 shuffle_rng = make_rng(cfg.seed, "shuffle:epoch:" + std::to_string(epoch));
    std::shuffle(idx.begin(), idx.end(), shuffle_rng);
    std::mt19937_64 dropout_rng = make_rng(cfg.seed, "dropout:epoch:" + std::to_string(epoch));

    LossBundle epoch_sum;
    epoch_sum.lambda1 = l1;
    epoch_sum.lambda2 = l2;
    epoch_sum.lambda3 = l3;
    int epoch_steps = 0;
    double last_norm = 0.0;

    for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      std::vector<const TrainSample*> batch;
      for (std::size_t k = start;
           k < std::min(idx.size(), start + static_cast<std::size_t>(cfg.batch_size)); ++k)
        batch.push_back(&samples[idx[k]]);
      const double inv_b = 1.0 / static_cast<double>(batch.size());

      Tape tape;
      std::vector<Var> example_totals;
      LossBundle bundle;
      bundle.lambda1 = l1;
      bundle.lambda2 = l2;
      bundle.lambda3 = l3;

      for (const TrainSample* s : batch) {
        TeacherForward f = pipe.gen->forward_teacher(
            tape, s->gold_lin.tokens, s->ref_ids, s->tag_ids, s->copy_labels,
            pipe.model_cfg.dropout > 0.0 ? &dropout_rng : nullptr);
        Var l_sort = pipe.sorter->loss(
            tape, pipe.sorter->score_log(tape, pipe.sorter->features(tape, s->padded)),
            s->gold_order);

        std::vector<Var> parts = {f.l_token, f.l_pos, l_sort, f.l_copy};
        std::vector<double> coeffs = {1.0, l1, l2, l3};
        if (pipe.node_sorter) {
          // The node-level baseline trains alongside under the same order
          // weight; it is not part of the logged four-term objective.
          parts.push_back(pipe.node_sorter->loss(tape, s->padded, s->gold_order));
          coeffs.push_back(l2);
        }
        example_totals.push_back(tape.linear_comb(parts, coeffs));

        bundle.l_token += f.l_token->value(0, 0) * inv_b;
        bundle.l_pos += f.l_pos->value(0, 0) * inv_b;
        bundle.l_sort += l_sort->value(0, 0) * inv_b;
        bundle.l_copy += f.l_copy->value(0, 0) * inv_b;
      }
      bundle.refresh_total();

      Var batch_total = tape.linear_comb(
          example_totals, std::vector<double>(example_totals.size(), inv_b));
      if (!std::isfinite(batch_total->value(0, 0)) || !std::isfinite(bundle.l_total))
        throw NumericError(train_detail::diagnose_batch(batch, bundle, epoch,
                                                        static_cast<int>(global_step + 1)));

      pipe.store.zero_grads();
      tape.backward(batch_total);
      last_norm = clip_global_norm(pipe.store, cfg.clip_norm);
      ++global_step;
      opt.step(pipe.store, warmup_scale(global_step, total_steps, cfg.warmup_frac));

      result.steps.push_back(bundle);
      epoch_sum.l_token += bundle.l_token;
      epoch_sum.l_pos += bundle.l_pos;
      epoch_sum.l_sort += bundle.l_sort;
      epoch_sum.l_copy += bundle.l_copy;
      ++epoch_steps;

      if (step_log) {
        nlohmann::json j = bundle.to_json();
        j["epoch"] = epoch;
        j["step"] = global_step;
        j["lr_scale"] = warmup_scale(global_step, total_steps, cfg.warmup_frac);
        j["grad_norm"] = last_norm;
        *step_log << j.dump() << "\n";
      }
    }

    EpochStats es;
    es.epoch = epoch;
    es.mean = epoch_sum;
    es.mean.l_token /= epoch_steps;
    es.mean.l_pos /= epoch_steps;
    es.mean.l_sort /= epoch_steps;
    es.mean.l_copy /= epoch_steps;
    es.mean.refresh_total();
    es.grad_norm = last_norm;

    int order_hits = 0;
    for (const TrainSample& s : samples)
      if (pipe.sorter->predict(s.padded) == s.gold_order) ++order_hits;
    es.order_acc = static_cast<double>(order_hits) / static_cast<double>(samples.size());

    if (val_metric) es.val_metric = val_metric(pipe);

    if (step_log) {
      nlohmann::json j;
      j["epoch"] = epoch;
      j["epoch_summary"] = true;
      j["mean"] = es.mean.to_json();
      j["order_acc"] = es.order_acc;
      if (val_metric) j["val_metric"] = es.val_metric;
      *step_log << j.dump() << "\n";
    }
    result.epochs.push_back(es);
  }
  return result;
}

// --- checkpointing ---------------------------------------------------------

inline constexpr char kCheckpointMagic[9] = "KGTXCKP1";

namespace ckpt_detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64(const std::string& buf, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[at + static_cast<std::size_t>(i)]))
         << (8 * i);
  return v;
}

inline void put_doubles(std::string& out, const MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double d = m(i, j);
      std::uint64_t bits;
      std::memcpy(&bits, &d, 8);
      put_u64(out, bits);
    }
}

inline void get_doubles(const std::string& buf, std::size_t& at, MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::uint64_t bits = get_u64(buf, at);
      at += 8;
      double d;
      std::memcpy(&d, &bits, 8);
      m(i, j) = d;
    }
}

}  // namespace ckpt_detail

inline void save_checkpoint(const std::string& path, const Pipeline& pipe) {
  nlohmann::json header;
  header["format"] = "kgtext-checkpoint";
  header["version"] = 1;
  header["model"] = pipe.model_cfg.to_json();
  header["train"] = pipe.train_cfg.to_json();
  header["sorter"] = pipe.sorter_cfg.to_json();
  header["tagset"] = PosTagset::id();
  header["param_seed"] = pipe.store.seed();
  std::vector<std::string> toks;
  for (int i = 0; i < pipe.vocab.size(); ++i) toks.push_back(pipe.vocab.token(i));
  header["vocab"] = toks;
  nlohmann::json plist = nlohmann::json::array();
  for (const auto& [name, p] : pipe.store.all())
    plist.push_back({{"name", name},
                     {"rows", static_cast<int>(p.value.rows())},
                     {"cols", static_cast<int>(p.value.cols())}});
  header["params"] = plist;
  header["has_moments"] = true;

  std::string blob;
  blob.append(kCheckpointMagic, 8);
  std::string hs = header.dump();
  ckpt_detail::put_u64(blob, hs.size());
  blob += hs;
  for (const auto& [name, p] : pipe.store.all()) ckpt_detail::put_doubles(blob, p.value);
  for (const auto& [name, p] : pipe.store.all()) ckpt_detail::put_doubles(blob, p.m);
  for (const auto& [name, p] : pipe.store.all()) ckpt_detail::put_doubles(blob, p.v);
  ckpt_detail::put_u64(blob, fnv1a64(blob));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw DataError("short write to checkpoint: " + path);
}

inline std::unique_ptr<Pipeline> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string blob = ss.str();
  if (blob.size() < 24 || blob.compare(0, 8, kCheckpointMagic, 8) != 0)
    throw DataError("not a checkpoint file: " + path);
  std::uint64_t stored_sum = ckpt_detail::get_u64(blob, blob.size() - 8);
  std::string body = blob.substr(0, blob.size() - 8);
  if (fnv1a64(body) != stored_sum) throw DataError("checkpoint checksum mismatch: " + path);

  std::uint64_t hlen = ckpt_detail::get_u64(blob, 8);
  if (16 + hlen > body.size()) throw DataError("corrupt checkpoint header: " + path);
  nlohmann::json header = nlohmann::json::parse(body.substr(16, hlen));
  if (header.value("version", -1) != 1)
    throw DataError("unsupported checkpoint version in " + path);
  if (header.value("tagset", "") != PosTagset::id())
    throw DataError("checkpoint uses unknown POS tagset");

  ModelConfig mcfg = ModelConfig::from_json(header.at("model"));
  TrainConfig tcfg = TrainConfig::from_json(header.at("train"));
  SorterConfig scfg = SorterConfig::from_json(header.at("sorter"));

  Vocabulary vocab;
  auto toks = header.at("vocab").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (static_cast<int>(i) < vocab.size()) {
      if (toks[i] != vocab.token(static_cast<int>(i)))
        throw DataError("checkpoint vocabulary specials mismatch");
    } else {
      vocab.add_token(toks[i]);
    }
  }

  auto pipe = std::make_unique<Pipeline>(mcfg, tcfg, scfg, std::move(vocab),
                                         header.value("param_seed", std::uint64_t{0}));

  auto plist = header.at("params");
  if (plist.size() != pipe->store.all().size())
    throw DataError("checkpoint parameter list does not match the architecture");
  std::size_t at = 16 + hlen;
  auto read_block = [&](auto member) {
    std::size_t i = 0;
    for (auto& [name, p] : pipe->store.all()) {
      const auto& meta = plist[i++];
      if (meta.at("name").get<std::string>() != name ||
          meta.at("rows").get<int>() != p.value.rows() ||
          meta.at("cols").get<int>() != p.value.cols())
        throw DataError("checkpoint parameter mismatch at " + name);
      ckpt_detail::get_doubles(body, at, p.*member);
    }
  };
  read_block(&Parameter::value);
  if (header.value("has_moments", false)) {
    read_block(&Parameter::m);
    read_block(&Parameter::v);
  }
  if (at != body.size()) throw DataError("checkpoint has trailing bytes: " + path);
  return pipe;
}

}  // namespace kgtext
