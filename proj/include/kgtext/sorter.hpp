#pragma once

// Triplet description-order prediction.  Each padded slot is embedded from
// hashed surface buckets as [e_head; e_rel; e_tail; e_head + e_rel - e_tail],
// scored by a two-layer classifier into N position classes (log-probability
// rows), and decoded into a valid permutation with greedy or optimal
// assignment repair.  A node-level variant classifies heads and tails
// independently and ranks triplets by mean expected position (baseline).

#include <algorithm>
#include <tuple>

#include "kgtext/data.hpp"
#include "kgtext/nn.hpp"
#include "kgtext/order_label.hpp"

namespace kgtext {

struct SorterConfig {
  int n_slots = 8;
  int d_s = 32;  // slot feature width; per-surface embedding is d_s / 4
  int hidden = 64;
  int n_buckets = 1024;
  bool optimal_assignment = false;

  nlohmann::json to_json() const {
    return nlohmann::json{{"n_slots", n_slots},
                          {"d_s", d_s},
                          {"hidden", hidden},
                          {"n_buckets", n_buckets},
                          {"optimal_assignment", optimal_assignment}};
  }

  static SorterConfig from_json(const nlohmann::json& j) {
    SorterConfig c;
    c.n_slots = j.value("n_slots", c.n_slots);
    c.d_s = j.value("d_s", c.d_s);
    c.hidden = j.value("hidden", c.hidden);
    c.n_buckets = j.value("n_buckets", c.n_buckets);
    c.optimal_assignment = j.value("optimal_assignment", c.optimal_assignment);
    return c;
  }
};

inline int surface_bucket(const std::string& surface, int n_buckets) {
  return static_cast<int>(fnv1a64(lowercase(normalize_whitespace(surface))) %
                          static_cast<std::uint64_t>(n_buckets));
}

// Row-wise argmax with lowest-index tie break; if the result is not a
// permutation, repair by assignment over the n_real x n_real submatrix.
// Greedy repair commits the highest remaining entry whose row and column
// are both free (ties: lower row, then lower column).  The optimal flag
// switches to exact maximum-total-score assignment via bitmask DP.
inline OrderLabel decode_order(const MatrixXd& scores, int n_real, int out_slots,
                               bool optimal = false) {
  if (n_real < 1 || n_real > scores.rows() || n_real > scores.cols())
    throw UsageError("decode_order: n_real out of range");
  if (out_slots < n_real) throw UsageError("decode_order: out_slots < n_real");
  std::vector<int> ranks(static_cast<std::size_t>(n_real), -1);

  std::vector<bool> taken(static_cast<std::size_t>(n_real), false);
  bool is_perm = true;
  for (int i = 0; i < n_real; ++i) {
    int best = 0;
    for (int j = 1; j < n_real; ++j)
      if (scores(i, j) > scores(i, best)) best = j;
    ranks[static_cast<std::size_t>(i)] = best;
    if (taken[static_cast<std::size_t>(best)]) is_perm = false;
    taken[static_cast<std::size_t>(best)] = true;
  }

  if (!is_perm) {
    if (optimal) {
      // dp over rows with a bitmask of used columns
      const int full = (1 << n_real) - 1;
      std::vector<double> dp(static_cast<std::size_t>(full + 1),
                             -std::numeric_limits<double>::infinity());
      std::vector<int> choice(static_cast<std::size_t>(full + 1), -1);
      dp[0] = 0.0;
      for (int mask = 0; mask < full; ++mask) {
        if (!std::isfinite(dp[static_cast<std::size_t>(mask)])) continue;
        int row = __builtin_popcount(static_cast<unsigned>(mask));
        for (int col = 0; col < n_real; ++col) {
          if (mask & (1 << col)) continue;
          int next = mask | (1 << col);
          double cand = dp[static_cast<std::size_t>(mask)] + scores(row, col);
          if (cand > dp[static_cast<std::size_t>(next)]) {
            dp[static_cast<std::size_t>(next)] = cand;
            choice[static_cast<std::size_t>(next)] = col;
          }
        }
      }
      int mask = full;
      for (int row = n_real - 1; row >= 0; --row) {
        int col = choice[static_cast<std::size_t>(mask)];
        ranks[static_cast<std::size_t>(row)] = col;
        mask &= ~(1 << col);
      }
    } else {
      std::vector<std::tuple<double, int, int>> entries;
      for (int i = 0; i < n_real; ++i)
        for (int j = 0; j < n_real; ++j) entries.emplace_back(-scores(i, j), i, j);
      std::sort(entries.begin(), entries.end());
      std::vector<bool> row_free(static_cast<std::size_t>(n_real), true);
      std::vector<bool> col_free(static_cast<std::size_t>(n_real), true);
      std::fill(ranks.begin(), ranks.end(), -1);
      int committed = 0;
      for (const auto& [neg, i, j] : entries) {
        if (committed == n_real) break;
        if (row_free[static_cast<std::size_t>(i)] && col_free[static_cast<std::size_t>(j)]) {
          ranks[static_cast<std::size_t>(i)] = j;
          row_free[static_cast<std::size_t>(i)] = false;
          col_free[static_cast<std::size_t>(j)] = false;
          ++committed;
        }
      }
    }
  }

  OrderLabel out;
  out.ranks.assign(static_cast<std::size_t>(out_slots), OrderLabel::kPadRank);
  for (int i = 0; i < n_real; ++i) out.ranks[static_cast<std::size_t>(i)] = ranks[static_cast<std::size_t>(i)];
  return out;
}

class TripletSorter {
 public:
  TripletSorter(ParamStore& ps, const SorterConfig& cfg)
      : cfg_(cfg),
        emb_(ps, "sorter.emb", cfg.n_buckets, entity_dim()),
        fc1_(ps, "sorter.fc1", cfg.d_s, cfg.hidden),
        fc2_(ps, "sorter.fc2", cfg.hidden, cfg.n_slots) {
    if (cfg.d_s % 4 != 0) throw UsageError("sorter d_s must be divisible by 4");
  }

  const SorterConfig& config() const { return cfg_; }
  int entity_dim() const { return cfg_.d_s / 4; }

  // (N, d_s) slot features; pad slots share the placeholder rows.
  Var features(Tape& t, const PaddedGraph& pg) const {
    std::vector<int> hb, rb, tb;
    for (const Triplet& tri : pg.triplets) {
      hb.push_back(surface_bucket(tri.head, cfg_.n_buckets));
      rb.push_back(surface_bucket(tri.relation, cfg_.n_buckets));
      tb.push_back(surface_bucket(tri.tail, cfg_.n_buckets));
    }
    Var H = emb_.forward(t, hb);
    Var R = emb_.forward(t, rb);
    Var T = emb_.forward(t, tb);
    Var trans = t.sub(t.add(H, R), T);
    return t.concat_cols({H, R, T, trans});
  }

  // (N, N) rows of position-class log-probabilities.
  Var score_log(Tape& t, const Var& feats) const {
    return t.log_softmax_rows(fc2_.forward(t, t.gelu(fc1_.forward(t, feats))));
  }

  MatrixXd score_matrix(const PaddedGraph& pg) const {
    Tape t;
    return score_log(t, features(t, pg))->value;
  }

  OrderLabel predict(const PaddedGraph& pg) const {
    return decode_order(score_matrix(pg), pg.n_real, cfg_.n_slots, cfg_.optimal_assignment);
  }

  // -sum over real slots of log-score at the gold rank; pads excluded.
  Var loss(Tape& t, const Var& log_scores, const OrderLabel& gold) const {
    int n = gold.n_real();
    if (n < 1 || n > static_cast<int>(log_scores->value.rows()))
      throw UsageError("sorter loss: gold order does not fit score matrix");
    std::vector<int> targets;
    for (int i = 0; i < n; ++i) targets.push_back(gold.ranks[static_cast<std::size_t>(i)]);
    return t.nll_pick(t.slice_rows(log_scores, 0, n), targets);
  }

 private:
  SorterConfig cfg_;
  EmbeddingLayer emb_;
  LinearLayer fc1_, fc2_;
};

// Baseline: heads and tails classified independently into position classes;
// a triplet's predicted position is the mean expected position of its two
// entity nodes.
class NodeSorter {
 public:
  NodeSorter(ParamStore& ps, const SorterConfig& cfg)
      : cfg_(cfg),
        emb_(ps, "nodesorter.emb", cfg.n_buckets, cfg.d_s / 4),
        fc1_(ps, "nodesorter.fc1", cfg.d_s / 4, cfg.hidden),
        fc2_(ps, "nodesorter.fc2", cfg.hidden, cfg.n_slots) {}

  // (2*n_real, N) log-probabilities: head rows then tail rows.
  Var node_scores(Tape& t, const PaddedGraph& pg) const {
    std::vector<int> ids;
    for (int i = 0; i < pg.n_real; ++i)
      ids.push_back(surface_bucket(pg.triplets[static_cast<std::size_t>(i)].head, cfg_.n_buckets));
    for (int i = 0; i < pg.n_real; ++i)
      ids.push_back(surface_bucket(pg.triplets[static_cast<std::size_t>(i)].tail, cfg_.n_buckets));
    Var e = emb_.forward(t, ids);
    return t.log_softmax_rows(fc2_.forward(t, t.gelu(fc1_.forward(t, e))));
  }

  Var loss(Tape& t, const PaddedGraph& pg, const OrderLabel& gold) const {
    int n = gold.n_real();
    std::vector<int> targets;
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < n; ++i) targets.push_back(gold.ranks[static_cast<std::size_t>(i)]);
    return t.nll_pick(node_scores(t, pg), targets);
  }

  OrderLabel predict(const PaddedGraph& pg) const {
    Tape t;
    MatrixXd lp = node_scores(t, pg)->value;
    int n = pg.n_real;
    std::vector<std::pair<double, int>> keyed;
    for (int i = 0; i < n; ++i) {
      double eh = 0.0, et = 0.0;
      for (int c = 0; c < cfg_.n_slots; ++c) {
        eh += c * std::exp(lp(i, c));
        et += c * std::exp(lp(n + i, c));
      }
      keyed.emplace_back(0.5 * (eh + et), i);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<int> listing;
    for (const auto& [key, slot] : keyed) listing.push_back(slot);
    return OrderLabel::from_listing(listing, cfg_.n_slots);
  }

 private:
  SorterConfig cfg_;
  EmbeddingLayer emb_;
  LinearLayer fc1_, fc2_;
};

// ---------------------------------------------------------------------------
// Order source selection used at generation/evaluation time.

enum class OrderMode { kLearned, kNodeLevel, kRandom, kGold, kInput };

inline OrderMode order_mode_from_name(const std::string& name) {
  if (name == "learned") return OrderMode::kLearned;
  if (name == "node_level") return OrderMode::kNodeLevel;
  if (name == "random") return OrderMode::kRandom;
  if (name == "gold") return OrderMode::kGold;
  if (name == "input") return OrderMode::kInput;
  throw UsageError("unknown order mode: " + name +
                   " (expected learned|node_level|random|gold|input)");
}

inline std::string order_mode_name(OrderMode m) {
  switch (m) {
    case OrderMode::kLearned: return "learned";
    case OrderMode::kNodeLevel: return "node_level";
    case OrderMode::kRandom: return "random";
    case OrderMode::kGold: return "gold";
    case OrderMode::kInput: return "input";
  }
  throw UsageError("bad order mode");
}

// gold may be null unless mode == kGold; sorters may be null unless used.
inline OrderLabel order_for_mode(OrderMode mode, const KnowledgeGraph& kg, int n_slots,
                                 const OrderLabel* gold, const TripletSorter* sorter,
                                 const NodeSorter* node_sorter, std::uint64_t seed) {
  switch (mode) {
    case OrderMode::kInput:
      return OrderLabel::identity(kg.size(), n_slots);
    case OrderMode::kGold:
      if (!gold) throw UsageError("gold order requested but unavailable");
      return *gold;
    case OrderMode::kRandom: {
      std::vector<int> listing;
      for (int i = 0; i < kg.size(); ++i) listing.push_back(i);
      std::mt19937_64 rng = make_rng(seed, "order-shuffle:" + kg.id);
      std::shuffle(listing.begin(), listing.end(), rng);
      return OrderLabel::from_listing(listing, n_slots);
    }
    case OrderMode::kLearned:
      if (!sorter) throw UsageError("learned order requested but sorter unavailable");
      return sorter->predict(pad_graph(kg, n_slots));
    case OrderMode::kNodeLevel:
      if (!node_sorter) throw UsageError("node-level order requested but unavailable");
      return node_sorter->predict(pad_graph(kg, n_slots));
  }
  throw UsageError("bad order mode");
}

}  // namespace kgtext
