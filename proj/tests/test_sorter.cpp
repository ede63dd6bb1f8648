// Tests for order decoding and the two sorting networks.  decode_order is
// checked against two independently written oracles (greedy repair and
// brute-force optimal assignment) plus a 10,000-matrix permutation-validity
// sweep; the triplet sorter is checked for placeholder-row sharing, the
// uniform closed-form loss, and gradient correctness.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <tuple>

#include "kgtext/sorter.hpp"

namespace kgtext {
namespace {

// Independent re-implementation of the decode contract for the oracle:
// row-argmax (lowest column on ties); if the result is not a permutation,
// rebuild greedily from the globally best (score, row, col) entries.
std::vector<int> oracle_greedy(const MatrixXd& s, int n) {
  std::vector<int> ranks(static_cast<std::size_t>(n));
  std::vector<int> used(static_cast<std::size_t>(n), 0);
  bool perm = true;
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int j = 1; j < n; ++j)
      if (s(i, j) > s(i, best)) best = j;
    ranks[static_cast<std::size_t>(i)] = best;
    if (used[static_cast<std::size_t>(best)]++) perm = false;
  }
  if (perm) return ranks;
  std::vector<std::tuple<double, int, int>> cells;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cells.emplace_back(-s(i, j), i, j);
  std::sort(cells.begin(), cells.end());
  std::fill(ranks.begin(), ranks.end(), -1);
  std::vector<int> col_used(static_cast<std::size_t>(n), 0);
  for (auto& [neg, i, j] : cells)
    if (ranks[static_cast<std::size_t>(i)] < 0 && !col_used[static_cast<std::size_t>(j)]) {
      ranks[static_cast<std::size_t>(i)] = j;
      col_used[static_cast<std::size_t>(j)] = 1;
    }
  return ranks;
}

double assignment_score(const MatrixXd& s, const std::vector<int>& ranks) {
  double total = 0.0;
  for (int i = 0; i < static_cast<int>(ranks.size()); ++i) total += s(i, ranks[static_cast<std::size_t>(i)]);
  return total;
}

double oracle_best_assignment(const MatrixXd& s, int n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  double best = -1e300;
  do {
    best = std::max(best, assignment_score(s, perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

MatrixXd random_scores(std::mt19937_64& rng, int n, bool integer_ties) {
  MatrixXd m(n, n);
  if (integer_ties) {
    std::uniform_int_distribution<int> d(0, 2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = d(rng);
  } else {
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = d(rng);
  }
  return m;
}

KnowledgeGraph graph(std::vector<std::array<const char*, 3>> rows, const std::string& id = "g") {
  KnowledgeGraph kg;
  kg.id = id;
  for (auto& r : rows) kg.triplets.push_back({r[0], r[1], r[2]});
  return kg;
}

TEST(DecodeOrder, CollidingArgmaxIsRepaired) {
  // Both rows prefer column 0; repair assigns the stronger row (0.7) to
  // column 0 and the other to column 1, giving ranks [1, 0].
  MatrixXd s(2, 2);
  s << 0.6, 0.4, 0.7, 0.3;
  OrderLabel greedy = decode_order(s, 2, 2, /*optimal=*/false);
  EXPECT_EQ(greedy.ranks, (std::vector<int>{1, 0}));
  OrderLabel opt = decode_order(s, 2, 2, /*optimal=*/true);
  EXPECT_EQ(opt.ranks, (std::vector<int>{1, 0}));
}

TEST(DecodeOrder, CleanArgmaxKeptAsIs) {
  MatrixXd s(3, 3);
  s << 0.1, 0.8, 0.1, 0.9, 0.05, 0.05, 0.2, 0.2, 0.6;
  EXPECT_EQ(decode_order(s, 3, 3).ranks, (std::vector<int>{1, 0, 2}));
}

TEST(DecodeOrder, PadsToRequestedSlots) {
  MatrixXd s(2, 2);
  s << 0.9, 0.1, 0.1, 0.9;
  OrderLabel o = decode_order(s, 2, 5);
  ASSERT_EQ(o.n_slots(), 5);
  EXPECT_EQ(o.n_real(), 2);
  EXPECT_TRUE(o.valid());
  EXPECT_EQ(o.ranks[2], OrderLabel::kPadRank);
}

TEST(DecodeOrder, MatchesGreedyOracleOnRandomMatrices) {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 500; ++trial) {
    int n = 2 + static_cast<int>(rng() % 4);  // 2..5
    MatrixXd s = random_scores(rng, n, trial % 2 == 1);
    OrderLabel got = decode_order(s, n, n, false);
    std::vector<int> want = oracle_greedy(s, n);
    EXPECT_EQ(std::vector<int>(got.ranks.begin(), got.ranks.begin() + n), want)
        << "trial " << trial << " n=" << n << "\n" << s;
  }
}

TEST(DecodeOrder, OptimalModeMaximizesAssignmentScore) {
  std::mt19937_64 rng(405);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + static_cast<int>(rng() % 4);
    MatrixXd s = random_scores(rng, n, false);
    OrderLabel got = decode_order(s, n, n, true);
    std::vector<int> ranks(got.ranks.begin(), got.ranks.begin() + n);
    EXPECT_NEAR(assignment_score(s, ranks), oracle_best_assignment(s, n), 1e-9)
        << "trial " << trial;
  }
}

TEST(DecodeOrder, TenThousandRandomMatricesAllValidPermutations) {
  std::mt19937_64 rng(406);
  int checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    int n = 1 + static_cast<int>(rng() % 8);  // 1..8
    MatrixXd s = random_scores(rng, n, trial % 3 == 0);
    OrderLabel o = decode_order(s, n, 8, trial % 2 == 0);
    ASSERT_TRUE(o.valid()) << "trial " << trial << "\n" << s;
    ASSERT_EQ(o.n_real(), n);
    ++checked;
  }
  EXPECT_EQ(checked, 10000);
}

TEST(DecodeOrder, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(407);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + static_cast<int>(rng() % 4);
    MatrixXd s = random_scores(rng, n, false);
    MatrixXd warped = (2.0 * s).array() + 1.5;  // strictly increasing map
    EXPECT_EQ(decode_order(s, n, n, false).ranks, decode_order(warped, n, n, false).ranks);
  }
}

TEST(DecodeOrder, RejectsBadArguments) {
  MatrixXd s(2, 2);
  s.setZero();
  EXPECT_THROW(decode_order(s, 0, 2), UsageError);
  EXPECT_THROW(decode_order(s, 3, 3), UsageError);
  EXPECT_THROW(decode_order(s, 2, 1), UsageError);
}

TEST(SurfaceBucket, NormalizesCaseAndWhitespace) {
  EXPECT_EQ(surface_bucket("New York", 1024), surface_bucket("  new   YORK ", 1024));
  EXPECT_NE(surface_bucket("New York", 1024), surface_bucket("Old York", 1024));
  int b = surface_bucket("anything", 16);
  EXPECT_GE(b, 0);
  EXPECT_LT(b, 16);
}

TEST(TripletSorter, ScoreMatrixRowsAreLogDistributions) {
  SorterConfig cfg;
  cfg.n_slots = 4;
  cfg.d_s = 8;
  cfg.hidden = 16;
  ParamStore ps(11);
  TripletSorter sorter(ps, cfg);
  PaddedGraph pg = pad_graph(graph({{"a", "r1", "b"}, {"c", "r2", "d"}}), 4);
  MatrixXd lp = sorter.score_matrix(pg);
  ASSERT_EQ(lp.rows(), 4);
  ASSERT_EQ(lp.cols(), 4);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(lp.row(i).array().exp().sum(), 1.0, 1e-12);
}

TEST(TripletSorter, PlaceholderRowsShareScores) {
  SorterConfig cfg;
  cfg.n_slots = 6;
  cfg.d_s = 8;
  ParamStore ps(13);
  TripletSorter sorter(ps, cfg);
  PaddedGraph pg = pad_graph(graph({{"a", "r", "b"}, {"c", "r", "d"}}), 6);
  MatrixXd lp = sorter.score_matrix(pg);
  for (int i = 3; i < 6; ++i)
    EXPECT_TRUE(lp.row(i).isApprox(lp.row(2), 0.0)) << "padding rows must be identical";
  EXPECT_FALSE(lp.row(0).isApprox(lp.row(2)));
}

TEST(TripletSorter, IdenticalTripletsGetIdenticalRows) {
  SorterConfig cfg;
  cfg.n_slots = 4;
  cfg.d_s = 8;
  ParamStore ps(17);
  TripletSorter sorter(ps, cfg);
  PaddedGraph pg =
      pad_graph(graph({{"a", "r", "b"}, {"x", "y", "z"}, {"a", "r", "b"}}), 4);
  MatrixXd lp = sorter.score_matrix(pg);
  EXPECT_TRUE(lp.row(0).isApprox(lp.row(2), 0.0));
}

TEST(TripletSorter, ZeroOutputLayerGivesUniformRowsAndClosedFormLoss) {
  SorterConfig cfg;
  cfg.n_slots = 4;
  cfg.d_s = 8;
  ParamStore ps(19);
  TripletSorter sorter(ps, cfg);
  ps.all().at("sorter.fc2.W").value.setZero();
  ps.all().at("sorter.fc2.b").value.setZero();
  PaddedGraph pg = pad_graph(graph({{"a", "r", "b"}, {"c", "r", "d"}, {"e", "r", "f"}}), 4);
  MatrixXd lp = sorter.score_matrix(pg);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(lp(i, j), -std::log(4.0), 1e-12);

  // Uniform predictions: summed pick loss over the 3 real rows = 3 ln 4,
  // regardless of the gold permutation.
  Tape t;
  Var loss = sorter.loss(t, sorter.score_log(t, sorter.features(t, pg)),
                         OrderLabel::from_listing({2, 0, 1}, 4));
  EXPECT_NEAR(loss->value(0, 0), 3.0 * std::log(4.0), 1e-12);
}

TEST(TripletSorter, LossReadsExactlyTheGoldCells) {
  SorterConfig cfg;
  cfg.n_slots = 3;
  cfg.d_s = 8;
  ParamStore ps(23);
  TripletSorter sorter(ps, cfg);
  Tape t;
  MatrixXd lp(3, 3);
  lp << -0.1, -2.0, -3.0, -1.5, -0.2, -2.5, -4.0, -1.0, -0.3;
  Var loss = sorter.loss(t, t.leaf(lp), OrderLabel::from_listing({1, 2, 0}, 3));
  // listing {1,2,0} -> ranks: slot0 gets 1? listing[d]=slot => slot1 rank0,
  // slot2 rank1, slot0 rank2 -> picks lp(0,2), lp(1,0), lp(2,1).
  EXPECT_NEAR(loss->value(0, 0), -(lp(0, 2) + lp(1, 0) + lp(2, 1)), 1e-12);
}

TEST(TripletSorter, PredictReturnsValidPaddedOrder) {
  SorterConfig cfg;
  cfg.n_slots = 8;
  cfg.d_s = 8;
  ParamStore ps(29);
  TripletSorter sorter(ps, cfg);
  PaddedGraph pg = pad_graph(
      graph({{"a", "r", "b"}, {"c", "r", "d"}, {"e", "r", "f"}, {"g", "r", "h"}}), 8);
  OrderLabel o = sorter.predict(pg);
  EXPECT_TRUE(o.valid());
  EXPECT_EQ(o.n_real(), 4);
  EXPECT_EQ(o.n_slots(), 8);
}

TEST(TripletSorter, GradientCheck) {
  SorterConfig cfg;
  cfg.n_slots = 4;
  cfg.d_s = 8;
  cfg.hidden = 8;
  cfg.n_buckets = 32;
  ParamStore ps(31);
  TripletSorter sorter(ps, cfg);
  PaddedGraph pg = pad_graph(graph({{"a", "r1", "b"}, {"c", "r2", "a"}}), 4);
  OrderLabel gold = OrderLabel::from_listing({1, 0}, 4);

  ps.zero_grads();
  Tape t;
  t.backward(sorter.loss(t, sorter.score_log(t, sorter.features(t, pg)), gold));
  auto eval = [&]() {
    Tape ft(false);
    return sorter.loss(ft, sorter.score_log(ft, sorter.features(ft, pg)), gold)->value(0, 0);
  };
  int total = 0, ok = 0;
  const double h = 1e-5;
  for (auto& [name, p] : ps.all()) {
    for (Eigen::Index i = 0; i < p.value.rows(); ++i)
      for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
        double orig = p.value(i, j);
        p.value(i, j) = orig + h;
        double up = eval();
        p.value(i, j) = orig - h;
        double dn = eval();
        p.value(i, j) = orig;
        double num = (up - dn) / (2 * h);
        ++total;
        if (std::abs(num - p.grad(i, j)) / std::max(1.0, std::abs(num)) < 1e-4) ++ok;
      }
  }
  EXPECT_GE(ok, static_cast<int>(0.95 * total));
}

TEST(NodeSorter, UniformScoresPredictInputOrder) {
  SorterConfig cfg;
  cfg.n_slots = 4;
  cfg.d_s = 8;
  ParamStore ps(37);
  NodeSorter ns(ps, cfg);
  ps.all().at("nodesorter.fc2.W").value.setZero();
  ps.all().at("nodesorter.fc2.b").value.setZero();
  PaddedGraph pg = pad_graph(graph({{"a", "r", "b"}, {"c", "r", "d"}, {"e", "r", "f"}}), 4);
  // All expected positions tie; stable sort keeps slot order.
  EXPECT_EQ(ns.predict(pg), OrderLabel::identity(3, 4));
}

TEST(NodeSorter, LossSumsHeadAndTailPicks) {
  SorterConfig cfg;
  cfg.n_slots = 4;
  cfg.d_s = 8;
  ParamStore ps(41);
  NodeSorter ns(ps, cfg);
  ps.all().at("nodesorter.fc2.W").value.setZero();
  ps.all().at("nodesorter.fc2.b").value.setZero();
  PaddedGraph pg = pad_graph(graph({{"a", "r", "b"}, {"c", "r", "d"}}), 4);
  Tape t;
  Var loss = ns.loss(t, pg, OrderLabel::from_listing({1, 0}, 4));
  // 2 head rows + 2 tail rows, uniform over 4 classes: 4 ln 4.
  EXPECT_NEAR(loss->value(0, 0), 4.0 * std::log(4.0), 1e-12);
}

TEST(NodeSorter, PredictionsAreValidOrders) {
  SorterConfig cfg;
  cfg.n_slots = 8;
  cfg.d_s = 8;
  ParamStore ps(43);
  NodeSorter ns(ps, cfg);
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + static_cast<int>(rng() % 8);
    KnowledgeGraph kg;
    kg.id = "t";
    for (int i = 0; i < n; ++i)
      kg.triplets.push_back({"e" + std::to_string(rng() % 12), "r" + std::to_string(rng() % 4),
                             "e" + std::to_string(rng() % 12)});
    OrderLabel o = ns.predict(pad_graph(kg, 8));
    EXPECT_TRUE(o.valid());
    EXPECT_EQ(o.n_real(), n);
  }
}

TEST(OrderModes, NamesRoundTrip) {
  for (OrderMode m : {OrderMode::kLearned, OrderMode::kNodeLevel, OrderMode::kRandom,
                      OrderMode::kGold, OrderMode::kInput})
    EXPECT_EQ(order_mode_from_name(order_mode_name(m)), m);
  EXPECT_THROW(order_mode_from_name("alphabetical"), UsageError);
}

TEST(OrderModes, ModesBehaveAsDocumented) {
  SorterConfig cfg;
  cfg.n_slots = 8;
  cfg.d_s = 8;
  ParamStore ps(47);
  TripletSorter sorter(ps, cfg);
  NodeSorter node(ps, cfg);
  KnowledgeGraph kg = graph({{"a", "r", "b"},
                             {"c", "r", "d"},
                             {"e", "r", "f"},
                             {"g", "r", "h"},
                             {"i", "r", "j"},
                             {"k", "r", "l"}});
  OrderLabel gold = OrderLabel::from_listing({5, 4, 3, 2, 1, 0}, 8);

  EXPECT_EQ(order_for_mode(OrderMode::kGold, kg, 8, &gold, &sorter, &node, 1), gold);
  EXPECT_EQ(order_for_mode(OrderMode::kInput, kg, 8, &gold, &sorter, &node, 1),
            OrderLabel::identity(6, 8));
  EXPECT_EQ(order_for_mode(OrderMode::kLearned, kg, 8, nullptr, &sorter, &node, 1),
            sorter.predict(pad_graph(kg, 8)));
  EXPECT_EQ(order_for_mode(OrderMode::kNodeLevel, kg, 8, nullptr, &sorter, &node, 1),
            node.predict(pad_graph(kg, 8)));

  OrderLabel r1 = order_for_mode(OrderMode::kRandom, kg, 8, nullptr, nullptr, nullptr, 1);
  OrderLabel r1b = order_for_mode(OrderMode::kRandom, kg, 8, nullptr, nullptr, nullptr, 1);
  OrderLabel r2 = order_for_mode(OrderMode::kRandom, kg, 8, nullptr, nullptr, nullptr, 2);
  EXPECT_TRUE(r1.valid());
  EXPECT_EQ(r1, r1b) << "random order must be seed-deterministic";
  EXPECT_NE(r1, r2) << "different seeds should shuffle differently (6! = 720 orders)";
}

TEST(OrderModes, GoldModeRequiresGoldLabel) {
  KnowledgeGraph kg = graph({{"a", "r", "b"}});
  EXPECT_THROW(order_for_mode(OrderMode::kGold, kg, 8, nullptr, nullptr, nullptr, 1),
               UsageError);
}

}  // namespace
}  // namespace kgtext
