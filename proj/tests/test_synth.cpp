// Synthetic corpus generators: determinism, the invariant that the
// extracted ground-truth order always matches the order the reference
// segments were written in, rank-token/bucket hygiene for the sorting
// corpus, pool/vocabulary closure for the fixture, and the planted-entity
// disjointness that makes copying necessary on the ablation eval split.

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "kgtext/supervision.hpp"
#include "kgtext/synth.hpp"

namespace kgtext {
namespace {

std::string corpus_fingerprint(const std::vector<Example>& exs) {
  std::string s;
  for (const Example& ex : exs) {
    s += ex.graph.id + "|" + ex.reference + "|";
    for (const Triplet& t : ex.graph.triplets) s += t.head + "," + t.relation + "," + t.tail + ";";
    s += "\n";
  }
  return s;
}

// Rank of each input slot implied by the construction: sorting-corpus
// relations carry an explicit stage index; template corpora order segments
// by template priority.
std::vector<int> expected_listing_by(const KnowledgeGraph& kg,
                                     const std::function<int(const Triplet&)>& key) {
  std::vector<int> slots(kg.triplets.size());
  std::iota(slots.begin(), slots.end(), 0);
  std::stable_sort(slots.begin(), slots.end(), [&](int a, int b) {
    return key(kg.triplets[static_cast<std::size_t>(a)]) <
           key(kg.triplets[static_cast<std::size_t>(b)]);
  });
  return slots;
}

int template_priority(const Triplet& t) {
  const auto& ts = synth_detail::relation_templates();
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (t.relation == ts[i].relation) return static_cast<int>(i);
  ADD_FAILURE() << "unknown relation " << t.relation;
  return -1;
}

TEST(SortingCorpus, IsDeterministicPerSeedAndVariesAcrossSeeds) {
  SortingCorpusConfig cfg;
  EXPECT_EQ(corpus_fingerprint(make_sorting_corpus(cfg)),
            corpus_fingerprint(make_sorting_corpus(cfg)));
  SortingCorpusConfig other = cfg;
  other.seed = cfg.seed + 1;
  EXPECT_NE(corpus_fingerprint(make_sorting_corpus(cfg)),
            corpus_fingerprint(make_sorting_corpus(other)));
}

TEST(SortingCorpus, GoldOrderIsReadableOffTheRelationToken) {
  SortingCorpusConfig cfg;
  cfg.n_graphs = 50;
  std::vector<Example> exs = make_sorting_corpus(cfg);
  ASSERT_EQ(exs.size(), 50u);

  std::set<int> sizes;
  for (const Example& ex : exs) {
    sizes.insert(ex.graph.size());
    SupervisionRecord rec = extract_supervision(ex, cfg.n_slots, "lexicon");
    auto stage_index = [](const Triplet& t) {
      return std::stoi(t.relation.substr(5));  // "stage<i>"
    };
    EXPECT_EQ(rec.order.listing(), expected_listing_by(ex.graph, stage_index))
        << "graph " << ex.graph.id;
  }
  EXPECT_EQ(*sizes.begin(), 2);
  EXPECT_EQ(*sizes.rbegin(), cfg.n_slots);  // covers every size up to N
}

TEST(SortingCorpus, RankTokensOccupyDistinctSorterBuckets) {
  SortingCorpusConfig cfg;
  cfg.n_buckets = 16;  // tight bucket space still yields distinct buckets
  std::vector<Example> exs = make_sorting_corpus(cfg);
  std::set<int> buckets;
  std::set<std::string> relations;
  for (const Example& ex : exs)
    for (const Triplet& t : ex.graph.triplets) {
      relations.insert(t.relation);
      buckets.insert(surface_bucket(t.relation, cfg.n_buckets));
    }
  EXPECT_EQ(buckets.size(), relations.size());
  EXPECT_EQ(relations.size(), static_cast<std::size_t>(cfg.n_slots));
}

TEST(SortingCorpus, RejectsBadConfigs) {
  SortingCorpusConfig cfg;
  cfg.n_slots = 1;
  EXPECT_THROW(make_sorting_corpus(cfg), UsageError);
  cfg = SortingCorpusConfig{};
  cfg.n_buckets = cfg.n_slots - 1;
  EXPECT_THROW(make_sorting_corpus(cfg), UsageError);
}

TEST(GenerationFixture, SegmentsFollowTemplatePriorityAndExtractionAgrees) {
  FixtureCorpusConfig cfg;
  std::vector<Example> exs = make_generation_fixture(cfg);
  ASSERT_EQ(exs.size(), 30u);
  for (const Example& ex : exs) {
    ASSERT_GE(ex.graph.size(), 1);
    ASSERT_LE(ex.graph.size(), 3);
    SupervisionRecord rec = extract_supervision(ex, 4, "lexicon");
    EXPECT_EQ(rec.order.listing(), expected_listing_by(ex.graph, template_priority))
        << "example " << ex.graph.id;
  }
}

TEST(GenerationFixture, VocabularyStaysSmallAndClosed) {
  std::vector<Example> exs = make_generation_fixture(FixtureCorpusConfig{});
  std::set<std::string> tokens;
  for (const Example& ex : exs) {
    for (const std::string& t : tokenize_lower(ex.reference)) tokens.insert(t);
    for (const Triplet& t : ex.graph.triplets)
      for (const std::string& f : {t.head, t.relation, t.tail})
        for (const std::string& tok : tokenize_lower(f)) tokens.insert(tok);
  }
  EXPECT_LT(tokens.size(), 70u);  // closed pools: memorizable by a micro model
}

TEST(GenerationFixture, IsDeterministic) {
  FixtureCorpusConfig cfg;
  EXPECT_EQ(corpus_fingerprint(make_generation_fixture(cfg)),
            corpus_fingerprint(make_generation_fixture(cfg)));
}

TEST(AblationCorpus, SplitSizesAndDeterminism) {
  AblationCorpusConfig cfg;
  cfg.n_train = 40;
  cfg.n_eval = 10;
  SplitCorpus a = make_ablation_corpus(cfg);
  SplitCorpus b = make_ablation_corpus(cfg);
  EXPECT_EQ(a.train.size(), 40u);
  EXPECT_EQ(a.eval.size(), 10u);
  EXPECT_EQ(a.planted_train.size(), 40u);
  EXPECT_EQ(a.planted_eval.size(), 10u);
  EXPECT_EQ(corpus_fingerprint(a.train), corpus_fingerprint(b.train));
  EXPECT_EQ(corpus_fingerprint(a.eval), corpus_fingerprint(b.eval));
}

TEST(AblationCorpus, EvalEntitiesComeFromTheSharedTrainingPool) {
  AblationCorpusConfig cfg;
  cfg.n_train = 60;
  cfg.n_eval = 20;
  cfg.n_planted = 12;
  SplitCorpus sc = make_ablation_corpus(cfg);

  // The pool is genuinely shared: many distinct names recur across training
  // examples, and every eval name was planted in at least one train example.
  std::set<std::string> train_names(sc.planted_train.begin(), sc.planted_train.end());
  EXPECT_GE(train_names.size(), 10u);
  EXPECT_LT(train_names.size(), sc.planted_train.size());

  bool saw_multi_token = false;
  for (std::size_t i = 0; i < sc.eval.size(); ++i) {
    const std::string& name = sc.planted_eval[i];
    saw_multi_token = saw_multi_token || name.find(' ') != std::string::npos;
    EXPECT_EQ(train_names.count(name), 1u) << "eval entity unseen in training: " << name;

    // The planted surface is present in both the graph and the reference of
    // its own example, so it is copyable and scored.
    const Example& ex = sc.eval[i];
    bool in_graph = false;
    for (const Triplet& t : ex.graph.triplets) in_graph = in_graph || t.head == name;
    EXPECT_TRUE(in_graph) << "planted entity missing from graph " << ex.graph.id;
    EXPECT_NE(ex.reference.find(name), std::string::npos);
  }
  EXPECT_TRUE(saw_multi_token);
}

TEST(AblationCorpus, PlantedTokensCarryCopyLabelOne) {
  AblationCorpusConfig cfg;
  cfg.n_train = 6;
  cfg.n_eval = 3;
  SplitCorpus sc = make_ablation_corpus(cfg);
  for (std::size_t i = 0; i < sc.eval.size(); ++i) {
    const Example& ex = sc.eval[i];
    SupervisionRecord rec = extract_supervision(ex, 4, "lexicon");
    std::set<std::string> planted_tokens;
    for (const std::string& t : tokenize_lower(sc.planted_eval[i])) planted_tokens.insert(t);
    int planted_seen = 0;
    for (std::size_t k = 0; k < rec.tokens.size(); ++k) {
      if (planted_tokens.count(lowercase(rec.tokens[k]))) {
        ++planted_seen;
        EXPECT_EQ(rec.copy_labels[k], 1) << "token " << rec.tokens[k];
      }
    }
    EXPECT_GT(planted_seen, 0);
  }
}

TEST(AblationCorpus, ExtractionAgreesWithSegmentOrder) {
  SplitCorpus sc = make_ablation_corpus(AblationCorpusConfig{});
  auto check = [&](const std::vector<Example>& exs) {
    for (const Example& ex : exs) {
      SupervisionRecord rec = extract_supervision(ex, 4, "lexicon");
      EXPECT_EQ(rec.order.listing(), expected_listing_by(ex.graph, template_priority))
          << "example " << ex.graph.id;
    }
  };
  check(sc.train);
  check(sc.eval);
}

}  // namespace
}  // namespace kgtext
