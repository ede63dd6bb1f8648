#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "kgtext/data.hpp"
#include "kgtext/pos.hpp"
#include "kgtext/supervision.hpp"
#include "kgtext/vocab.hpp"

using namespace kgtext;

namespace {

std::string fixture(const std::string& name) {
  return std::string(KGTEXT_TEST_DATA_DIR) + "/" + name;
}

Example awh_example() {
  ParseResult r = parse_dataset(fixture("awh.jsonl"), DatasetFormat::kJsonl);
  return r.examples.at(0);
}

// --- independent oracles -----------------------------------------------
// Written directly from the labeling rules, sharing no code with the
// library implementation.

bool naive_match_at(const std::vector<std::string>& ref, const std::vector<std::string>& needle,
                    size_t at) {
  if (at + needle.size() > ref.size()) return false;
  for (size_t j = 0; j < needle.size(); ++j)
    if (lowercase(ref[at + j]) != lowercase(needle[j])) return false;
  return true;
}

// Exhaustive union of all entity mentions.
std::vector<int> copy_labels_oracle(const KnowledgeGraph& kg,
                                    const std::vector<std::string>& ref) {
  std::vector<int> labels(ref.size(), 0);
  for (const Triplet& t : kg.triplets) {
    for (const std::string& surface : {t.head, t.tail}) {
      std::vector<std::string> needle = tokenize(surface);
      for (size_t at = 0; at < ref.size(); ++at) {
        if (naive_match_at(ref, needle, at))
          for (size_t j = 0; j < needle.size(); ++j) labels[at + j] = 1;
      }
    }
  }
  return labels;
}

// Left-to-right scan; a triplet counts as appearing at the first position
// where every one of its entities that occurs anywhere has started a match.
std::vector<int> order_listing_oracle(const KnowledgeGraph& kg,
                                      const std::vector<std::string>& ref) {
  const int kNever = 1 << 28;
  auto first_start = [&](const std::string& surface) {
    std::vector<std::string> needle = tokenize(surface);
    for (size_t at = 0; at < ref.size(); ++at)
      if (naive_match_at(ref, needle, at)) return static_cast<int>(at);
    return kNever;
  };
  std::vector<std::pair<long long, int>> keyed;
  for (int slot = 0; slot < kg.size(); ++slot) {
    int h = first_start(kg.triplets[static_cast<size_t>(slot)].head);
    int t = first_start(kg.triplets[static_cast<size_t>(slot)].tail);
    long long appear;
    if (h == kNever && t == kNever)
      appear = static_cast<long long>(kNever) * 4 + slot;  // unmentioned last, input order
    else if (h == kNever)
      appear = t;
    else if (t == kNever)
      appear = h;
    else
      appear = std::max(h, t);
    keyed.emplace_back(appear * 100 + slot, slot);  // slot as explicit tie-break
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<int> listing;
  for (auto& [key, slot] : keyed) listing.push_back(slot);
  return listing;
}

// Random (graph, reference) pairs whose references interleave entity
// mentions with noise words.
struct SyntheticPair {
  KnowledgeGraph kg;
  std::vector<std::string> ref;
};

SyntheticPair random_pair(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_dist(1, 4);
  std::uniform_int_distribution<int> word_dist(0, 11);
  std::uniform_int_distribution<int> len_dist(1, 2);
  std::uniform_int_distribution<int> noise_dist(0, 2);
  std::uniform_int_distribution<int> coin(0, 1);
  auto phrase = [&] {
    std::vector<std::string> words;
    int len = len_dist(rng);
    for (int i = 0; i < len; ++i) words.push_back("e" + std::to_string(word_dist(rng)));
    return join(words, " ");
  };
  SyntheticPair pair;
  pair.kg.id = "synthetic";
  int n = n_dist(rng);
  for (int i = 0; i < n; ++i)
    pair.kg.triplets.push_back(make_triplet(phrase(), "rel" + std::to_string(i), phrase()));

  // mention a random subset of entities in a random sequence
  std::vector<std::string> mentions;
  for (const Triplet& t : pair.kg.triplets) {
    if (coin(rng)) mentions.push_back(t.head);
    if (coin(rng)) mentions.push_back(t.tail);
  }
  std::shuffle(mentions.begin(), mentions.end(), rng);
  for (const std::string& m : mentions) {
    for (int i = 0; i < noise_dist(rng); ++i)
      pair.ref.push_back("n" + std::to_string(word_dist(rng)));
    for (const std::string& tok : tokenize(m)) pair.ref.push_back(tok);
  }
  for (int i = 0; i < noise_dist(rng); ++i) pair.ref.push_back("tail" + std::to_string(i));
  if (pair.ref.empty()) pair.ref.push_back("nothing");
  return pair;
}

}  // namespace

// --- ground-truth order --------------------------------------------------

TEST(ExtractGtOrder, AwhMatchesAppendixListing) {
  Example ex = awh_example();
  OrderLabel order = extract_gt_order(ex.graph, tokenize(ex.reference));
  std::vector<int> expected_ranks = {1, 2, 0};
  EXPECT_EQ(order.ranks, expected_ranks);
  std::vector<int> expected_listing = {2, 0, 1};
  EXPECT_EQ(order.listing(), expected_listing);
}

TEST(ExtractGtOrder, SingleTriplet) {
  KnowledgeGraph kg;
  kg.id = "one";
  kg.triplets.push_back(make_triplet("A", "REL", "B"));
  OrderLabel order = extract_gt_order(kg, {"a", "is", "b"});
  std::vector<int> expected = {0};
  EXPECT_EQ(order.ranks, expected);
}

TEST(ExtractGtOrder, UnmentionedTripletsKeepInputOrderAtTheEnd) {
  KnowledgeGraph kg;
  kg.id = "partial";
  kg.triplets.push_back(make_triplet("ghost1", "r", "ghost2"));
  kg.triplets.push_back(make_triplet("seen", "r", "also seen"));
  kg.triplets.push_back(make_triplet("ghost3", "r", "ghost4"));
  OrderLabel order = extract_gt_order(kg, {"also", "seen", "with", "seen"});
  std::vector<int> expected_listing = {1, 0, 2};
  EXPECT_EQ(order.listing(), expected_listing);
}

TEST(ExtractGtOrder, MatchesScanOracleOnRandomPairs) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    SyntheticPair pair = random_pair(rng);
    OrderLabel order = extract_gt_order(pair.kg, pair.ref);
    EXPECT_TRUE(order.valid());
    EXPECT_EQ(order.listing(), order_listing_oracle(pair.kg, pair.ref))
        << "trial " << trial;
  }
}

TEST(ExtractGtOrder, AlwaysAValidPermutation) {
  std::mt19937_64 rng(102);
  for (int trial = 0; trial < 200; ++trial) {
    SyntheticPair pair = random_pair(rng);
    OrderLabel order = extract_gt_order(pair.kg, pair.ref, 8);
    EXPECT_TRUE(order.valid());
    EXPECT_EQ(order.n_real(), pair.kg.size());
  }
}

// --- copy labels ----------------------------------------------------------

TEST(CopyLabels, AwhReferenceLabels) {
  Example ex = awh_example();
  CopyLabelSequence seq = generate_copy_labels(ex.graph, tokenize(ex.reference));
  std::vector<int> expected = {1, 1, 1, 0, 1, 0, 1, 0, 0, 0, 1, 0};
  EXPECT_EQ(seq.labels, expected);
}

TEST(CopyLabels, NoOverlapAllZero) {
  KnowledgeGraph kg;
  kg.id = "zero";
  kg.triplets.push_back(make_triplet("alpha", "r", "beta"));
  CopyLabelSequence seq = generate_copy_labels(kg, {"completely", "different", "words"});
  std::vector<int> expected = {0, 0, 0};
  EXPECT_EQ(seq.labels, expected);
  EXPECT_TRUE(seq.spans.empty());
}

TEST(CopyLabels, RepeatedMentionAllOccurrencesLabeled) {
  KnowledgeGraph kg;
  kg.id = "repeat";
  kg.triplets.push_back(make_triplet("New York", "r", "big"));
  CopyLabelSequence seq =
      generate_copy_labels(kg, {"to", "New", "York", "New", "York", "again"});
  std::vector<int> expected = {0, 1, 1, 1, 1, 0};
  EXPECT_EQ(seq.labels, expected);
  EXPECT_EQ(seq.spans.size(), 2u);
}

TEST(CopyLabels, MatchesExhaustiveOracleOnRandomPairs) {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 300; ++trial) {
    SyntheticPair pair = random_pair(rng);
    CopyLabelSequence seq = generate_copy_labels(pair.kg, pair.ref);
    EXPECT_EQ(seq.labels, copy_labels_oracle(pair.kg, pair.ref)) << "trial " << trial;
  }
}

TEST(CopyLabels, EveryPositiveTokenLiesInsideASpan) {
  std::mt19937_64 rng(104);
  for (int trial = 0; trial < 200; ++trial) {
    SyntheticPair pair = random_pair(rng);
    CopyLabelSequence seq = generate_copy_labels(pair.kg, pair.ref);
    std::vector<int> covered(pair.ref.size(), 0);
    for (const CopySpan& s : seq.spans) {
      EXPECT_GE(s.slot, 0);
      EXPECT_LT(s.slot, pair.kg.size());
      for (int i = s.start; i < s.start + s.len; ++i) covered[static_cast<size_t>(i)] = 1;
    }
    EXPECT_EQ(seq.labels, covered);  // spans partition exactly the 1-labels
  }
}

TEST(CopyLabels, MonotoneUnderAddedTriplet) {
  std::mt19937_64 rng(105);
  for (int trial = 0; trial < 100; ++trial) {
    SyntheticPair pair = random_pair(rng);
    CopyLabelSequence before = generate_copy_labels(pair.kg, pair.ref);
    KnowledgeGraph larger = pair.kg;
    larger.triplets.push_back(make_triplet(pair.ref[0], "extra", "unseen entity"));
    CopyLabelSequence after = generate_copy_labels(larger, pair.ref);
    int ones_before = 0, ones_after = 0;
    for (int l : before.labels) ones_before += l;
    for (int l : after.labels) ones_after += l;
    EXPECT_GE(ones_after, ones_before);
  }
}

// --- POS tagging ----------------------------------------------------------

TEST(PosTagger, BasicSentence) {
  POSSequence seq = tag_pos({"AWH", "was", "established"}, "lexicon");
  std::vector<int> expected = {PosTagset::kNoun, PosTagset::kVerb, PosTagset::kVerb};
  EXPECT_EQ(seq.tags, expected);
}

TEST(PosTagger, EmptySentence) {
  POSSequence seq = tag_pos({}, "lexicon");
  EXPECT_EQ(seq.length(), 0);
}

TEST(PosTagger, RuleCoverage) {
  POSSequence seq =
      tag_pos({"The", "quick", "dogs", "ran", "quickly", "to", "2001", ",", "and", "Paris"},
              "lexicon");
  std::vector<int> expected = {PosTagset::kDet,  PosTagset::kNoun, PosTagset::kNoun,
                               PosTagset::kNoun, PosTagset::kAdv,  PosTagset::kPrt,
                               PosTagset::kNum,  PosTagset::kPunct, PosTagset::kConj,
                               PosTagset::kNoun};
  EXPECT_EQ(seq.tags, expected);
}

TEST(PosTagger, UnknownTaggerRejected) {
  EXPECT_THROW(tag_pos({"word"}, "no-such-tagger"), UsageError);
}

TEST(PosTagger, PreTaggedPassthrough) {
  POSSequence seq = pos_from_names({"NOUN", "VBD", "NN", "??"});
  std::vector<int> expected = {PosTagset::kNoun, PosTagset::kVerb, PosTagset::kNoun,
                               PosTagset::kX};
  EXPECT_EQ(seq.tags, expected);
}

TEST(PosTagger, DeterministicGoldenTagging) {
  // frozen output of the built-in tagger on a mixed sentence
  auto tokens = tokenize("The AWH Engineering College was established in Kuttikkattoor in 2001 .");
  POSSequence seq = tag_pos(tokens, "lexicon");
  std::vector<std::string> expected = {"DET",  "NOUN", "NOUN", "NOUN", "VERB", "VERB",
                                       "ADP",  "NOUN", "ADP",  "NUM",  "PUNCT"};
  EXPECT_EQ(seq.tag_names(), expected);
}

// Noun concentration among copied tokens, restated from the motivating
// observation: copied tokens skew to nouns versus the corpus at large.
TEST(PosTagger, CopiedTokensSkewTowardNouns) {
  std::vector<Example> corpus;
  {
    KnowledgeGraph kg;
    kg.id = "e1";
    kg.triplets.push_back(make_triplet("Alan Bean", "occupation", "test pilot"));
    corpus.push_back(make_example(kg, "Alan Bean worked as a test pilot ."));
  }
  {
    KnowledgeGraph kg;
    kg.id = "e2";
    kg.triplets.push_back(make_triplet("Rome", "country", "Italy"));
    corpus.push_back(make_example(kg, "Rome is quietly located in the country of Italy ."));
  }
  {
    KnowledgeGraph kg;
    kg.id = "e3";
    kg.triplets.push_back(make_triplet("Buzz Aldrin", "birth place", "Glen Ridge"));
    corpus.push_back(make_example(kg, "Buzz Aldrin was famously born in Glen Ridge ."));
  }
  int noun_copied = 0, copied = 0, noun_all = 0, all = 0;
  for (const Example& ex : corpus) {
    auto tokens = tokenize(ex.reference);
    auto labels = generate_copy_labels(ex.graph, tokens).labels;
    POSSequence pos = tag_pos(tokens, "lexicon");
    for (size_t i = 0; i < tokens.size(); ++i) {
      bool is_noun = pos.tags[i] == PosTagset::kNoun;
      ++all;
      noun_all += is_noun ? 1 : 0;
      if (labels[i] == 1) {
        ++copied;
        noun_copied += is_noun ? 1 : 0;
      }
    }
  }
  ASSERT_GT(copied, 0);
  double copied_noun_frac = static_cast<double>(noun_copied) / copied;
  double corpus_noun_frac = static_cast<double>(noun_all) / all;
  EXPECT_GT(copied_noun_frac, corpus_noun_frac);
}

// --- vocabulary -----------------------------------------------------------

TEST(Vocabulary, FrequencyOrderWithSpecials) {
  Vocabulary v = build_vocab({{"a", "a", "b"}});
  int n_specials = static_cast<int>(Vocabulary::specials().size());
  EXPECT_EQ(v.size(), n_specials + 2);
  EXPECT_LT(v.id("a"), v.id("b"));
  EXPECT_EQ(v.id("missing"), Vocabulary::kUnk);
  EXPECT_EQ(v.token(Vocabulary::kHead), "<Head>");
}

TEST(Vocabulary, MinCountFiltersRareTokens) {
  Vocabulary v = build_vocab({{"a", "a", "b"}}, /*min_count=*/2);
  EXPECT_TRUE(v.contains("a"));
  EXPECT_FALSE(v.contains("b"));
}

TEST(Vocabulary, MaxSizeKeepsTopFrequency) {
  std::mt19937_64 rng(9);
  std::vector<std::string> stream;
  // token "t<i>" appears i times, i in 1..60
  for (int i = 1; i <= 60; ++i)
    for (int k = 0; k < i; ++k) stream.push_back("t" + std::to_string(i));
  std::shuffle(stream.begin(), stream.end(), rng);
  Vocabulary v = build_vocab({stream}, 1, 50);
  EXPECT_EQ(v.size(), 50);
  int n_specials = static_cast<int>(Vocabulary::specials().size());
  // the 50 - n_specials most frequent tokens survive
  for (int i = 60; i > 60 - (50 - n_specials); --i)
    EXPECT_TRUE(v.contains("t" + std::to_string(i))) << i;
  EXPECT_FALSE(v.contains("t1"));
  EXPECT_THROW(build_vocab({stream}, 1, n_specials - 1), DataError);
}

TEST(Vocabulary, SaveLoadRoundTrip) {
  Vocabulary v = build_vocab({{"alpha", "beta", "alpha"}});
  std::string path = testing::TempDir() + "vocab.txt";
  v.save(path);
  Vocabulary loaded = Vocabulary::load(path);
  EXPECT_EQ(loaded.size(), v.size());
  EXPECT_EQ(loaded.id("alpha"), v.id("alpha"));
  EXPECT_EQ(loaded.token(Vocabulary::kTail), "<Tail>");
  std::remove(path.c_str());
}

// --- sidecar files --------------------------------------------------------

TEST(Sidecar, RoundTripAndDeterminism) {
  Example ex = awh_example();
  SupervisionSet set;
  set.n_slots = 8;
  set.records.push_back(extract_supervision(ex, 8, "lexicon"));

  std::string path1 = testing::TempDir() + "sup1.jsonl";
  std::string path2 = testing::TempDir() + "sup2.jsonl";
  save_supervision(set, path1);
  save_supervision(set, path2);

  std::ifstream f1(path1), f2(path2);
  std::string c1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string c2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  EXPECT_EQ(c1, c2);
  EXPECT_FALSE(c1.empty());

  SupervisionSet loaded = load_supervision(path1);
  ASSERT_EQ(loaded.records.size(), 1u);
  EXPECT_EQ(loaded.n_slots, 8);
  EXPECT_EQ(loaded.records[0].order.ranks, set.records[0].order.ranks);
  EXPECT_EQ(loaded.records[0].copy_labels, set.records[0].copy_labels);
  EXPECT_EQ(loaded.records[0].pos.tags, set.records[0].pos.tags);
  std::remove(path1.c_str());
  std::remove(path2.c_str());
}

TEST(Sidecar, VersionMismatchRefused) {
  std::string path = testing::TempDir() + "supv.jsonl";
  {
    std::ofstream out(path);
    out << R"({"format":"kgtext-supervision","version":999,"tagset":"coarse12-v1","n_slots":8})"
        << "\n";
  }
  EXPECT_THROW(load_supervision(path), DataError);
  std::remove(path.c_str());
}

TEST(Sidecar, StatsSummary) {
  Example ex = awh_example();
  SupervisionSet set;
  set.n_slots = 8;
  set.records.push_back(extract_supervision(ex, 8, "lexicon"));
  SupervisionStats stats = summarize_supervision(set);
  EXPECT_EQ(stats.n_records, 1);
  EXPECT_EQ(stats.size_histogram.at(3), 1);
  EXPECT_NEAR(stats.copy_rate, 6.0 / 12.0, 1e-12);
}
