#pragma once

// Synthetic corpora for overfit checks and controlled comparisons.
//
//   make_sorting_corpus   — graphs whose description order is spelled out by
//                           a per-rank relation token, so a feature-based
//                           sorter can reach perfect order accuracy.
//   make_generation_fixture — small templated KG-to-text examples over a
//                           closed entity pool, sized to be memorized.
//   make_ablation_corpus  — larger templated corpus where every example
//                           carries a planted pseudo-word entity drawn from
//                           a shared pool.  Pool names are frequent enough
//                           in training for their embeddings to be learned,
//                           but each individual name is too rare for the
//                           generator's output weights to predict it, so
//                           reading the name out of the input graph (the
//                           copy path) is the reliable way to emit it.
//
// Every generator is a pure function of its config (seeded RNG), and every
// reference is built so that the first mention of each triplet appears in
// its own template segment, which makes the extracted ground-truth order
// equal the order the segments were written in.

#include <algorithm>
#include <cctype>
#include <iterator>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "kgtext/data.hpp"
#include "kgtext/sorter.hpp"

namespace kgtext {

namespace synth_detail {

struct RelationTemplate {
  const char* relation;
  const char* pattern;  // with {H} and {T} placeholders
};

// Priorities follow list order: an example's segments are emitted in this
// order, so the gold description order is determined by the relations alone.
inline const std::vector<RelationTemplate>& relation_templates() {
  static const std::vector<RelationTemplate> t = {
      {"capital of", "{H} is the capital of {T} ."},
      {"located in", "{H} is located in {T} ."},
      {"known for", "{H} is known for {T} ."},
      {"borders", "{H} shares a border with {T} ."},
  };
  return t;
}

inline const std::vector<std::string>& city_pool() {
  static const std::vector<std::string> p = {"Riga",   "Tallinn", "Oslo",   "Berlin", "Madrid",
                                             "Lisbon", "Vienna",  "Prague", "Dublin", "Bern"};
  return p;
}

inline const std::vector<std::string>& country_pool() {
  static const std::vector<std::string> p = {"Latvia",  "Estonia",  "Norway",
                                             "Germany", "Spain",    "Portugal",
                                             "Austria", "Czechia",  "Ireland",
                                             "Switzerland"};
  return p;
}

inline const std::vector<std::string>& feature_pool() {
  static const std::vector<std::string> p = {"amber jewels",  "old town walls",
                                             "jazz festivals", "river locks",
                                             "glass bridges",  "winter markets"};
  return p;
}

inline std::string fill(std::string pattern, const std::string& h, const std::string& t) {
  auto replace = [&](const std::string& key, const std::string& value) {
    std::size_t at = pattern.find(key);
    if (at != std::string::npos) pattern.replace(at, key.size(), value);
  };
  replace("{H}", h);
  replace("{T}", t);
  return pattern;
}

// Head / tail pools per relation index in relation_templates() order.
inline const std::vector<std::string>& head_pool_for(int rel) {
  return rel == 3 ? country_pool() : city_pool();
}
inline const std::vector<std::string>& tail_pool_for(int rel) {
  return rel == 2 ? feature_pool() : country_pool();
}

// Tracks every lowercased token already used in an example so no entity
// token ever appears in two different segments (keeps the first-occurrence
// order extraction unambiguous).
struct TokenClaim {
  std::set<std::string> used;

  bool claim(const std::string& surface) {
    std::vector<std::string> toks = tokenize_lower(surface);
    for (const std::string& t : toks)
      if (used.count(t)) return false;
    used.insert(toks.begin(), toks.end());
    return true;
  }
};

inline std::string draw_unclaimed(const std::vector<std::string>& pool, std::mt19937_64& rng,
                                  TokenClaim& claim) {
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i : order)
    if (claim.claim(pool[i])) return pool[i];
  throw DataError("entity pool exhausted while generating a synthetic example");
}

// Capitalized pronounceable pseudo-words for planted entities.
inline std::string pseudo_word(std::mt19937_64& rng) {
  static const char* onsets[] = {"br", "dr", "gl", "kr", "pl", "tr", "v", "z", "m", "sk"};
  static const char* nuclei[] = {"a", "e", "i", "o", "u", "au", "ei"};
  static const char* codas[] = {"x", "n", "rk", "l", "m", "sh", "th", "nd"};
  auto pick = [&](auto& arr) {
    return arr[std::uniform_int_distribution<std::size_t>(0, std::size(arr) - 1)(rng)];
  };
  std::string w = std::string(pick(onsets)) + pick(nuclei) + pick(codas) + pick(nuclei) +
                  pick(codas);
  w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

// Builds one example from (relation index, head, tail) rows: shuffles the
// input slot placement, then writes the reference segments in row order.
inline Example assemble(const std::string& id, const std::vector<std::tuple<int, std::string, std::string>>& rows,
                        std::mt19937_64& rng) {
  const auto& templates = relation_templates();
  const int n = static_cast<int>(rows.size());

  std::vector<int> listing(static_cast<std::size_t>(n));
  std::iota(listing.begin(), listing.end(), 0);
  std::shuffle(listing.begin(), listing.end(), rng);  // listing[k] = input slot of rank k

  KnowledgeGraph kg;
  kg.id = id;
  kg.triplets.resize(static_cast<std::size_t>(n));
  std::string text;
  for (int k = 0; k < n; ++k) {
    const auto& [rel, head, tail] = rows[static_cast<std::size_t>(k)];
    kg.triplets[static_cast<std::size_t>(listing[static_cast<std::size_t>(k)])] =
        make_triplet(head, templates[static_cast<std::size_t>(rel)].relation, tail);
    if (!text.empty()) text += ' ';
    text += fill(templates[static_cast<std::size_t>(rel)].pattern, head, tail);
  }
  return make_example(std::move(kg), text, std::nullopt);
}

}  // namespace synth_detail

// --- sorting corpus --------------------------------------------------------

struct SortingCorpusConfig {
  int n_graphs = 50;
  int n_slots = 8;
  int n_buckets = 1024;  // match the sorter; rank tokens avoid bucket collisions
  std::uint64_t seed = 7;
};

// Graph g has 2 + (g mod (n_slots-1)) triplets.  The triplet of rank k uses
// relation token rank_tokens[k], head "item{k}" and tail "place{k}", placed
// into a shuffled input slot; the reference lists the triplets in rank
// order, so the extracted gold order equals the shuffle and is a pure
// function of the relation surface.
inline std::vector<Example> make_sorting_corpus(const SortingCorpusConfig& cfg) {
  if (cfg.n_graphs < 1 || cfg.n_slots < 2)
    throw UsageError("sorting corpus needs n_graphs >= 1 and n_slots >= 2");
  if (cfg.n_buckets < cfg.n_slots)
    throw UsageError("sorting corpus needs n_buckets >= n_slots for distinct rank tokens");

  std::vector<std::string> rank_tokens;
  std::set<int> used_buckets;
  for (int i = 0; static_cast<int>(rank_tokens.size()) < cfg.n_slots; ++i) {
    std::string tok = "stage" + std::to_string(i);
    if (used_buckets.insert(surface_bucket(tok, cfg.n_buckets)).second)
      rank_tokens.push_back(std::move(tok));
  }

  std::mt19937_64 rng = make_rng(cfg.seed, "synth-sorting");
  std::vector<Example> out;
  for (int g = 0; g < cfg.n_graphs; ++g) {
    int n = 2 + g % (cfg.n_slots - 1);
    std::vector<std::tuple<int, std::string, std::string>> rows;
    KnowledgeGraph kg;
    kg.id = "sort" + std::to_string(g);
    kg.triplets.resize(static_cast<std::size_t>(n));

    std::vector<int> listing(static_cast<std::size_t>(n));
    std::iota(listing.begin(), listing.end(), 0);
    std::shuffle(listing.begin(), listing.end(), rng);

    std::string text;
    for (int k = 0; k < n; ++k) {
      std::string head = "item" + std::to_string(k);
      std::string tail = "place" + std::to_string(k);
      kg.triplets[static_cast<std::size_t>(listing[static_cast<std::size_t>(k)])] =
          make_triplet(head, rank_tokens[static_cast<std::size_t>(k)], tail);
      if (!text.empty()) text += ' ';
      text += head + " " + rank_tokens[static_cast<std::size_t>(k)] + " " + tail + " .";
    }
    out.push_back(make_example(std::move(kg), text, std::nullopt));
  }
  return out;
}

// --- generation fixture ----------------------------------------------------

struct FixtureCorpusConfig {
  int n_examples = 30;
  std::uint64_t seed = 11;
};

// Example i has 1 + (i mod 3) triplets with distinct relations drawn from
// the template list; all entities come from small closed pools, so the
// whole corpus is in-vocabulary and memorizable.
inline std::vector<Example> make_generation_fixture(const FixtureCorpusConfig& cfg) {
  if (cfg.n_examples < 1) throw UsageError("fixture needs n_examples >= 1");
  std::mt19937_64 rng = make_rng(cfg.seed, "synth-fixture");
  const int n_templates = static_cast<int>(synth_detail::relation_templates().size());

  std::vector<Example> out;
  for (int i = 0; i < cfg.n_examples; ++i) {
    int n = 1 + i % 3;
    std::vector<int> rels(static_cast<std::size_t>(n_templates));
    std::iota(rels.begin(), rels.end(), 0);
    std::shuffle(rels.begin(), rels.end(), rng);
    std::sort(rels.begin(), rels.begin() + n);  // segment order follows template priority

    synth_detail::TokenClaim claim;
    std::vector<std::tuple<int, std::string, std::string>> rows;
    for (int k = 0; k < n; ++k) {
      int rel = rels[static_cast<std::size_t>(k)];
      std::string head = synth_detail::draw_unclaimed(synth_detail::head_pool_for(rel), rng, claim);
      std::string tail = synth_detail::draw_unclaimed(synth_detail::tail_pool_for(rel), rng, claim);
      rows.emplace_back(rel, head, tail);
    }
    out.push_back(synth_detail::assemble("fix" + std::to_string(i), rows, rng));
  }
  return out;
}

// --- ablation corpus -------------------------------------------------------

struct AblationCorpusConfig {
  int n_train = 240;
  int n_eval = 60;
  int n_planted = 60;  // size of the shared pool of planted pseudo-entities
  std::uint64_t seed = 23;
};

struct SplitCorpus {
  std::vector<Example> train;
  std::vector<Example> eval;
  std::vector<std::string> planted_train;  // pseudo-entity surface per train example
  std::vector<std::string> planted_eval;   // each one also occurs in planted_train
};

inline SplitCorpus make_ablation_corpus(const AblationCorpusConfig& cfg) {
  if (cfg.n_train < 1 || cfg.n_eval < 1 || cfg.n_planted < 1)
    throw UsageError("ablation corpus needs n_train, n_eval and n_planted >= 1");
  std::mt19937_64 rng = make_rng(cfg.seed, "synth-ablation");

  // One global claim set keeps every pool name's pseudo-words distinct from
  // other pool names, pool entities and template words.
  std::set<std::string> taken;
  for (const auto& t : synth_detail::relation_templates())
    for (const std::string& tok : tokenize_lower(t.pattern)) taken.insert(tok);
  for (const auto* pool : {&synth_detail::city_pool(), &synth_detail::country_pool(),
                           &synth_detail::feature_pool()})
    for (const std::string& s : *pool)
      for (const std::string& tok : tokenize_lower(s)) taken.insert(tok);

  auto fresh_pseudo = [&](bool two_words) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      std::string name = synth_detail::pseudo_word(rng);
      if (two_words) name += " " + synth_detail::pseudo_word(rng);
      bool clean = true;
      for (const std::string& tok : tokenize_lower(name))
        if (taken.count(tok)) clean = false;
      if (!clean) continue;
      for (const std::string& tok : tokenize_lower(name)) taken.insert(tok);
      return name;
    }
    throw DataError("could not generate a fresh pseudo-entity");
  };

  const int n_templates = static_cast<int>(synth_detail::relation_templates().size());
  auto build_half = [&](int count, const std::string& prefix,
                        const std::vector<std::string>& names, std::vector<Example>& dst,
                        std::vector<std::string>& planted) {
    std::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);
    for (int i = 0; i < count; ++i) {
      int n = 1 + i % 3;
      std::vector<int> rels(static_cast<std::size_t>(n_templates));
      std::iota(rels.begin(), rels.end(), 0);
      std::shuffle(rels.begin(), rels.end(), rng);
      std::sort(rels.begin(), rels.begin() + n);

      synth_detail::TokenClaim claim;
      std::string planted_name = names[pick(rng)];
      claim.claim(planted_name);

      std::vector<std::tuple<int, std::string, std::string>> rows;
      for (int k = 0; k < n; ++k) {
        int rel = rels[static_cast<std::size_t>(k)];
        std::string head =
            k == 0 ? planted_name
                   : synth_detail::draw_unclaimed(synth_detail::head_pool_for(rel), rng, claim);
        std::string tail = synth_detail::draw_unclaimed(synth_detail::tail_pool_for(rel), rng, claim);
        rows.emplace_back(rel, head, tail);
      }
      dst.push_back(synth_detail::assemble(prefix + std::to_string(i), rows, rng));
      planted.push_back(std::move(planted_name));
    }
  };

  std::vector<std::string> pool;
  pool.reserve(static_cast<std::size_t>(cfg.n_planted));
  for (int j = 0; j < cfg.n_planted; ++j)
    pool.push_back(fresh_pseudo(/*two_words=*/j % 2 == 0));

  SplitCorpus sc;
  build_half(cfg.n_train, "ab-tr", pool, sc.train, sc.planted_train);

  // Eval examples reuse names the training half actually contains, in new
  // graph combinations.  Emitting them is then a read-the-input problem
  // rather than a produce-a-never-trained-name problem.
  std::vector<std::string> used;
  std::set<std::string> seen_in_train;
  for (const std::string& s : sc.planted_train)
    if (seen_in_train.insert(s).second) used.push_back(s);
  build_half(cfg.n_eval, "ab-ev", used, sc.eval, sc.planted_eval);
  return sc;
}

}  // namespace kgtext
