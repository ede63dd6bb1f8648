#pragma once

// Training-label extraction from reference sentences: description order for
// the sorter, 0/1 copy labels for the gate, POS sequences, and the sidecar
// files that persist all of it per split.
//
// Mention matching is exact contiguous token-subsequence matching after
// lowercasing; relations contribute no evidence. A triplet "first appears"
// at the earliest position where its mention evidence is complete: the
// latest of the first-occurrence starts of whichever of head and tail occur
// in the reference at all. Triplets with no mention keep input order after
// all mentioned ones.

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgtext/common.hpp"
#include "kgtext/data.hpp"
#include "kgtext/order_label.hpp"
#include "kgtext/pos.hpp"
#include "kgtext/tokenizer.hpp"

namespace kgtext {

struct MentionMatch {
  int start = 0;
  int len = 0;
  int slot = 0;
  bool from_head = false;
};

struct CopySpan {
  int start = 0;
  int len = 0;
  int slot = 0;
};

struct CopyLabelSequence {
  std::vector<int> labels;  // one 0/1 per reference token
  std::vector<CopySpan> spans;

  int length() const { return static_cast<int>(labels.size()); }
};

namespace detail {

inline std::vector<std::string> lowered(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lowercase(t));
  return out;
}

inline void collect_matches(const std::string& surface, int slot, bool from_head,
                            const std::vector<std::string>& ref_lower,
                            std::vector<MentionMatch>& out) {
  std::vector<std::string> needle = tokenize_lower(surface);
  if (needle.empty()) return;
  const int n = static_cast<int>(ref_lower.size());
  const int m = static_cast<int>(needle.size());
  for (int start = 0; start + m <= n; ++start) {
    bool hit = true;
    for (int j = 0; j < m; ++j) {
      if (ref_lower[static_cast<size_t>(start + j)] != needle[static_cast<size_t>(j)]) {
        hit = false;
        break;
      }
    }
    if (hit) out.push_back({start, m, slot, from_head});
  }
}

}  // namespace detail

// All entity (head/tail) mentions in the reference, covering every offset.
inline std::vector<MentionMatch> find_entity_mentions(
    const KnowledgeGraph& kg, const std::vector<std::string>& ref_tokens) {
  std::vector<std::string> ref_lower = detail::lowered(ref_tokens);
  std::vector<MentionMatch> matches;
  for (int slot = 0; slot < kg.size(); ++slot) {
    const Triplet& t = kg.triplets[static_cast<size_t>(slot)];
    detail::collect_matches(t.head, slot, true, ref_lower, matches);
    detail::collect_matches(t.tail, slot, false, ref_lower, matches);
  }
  return matches;
}

// Labels are the union of all mentions. Spans carve that union into
// non-overlapping ranges, attributed longest-match-first, then leftmost,
// then by input slot; a match that partially overlaps an earlier one keeps
// its uncovered remainder, so spans always cover every label-1 token.
inline CopyLabelSequence generate_copy_labels(const KnowledgeGraph& kg,
                                              const std::vector<std::string>& ref_tokens) {
  CopyLabelSequence out;
  out.labels.assign(ref_tokens.size(), 0);
  std::vector<MentionMatch> matches = find_entity_mentions(kg, ref_tokens);
  for (const auto& m : matches)
    for (int i = 0; i < m.len; ++i) out.labels[static_cast<size_t>(m.start + i)] = 1;

  std::sort(matches.begin(), matches.end(), [](const MentionMatch& a, const MentionMatch& b) {
    if (a.len != b.len) return a.len > b.len;
    if (a.start != b.start) return a.start < b.start;
    if (a.slot != b.slot) return a.slot < b.slot;
    return a.from_head && !b.from_head;
  });

  std::vector<bool> covered(ref_tokens.size(), false);
  for (const auto& m : matches) {
    int run_start = -1;
    for (int i = m.start; i <= m.start + m.len; ++i) {
      bool free_pos = i < m.start + m.len && !covered[static_cast<size_t>(i)];
      if (free_pos && run_start < 0) run_start = i;
      if (!free_pos && run_start >= 0) {
        out.spans.push_back({run_start, i - run_start, m.slot});
        for (int j = run_start; j < i; ++j) covered[static_cast<size_t>(j)] = true;
        run_start = -1;
      }
    }
  }
  std::sort(out.spans.begin(), out.spans.end(),
            [](const CopySpan& a, const CopySpan& b) { return a.start < b.start; });
  return out;
}

// Ranks every triplet by where its mention evidence completes in the
// reference; unmentioned triplets follow in input order. Total by
// construction, and always a valid permutation.
inline OrderLabel extract_gt_order(const KnowledgeGraph& kg,
                                   const std::vector<std::string>& ref_tokens,
                                   int n_slots = 0) {
  if (n_slots == 0) n_slots = kg.size();
  if (kg.size() > n_slots)
    throw DataError("graph '" + kg.id + "' exceeds order length " + std::to_string(n_slots));

  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<MentionMatch> matches = find_entity_mentions(kg, ref_tokens);
  std::vector<int> first_head(static_cast<size_t>(kg.size()), kInf);
  std::vector<int> first_tail(static_cast<size_t>(kg.size()), kInf);
  for (const auto& m : matches) {
    auto& first = m.from_head ? first_head : first_tail;
    first[static_cast<size_t>(m.slot)] = std::min(first[static_cast<size_t>(m.slot)], m.start);
  }

  std::vector<std::pair<long long, int>> keyed;  // (evidence position, slot)
  for (int slot = 0; slot < kg.size(); ++slot) {
    long long h = first_head[static_cast<size_t>(slot)];
    long long t = first_tail[static_cast<size_t>(slot)];
    long long evidence;
    if (h == kInf && t == kInf) {
      evidence = std::numeric_limits<long long>::max();  // unmentioned
    } else if (h == kInf) {
      evidence = t;
    } else if (t == kInf) {
      evidence = h;
    } else {
      evidence = std::max(h, t);
    }
    keyed.emplace_back(evidence, slot);
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  OrderLabel order;
  order.ranks.assign(static_cast<size_t>(n_slots), OrderLabel::kPadRank);
  for (int rank = 0; rank < static_cast<int>(keyed.size()); ++rank)
    order.ranks[static_cast<size_t>(keyed[static_cast<size_t>(rank)].second)] = rank;
  return order;
}

// ---------------------------------------------------------------------------
// Supervision sidecar files

struct SupervisionRecord {
  std::string id;
  std::vector<std::string> tokens;  // surface case
  OrderLabel order;
  std::vector<int> copy_labels;
  POSSequence pos;
};

struct SupervisionSet {
  int n_slots = 0;
  std::string tagset = PosTagset::id();
  std::vector<SupervisionRecord> records;

  const SupervisionRecord* find(const std::string& id) const {
    for (const auto& r : records)
      if (r.id == id) return &r;
    return nullptr;
  }
};

inline constexpr int kSupervisionVersion = 1;

inline void save_supervision(const SupervisionSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write supervision file: " + path);
  nlohmann::json header;
  header["format"] = "kgtext-supervision";
  header["version"] = kSupervisionVersion;
  header["tagset"] = set.tagset;
  header["n_slots"] = set.n_slots;
  out << header.dump() << "\n";
  for (const auto& rec : set.records) {
    nlohmann::json j;
    j["id"] = rec.id;
    j["tokens"] = rec.tokens;
    j["order"] = rec.order.ranks;
    j["order_listing"] = rec.order.listing();
    j["copy"] = rec.copy_labels;
    j["pos"] = rec.pos.tag_names();
    out << j.dump() << "\n";
  }
}

inline SupervisionSet load_supervision(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read supervision file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty supervision file: " + path);
  nlohmann::json header = nlohmann::json::parse(line);
  if (header.value("format", "") != "kgtext-supervision")
    throw DataError(path + ": not a supervision file");
  if (header.value("version", -1) != kSupervisionVersion)
    throw DataError(path + ": unsupported supervision version");
  SupervisionSet set;
  set.tagset = header.value("tagset", PosTagset::id());
  set.n_slots = header.at("n_slots").get<int>();
  while (std::getline(in, line)) {
    if (normalize_whitespace(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    SupervisionRecord rec;
    rec.id = j.at("id").get<std::string>();
    rec.tokens = j.at("tokens").get<std::vector<std::string>>();
    rec.order.ranks = j.at("order").get<std::vector<int>>();
    rec.copy_labels = j.at("copy").get<std::vector<int>>();
    rec.pos = pos_from_names(j.at("pos").get<std::vector<std::string>>());
    rec.pos.tagset = set.tagset;
    set.records.push_back(std::move(rec));
  }
  return set;
}

// Builds one record; the POS sequence comes from the example's own tags when
// present, otherwise from the named tagger.
inline SupervisionRecord extract_supervision(const Example& ex, int n_slots,
                                             const std::string& tagger,
                                             const TaggerRegistry& registry = default_taggers()) {
  SupervisionRecord rec;
  rec.id = ex.graph.id;
  rec.tokens = tokenize(ex.reference);
  rec.order = extract_gt_order(ex.graph, rec.tokens, n_slots);
  rec.copy_labels = generate_copy_labels(ex.graph, rec.tokens).labels;
  if (ex.pos_reference)
    rec.pos = pos_from_names(*ex.pos_reference);
  else
    rec.pos = tag_pos(rec.tokens, tagger, registry);
  return rec;
}

// Summary statistics printed by the preprocess command.
struct SupervisionStats {
  std::map<int, int> size_histogram;  // n_real -> count
  double copy_rate = 0.0;
  std::map<std::string, int> tag_counts;
  int n_records = 0;
};

inline SupervisionStats summarize_supervision(const SupervisionSet& set) {
  SupervisionStats stats;
  long long ones = 0, total = 0;
  for (const auto& rec : set.records) {
    ++stats.n_records;
    ++stats.size_histogram[rec.order.n_real()];
    for (int l : rec.copy_labels) {
      ones += l;
      ++total;
    }
    for (int t : rec.pos.tags) ++stats.tag_counts[PosTagset::name(t)];
  }
  stats.copy_rate = total ? static_cast<double>(ones) / static_cast<double>(total) : 0.0;
  return stats;
}

}  // namespace kgtext
