#pragma once

// Data model for knowledge graphs and examples, dataset ingestion in three
// on-disk formats, fixed-length padding and marker linearization.

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgtext/common.hpp"
#include "kgtext/order_label.hpp"
#include "kgtext/tokenizer.hpp"
#include "kgtext/vocab.hpp"

namespace kgtext {

struct Triplet {
  std::string head;
  std::string relation;
  std::string tail;

  bool operator==(const Triplet& other) const {
    return head == other.head && relation == other.relation && tail == other.tail;
  }
};

// Reserved triplet occupying padding slots.
inline const Triplet& placeholder_triplet() {
  static const Triplet t{"<Placeholder>", "<Placeholder>", "<Placeholder>"};
  return t;
}

struct KnowledgeGraph {
  std::string id;
  std::vector<Triplet> triplets;

  int size() const { return static_cast<int>(triplets.size()); }
};

struct Example {
  KnowledgeGraph graph;
  std::string reference;
  // Pre-tagged POS sequence, one tag string per reference token, when the
  // dataset ships one.
  std::optional<std::vector<std::string>> pos_reference;
};

struct PaddedGraph {
  std::vector<Triplet> triplets;  // exactly n_slots entries
  std::vector<bool> mask;         // true = real triplet
  int n_real = 0;

  int n_slots() const { return static_cast<int>(triplets.size()); }
};

// Per-token provenance for linearized graphs: a real slot index, or one of
// the sentinels below.
constexpr int kProvenanceMarker = -1;
constexpr int kProvenancePad = -2;

struct LinearizedKG {
  std::vector<int> tokens;          // vocabulary ids
  std::vector<std::string> surfaces;  // original-case text per token
  std::vector<int> provenance;
  OrderLabel order_used;

  int length() const { return static_cast<int>(tokens.size()); }
};

// ---------------------------------------------------------------------------
// Validation

inline Triplet make_triplet(const std::string& head, const std::string& relation,
                            const std::string& tail) {
  Triplet t{normalize_whitespace(head), normalize_whitespace(relation),
            normalize_whitespace(tail)};
  if (t.head.empty() || t.relation.empty() || t.tail.empty())
    throw DataError("triplet has an empty field after whitespace normalization");
  return t;
}

inline Example make_example(KnowledgeGraph graph, const std::string& reference,
                            std::optional<std::vector<std::string>> pos = std::nullopt) {
  if (graph.triplets.empty())
    throw DataError("example '" + graph.id + "' has no triplets");
  Example ex;
  ex.graph = std::move(graph);
  ex.reference = normalize_whitespace(reference);
  if (ex.reference.empty())
    throw DataError("example '" + ex.graph.id + "' has an empty reference text");
  if (pos) {
    size_t n_tokens = tokenize(ex.reference).size();
    if (pos->size() != n_tokens)
      throw DataError("example '" + ex.graph.id + "' pos length " +
                      std::to_string(pos->size()) + " != token count " +
                      std::to_string(n_tokens));
    ex.pos_reference = std::move(pos);
  }
  return ex;
}

// ---------------------------------------------------------------------------
// Dataset parsing

enum class DatasetFormat { kJsonl, kWebnlgJson, kDartJson };

inline DatasetFormat dataset_format_from_name(const std::string& name) {
  if (name == "jsonl") return DatasetFormat::kJsonl;
  if (name == "webnlg-json") return DatasetFormat::kWebnlgJson;
  if (name == "dart-json") return DatasetFormat::kDartJson;
  throw UsageError("unknown dataset format: " + name);
}

struct RecordError {
  std::string where;  // "line 12" or "entry 3"
  std::string message;
};

struct ParseResult {
  std::vector<Example> examples;
  std::vector<RecordError> errors;
};

namespace detail {

inline Example example_from_canonical(const nlohmann::json& rec, const std::string& fallback_id) {
  if (!rec.is_object()) throw DataError("record is not a JSON object");
  if (!rec.contains("triples") || !rec["triples"].is_array())
    throw DataError("record lacks a \"triples\" array");
  if (!rec.contains("text") || !rec["text"].is_string())
    throw DataError("record lacks a \"text\" string");
  KnowledgeGraph kg;
  kg.id = rec.value("id", fallback_id);
  for (const auto& t : rec["triples"]) {
    if (!t.is_array() || t.size() != 3)
      throw DataError("triple is not a 3-element array");
    kg.triplets.push_back(make_triplet(t[0].get<std::string>(),
                                       t[1].get<std::string>(),
                                       t[2].get<std::string>()));
  }
  std::optional<std::vector<std::string>> pos;
  if (rec.contains("pos")) {
    if (!rec["pos"].is_array()) throw DataError("\"pos\" is not an array");
    pos = rec["pos"].get<std::vector<std::string>>();
  }
  return make_example(std::move(kg), rec["text"].get<std::string>(), std::move(pos));
}

// One Example per lexicalisation; multi-reference entries fan out.
inline void parse_webnlg_entry(const nlohmann::json& entry, const std::string& entry_id,
                               ParseResult& out) {
  const nlohmann::json* body = &entry;
  // The benchmark release wraps each entry in a single-key object.
  if (entry.is_object() && !entry.contains("modifiedtripleset") && entry.size() == 1)
    body = &entry.begin().value();
  if (!body->contains("modifiedtripleset"))
    throw DataError("entry lacks \"modifiedtripleset\"");
  std::vector<Triplet> triplets;
  for (const auto& t : (*body)["modifiedtripleset"]) {
    triplets.push_back(make_triplet(t.at("subject").get<std::string>(),
                                    t.at("property").get<std::string>(),
                                    t.at("object").get<std::string>()));
  }
  if (!body->contains("lexicalisations"))
    throw DataError("entry lacks \"lexicalisations\"");
  int ref_idx = 0;
  for (const auto& lex : (*body)["lexicalisations"]) {
    KnowledgeGraph kg;
    kg.id = entry_id + "#ref" + std::to_string(ref_idx++);
    kg.triplets = triplets;
    out.examples.push_back(make_example(std::move(kg), lex.at("lex").get<std::string>()));
  }
}

inline void parse_dart_entry(const nlohmann::json& entry, const std::string& entry_id,
                             ParseResult& out) {
  if (!entry.contains("tripleset")) throw DataError("entry lacks \"tripleset\"");
  std::vector<Triplet> triplets;
  for (const auto& t : entry["tripleset"]) {
    if (!t.is_array() || t.size() != 3)
      throw DataError("tripleset entry is not a 3-element array");
    triplets.push_back(make_triplet(t[0].get<std::string>(),
                                    t[1].get<std::string>(),
                                    t[2].get<std::string>()));
  }
  if (!entry.contains("annotations")) throw DataError("entry lacks \"annotations\"");
  int ref_idx = 0;
  for (const auto& ann : entry["annotations"]) {
    KnowledgeGraph kg;
    kg.id = entry_id + "#ref" + std::to_string(ref_idx++);
    kg.triplets = triplets;
    out.examples.push_back(make_example(std::move(kg), ann.at("text").get<std::string>()));
  }
}

}  // namespace detail

inline ParseResult parse_dataset(const std::string& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file: " + path);
  ParseResult result;

  if (format == DatasetFormat::kJsonl) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (normalize_whitespace(line).empty()) continue;
      std::string where = "line " + std::to_string(line_no);
      try {
        nlohmann::json rec = nlohmann::json::parse(line);
        result.examples.push_back(
            detail::example_from_canonical(rec, "line-" + std::to_string(line_no)));
      } catch (const std::exception& e) {
        result.errors.push_back({where, e.what()});
      }
    }
    return result;
  }

  nlohmann::json root;
  try {
    in >> root;
  } catch (const std::exception& e) {
    throw DataError("cannot parse " + path + ": " + e.what());
  }

  if (format == DatasetFormat::kWebnlgJson) {
    if (!root.is_object() || !root.contains("entries"))
      throw DataError(path + ": expected a root object with \"entries\"");
    int idx = 0;
    for (const auto& entry : root["entries"]) {
      ++idx;
      try {
        detail::parse_webnlg_entry(entry, "entry-" + std::to_string(idx), result);
      } catch (const std::exception& e) {
        result.errors.push_back({"entry " + std::to_string(idx), e.what()});
      }
    }
    return result;
  }

  // DART
  if (!root.is_array()) throw DataError(path + ": expected a root JSON array");
  int idx = 0;
  for (const auto& entry : root) {
    ++idx;
    try {
      detail::parse_dart_entry(entry, "entry-" + std::to_string(idx), result);
    } catch (const std::exception& e) {
      result.errors.push_back({"entry " + std::to_string(idx), e.what()});
    }
  }
  return result;
}

// Writes examples in the canonical one-object-per-line format.
inline void write_jsonl(const std::vector<Example>& examples, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset file: " + path);
  for (const auto& ex : examples) {
    nlohmann::json rec;
    rec["id"] = ex.graph.id;
    nlohmann::json triples = nlohmann::json::array();
    for (const auto& t : ex.graph.triplets)
      triples.push_back({t.head, t.relation, t.tail});
    rec["triples"] = std::move(triples);
    rec["text"] = ex.reference;
    if (ex.pos_reference) rec["pos"] = *ex.pos_reference;
    out << rec.dump() << "\n";
  }
}

// ---------------------------------------------------------------------------
// Oversize handling, padding, linearization

enum class OversizePolicy { kReject, kTruncate };

// Enforces |triplets| <= n_slots before padding.
inline Example apply_oversize_policy(Example ex, int n_slots, OversizePolicy policy) {
  if (ex.graph.size() <= n_slots) return ex;
  if (policy == OversizePolicy::kReject)
    throw DataError("graph '" + ex.graph.id + "' has " +
                    std::to_string(ex.graph.size()) + " triplets, more than N=" +
                    std::to_string(n_slots));
  ex.graph.triplets.resize(static_cast<size_t>(n_slots));
  return ex;
}

inline PaddedGraph pad_graph(const KnowledgeGraph& kg, int n_slots) {
  if (kg.triplets.empty())
    throw DataError("graph '" + kg.id + "' has no triplets");
  if (kg.size() > n_slots)
    throw DataError("graph '" + kg.id + "' has " + std::to_string(kg.size()) +
                    " triplets, more than N=" + std::to_string(n_slots));
  PaddedGraph pg;
  pg.n_real = kg.size();
  pg.triplets = kg.triplets;
  pg.triplets.resize(static_cast<size_t>(n_slots), placeholder_triplet());
  pg.mask.assign(static_cast<size_t>(n_slots), false);
  for (int i = 0; i < pg.n_real; ++i) pg.mask[static_cast<size_t>(i)] = true;
  return pg;
}

namespace detail {

inline void append_field(const std::string& text, int marker_id, int slot,
                         const Vocabulary& vocab, LinearizedKG& lin) {
  lin.tokens.push_back(marker_id);
  lin.surfaces.push_back(vocab.token(marker_id));
  lin.provenance.push_back(kProvenanceMarker);
  for (const auto& tok : tokenize(text)) {
    lin.tokens.push_back(vocab.id(lowercase(tok)));
    lin.surfaces.push_back(tok);
    lin.provenance.push_back(slot);
  }
}

}  // namespace detail

// Flattens the graph into `<Head> h <Relation> r <Tail> t` segments following
// the description order. Placeholder slots never appear in the output.
inline LinearizedKG linearize(const KnowledgeGraph& kg, const OrderLabel& order,
                              const Vocabulary& vocab) {
  if (!order.valid() || order.n_real() != kg.size())
    throw DataError("invalid order for graph '" + kg.id + "': expected a permutation over " +
                    std::to_string(kg.size()) + " triplets");
  LinearizedKG lin;
  lin.order_used = order;
  for (int slot : order.listing()) {
    if (slot >= kg.size())
      throw DataError("order references placeholder slot " + std::to_string(slot));
    const Triplet& t = kg.triplets[static_cast<size_t>(slot)];
    detail::append_field(t.head, Vocabulary::kHead, slot, vocab, lin);
    detail::append_field(t.relation, Vocabulary::kRelation, slot, vocab, lin);
    detail::append_field(t.tail, Vocabulary::kTail, slot, vocab, lin);
  }
  return lin;
}

// Test helper: splits a linearization back into (head, relation, tail) text
// in description order. Recovery is exact at the token level.
inline std::vector<Triplet> reconstruct_triplets(const LinearizedKG& lin) {
  std::vector<Triplet> out;
  std::string* field = nullptr;
  for (int i = 0; i < lin.length(); ++i) {
    int tok = lin.tokens[static_cast<size_t>(i)];
    if (lin.provenance[static_cast<size_t>(i)] == kProvenanceMarker) {
      if (tok == Vocabulary::kHead) {
        out.emplace_back();
        field = &out.back().head;
      } else if (tok == Vocabulary::kRelation) {
        field = &out.back().relation;
      } else {
        field = &out.back().tail;
      }
    } else {
      if (field == nullptr) throw DataError("linearization does not start with <Head>");
      if (!field->empty()) field->push_back(' ');
      *field += lin.surfaces[static_cast<size_t>(i)];
    }
  }
  return out;
}

}  // namespace kgtext
