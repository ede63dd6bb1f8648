#pragma once

// Token <-> id vocabulary with fixed special tokens. Ids are dense; the
// specials always occupy the first slots so model code can rely on them.

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgtext/common.hpp"

namespace kgtext {

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kHead = 4;
  static constexpr int kRelation = 5;
  static constexpr int kTail = 6;
  static constexpr int kPlaceholder = 7;

  static const std::vector<std::string>& specials() {
    static const std::vector<std::string> s = {
        "<pad>", "<bos>", "<eos>", "<unk>",
        "<Head>", "<Relation>", "<Tail>", "<Placeholder>"};
    return s;
  }

  Vocabulary() {
    for (const auto& tok : specials()) add_token(tok);
  }

  int add_token(const std::string& tok) {
    auto it = token_to_id_.find(tok);
    if (it != token_to_id_.end()) return it->second;
    int id = static_cast<int>(id_to_token_.size());
    token_to_id_.emplace(tok, id);
    id_to_token_.push_back(tok);
    return id;
  }

  // Lookup with <unk> fallback.
  int id(const std::string& tok) const {
    auto it = token_to_id_.find(tok);
    return it == token_to_id_.end() ? kUnk : it->second;
  }

  bool contains(const std::string& tok) const {
    return token_to_id_.count(tok) != 0;
  }

  const std::string& token(int id) const {
    if (id < 0 || id >= static_cast<int>(id_to_token_.size()))
      throw DataError("vocabulary id out of range: " + std::to_string(id));
    return id_to_token_[static_cast<size_t>(id)];
  }

  int size() const { return static_cast<int>(id_to_token_.size()); }

  // One token per line; line number is the id.
  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vocabulary file: " + path);
    for (const auto& tok : id_to_token_) out << tok << "\n";
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read vocabulary file: " + path);
    Vocabulary v;
    std::string line;
    int idx = 0;
    while (std::getline(in, line)) {
      if (idx < v.size()) {
        if (line != v.token(idx))
          throw DataError("vocabulary file specials mismatch at line " +
                          std::to_string(idx) + ": " + line);
      } else {
        v.add_token(line);
      }
      ++idx;
    }
    return v;
  }

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

// Frequency-ordered vocabulary over lowercased corpus tokens. Ties break
// lexicographically so the result is independent of input order.
inline Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus,
                              int min_count = 1, int max_size = 0) {
  const int n_specials = static_cast<int>(Vocabulary::specials().size());
  if (max_size != 0 && max_size < n_specials)
    throw DataError("vocabulary max_size " + std::to_string(max_size) +
                    " smaller than the " + std::to_string(n_specials) +
                    " special tokens");
  std::map<std::string, std::int64_t> counts;
  for (const auto& seq : corpus)
    for (const auto& tok : seq) ++counts[lowercase(tok)];

  std::vector<std::pair<std::string, std::int64_t>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  for (const auto& [tok, count] : items) {
    if (count < min_count) continue;
    if (v.contains(tok)) continue;  // token spelled like a special
    if (max_size != 0 && v.size() >= max_size) break;
    v.add_token(tok);
  }
  return v;
}

}  // namespace kgtext
