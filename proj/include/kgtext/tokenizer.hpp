#pragma once

// Word-level tokenizer shared by preprocessing, supervision extraction and
// evaluation. A token is either a maximal run of [alnum_] characters or a
// single other non-space character, so punctuation always stands alone.
// Surface case is preserved; callers lowercase separately for matching and
// vocabulary lookup.

#include <string>
#include <string_view>
#include <vector>

#include "kgtext/common.hpp"

namespace kgtext {

inline bool is_word_char(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || c == '_';
}

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) {
        tokens.push_back(cur);
        cur.clear();
      }
    } else if (is_word_char(c)) {
      cur.push_back(c);
    } else {
      if (!cur.empty()) {
        tokens.push_back(cur);
        cur.clear();
      }
      tokens.emplace_back(1, c);
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

inline std::vector<std::string> tokenize_lower(std::string_view text) {
  std::vector<std::string> tokens = tokenize(text);
  for (auto& t : tokens) t = lowercase(t);
  return tokens;
}

// Inverse only up to token boundaries: retokenizing the result reproduces
// the token sequence, which is all the label alignment needs.
inline std::string detokenize(const std::vector<std::string>& tokens) {
  return join(tokens, " ");
}

}  // namespace kgtext
