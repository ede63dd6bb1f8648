#pragma once

// Coarse 12-tag POS inventory plus decoder specials, a built-in lexicon and
// suffix tagger, and a registry so external taggers can be plugged in.
// Penn-style tags from pre-tagged datasets collapse onto the same inventory.

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kgtext/common.hpp"
#include "kgtext/tokenizer.hpp"

namespace kgtext {

class PosTagset {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kNoun = 3;
  static constexpr int kVerb = 4;
  static constexpr int kAdj = 5;
  static constexpr int kAdv = 6;
  static constexpr int kPron = 7;
  static constexpr int kDet = 8;
  static constexpr int kAdp = 9;
  static constexpr int kNum = 10;
  static constexpr int kConj = 11;
  static constexpr int kPrt = 12;
  static constexpr int kPunct = 13;
  static constexpr int kX = 14;

  static const char* id() { return "coarse12-v1"; }

  static const std::vector<std::string>& names() {
    static const std::vector<std::string> n = {
        "<pad>", "<bos>", "<eos>", "NOUN", "VERB", "ADJ", "ADV", "PRON",
        "DET",   "ADP",   "NUM",   "CONJ", "PRT",  "PUNCT", "X"};
    return n;
  }

  static int size() { return static_cast<int>(names().size()); }

  static const std::string& name(int tag) {
    if (tag < 0 || tag >= size())
      throw DataError("POS tag id out of range: " + std::to_string(tag));
    return names()[static_cast<size_t>(tag)];
  }

  // Accepts coarse names and the common Penn tags; anything else is X.
  static int from_name(const std::string& raw) {
    static const std::map<std::string, int> lookup = [] {
      std::map<std::string, int> m;
      for (int i = 0; i < size(); ++i) m[names()[static_cast<size_t>(i)]] = i;
      // Penn treebank collapse
      for (const char* t : {"NN", "NNS", "NNP", "NNPS", "FW"}) m[t] = kNoun;
      for (const char* t : {"VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "MD"}) m[t] = kVerb;
      for (const char* t : {"JJ", "JJR", "JJS"}) m[t] = kAdj;
      for (const char* t : {"RB", "RBR", "RBS", "WRB"}) m[t] = kAdv;
      for (const char* t : {"PRP", "PRP$", "WP", "WP$", "EX"}) m[t] = kPron;
      for (const char* t : {"DT", "PDT", "WDT"}) m[t] = kDet;
      m["IN"] = kAdp;
      m["CD"] = kNum;
      m["CC"] = kConj;
      for (const char* t : {"RP", "TO", "POS"}) m[t] = kPrt;
      for (const char* t : {".", ",", ":", "``", "''", "-LRB-", "-RRB-", "HYPH", "SYM", "$", "#"})
        m[t] = kPunct;
      for (const char* t : {"UH", "LS", "XX"}) m[t] = kX;
      return m;
    }();
    auto it = lookup.find(raw);
    return it == lookup.end() ? kX : it->second;
  }
};

struct POSSequence {
  std::vector<int> tags;
  std::string tagset = PosTagset::id();

  int length() const { return static_cast<int>(tags.size()); }

  std::vector<std::string> tag_names() const {
    std::vector<std::string> out;
    out.reserve(tags.size());
    for (int t : tags) out.push_back(PosTagset::name(t));
    return out;
  }
};

namespace detail {

inline const std::map<std::string, int>& closed_class_lexicon() {
  static const std::map<std::string, int> lex = [] {
    std::map<std::string, int> m;
    auto put = [&m](std::initializer_list<const char*> words, int tag) {
      for (const char* w : words) m[w] = tag;
    };
    put({"the", "a", "an", "this", "that", "these", "those", "each", "every",
         "some", "any", "no", "all", "both", "either", "neither"},
        PosTagset::kDet);
    put({"i", "you", "he", "she", "it", "we", "they", "me", "him", "her",
         "us", "them", "my", "your", "his", "its", "our", "their", "mine",
         "yours", "hers", "ours", "theirs", "who", "whom", "whose", "which",
         "what", "itself", "himself", "herself", "themselves"},
        PosTagset::kPron);
    put({"in", "on", "at", "of", "by", "for", "with", "from", "into", "onto",
         "over", "under", "about", "after", "before", "between", "through",
         "during", "against", "among", "within", "without", "near", "since",
         "until", "across", "behind", "above", "below", "as"},
        PosTagset::kAdp);
    put({"and", "or", "but", "nor", "so", "yet", "because", "although",
         "while", "if", "when", "whereas"},
        PosTagset::kConj);
    put({"to", "up", "out", "off", "down", "away", "not"}, PosTagset::kPrt);
    put({"is", "are", "was", "were", "am", "be", "been", "being", "has",
         "have", "had", "having", "do", "does", "did", "done", "will",
         "would", "can", "could", "shall", "should", "may", "might", "must",
         "located", "serves", "served", "leads", "led", "includes",
         "include", "plays", "played"},
        PosTagset::kVerb);
    put({"very", "also", "now", "then", "here", "there", "too", "well",
         "only", "just", "still", "again", "often", "never", "always",
         "currently", "formerly", "approximately"},
        PosTagset::kAdv);
    put({"new", "old", "large", "small", "big", "good", "bad", "high", "low",
         "first", "last", "main", "major", "former", "current", "full",
         "total", "long", "short", "american", "british", "italian",
         "indian", "japanese", "spanish", "german", "french", "english"},
        PosTagset::kAdj);
    return m;
  }();
  return lex;
}

inline bool numeric_token(const std::string& tok) {
  bool saw_digit = false;
  for (char c : tok) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isdigit(u)) {
      saw_digit = true;
    } else if (c != '.' && c != ',' && c != '-' && c != '%' && c != '/') {
      return false;
    }
  }
  return saw_digit;
}

inline bool punctuation_token(const std::string& tok) {
  for (char c : tok)
    if (is_word_char(c)) return false;
  return !tok.empty();
}

inline bool has_suffix(const std::string& s, const char* suffix) {
  std::string_view sv(suffix);
  return s.size() > sv.size() + 1 && s.compare(s.size() - sv.size(), sv.size(), sv) == 0;
}

}  // namespace detail

// Rule tagger: punctuation and numbers first, then the closed-class lexicon,
// then mid-sentence capitalization (proper-noun cue), then suffixes, and
// NOUN as the open-class default.
inline POSSequence lexicon_tag(const std::vector<std::string>& tokens) {
  POSSequence seq;
  seq.tags.reserve(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    const std::string low = lowercase(tok);
    int tag;
    if (detail::punctuation_token(tok)) {
      tag = PosTagset::kPunct;
    } else if (detail::numeric_token(tok)) {
      tag = PosTagset::kNum;
    } else if (auto it = detail::closed_class_lexicon().find(low);
               it != detail::closed_class_lexicon().end()) {
      tag = it->second;
    } else if (i > 0 && std::isupper(static_cast<unsigned char>(tok[0]))) {
      tag = PosTagset::kNoun;
    } else if (detail::has_suffix(low, "ly")) {
      tag = PosTagset::kAdv;
    } else if (detail::has_suffix(low, "ed") || detail::has_suffix(low, "ing") ||
               detail::has_suffix(low, "ise") || detail::has_suffix(low, "ize")) {
      tag = PosTagset::kVerb;
    } else if (detail::has_suffix(low, "ous") || detail::has_suffix(low, "ful") ||
               detail::has_suffix(low, "ive") || detail::has_suffix(low, "able") ||
               detail::has_suffix(low, "ible") || detail::has_suffix(low, "ish") ||
               detail::has_suffix(low, "ical") || detail::has_suffix(low, "less")) {
      tag = PosTagset::kAdj;
    } else {
      tag = PosTagset::kNoun;
    }
    seq.tags.push_back(tag);
  }
  return seq;
}

using TaggerFn = std::function<POSSequence(const std::vector<std::string>&)>;

class TaggerRegistry {
 public:
  TaggerRegistry() { register_tagger("lexicon", lexicon_tag); }

  void register_tagger(const std::string& name, TaggerFn fn) {
    taggers_[name] = std::move(fn);
  }

  bool has(const std::string& name) const { return taggers_.count(name) != 0; }

  POSSequence run(const std::string& name, const std::vector<std::string>& tokens) const {
    auto it = taggers_.find(name);
    if (it == taggers_.end()) throw UsageError("unknown POS tagger: " + name);
    POSSequence seq = it->second(tokens);
    if (seq.tags.size() != tokens.size())
      throw DataError("tagger '" + name + "' returned " + std::to_string(seq.tags.size()) +
                      " tags for " + std::to_string(tokens.size()) + " tokens");
    return seq;
  }

 private:
  std::map<std::string, TaggerFn> taggers_;
};

inline const TaggerRegistry& default_taggers() {
  static const TaggerRegistry registry;
  return registry;
}

// Spec'd entry point: tags one tokenized reference with a registered tagger.
inline POSSequence tag_pos(const std::vector<std::string>& tokens, const std::string& tagger,
                           const TaggerRegistry& registry = default_taggers()) {
  return registry.run(tagger, tokens);
}

// Identity path for datasets shipping their own tags.
inline POSSequence pos_from_names(const std::vector<std::string>& tag_names) {
  POSSequence seq;
  seq.tags.reserve(tag_names.size());
  for (const auto& name : tag_names) seq.tags.push_back(PosTagset::from_name(name));
  return seq;
}

}  // namespace kgtext
