#pragma once

// Self-contained text generation metrics, implemented from their original
// definitions: corpus BLEU-4 (no smoothing), ROUGE-L (LCS F-measure,
// beta = 1.2, corpus-averaged), chrF++ (char n-grams 1..6 on
// whitespace-stripped text plus word n-grams 1..2, beta = 2,
// sentence-level then corpus-averaged), and plain CIDEr (tf-idf weighted
// n-gram cosine over n = 1..4, idf from the reference corpus, x10).
// All metrics lowercase both sides and support multiple references per
// example.  Plus Kendall tau for order evaluation.

#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "kgtext/common.hpp"
#include "kgtext/tokenizer.hpp"

namespace kgtext {

namespace metrics_detail {

inline std::vector<std::string> lower_all(const std::vector<std::string>& toks) {
  std::vector<std::string> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(lowercase(t));
  return out;
}

using Counts = std::map<std::vector<std::string>, int>;

inline Counts ngram_counts(const std::vector<std::string>& toks, int n) {
  Counts c;
  if (static_cast<int>(toks.size()) < n) return c;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= toks.size(); ++i)
    ++c[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                 toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return c;
}

using CharCounts = std::map<std::string, int>;

inline CharCounts char_ngram_counts(const std::string& s, int n) {
  CharCounts c;
  if (static_cast<int>(s.size()) < n) return c;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= s.size(); ++i)
    ++c[s.substr(i, static_cast<std::size_t>(n))];
  return c;
}

inline std::string strip_spaces(const std::vector<std::string>& toks) {
  std::string s;
  for (const auto& t : toks) s += t;
  return s;
}

inline int lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<int>> dp(a.size() + 1, std::vector<int>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      dp[i][j] = (a[i - 1] == b[j - 1]) ? dp[i - 1][j - 1] + 1
                                        : std::max(dp[i - 1][j], dp[i][j - 1]);
  return dp[a.size()][b.size()];
}

}  // namespace metrics_detail

// Hypotheses and references, one entry per example; each example may carry
// several references.
struct EvalCorpus {
  std::vector<std::vector<std::string>> hyps;
  std::vector<std::vector<std::vector<std::string>>> refs;

  void validate() const {
    if (hyps.size() != refs.size()) throw UsageError("metrics: hyps/refs size mismatch");
    if (hyps.empty()) throw DataError("metrics: empty corpus");
    for (const auto& r : refs)
      if (r.empty()) throw DataError("metrics: example without references");
  }
};

// --- BLEU-4 ----------------------------------------------------------------

// Corpus-level modified n-gram precision up to 4 with brevity penalty, no
// smoothing; multi-reference clipping takes the per-n-gram max over the
// references, and the effective reference length is the closest to the
// hypothesis length (ties -> shorter).
inline double bleu4(const EvalCorpus& corpus) {
  using namespace metrics_detail;
  corpus.validate();
  long long match[5] = {0, 0, 0, 0, 0}, total[5] = {0, 0, 0, 0, 0};
  long long hyp_len = 0, ref_len = 0;
  for (std::size_t e = 0; e < corpus.hyps.size(); ++e) {
    std::vector<std::string> hyp = lower_all(corpus.hyps[e]);
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : corpus.refs[e]) refs.push_back(lower_all(r));

    hyp_len += static_cast<long long>(hyp.size());
    long long best_ref = static_cast<long long>(refs[0].size());
    for (const auto& r : refs) {
      long long len = static_cast<long long>(r.size());
      long long d_new = std::llabs(len - static_cast<long long>(hyp.size()));
      long long d_old = std::llabs(best_ref - static_cast<long long>(hyp.size()));
      if (d_new < d_old || (d_new == d_old && len < best_ref)) best_ref = len;
    }
    ref_len += best_ref;

    for (int n = 1; n <= 4; ++n) {
      Counts hc = ngram_counts(hyp, n);
      Counts rc_max;
      for (const auto& r : refs)
        for (const auto& [g, c] : ngram_counts(r, n))
          rc_max[g] = std::max(rc_max[g], c);
      for (const auto& [g, c] : hc) {
        total[n] += c;
        auto it = rc_max.find(g);
        if (it != rc_max.end()) match[n] += std::min(c, it->second);
      }
    }
  }
  if (hyp_len == 0) return 0.0;
  double log_prec = 0.0;
  for (int n = 1; n <= 4; ++n) {
    if (total[n] == 0 || match[n] == 0) return 0.0;
    log_prec += 0.25 * std::log(static_cast<double>(match[n]) / static_cast<double>(total[n]));
  }
  double bp = hyp_len >= ref_len
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  return 100.0 * bp * std::exp(log_prec);
}

// Sentence-level BLEU-4 for debugging traces: add-one smoothing on any
// zero-match higher-order precision.
inline double sentence_bleu4(const std::vector<std::string>& hyp_in,
                             const std::vector<std::vector<std::string>>& refs_in) {
  using namespace metrics_detail;
  std::vector<std::string> hyp = lower_all(hyp_in);
  if (hyp.empty() || refs_in.empty()) return 0.0;
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : refs_in) refs.push_back(lower_all(r));
  double log_prec = 0.0;
  for (int n = 1; n <= 4; ++n) {
    Counts hc = ngram_counts(hyp, n);
    Counts rc_max;
    for (const auto& r : refs)
      for (const auto& [g, c] : ngram_counts(r, n)) rc_max[g] = std::max(rc_max[g], c);
    long long m = 0, t = 0;
    for (const auto& [g, c] : hc) {
      t += c;
      auto it = rc_max.find(g);
      if (it != rc_max.end()) m += std::min(c, it->second);
    }
    if (t == 0) return 0.0;
    if (m == 0) {
      if (n == 1) return 0.0;
      m = 1;
      t += 1;
    }
    log_prec += 0.25 * std::log(static_cast<double>(m) / static_cast<double>(t));
  }
  long long best_ref = static_cast<long long>(refs[0].size());
  for (const auto& r : refs) {
    long long len = static_cast<long long>(r.size());
    if (std::llabs(len - static_cast<long long>(hyp.size())) <
            std::llabs(best_ref - static_cast<long long>(hyp.size())) ||
        (std::llabs(len - static_cast<long long>(hyp.size())) ==
             std::llabs(best_ref - static_cast<long long>(hyp.size())) &&
         len < best_ref))
      best_ref = len;
  }
  double bp = static_cast<long long>(hyp.size()) >= best_ref
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(best_ref) / hyp.size());
  return 100.0 * bp * std::exp(log_prec);
}

// --- ROUGE-L ---------------------------------------------------------------

inline double rouge_l(const EvalCorpus& corpus, double beta = 1.2) {
  using namespace metrics_detail;
  corpus.validate();
  double sum = 0.0;
  for (std::size_t e = 0; e < corpus.hyps.size(); ++e) {
    std::vector<std::string> hyp = lower_all(corpus.hyps[e]);
    double best = 0.0;
    for (const auto& ref_in : corpus.refs[e]) {
      std::vector<std::string> ref = lower_all(ref_in);
      if (hyp.empty() || ref.empty()) continue;
      double lcs = lcs_length(hyp, ref);
      if (lcs == 0.0) continue;
      double p = lcs / static_cast<double>(hyp.size());
      double r = lcs / static_cast<double>(ref.size());
      double f = (1.0 + beta * beta) * r * p / (r + beta * beta * p);
      best = std::max(best, f);
    }
    sum += best;
  }
  return 100.0 * sum / static_cast<double>(corpus.hyps.size());
}

// --- chrF++ ----------------------------------------------------------------

inline double sentence_chrf_pp(const std::vector<std::string>& hyp_in,
                               const std::vector<std::vector<std::string>>& refs_in,
                               double beta = 2.0) {
  using namespace metrics_detail;
  std::vector<std::string> hyp = lower_all(hyp_in);
  double best = 0.0;
  for (const auto& ref_in : refs_in) {
    std::vector<std::string> ref = lower_all(ref_in);
    std::string hyp_chars = strip_spaces(hyp), ref_chars = strip_spaces(ref);
    double p_sum = 0.0, r_sum = 0.0;
    int orders = 0;
    auto add_order = [&](auto&& hyp_counts, auto&& ref_counts) {
      long long h_total = 0, r_total = 0, m = 0;
      for (const auto& [g, c] : hyp_counts) h_total += c;
      for (const auto& [g, c] : ref_counts) r_total += c;
      for (const auto& [g, c] : hyp_counts) {
        auto it = ref_counts.find(g);
        if (it != ref_counts.end()) m += std::min(c, it->second);
      }
      if (h_total == 0 && r_total == 0) return;  // order absent on both sides
      ++orders;
      if (h_total > 0) p_sum += static_cast<double>(m) / static_cast<double>(h_total);
      if (r_total > 0) r_sum += static_cast<double>(m) / static_cast<double>(r_total);
    };
    for (int n = 1; n <= 6; ++n)
      add_order(char_ngram_counts(hyp_chars, n), char_ngram_counts(ref_chars, n));
    for (int n = 1; n <= 2; ++n) add_order(ngram_counts(hyp, n), ngram_counts(ref, n));
    if (orders == 0) continue;
    double p = p_sum / orders, r = r_sum / orders;
    if (p + r == 0.0) continue;
    double f = (1.0 + beta * beta) * p * r / (beta * beta * p + r);
    best = std::max(best, f);
  }
  return 100.0 * best;
}

inline double chrf_pp(const EvalCorpus& corpus, double beta = 2.0) {
  corpus.validate();
  double sum = 0.0;
  for (std::size_t e = 0; e < corpus.hyps.size(); ++e)
    sum += sentence_chrf_pp(corpus.hyps[e], corpus.refs[e], beta);
  return sum / static_cast<double>(corpus.hyps.size());
}

// --- CIDEr -----------------------------------------------------------------

// Plain CIDEr: per n in 1..4, tf-idf vectors with idf computed over the
// reference corpus (document frequency counts examples whose references
// contain the n-gram), cosine similarity per reference averaged, mean over
// n, corpus mean, x10.  A single-example corpus scores 0 because every idf
// is log(1/1) = 0; documented edge case.
inline double cider(const EvalCorpus& corpus) {
  using namespace metrics_detail;
  corpus.validate();
  const int kN = 4;
  const std::size_t n_ex = corpus.hyps.size();
  std::vector<std::map<std::vector<std::string>, double>> idf(kN + 1);
  for (int n = 1; n <= kN; ++n) {
    std::map<std::vector<std::string>, int> df;
    for (const auto& refs : corpus.refs) {
      std::map<std::vector<std::string>, bool> seen;
      for (const auto& r : refs)
        for (const auto& [g, c] : ngram_counts(lower_all(r), n)) seen[g] = true;
      for (const auto& [g, b] : seen) ++df[g];
    }
    for (const auto& [g, d] : df)
      idf[static_cast<std::size_t>(n)][g] =
          std::log(static_cast<double>(n_ex) / static_cast<double>(d));
  }

  auto tfidf_vec = [&](const std::vector<std::string>& toks, int n) {
    std::map<std::vector<std::string>, double> v;
    for (const auto& [g, c] : ngram_counts(toks, n)) {
      auto it = idf[static_cast<std::size_t>(n)].find(g);
      double w = it != idf[static_cast<std::size_t>(n)].end() ? it->second : 0.0;
      v[g] = c * w;
    }
    return v;
  };
  auto cosine = [](const std::map<std::vector<std::string>, double>& a,
                   const std::map<std::vector<std::string>, double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [g, w] : a) {
      na += w * w;
      auto it = b.find(g);
      if (it != b.end()) dot += w * it->second;
    }
    for (const auto& [g, w] : b) nb += w * w;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
  };

  double corpus_sum = 0.0;
  for (std::size_t e = 0; e < n_ex; ++e) {
    std::vector<std::string> hyp = lower_all(corpus.hyps[e]);
    double ref_sum = 0.0;
    for (const auto& ref_in : corpus.refs[e]) {
      std::vector<std::string> ref = lower_all(ref_in);
      double n_sum = 0.0;
      for (int n = 1; n <= kN; ++n) n_sum += cosine(tfidf_vec(hyp, n), tfidf_vec(ref, n));
      ref_sum += n_sum / kN;
    }
    corpus_sum += ref_sum / static_cast<double>(corpus.refs[e].size());
  }
  return 10.0 * corpus_sum / static_cast<double>(n_ex);
}

// --- order metrics ---------------------------------------------------------

// Kendall tau-a between two listings of the same n items; n < 2 -> 1.
inline double kendall_tau(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw UsageError("kendall_tau: length mismatch");
  const int n = static_cast<int>(a.size());
  if (n < 2) return 1.0;
  std::vector<int> pos_b(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    int item = b[static_cast<std::size_t>(i)];
    if (item < 0 || item >= n || pos_b[static_cast<std::size_t>(item)] != -1)
      throw UsageError("kendall_tau: inputs must be permutations of 0..n-1");
    pos_b[static_cast<std::size_t>(item)] = i;
  }
  long long concordant = 0, discordant = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      int pi = pos_b[static_cast<std::size_t>(a[static_cast<std::size_t>(i)])];
      int pj = pos_b[static_cast<std::size_t>(a[static_cast<std::size_t>(j)])];
      if (pi < pj)
        ++concordant;
      else
        ++discordant;
    }
  return static_cast<double>(concordant - discordant) /
         (static_cast<double>(n) * (n - 1) / 2.0);
}

// KG-size buckets: <=3, 4..6, >=7 triplets.
inline int kg_size_bucket(int n_triplets) {
  if (n_triplets <= 3) return 0;
  if (n_triplets <= 6) return 1;
  return 2;
}

inline const char* kg_size_bucket_name(int bucket) {
  switch (bucket) {
    case 0: return "le3";
    case 1: return "4to6";
    case 2: return "ge7";
  }
  throw UsageError("bad bucket");
}

}  // namespace kgtext
