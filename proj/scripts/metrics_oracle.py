#!/usr/bin/env python3
"""Independent reference implementations of the evaluation metrics.

Pure-stdlib implementations written directly from the original metric
definitions (Papineni et al. for BLEU, Lin for ROUGE-L, Popovic for chrF++,
Vedantam et al. for CIDEr).  Used to freeze golden values for the C++ unit
tests; run with no arguments to print them.
"""
import math
from collections import Counter


def ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu4_corpus(hyps, refs_list):
    match = [0] * 5
    total = [0] * 5
    hyp_len = 0
    ref_len = 0
    for hyp, refs in zip(hyps, refs_list):
        hyp = [t.lower() for t in hyp]
        refs = [[t.lower() for t in r] for r in refs]
        hyp_len += len(hyp)
        best = min(refs, key=lambda r: (abs(len(r) - len(hyp)), len(r)))
        ref_len += len(best)
        for n in range(1, 5):
            hc = ngrams(hyp, n)
            rc = Counter()
            for r in refs:
                for g, c in ngrams(r, n).items():
                    rc[g] = max(rc[g], c)
            for g, c in hc.items():
                total[n] += c
                match[n] += min(c, rc.get(g, 0))
    if hyp_len == 0:
        return 0.0
    log_prec = 0.0
    for n in range(1, 5):
        if total[n] == 0 or match[n] == 0:
            return 0.0
        log_prec += 0.25 * math.log(match[n] / total[n])
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(log_prec)


def lcs(a, b):
    dp = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            dp[i][j] = dp[i - 1][j - 1] + 1 if a[i - 1] == b[j - 1] else max(
                dp[i - 1][j], dp[i][j - 1])
    return dp[len(a)][len(b)]


def rouge_l_corpus(hyps, refs_list, beta=1.2):
    out = 0.0
    for hyp, refs in zip(hyps, refs_list):
        hyp = [t.lower() for t in hyp]
        best = 0.0
        for ref in refs:
            ref = [t.lower() for t in ref]
            if not hyp or not ref:
                continue
            l = lcs(hyp, ref)
            if l == 0:
                continue
            p, r = l / len(hyp), l / len(ref)
            f = (1 + beta * beta) * r * p / (r + beta * beta * p)
            best = max(best, f)
        out += best
    return 100.0 * out / len(hyps)


def char_ngrams(s, n):
    return Counter(s[i:i + n] for i in range(len(s) - n + 1))


def sentence_chrf_pp(hyp, refs, beta=2.0):
    hyp = [t.lower() for t in hyp]
    best = 0.0
    for ref in refs:
        ref = [t.lower() for t in ref]
        hyp_chars, ref_chars = "".join(hyp), "".join(ref)
        p_sum = r_sum = 0.0
        orders = 0
        grams = [(char_ngrams(hyp_chars, n), char_ngrams(ref_chars, n))
                 for n in range(1, 7)]
        grams += [(ngrams(hyp, n), ngrams(ref, n)) for n in range(1, 3)]
        for hc, rc in grams:
            h_total, r_total = sum(hc.values()), sum(rc.values())
            if h_total == 0 and r_total == 0:
                continue
            m = sum(min(c, rc.get(g, 0)) for g, c in hc.items())
            orders += 1
            if h_total:
                p_sum += m / h_total
            if r_total:
                r_sum += m / r_total
        if orders == 0:
            continue
        p, r = p_sum / orders, r_sum / orders
        if p + r == 0:
            continue
        f = (1 + beta * beta) * p * r / (beta * beta * p + r)
        best = max(best, f)
    return 100.0 * best


def chrf_pp_corpus(hyps, refs_list, beta=2.0):
    return sum(sentence_chrf_pp(h, r, beta)
               for h, r in zip(hyps, refs_list)) / len(hyps)


def cider_corpus(hyps, refs_list):
    n_ex = len(hyps)
    idf = [None] + [dict() for _ in range(4)]
    for n in range(1, 5):
        df = Counter()
        for refs in refs_list:
            seen = set()
            for r in refs:
                seen |= set(ngrams([t.lower() for t in r], n).keys())
            for g in seen:
                df[g] += 1
        for g, d in df.items():
            idf[n][g] = math.log(n_ex / d)

    def vec(tokens, n):
        return {g: c * idf[n].get(g, 0.0)
                for g, c in ngrams(tokens, n).items()}

    def cos(a, b):
        na = math.sqrt(sum(w * w for w in a.values()))
        nb = math.sqrt(sum(w * w for w in b.values()))
        if na == 0 or nb == 0:
            return 0.0
        return sum(w * b.get(g, 0.0) for g, w in a.items()) / (na * nb)

    total = 0.0
    for hyp, refs in zip(hyps, refs_list):
        hyp = [t.lower() for t in hyp]
        ref_sum = 0.0
        for ref in refs:
            ref = [t.lower() for t in ref]
            ref_sum += sum(cos(vec(hyp, n), vec(ref, n))
                           for n in range(1, 5)) / 4.0
        total += ref_sum / len(refs)
    return 10.0 * total / n_ex


def main():
    # Case A: classic near-miss pair, single reference.
    hyp_a = "the cat sat on the mat".split()
    ref_a = "the black cat sat on the mat".split()
    print("bleu_pair        = %.10f" % bleu4_corpus([hyp_a], [[ref_a]]))
    print("rouge_pair       = %.10f" % rouge_l_corpus([hyp_a], [[ref_a]]))
    print("chrf_pair        = %.10f" % chrf_pp_corpus([hyp_a], [[ref_a]]))

    # Case B: two-example corpus with a multi-reference example.
    hyp_b = ["a quick brown fox jumps over the lazy dog".split(),
             "the treaty was signed in riga in 1920".split()]
    refs_b = [["the quick brown fox jumps over the lazy dog".split(),
               "a fast brown fox leaps over a lazy dog".split()],
              ["the treaty was signed at riga in august 1920".split()]]
    print("bleu_corpus      = %.10f" % bleu4_corpus(hyp_b, refs_b))
    print("rouge_corpus     = %.10f" % rouge_l_corpus(hyp_b, refs_b))
    print("chrf_corpus      = %.10f" % chrf_pp_corpus(hyp_b, refs_b))
    print("cider_corpus     = %.10f" % cider_corpus(hyp_b, refs_b))

    # Case C: identity — every metric at its maximum.
    print("bleu_identity    = %.10f" % bleu4_corpus(hyp_b, [[h] for h in hyp_b]))
    print("rouge_identity   = %.10f" % rouge_l_corpus(hyp_b, [[h] for h in hyp_b]))
    print("chrf_identity    = %.10f" % chrf_pp_corpus(hyp_b, [[h] for h in hyp_b]))
    print("cider_identity   = %.10f" % cider_corpus(hyp_b, [[h] for h in hyp_b]))

    # Case D: disjoint hypothesis scores zero.
    print("bleu_disjoint    = %.10f" %
          bleu4_corpus([["xx", "yy", "zz", "ww"]], [[ref_a]]))


if __name__ == "__main__":
    main()
