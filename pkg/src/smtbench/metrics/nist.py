"""NIST score: information-weighted n-gram matches, arithmetic mean over orders."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from ._common import ngrams, prepare

# brevity factor is 0.5 when the candidate is 2/3 of the reference length
BETA = math.log(0.5) / math.log(1.5) ** 2


@dataclass
class NistComponents:
    info_sums: list[float]
    candidate_counts: list[int]
    order_scores: list[float]
    c: int
    r_avg: float
    brevity_factor: float
    score: float


def info_weights(references, N: int = 5) -> dict[tuple, float]:
    """info(w1..wn) = log2(count(w1..wn-1) / count(w1..wn)) over every reference
    sentence; the unigram denominator is the total reference word count."""
    counts: Counter = Counter()
    total_words = 0
    for rs in references:
        for ref in rs:
            total_words += len(ref)
            for n in range(1, N + 1):
                counts.update(ngrams(ref, n))
    info = {}
    for g, k in counts.items():
        prefix = counts[g[:-1]] if len(g) > 1 else total_words
        info[g] = math.log2(prefix / k)
    return info


def nist_brevity(c: int, r_avg: float) -> float:
    if r_avg <= 0 or c <= 0:
        return 0.0
    ratio = min(c / r_avg, 1.0)
    return math.exp(BETA * math.log(ratio) ** 2)


def nist(candidates, references, N: int = 5) -> NistComponents:
    cands, refs = prepare(candidates, references)
    info = info_weights(refs, N)
    info_sums = [0.0] * N
    cand_counts = [0] * N
    c = 0
    r_avg = 0.0
    for cand, rs in zip(cands, refs):
        c += len(cand)
        r_avg += sum(len(x) for x in rs) / len(rs)
        for n in range(1, N + 1):
            counts = ngrams(cand, n)
            max_ref: Counter = Counter()
            for ref in rs:
                max_ref |= ngrams(ref, n)
            cand_counts[n - 1] += sum(counts.values())
            for g, k in counts.items():
                matched = min(k, max_ref[g])
                if matched:
                    info_sums[n - 1] += matched * info[g]
    order_scores = [s / k if k else 0.0 for s, k in zip(info_sums, cand_counts)]
    bf = nist_brevity(c, r_avg)
    return NistComponents(info_sums, cand_counts, order_scores, c, r_avg, bf, sum(order_scores) * bf)
