"""Corpus-level BLEU with per-reference clipping and closest reference length."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from ._common import ngrams, prepare


@dataclass
class BleuComponents:
    precisions: list[float]
    matches: list[int]
    totals: list[int]
    weights: list[float]
    N: int
    c: int
    r: int
    brevity_penalty: float
    score: float


def brevity_penalty(c: int, r: int) -> float:
    if c > r:
        return 1.0
    if c == 0:
        return 0.0
    return math.exp(1 - r / c)


def _closest_length(c: int, refs) -> int:
    return min((abs(len(r) - c), len(r)) for r in refs)[1]


def bleu(candidates, references, N: int = 4) -> BleuComponents:
    """BLEU over a corpus.

    n-gram counts are clipped by the largest count in any single reference.
    Orders for which the candidate corpus has no n-grams at all (every
    sentence shorter than n) are left out and the weights renormalized over
    the remaining orders; any remaining zero precision gives score 0.
    """
    cands, refs = prepare(candidates, references)
    matches = [0] * N
    totals = [0] * N
    c = r = 0
    for cand, rs in zip(cands, refs):
        c += len(cand)
        r += _closest_length(len(cand), rs)
        for n in range(1, N + 1):
            counts = ngrams(cand, n)
            max_ref: Counter = Counter()
            for ref in rs:
                max_ref |= ngrams(ref, n)
            matches[n - 1] += sum(min(k, max_ref[g]) for g, k in counts.items())
            totals[n - 1] += sum(counts.values())
    precisions = [m / t if t else 0.0 for m, t in zip(matches, totals)]
    active = [n for n in range(N) if totals[n]]
    weights = [1 / len(active) if n in active else 0.0 for n in range(N)]
    bp = brevity_penalty(c, r)
    if not active or any(precisions[n] == 0 for n in active):
        score = 0.0
    else:
        score = bp * math.exp(sum(weights[n] * math.log(precisions[n]) for n in active))
    return BleuComponents(precisions, matches, totals, weights, N, c, r, bp, score)


def sentence_stats(cand, refs, N: int = 4) -> tuple:
    """Sufficient statistics of one sentence: (matches..., totals..., c, r)."""
    comp = bleu([cand], [refs], N)
    return tuple(comp.matches) + tuple(comp.totals) + (comp.c, comp.r)


def bleu_from_stats(stats, N: int = 4) -> float:
    """Corpus BLEU from summed ``sentence_stats`` tuples (same rules as ``bleu``)."""
    matches, totals = stats[:N], stats[N:2 * N]
    c, r = stats[2 * N], stats[2 * N + 1]
    active = [n for n in range(N) if totals[n]]
    if not active or any(matches[n] == 0 for n in active):
        return 0.0
    log_p = sum(math.log(matches[n] / totals[n]) for n in active) / len(active)
    return brevity_penalty(c, r) * math.exp(log_p)
