"""Weight tuning by coordinate ascent on corpus BLEU over n-best pools.

Along one coordinate every n-best entry's model score is a line in the
weight value, so the 1-best choice per sentence changes only at the
breakpoints of the upper envelope. Sweeping the merged breakpoints gives
the exact BLEU-optimal value for that coordinate.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Sequence

from .decoder import FEATURES, TUNABLE, FeatureWeights, Models, decode
from .metrics.bleu import bleu_from_stats, sentence_stats


class EmptyDev(ValueError):
    pass


@dataclass
class PoolEntry:
    translation: tuple[str, ...]
    features: tuple[float, ...]
    stats: tuple


def _score(entry: PoolEntry, vector: Sequence[float]) -> float:
    return sum(w * h for w, h in zip(vector, entry.features))


def _upper_envelope(lines):
    """``lines`` are ``(slope, intercept, index)``; returns (starts, indices)
    where entry k is the argmax from ``starts[k]`` up to ``starts[k+1]``."""
    lines = sorted(lines, key=lambda x: (x[0], -x[1], x[2]))
    dedup = []
    for line in lines:
        if dedup and dedup[-1][0] == line[0]:
            continue
        dedup.append(line)
    hull, starts = [], []
    for slope, icpt, idx in dedup:
        while hull:
            s0, i0, _ = hull[-1]
            x = (i0 - icpt) / (slope - s0)
            if x <= starts[-1]:
                hull.pop()
                starts.pop()
                continue
            break
        if hull:
            s0, i0, _ = hull[-1]
            starts.append((i0 - icpt) / (slope - s0))
        else:
            starts.append(-math.inf)
        hull.append((slope, icpt, idx))
    return starts, [h[2] for h in hull]


def _add(a, b, sign=1):
    return tuple(x + sign * y for x, y in zip(a, b))


def line_search(pools: list[list[PoolEntry]], vector: list[float], k: int) -> tuple[float, float]:
    """Best value for coordinate ``k`` and the pool BLEU it reaches.

    The chosen value is the midpoint of the best interval (or one unit past
    a finite end of an unbounded interval); the current value is kept when
    its interval is among the best.
    """
    events = []
    totals = None
    for pool in pools:
        lines = []
        for idx, e in enumerate(pool):
            rest = _score(e, vector) - vector[k] * e.features[k]
            lines.append((e.features[k], rest, idx))
        starts, idxs = _upper_envelope(lines)
        first = pool[idxs[0]].stats
        totals = first if totals is None else _add(totals, first)
        for x, prev_i, new_i in zip(starts[1:], idxs, idxs[1:]):
            events.append((x, _add(pool[new_i].stats, pool[prev_i].stats, -1)))
    events.sort(key=lambda e: e[0])
    bounds = [-math.inf] + [x for x, _ in events] + [math.inf]
    scores = [bleu_from_stats(totals)]
    stats = totals
    for _, diff in events:
        stats = _add(stats, diff)
        scores.append(bleu_from_stats(stats))
    best = max(scores)
    current = vector[k]
    # a value sitting on a breakpoint is a tie, so demand some clearance
    eps = 1e-6 * max(1.0, abs(current))
    for t, s in enumerate(scores):
        if s >= best - 1e-12 and bounds[t] + eps < current < bounds[t + 1] - eps:
            return current, s
    t = next(t for t, s in enumerate(scores) if s >= best - 1e-12)
    lo, hi = bounds[t], bounds[t + 1]
    if lo == -math.inf and hi == math.inf:
        value = current
    elif lo == -math.inf:
        value = hi - 1.0
    elif hi == math.inf:
        value = lo + 1.0
    else:
        value = (lo + hi) / 2
    return value, best


def pool_bleu(pools: list[list[PoolEntry]], vector: Sequence[float]) -> float:
    totals = None
    for pool in pools:
        best = max(range(len(pool)), key=lambda i: (_score(pool[i], vector), -i))
        s = pool[best].stats
        totals = s if totals is None else _add(totals, s)
    return bleu_from_stats(totals)


def optimize(pools: list[list[PoolEntry]], init: FeatureWeights, max_passes: int = 10,
             restarts: int = 0, seed: int = 0) -> tuple[FeatureWeights, float]:
    """Coordinate ascent from ``init`` (plus random restarts) on the pools.

    Never returns weights scoring below ``init`` on the pools.
    """
    rng = random.Random(seed)
    tunable = [FEATURES.index(f) for f in TUNABLE]
    starts = [init.vector()]
    for _ in range(restarts):
        v = init.vector()
        for k in tunable:
            v[k] = rng.uniform(-1.0, 1.0)
        starts.append(v)
    best_v, best_s = init.vector(), pool_bleu(pools, init.vector())
    for v in starts:
        score = pool_bleu(pools, v)
        for _ in range(max_passes):
            improved = False
            for k in tunable:
                value, s = line_search(pools, v, k)
                if s > score + 1e-12:
                    v[k], score = value, s
                    improved = True
            if not improved:
                break
        if score > best_s + 1e-12:
            best_v, best_s = list(v), score
    return FeatureWeights(**dict(zip(FEATURES, best_v))), best_s


def _corpus_bleu(outputs, refs) -> float:
    totals = None
    for out, r in zip(outputs, refs):
        s = sentence_stats(out, r)
        totals = s if totals is None else _add(totals, s)
    return bleu_from_stats(totals)


def tune_weights(dev_src: Sequence[Sequence[str]], dev_refs: Sequence, models: Models,
                 init: FeatureWeights, rounds: int = 3, seed: int = 0, nbest: int = 20,
                 decode_args: dict | None = None, log=None) -> FeatureWeights:
    """Alternate n-best decoding of the dev set with coordinate ascent.

    ``dev_refs`` holds one reference set (list of token lists) per sentence.
    Each round optimizes on the pool and re-decodes with the new weights.
    Stops after ``rounds`` or once dev BLEU improves by less than 1e-4, and
    returns the weights with the best dev BLEU actually decoded.
    """
    if not dev_src:
        raise EmptyDev("empty tuning set")
    if rounds <= 0:
        return init
    decode_args = dict(decode_args or {})
    decode_args.pop("nbest", None)
    refs = [[list(r) for r in rs] for rs in dev_refs]
    pools: list[list[PoolEntry]] = [[] for _ in dev_src]
    seen: list[set] = [set() for _ in dev_src]
    current = init
    best_w, best_bleu = init, None
    for r in range(rounds + 1):
        outputs = []
        for i, src in enumerate(dev_src):
            result = decode(src, models, current, nbest=nbest, **decode_args)
            outputs.append(result.translation)
            for e in result.nbest:
                key = tuple(e.translation)
                if key in seen[i]:
                    continue
                seen[i].add(key)
                feats = tuple(e.features[f] for f in FEATURES)
                pools[i].append(PoolEntry(key, feats, sentence_stats(e.translation, refs[i])))
        dev_bleu = _corpus_bleu(outputs, refs)
        if log:
            log(f"round {r}: dev BLEU {dev_bleu:.6f}")
        if best_bleu is None or dev_bleu > best_bleu + 1e-12:
            gain = math.inf if best_bleu is None else dev_bleu - best_bleu
            best_w, best_bleu = current, dev_bleu
        else:
            gain = 0.0
        if r == rounds or (r > 0 and gain < 1e-4):
            break
        current, _ = optimize(pools, current, restarts=2, seed=seed + r)
    return best_w
