"""Independent reference implementations used as test oracles.

Each one is written from the textbook definition, favouring brute force and
plain loops over the data structures used in the package.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter


# ---------------------------------------------------------------- phrases

def brute_phrase_boxes(n, m, links, max_len):
    """Every (src_span, tgt_span) box with a link inside and none crossing."""
    out = set()
    for i1 in range(n):
        for i2 in range(i1, n):
            for j1 in range(m):
                for j2 in range(j1, m):
                    if i2 - i1 + 1 > max_len or j2 - j1 + 1 > max_len:
                        continue
                    inside = False
                    ok = True
                    for i, j in links:
                        in_src = i1 <= i <= i2
                        in_tgt = j1 <= j <= j2
                        if in_src and in_tgt:
                            inside = True
                        elif in_src or in_tgt:
                            ok = False
                    if ok and inside:
                        out.add(((i1, i2), (j1, j2)))
    return out


# ---------------------------------------------------------------- language model

def kn_prob(sentences, order, discounts, context, word):
    """Interpolated Kneser-Ney probability straight from the recursion.

    Counts are rebuilt on every call: raw counts for the top order and for
    n-grams starting with <s>, continuation counts below.
    """
    padded = [["<s>"] + list(s) + ["</s>"] for s in sentences]
    raw = Counter()
    for s in padded:
        for n in range(1, order + 1):
            for i in range(len(s) - n + 1):
                raw[tuple(s[i:i + n])] += 1

    def count(g):
        if len(g) == order or g[0] == "<s>":
            return raw[g]
        return len({h for h in raw if len(h) == len(g) + 1 and h[1:] == g})

    vocab = sorted({w for s in padded for w in s} | {"<unk>"})
    predictable = [w for w in vocab if w != "<s>"]
    word = word if word in vocab else "<unk>"
    context = tuple(c if c in vocab else "<unk>" for c in context)

    def p(ctx, w):
        if not ctx:
            unis = {(v,): count((v,)) for v in predictable if v != "<unk>" or raw[("<unk>",)]}
            unis = {g: c for g, c in unis.items() if c > 0}
            total = sum(unis.values())
            d = discounts[0]
            return max(count((w,)) - d, 0) / total + d * len(unis) / total / len(predictable)
        n = len(ctx) + 1
        d = discounts[n - 1]
        followers = {g: count(g) for g in raw if len(g) == n and g[:-1] == ctx}
        followers = {g: c for g, c in followers.items() if c > 0}
        total = sum(followers.values())
        if total == 0:
            return p(ctx[1:], w)
        gamma = d * len(followers) / total
        return max(followers.get(ctx + (w,), 0) - d, 0) / total + gamma * p(ctx[1:], w)

    ctx = context[-(order - 1):] if order > 1 else ()
    return p(ctx, word)


# ---------------------------------------------------------------- IBM Model 1

def ibm1_oracle(pairs, iterations, use_null=True):
    """Dense EM over explicit vocabularies; returns {(s, t): p}."""
    src_vocab = sorted({w for s, _ in pairs for w in s} | ({"<null>"} if use_null else set()))
    tgt_vocab = sorted({w for _, t in pairs for w in t})
    cooc = {s: set() for s in src_vocab}
    for src, tgt in pairs:
        for s in list(src) + (["<null>"] if use_null else []):
            cooc[s].update(tgt)
    t = {}
    for s in src_vocab:
        for w in tgt_vocab:
            t[(s, w)] = 1.0 / len(cooc[s]) if w in cooc[s] else 0.0
    for _ in range(iterations):
        count = {k: 0.0 for k in t}
        for src, tgt in pairs:
            sources = (["<null>"] if use_null else []) + list(src)
            for w in tgt:
                z = sum(t[(s, w)] for s in sources)
                for s in sources:
                    count[(s, w)] += t[(s, w)] / z
        for s in src_vocab:
            total = sum(count[(s, w)] for w in tgt_vocab)
            for w in tgt_vocab:
                t[(s, w)] = count[(s, w)] / total if total else 0.0
    return {k: v for k, v in t.items() if v > 0}


# ---------------------------------------------------------------- decoder

def brute_force_best(sentence, models, weights, score_fn, collect_fn):
    """Best total over every segmentation, order and option choice."""
    n = len(sentence)
    options = collect_fn(sentence, models, weights, None)
    by_start = {}
    for (i, j), opts in options.items():
        by_start.setdefault(i, []).append((j, opts))
    best = -math.inf
    best_derivation = None

    def segmentations(i):
        if i == n:
            yield []
            return
        for j, opts in by_start.get(i, []):
            for rest in segmentations(j + 1):
                yield [(i, j)] + rest

    for seg in segmentations(0):
        for order in itertools.permutations(seg):
            for choice in itertools.product(*(options[span] for span in order)):
                total = score_fn(list(choice), n, models, weights)["total"]
                if total > best:
                    best, best_derivation = total, list(choice)
    if n == 0:
        best = score_fn([], 0, models, weights)["total"]
        best_derivation = []
    return best, best_derivation


# ---------------------------------------------------------------- metrics

def levenshtein(a, b):
    @_memo
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))
    return d(len(a), len(b))


def _memo(f):
    cache = {}

    def g(*args):
        if args not in cache:
            cache[args] = f(*args)
        return cache[args]
    return g


def block_moves(words):
    words = tuple(words)
    n = len(words)
    for i in range(n):
        for length in range(1, n - i + 1):
            block = words[i:i + length]
            rest = words[:i] + words[i + length:]
            for d in range(len(rest) + 1):
                moved = rest[:d] + block + rest[d:]
                if moved != words:
                    yield moved


def exact_ter_edits(hyp, ref):
    """Minimum of (number of block moves + Levenshtein distance), searching
    breadth-first over arbitrary block moves of the hypothesis."""
    hyp, ref = tuple(hyp), tuple(ref)
    best = levenshtein(hyp, ref)
    frontier = {hyp}
    seen = {hyp}
    depth = 0
    while frontier and depth + 1 < best:
        depth += 1
        nxt = set()
        for state in frontier:
            for moved in block_moves(state):
                if moved in seen:
                    continue
                seen.add(moved)
                nxt.add(moved)
                best = min(best, depth + levenshtein(moved, ref))
        frontier = nxt
    return best


def nist_oracle(candidates, references, N=5):
    """NIST computed with explicit n-gram lists rather than counters."""
    def grams(ws, n):
        return [tuple(ws[i:i + n]) for i in range(len(ws) - n + 1)]

    all_refs = [r for rs in references for r in rs]
    ref_word_total = sum(len(r) for r in all_refs)
    ref_grams = [g for r in all_refs for n in range(1, N + 1) for g in grams(r, n)]

    def info(g):
        num = ref_word_total if len(g) == 1 else ref_grams.count(g[:-1])
        return math.log(num / ref_grams.count(g), 2)

    total = 0.0
    for n in range(1, N + 1):
        info_sum = 0.0
        cand_total = 0
        for cand, rs in zip(candidates, references):
            cg = grams(cand, n)
            cand_total += len(cg)
            for g in set(cg):
                clip = max(grams(r, n).count(g) for r in rs)
                info_sum += min(cg.count(g), clip) * (info(g) if clip else 0.0)
        if cand_total:
            total += info_sum / cand_total
    c = sum(len(x) for x in candidates)
    r = sum(sum(len(x) for x in rs) / len(rs) for rs in references)
    beta = -math.log(2) / math.log(1.5) ** 2
    ratio = min(c / r, 1.0) if c else 0.0
    bp = math.exp(beta * math.log(ratio) ** 2) if ratio > 0 else 0.0
    return total * bp


def meteor_exact_oracle(cand, ref):
    """(largest exact-match alignment size, fewest crossings at that size),
    by trying every injective assignment of candidate words."""
    best = (0, 0)
    slots = [[None] + [j for j, r in enumerate(ref) if r == w] for w in cand]
    for choice in itertools.product(*slots):
        used = [j for j in choice if j is not None]
        if len(set(used)) != len(used):
            continue
        links = [(i, j) for i, j in enumerate(choice) if j is not None]
        crossings = sum(1 for a in links for b in links if a[0] < b[0] and a[1] > b[1])
        key = (len(links), -crossings)
        if key > (best[0], -best[1]):
            best = (len(links), crossings)
    return best
