"""METEOR: staged unigram alignment (exact, stem, synonym) with a chunk penalty."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from ._common import EmptyInput, tokens

SEARCH_BUDGET = 20000


@dataclass
class MeteorComponents:
    P: float
    R: float
    C: int
    M_U: int
    P_M: float
    score: float
    alignment: tuple = ()
    cand_len: int = 0
    ref_len: int = 0


def load_synonyms(path) -> list[frozenset]:
    """One synonym set per line, words separated by whitespace."""
    sets = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        words = frozenset(line.split())
        if len(words) > 1:
            sets.append(words)
    return sets


def _synonym_index(synonyms) -> dict[str, frozenset]:
    index: dict[str, set] = {}
    for k, group in enumerate(synonyms or ()):
        for w in group:
            index.setdefault(w, set()).add(k)
    return {w: frozenset(ids) for w, ids in index.items()}


def _stages(stem, synonyms) -> list[Callable[[str, str], bool]]:
    stages = [lambda a, b: a == b]
    if stem is not None:
        f = stem.get if isinstance(stem, dict) else stem
        stages.append(lambda a, b: (f(a) or a) == (f(b) or b))
    if synonyms:
        index = _synonym_index(synonyms)
        stages.append(lambda a, b: bool(index.get(a, frozenset()) & index.get(b, frozenset())))
    return stages


def _crossings(links) -> int:
    links = sorted(links)
    return sum(1 for x in range(len(links)) for y in range(x + 1, len(links))
               if links[y][1] < links[x][1])


def _max_matching(edges: dict[int, list[int]]) -> dict[int, int]:
    match_ref: dict[int, int] = {}

    def augment(i, seen):
        for j in edges[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in match_ref or augment(match_ref[j], seen):
                match_ref[j] = i
                return True
        return False

    for i in sorted(edges):
        augment(i, set())
    return {i: j for j, i in match_ref.items()}


def _stage_alignment(edges: dict[int, list[int]], fixed: list) -> list:
    """Maximum matching over ``edges`` with the fewest crossings (counted
    together with the already fixed links). Exhaustive up to a search budget,
    then the best matching found so far."""
    if not edges:
        return []
    start = _max_matching(edges)
    size = len(start)
    best = [sorted(start.items())]
    best_cost = [_crossings(fixed + best[0])]
    nodes = sorted(edges)
    budget = [SEARCH_BUDGET]

    def search(k, used, links, cost, skips_left):
        if budget[0] <= 0 or cost >= best_cost[0]:
            return
        budget[0] -= 1
        if len(links) == size:
            best[0], best_cost[0] = list(links), cost
            return
        if k == len(nodes):
            return
        i = nodes[k]
        for j in edges[i]:
            if j in used:
                continue
            add = sum(1 for a, b in fixed + links if (a < i) != (b < j))
            used.add(j)
            links.append((i, j))
            search(k + 1, used, links, cost + add, skips_left)
            links.pop()
            used.discard(j)
        if skips_left > 0:
            search(k + 1, used, links, cost, skips_left - 1)

    search(0, set(), [], _crossings(fixed), len(nodes) - size)
    return best[0]


def align(cand: Sequence[str], ref: Sequence[str], stem=None, synonyms=None) -> list[tuple[int, int]]:
    links: list = []
    for same in _stages(stem, synonyms):
        used_c = {i for i, _ in links}
        used_r = {j for _, j in links}
        edges = {}
        for i, a in enumerate(cand):
            if i in used_c:
                continue
            js = [j for j, b in enumerate(ref) if j not in used_r and same(a, b)]
            if js:
                edges[i] = js
        links = sorted(links + _stage_alignment(edges, links))
    return links


def count_chunks(links) -> int:
    """Runs of links adjacent and in the same order in both strings."""
    links = sorted(links)
    chunks = 0
    prev = None
    for i, j in links:
        if prev is None or (i, j) != (prev[0] + 1, prev[1] + 1):
            chunks += 1
        prev = (i, j)
    return chunks


def _score(m: int, chunks: int, cand_len: int, ref_len: int, cubed: bool):
    if m == 0:
        return 0.0, 0.0, 0.0, 0.0
    P, R = m / cand_len, m / ref_len
    fmean = 10 * P * R / (R + 9 * P)
    ratio = chunks / m
    penalty = 0.5 * (ratio ** 3 if cubed else ratio)
    return P, R, penalty, fmean * (1 - penalty)


def meteor_sentence(cand, ref, stem=None, synonyms=None, cubed: bool = False) -> MeteorComponents:
    cand, ref = tokens(cand), tokens(ref)
    links = align(cand, ref, stem, synonyms)
    chunks = count_chunks(links)
    P, R, penalty, score = _score(len(links), chunks, len(cand), len(ref), cubed)
    return MeteorComponents(P, R, chunks, len(links), penalty, score, tuple(links), len(cand), len(ref))


def meteor(cand, refs, stem=None, synonyms=None, cubed: bool = False) -> MeteorComponents:
    """Best score over the reference set (first reference wins ties).

    ``cubed`` switches the penalty from ``0.5 * C/M`` to ``0.5 * (C/M)**3``.
    """
    if isinstance(refs, str):
        refs = [refs]
    if not refs:
        raise EmptyInput("no references")
    best = None
    for ref in refs:
        comp = meteor_sentence(cand, ref, stem, synonyms, cubed)
        if best is None or comp.score > best.score:
            best = comp
    return best


def meteor_corpus(candidates, references, stem=None, synonyms=None, cubed: bool = False) -> MeteorComponents:
    """Sums matches, chunks and lengths over each sentence's best reference."""
    if not candidates or len(candidates) != len(references):
        raise EmptyInput("candidate and reference counts differ or are zero")
    m = chunks = cand_len = ref_len = 0
    for cand, refs in zip(candidates, references):
        comp = meteor(cand, refs, stem, synonyms, cubed)
        m += comp.M_U
        chunks += comp.C
        cand_len += comp.cand_len
        ref_len += comp.ref_len
    P, R, penalty, score = _score(m, chunks, cand_len, ref_len, cubed)
    return MeteorComponents(P, R, chunks, m, penalty, score, (), cand_len, ref_len)
