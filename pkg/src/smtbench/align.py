"""IBM Model 1 word alignment and alignment symmetrization."""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

NULL = "<null>"

NEIGHBORS_DIAG = ((-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1))


class AlignError(Exception):
    pass


class EmptyCorpus(AlignError):
    pass


class DimensionMismatch(AlignError):
    pass


@dataclass
class TranslationTable:
    """Lexical translation probabilities ``t[(src, tgt)] = p(tgt | src)``."""

    t: dict[tuple[str, str], float]
    direction: str = "src->tgt"
    use_null: bool = True
    loglik: list[float] = field(default_factory=list)

    def prob(self, src: str, tgt: str) -> float:
        return self.t.get((src, tgt), 0.0)

    def row_sums(self) -> dict[str, float]:
        sums: dict[str, float] = defaultdict(float)
        for (s, _), p in self.t.items():
            sums[s] += p
        return dict(sums)


@dataclass(frozen=True)
class AlignmentMatrix:
    src_len: int
    tgt_len: int
    links: frozenset = frozenset()

    def __post_init__(self):
        links = frozenset((int(i), int(j)) for i, j in self.links)
        for i, j in links:
            if not (0 <= i < self.src_len and 0 <= j < self.tgt_len):
                raise ValueError(f"link {i}-{j} outside {self.src_len}x{self.tgt_len}")
        object.__setattr__(self, "links", links)

    def __contains__(self, link) -> bool:
        return link in self.links

    def __len__(self) -> int:
        return len(self.links)

    def transpose(self) -> "AlignmentMatrix":
        return AlignmentMatrix(self.tgt_len, self.src_len, frozenset((j, i) for i, j in self.links))

    def to_pharaoh(self) -> str:
        return " ".join(f"{i}-{j}" for i, j in sorted(self.links))

    @classmethod
    def from_pharaoh(cls, line: str, src_len: int, tgt_len: int) -> "AlignmentMatrix":
        links = []
        for item in line.split():
            i, j = item.split("-")
            links.append((int(i), int(j)))
        return cls(src_len, tgt_len, frozenset(links))


def _sides(pair, reverse: bool):
    src, tgt = (pair.src_tokens, pair.tgt_tokens) if hasattr(pair, "src_tokens") else pair
    return (tuple(tgt), tuple(src)) if reverse else (tuple(src), tuple(tgt))


def _loglik(t: dict, data, use_null: bool) -> float:
    total = 0.0
    for src, tgt in data:
        sources = ((NULL,) + src) if use_null else src
        for w in tgt:
            total += math.log(sum(t.get((s, w), 0.0) for s in sources) / len(sources))
    return total


def train_ibm1(corpus: Iterable, iterations: int = 5, use_null: bool = True,
               reverse: bool = False) -> TranslationTable:
    """EM training of IBM Model 1.

    ``corpus`` holds sentence pairs (``SentencePair`` or ``(src, tgt)``
    tuples); ``reverse`` trains the target-to-source direction. Every
    source word starts uniform over the target words it co-occurs with.
    The corpus log-likelihood before each iteration and after the last one
    is kept in ``loglik``.
    """
    data = [_sides(p, reverse) for p in corpus]
    data = [(s, t) for s, t in data if s and t]
    if not data:
        raise EmptyCorpus("no non-empty sentence pairs")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")

    cooc: dict[str, dict[str, None]] = defaultdict(dict)
    for src, tgt in data:
        for s in ((NULL,) + src if use_null else src):
            for w in tgt:
                cooc[s][w] = None
    t = {(s, w): 1.0 / len(ws) for s, ws in cooc.items() for w in ws}

    history = []
    for _ in range(iterations):
        history.append(_loglik(t, data, use_null))
        counts: dict[tuple[str, str], float] = defaultdict(float)
        for src, tgt in data:
            sources = ((NULL,) + src) if use_null else src
            for w in tgt:
                probs = [t[(s, w)] for s in sources]
                z = sum(probs)
                for s, p in zip(sources, probs):
                    counts[(s, w)] += p / z
        totals: dict[str, float] = defaultdict(float)
        for (s, _), c in counts.items():
            totals[s] += c
        t = {(s, w): c / totals[s] for (s, w), c in counts.items()}
    history.append(_loglik(t, data, use_null))
    direction = "tgt->src" if reverse else "src->tgt"
    return TranslationTable(t, direction, use_null, history)


def link_posteriors(table: TranslationTable, src: Sequence[str], tgt: Sequence[str]) -> list[dict]:
    """Per target position, the posterior over source positions (``-1`` = NULL)."""
    out = []
    for w in tgt:
        scores = {i: table.prob(s, w) for i, s in enumerate(src)}
        if table.use_null:
            scores[-1] = table.prob(NULL, w)
        z = sum(scores.values())
        out.append({i: (p / z if z else 0.0) for i, p in scores.items()})
    return out


def viterbi_align(table: TranslationTable, src: Sequence[str], tgt: Sequence[str]) -> AlignmentMatrix:
    """Link every target word to its most probable source word.

    Ties go to the lowest source index; NULL wins only when strictly more
    probable than every source word, and NULL links are dropped.
    """
    links = []
    for j, w in enumerate(tgt):
        best_i, best_p = None, 0.0
        for i, s in enumerate(src):
            p = table.prob(s, w)
            if p > best_p:
                best_i, best_p = i, p
        if table.use_null and table.prob(NULL, w) > best_p:
            best_i = None
        if best_i is not None:
            links.append((best_i, j))
    return AlignmentMatrix(len(src), len(tgt), frozenset(links))


class SymmetrizationHeuristic(str, enum.Enum):
    INTERSECTION = "intersection"
    UNION = "union"
    GROW_DIAG = "grow-diag"
    GROW_DIAG_FINAL = "grow-diag-final"
    GROW_DIAG_FINAL_AND = "grow-diag-final-and"


def _grow_diag(alignment: set, union: Sequence, src_aligned: set, tgt_aligned: set, order=None):
    candidates = sorted(union) if order is None else list(order)
    added = True
    while added:
        added = False
        for i, j in candidates:
            if (i, j) in alignment or (i in src_aligned and j in tgt_aligned):
                continue
            if any((i + di, j + dj) in alignment for di, dj in NEIGHBORS_DIAG):
                alignment.add((i, j))
                src_aligned.add(i)
                tgt_aligned.add(j)
                added = True


def _final(alignment: set, direction: frozenset, src_aligned: set, tgt_aligned: set, both: bool):
    for i, j in sorted(direction):
        if (i, j) in alignment:
            continue
        free_i, free_j = i not in src_aligned, j not in tgt_aligned
        if (free_i and free_j) if both else (free_i or free_j):
            alignment.add((i, j))
            src_aligned.add(i)
            tgt_aligned.add(j)


def symmetrize(fwd: AlignmentMatrix, bwd: AlignmentMatrix, heuristic="grow-diag-final-and",
               grow_order=None) -> AlignmentMatrix:
    """Merge two directional alignments (both given source-major).

    Growing starts from the intersection and scans the remaining union
    points row-major (or in ``grow_order``), adding a point that neighbours
    an existing one, diagonals included, while its source or target word is
    still unaligned; the scan repeats until nothing changes. The final steps
    then add points from ``fwd`` and afterwards ``bwd`` whose source or
    target word is unaligned (``-final``) or both are (``-final-and``).
    """
    if (fwd.src_len, fwd.tgt_len) != (bwd.src_len, bwd.tgt_len):
        raise DimensionMismatch(f"{fwd.src_len}x{fwd.tgt_len} vs {bwd.src_len}x{bwd.tgt_len}")
    h = SymmetrizationHeuristic(heuristic)
    inter = fwd.links & bwd.links
    union = fwd.links | bwd.links
    if h is SymmetrizationHeuristic.INTERSECTION:
        return AlignmentMatrix(fwd.src_len, fwd.tgt_len, inter)
    if h is SymmetrizationHeuristic.UNION:
        return AlignmentMatrix(fwd.src_len, fwd.tgt_len, union)
    alignment = set(inter)
    src_aligned = {i for i, _ in alignment}
    tgt_aligned = {j for _, j in alignment}
    _grow_diag(alignment, union - inter, src_aligned, tgt_aligned, grow_order)
    if h is not SymmetrizationHeuristic.GROW_DIAG:
        both = h is SymmetrizationHeuristic.GROW_DIAG_FINAL_AND
        _final(alignment, fwd.links, src_aligned, tgt_aligned, both)
        _final(alignment, bwd.links, src_aligned, tgt_aligned, both)
    return AlignmentMatrix(fwd.src_len, fwd.tgt_len, frozenset(alignment))


def align_corpus(pairs: Sequence, iterations: int = 5, heuristic="grow-diag-final-and",
                 use_null: bool = True):
    """Train both directions and return ``(fwd_table, bwd_table, alignments)``."""
    pairs = list(pairs)
    fwd_table = train_ibm1(pairs, iterations, use_null)
    bwd_table = train_ibm1(pairs, iterations, use_null, reverse=True)
    alignments = []
    for p in pairs:
        src, tgt = _sides(p, False)
        fwd = viterbi_align(fwd_table, src, tgt)
        bwd = viterbi_align(bwd_table, tgt, src).transpose()
        alignments.append(symmetrize(fwd, bwd, heuristic))
    return fwd_table, bwd_table, alignments


def read_alignments(path) -> list[frozenset]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            out.append(frozenset(tuple(int(x) for x in item.split("-")) for item in line.split()))
    return out


def write_alignments(alignments: Iterable[AlignmentMatrix], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in alignments:
            fh.write(a.to_pharaoh() + "\n")
