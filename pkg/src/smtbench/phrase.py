"""Phrase-pair extraction, phrase-table scoring and the bidirectional
monotone/swap/discontinuous (MSD) lexicalized reordering model."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .align import NULL, AlignmentMatrix, DimensionMismatch

MONO, SWAP, DISC = "M", "S", "D"
ORIENTATIONS = (MONO, SWAP, DISC)
FORWARD, BACKWARD = "forward", "backward"
DEFAULT_MAX_LEN = 7
SMOOTHING = 0.5
LEX_FLOOR = 1e-7

Phrase = tuple[str, ...]


@dataclass(frozen=True)
class PhrasePair:
    src_span: tuple[int, int]
    tgt_span: tuple[int, int]
    src_tokens: Phrase
    tgt_tokens: Phrase
    # links relative to the phrase's top-left corner
    alignment: frozenset = frozenset()

    @property
    def key(self) -> tuple[Phrase, Phrase]:
        return self.src_tokens, self.tgt_tokens


def _sides(pair):
    if hasattr(pair, "src_tokens"):
        return tuple(pair.src_tokens), tuple(pair.tgt_tokens)
    src, tgt = pair
    return tuple(src), tuple(tgt)


def _make_pair(src, tgt, links, i1, i2, j1, j2) -> PhrasePair:
    inner = frozenset((i - i1, j - j1) for i, j in links if i1 <= i <= i2 and j1 <= j <= j2)
    return PhrasePair((i1, i2), (j1, j2), src[i1:i2 + 1], tgt[j1:j2 + 1], inner)


def extract_phrases(pair, a: AlignmentMatrix, max_len: int = DEFAULT_MAX_LEN) -> set[PhrasePair]:
    """All phrase pairs consistent with ``a`` with both sides at most ``max_len``.

    A box is consistent when it contains at least one link and no link
    connects a word inside it to a word outside it; unaligned target words
    at the box edges yield the extra, extended pairs.
    """
    src, tgt = _sides(pair)
    if (len(src), len(tgt)) != (a.src_len, a.tgt_len):
        raise DimensionMismatch(f"sentence {len(src)}x{len(tgt)} vs alignment {a.src_len}x{a.tgt_len}")
    links = sorted(a.links)
    tgt_aligned = [False] * len(tgt)
    for _, j in links:
        tgt_aligned[j] = True
    out = set()
    for i1 in range(len(src)):
        for i2 in range(i1, min(len(src), i1 + max_len)):
            js = [j for i, j in links if i1 <= i <= i2]
            if not js:
                continue
            j1, j2 = min(js), max(js)
            if j2 - j1 + 1 > max_len:
                continue
            if any(j1 <= j <= j2 and not i1 <= i <= i2 for i, j in links):
                continue
            start = j1
            while True:
                end = j2
                while True:
                    out.add(_make_pair(src, tgt, links, i1, i2, start, end))
                    end += 1
                    if end >= len(tgt) or tgt_aligned[end] or end - start + 1 > max_len:
                        break
                start -= 1
                if start < 0 or tgt_aligned[start] or j2 - start + 1 > max_len:
                    break
    return out


def lexical_tables(pairs: Sequence, alignments: Sequence[AlignmentMatrix]):
    """Word translation tables ``(w(t|s), w(s|t))`` from aligned word counts.

    Unaligned words count as aligned to ``NULL`` on the other side.
    """
    joint: Counter = Counter()
    for pair, a in zip(pairs, alignments):
        src, tgt = _sides(pair)
        src_seen, tgt_seen = set(), set()
        for i, j in a.links:
            joint[(src[i], tgt[j])] += 1
            src_seen.add(i)
            tgt_seen.add(j)
        for i, s in enumerate(src):
            if i not in src_seen:
                joint[(s, NULL)] += 1
        for j, t in enumerate(tgt):
            if j not in tgt_seen:
                joint[(NULL, t)] += 1
    src_tot: Counter = Counter()
    tgt_tot: Counter = Counter()
    for (s, t), c in joint.items():
        src_tot[s] += c
        tgt_tot[t] += c
    t_given_s = {(s, t): c / src_tot[s] for (s, t), c in joint.items()}
    s_given_t = {(t, s): c / tgt_tot[t] for (s, t), c in joint.items()}
    return t_given_s, s_given_t


def lexical_weight(src: Phrase, tgt: Phrase, alignment: Iterable, w: dict) -> float:
    """lex(tgt | src): product over target words of the mean word probability
    over their links, or ``w(t | NULL)`` for unaligned target words."""
    by_tgt = defaultdict(list)
    for i, j in alignment:
        by_tgt[j].append(i)
    score = 1.0
    for j, t in enumerate(tgt):
        if by_tgt[j]:
            score *= sum(w.get((src[i], t), 0.0) for i in by_tgt[j]) / len(by_tgt[j])
        else:
            score *= w.get((NULL, t), 0.0)
    return max(score, LEX_FLOOR)


@dataclass
class PhraseTable:
    """``entries[(src, tgt)] = (p(t|s), p(s|t), lex(t|s), lex(s|t))``."""

    entries: dict[tuple[Phrase, Phrase], tuple[float, float, float, float]] = field(default_factory=dict)
    _by_src: dict | None = field(default=None, init=False, repr=False, compare=False)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, key):
        return key in self.entries

    def options(self, src: Phrase) -> list[tuple[Phrase, tuple[float, float, float, float]]]:
        if self._by_src is None:
            index = defaultdict(list)
            for (s, t), scores in sorted(self.entries.items()):
                index[s].append((t, scores))
            self._by_src = dict(index)
        return self._by_src.get(tuple(src), [])

    @property
    def max_src_len(self) -> int:
        return max((len(s) for s, _ in self.entries), default=0)

    def dumps(self) -> str:
        return "".join(
            f"{' '.join(s)} ||| {' '.join(t)} ||| {' '.join(f'{x:.6e}' for x in v)}\n"
            for (s, t), v in sorted(self.entries.items()))

    @classmethod
    def loads(cls, text: str) -> "PhraseTable":
        entries = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            s, t, scores = (part.strip() for part in line.split("|||")[:3])
            entries[(tuple(s.split()), tuple(t.split()))] = tuple(float(x) for x in scores.split())
        return cls(entries)


def score_table(extractions: Iterable[PhrasePair], lex: tuple[dict, dict] | None = None) -> PhraseTable:
    """Relative-frequency phrase probabilities in both directions plus
    lexical weights (maximum over the internal alignments seen).

    Without ``lex`` tables both lexical weights are 1.
    """
    joint: Counter = Counter()
    aligns: dict = defaultdict(set)
    for pp in extractions:
        joint[pp.key] += 1
        aligns[pp.key].add(pp.alignment)
    src_tot: Counter = Counter()
    tgt_tot: Counter = Counter()
    for (s, t), c in joint.items():
        src_tot[s] += c
        tgt_tot[t] += c
    entries = {}
    for (s, t), c in joint.items():
        if lex is None:
            lex_ts = lex_st = 1.0
        else:
            lex_ts = max(lexical_weight(s, t, al, lex[0]) for al in aligns[(s, t)])
            lex_st = max(lexical_weight(t, s, {(j, i) for i, j in al}, lex[1]) for al in aligns[(s, t)])
        entries[(s, t)] = (c / src_tot[s], c / tgt_tot[t], lex_ts, lex_st)
    return PhraseTable(entries)


def classify_orientation(prev: PhrasePair, cur: PhrasePair, direction: str = FORWARD) -> str:
    """Orientation between two phrases translated one after the other.

    ``forward`` labels ``cur`` relative to the preceding ``prev``;
    ``backward`` labels ``prev`` relative to the following ``cur``. Both read
    the same source relation: M when ``cur`` starts right after ``prev``
    ends, S when it ends right before ``prev`` starts, D otherwise (also
    when the target sides are not adjacent).
    """
    if direction not in (FORWARD, BACKWARD):
        raise ValueError(f"unknown direction {direction!r}")
    if prev.tgt_span[1] + 1 != cur.tgt_span[0]:
        return DISC
    return span_orientation(prev.src_span, cur.src_span)


def span_orientation(prev_span: tuple[int, int], cur_span: tuple[int, int]) -> str:
    if cur_span[0] == prev_span[1] + 1:
        return MONO
    if cur_span[1] == prev_span[0] - 1:
        return SWAP
    return DISC


class _BoxIndex:
    """Corners of every consistent box, for phrase-based orientation lookup."""

    def __init__(self, pair, a: AlignmentMatrix):
        boxes = extract_phrases(pair, a, max_len=max(a.src_len, a.tgt_len, 1))
        self.ends = {(p.src_span[1], p.tgt_span[1]) for p in boxes}
        self.src_start_tgt_end = {(p.src_span[0], p.tgt_span[1]) for p in boxes}
        self.starts = {(p.src_span[0], p.tgt_span[0]) for p in boxes}
        self.src_end_tgt_start = {(p.src_span[1], p.tgt_span[0]) for p in boxes}
        # sentence boundaries act as one-word boxes outside the sentence
        self.ends.add((-1, -1))
        self.starts.add((a.src_len, a.tgt_len))


def phrase_orientations(pp: PhrasePair, index: _BoxIndex) -> tuple[str, str]:
    (i1, i2), (j1, j2) = pp.src_span, pp.tgt_span
    if (i1 - 1, j1 - 1) in index.ends:
        fwd = MONO
    elif (i2 + 1, j1 - 1) in index.src_start_tgt_end:
        fwd = SWAP
    else:
        fwd = DISC
    if (i2 + 1, j2 + 1) in index.starts:
        bwd = MONO
    elif (i1 - 1, j2 + 1) in index.src_end_tgt_start:
        bwd = SWAP
    else:
        bwd = DISC
    return fwd, bwd


def extract_with_orientations(pair, a: AlignmentMatrix, max_len: int = DEFAULT_MAX_LEN):
    """Extracted phrase pairs with their (forward, backward) orientations."""
    phrases = sorted(extract_phrases(pair, a, max_len), key=lambda p: (p.src_span, p.tgt_span))
    index = _BoxIndex(pair, a)
    return [(pp,) + phrase_orientations(pp, index) for pp in phrases]


@dataclass
class ReorderingModel:
    """``entries[(src, tgt)] = (mF, sF, dF, mB, sB, dB)``."""

    entries: dict[tuple[Phrase, Phrase], tuple[float, ...]] = field(default_factory=dict)

    def get(self, src: Phrase, tgt: Phrase) -> tuple[float, ...]:
        return self.entries.get((tuple(src), tuple(tgt)), (1 / 3,) * 6)

    def prob(self, src: Phrase, tgt: Phrase, direction: str, orientation: str) -> float:
        offset = 0 if direction == FORWARD else 3
        return self.get(src, tgt)[offset + ORIENTATIONS.index(orientation)]

    def dumps(self) -> str:
        return "".join(
            f"{' '.join(s)} ||| {' '.join(t)} ||| {' '.join(f'{x:.6f}' for x in v)}\n"
            for (s, t), v in sorted(self.entries.items()))

    @classmethod
    def loads(cls, text: str) -> "ReorderingModel":
        entries = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            s, t, scores = (part.strip() for part in line.split("|||")[:3])
            entries[(tuple(s.split()), tuple(t.split()))] = tuple(float(x) for x in scores.split())
        return cls(entries)


def train_reordering(events: Iterable, alpha: float = SMOOTHING) -> ReorderingModel:
    """Smoothed relative frequencies of M/S/D per phrase pair and direction.

    ``events`` yields ``(phrase_pair_or_key, forward_label, backward_label)``.
    """
    counts: dict = defaultdict(lambda: [Counter(), Counter()])
    for item, fwd, bwd in events:
        key = item.key if isinstance(item, PhrasePair) else (tuple(item[0]), tuple(item[1]))
        counts[key][0][fwd] += 1
        counts[key][1][bwd] += 1
    entries = {}
    for key, (fc, bc) in counts.items():
        row = []
        for c in (fc, bc):
            n = sum(c.values())
            row += [(c[o] + alpha) / (n + 3 * alpha) for o in ORIENTATIONS]
        entries[key] = tuple(row)
    return ReorderingModel(entries)


def train_phrase_models(pairs: Sequence, alignments: Sequence[AlignmentMatrix],
                        max_len: int = DEFAULT_MAX_LEN, lex: tuple[dict, dict] | None = None):
    """Phrase table and reordering model from a word-aligned corpus."""
    extracted = []
    events = []
    for pair, a in zip(pairs, alignments):
        for pp, fwd, bwd in extract_with_orientations(pair, a, max_len):
            extracted.append(pp)
            events.append((pp, fwd, bwd))
    if lex is None:
        lex = lexical_tables(pairs, alignments)
    return score_table(extracted, lex), train_reordering(events)
