"""Phrase-based stack decoder with a log-linear model.

Features (natural-log domain, so a weighted sum is a log score):

    p_ts p_st lex_ts lex_st   phrase translation and lexical weights
    lm                        target language model
    ro_fm ro_fs ro_fd         forward lexicalized reordering, per orientation
    ro_bm ro_bs ro_bd         backward lexicalized reordering, per orientation
    distortion                minus the source jump distance
    word_penalty              minus the number of target words
    oov                       log(1e-10) per copied-through source word
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Sequence

from .lm import EOS, NGramModel
from .phrase import BACKWARD, FORWARD, ORIENTATIONS, PhraseTable, ReorderingModel, span_orientation

LN10 = math.log(10)
OOV_LOGPROB = math.log(1e-10)

FEATURES = ("p_ts", "p_st", "lex_ts", "lex_st", "lm",
            "ro_fm", "ro_fs", "ro_fd", "ro_bm", "ro_bs", "ro_bd",
            "distortion", "word_penalty", "oov")
TUNABLE = FEATURES[:-1]


@dataclass
class FeatureWeights:
    """Log-linear weights; the OOV weight stays fixed at 1."""

    p_ts: float = 0.2
    p_st: float = 0.2
    lex_ts: float = 0.2
    lex_st: float = 0.2
    lm: float = 0.5
    ro_fm: float = 0.3
    ro_fs: float = 0.3
    ro_fd: float = 0.3
    ro_bm: float = 0.3
    ro_bs: float = 0.3
    ro_bd: float = 0.3
    distortion: float = 0.3
    word_penalty: float = 1.0
    oov: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            value = float(getattr(self, f.name))
            if not math.isfinite(value):
                raise ValueError(f"weight {f.name} must be finite")
            setattr(self, f.name, value)

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in FEATURES}

    def vector(self) -> list[float]:
        return [getattr(self, name) for name in FEATURES]

    @classmethod
    def from_dict(cls, values: dict) -> "FeatureWeights":
        unknown = set(values) - set(FEATURES)
        if unknown:
            raise ValueError(f"unknown features: {sorted(unknown)}")
        return cls(**values)

    def scaled(self, factor: float) -> "FeatureWeights":
        return FeatureWeights(**{k: v * factor for k, v in self.as_dict().items()})

    def dumps(self) -> str:
        return "".join(f"{k} {v!r}\n" for k, v in self.as_dict().items())

    @classmethod
    def loads(cls, text: str) -> "FeatureWeights":
        values = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                key, value = line.replace("=", " ").split()
                values[key] = float(value)
        return cls.from_dict(values)


@dataclass
class Models:
    phrase_table: PhraseTable
    reordering: ReorderingModel | None = None
    lm: NGramModel | None = None


@dataclass(frozen=True)
class TranslationOption:
    span: tuple[int, int]
    src: tuple[str, ...]
    tgt: tuple[str, ...]
    scores: tuple[float, float, float, float]
    oov: bool = False

    def local_features(self) -> dict[str, float]:
        p_ts, p_st, lex_ts, lex_st = (math.log(x) for x in self.scores)
        return {"p_ts": p_ts, "p_st": p_st, "lex_ts": lex_ts, "lex_st": lex_st,
                "word_penalty": -float(len(self.tgt)), "oov": OOV_LOGPROB if self.oov else 0.0}


def collect_options(sentence: Sequence[str], models: Models, weights: FeatureWeights,
                    ttable_limit: int | None = 20) -> dict[tuple[int, int], list[TranslationOption]]:
    """Translation options per source span.

    A word without any single-word option is copied through as an OOV
    option so that every sentence has at least one full derivation. With
    ``ttable_limit`` only that many best options (by weighted local score)
    are kept per span.
    """
    n = len(sentence)
    table = models.phrase_table
    max_len = max(table.max_src_len, 1)
    options: dict[tuple[int, int], list[TranslationOption]] = {}
    for i in range(n):
        for j in range(i, min(n, i + max_len)):
            src = tuple(sentence[i:j + 1])
            opts = [TranslationOption((i, j), src, tgt, scores) for tgt, scores in table.options(src)]
            if ttable_limit is not None and len(opts) > ttable_limit:
                opts.sort(key=lambda o: -_weighted(o.local_features(), weights))
                opts = opts[:ttable_limit]
            if opts:
                options[(i, j)] = opts
        if (i, i) not in options:
            options[(i, i)] = [TranslationOption((i, i), (sentence[i],), (sentence[i],), (1.0,) * 4, oov=True)]
    return options


def _weighted(feats: dict[str, float], weights: FeatureWeights) -> float:
    return sum(getattr(weights, k) * v for k, v in feats.items())


def _reordering_probs(models: Models, opt: TranslationOption) -> tuple[float, ...]:
    if models.reordering is None:
        return (1 / 3,) * 6
    return models.reordering.get(opt.src, opt.tgt)


def score_hypothesis(derivation: Sequence[TranslationOption], sentence_len: int, models: Models,
                     weights: FeatureWeights) -> dict[str, float]:
    """Feature breakdown of a complete derivation (options in target order).

    Recomputed from scratch; ``total`` is the weighted sum of the features.
    """
    feats = dict.fromkeys(FEATURES, 0.0)
    prev_span = (-1, -1)
    for k, opt in enumerate(derivation):
        for name, value in opt.local_features().items():
            feats[name] += value
        feats["distortion"] -= abs(opt.span[0] - prev_span[1] - 1)
        fwd = span_orientation(prev_span, opt.span)
        feats["ro_f" + fwd.lower()] += math.log(_reordering_probs(models, opt)[ORIENTATIONS.index(fwd)])
        next_span = derivation[k + 1].span if k + 1 < len(derivation) else (sentence_len, sentence_len)
        bwd = span_orientation(opt.span, next_span)
        feats["ro_b" + bwd.lower()] += math.log(_reordering_probs(models, opt)[3 + ORIENTATIONS.index(bwd)])
        prev_span = opt.span
    if models.lm is not None:
        words = [w for opt in derivation for w in opt.tgt]
        feats["lm"] = models.lm.sentence_logprob(words) * LN10
    feats["total"] = _weighted(feats, weights)
    return feats


@dataclass(eq=False)
class Hypothesis:
    id: int
    coverage: int
    last_span: tuple[int, int]
    lm_state: tuple
    last_option: TranslationOption | None
    score: float
    future_cost: float
    back: tuple | None = None
    # (previous hypothesis, option, score delta) for every arc, recombined ones included
    arcs: list = field(default_factory=list)

    @property
    def total(self) -> float:
        return self.score + self.future_cost

    def derivation(self) -> list[TranslationOption]:
        out = []
        h = self
        while h.back is not None:
            h, opt = h.back
            out.append(opt)
        return out[::-1]


@dataclass
class NBestEntry:
    translation: list[str]
    derivation: list[TranslationOption]
    features: dict[str, float]
    total: float


@dataclass
class DecodeResult:
    translation: list[str]
    score: float
    derivation: list[TranslationOption]
    nbest: list[NBestEntry] = field(default_factory=list)
    expanded: list[Hypothesis] = field(default_factory=list)


def _future_table(sentence, options, models, weights, mode):
    n = len(sentence)
    lm = models.lm
    best = [[-math.inf] * n for _ in range(n)]
    for (i, j), opts in options.items():
        for opt in opts:
            s = _weighted(opt.local_features(), weights)
            if lm is not None and weights.lm != 0:
                if mode == "optimistic":
                    s += weights.lm * LN10 * sum(lm.max_logprob(w) for w in opt.tgt)
                else:
                    state = ()
                    for w in opt.tgt:
                        state, lp = lm.score_word(state, w)
                        s += weights.lm * LN10 * lp
            best[i][j] = max(best[i][j], s)
    for length in range(2, n + 1):
        for i in range(n - length + 1):
            j = i + length - 1
            for k in range(i, j):
                best[i][j] = max(best[i][j], best[i][k] + best[k + 1][j])
    return best


def _future_cost(coverage: int, n: int, table, end_bound: float) -> float:
    total = end_bound if coverage != (1 << n) - 1 or n == 0 else 0.0
    i = 0
    while i < n:
        if coverage >> i & 1:
            i += 1
            continue
        j = i
        while j + 1 < n and not coverage >> (j + 1) & 1:
            j += 1
        total += table[i][j]
        i = j + 1
    return total


def decode(sentence: Sequence[str], models: Models, weights: FeatureWeights | None = None,
           beam_size: int | None = 100, distortion_limit: int | None = 6, nbest: int = 0,
           ttable_limit: int | None = 20, future: str = "unigram", trace: bool = False) -> DecodeResult:
    """Translate one tokenized sentence.

    ``beam_size=None`` keeps every hypothesis and ``distortion_limit=None``
    allows any jump, which makes the search exact. ``future`` selects the
    LM part of the future-cost estimate: ``"unigram"`` scores each phrase
    without context, ``"optimistic"`` uses a per-word upper bound so the
    estimate never undershoots the best completion (for non-negative LM,
    reordering and distortion weights).
    """
    weights = weights or FeatureWeights()
    sentence = list(sentence)
    n = len(sentence)
    lm = models.lm
    options = collect_options(sentence, models, weights, ttable_limit)
    all_options = [o for span in sorted(options) for o in options[span]]
    fc_table = _future_table(sentence, options, models, weights, future)
    end_bound = 0.0
    if future == "optimistic" and lm is not None:
        end_bound = weights.lm * LN10 * lm.max_logprob(EOS)
    full = (1 << n) - 1

    def end_cost(state, last_opt):
        s = 0.0
        if lm is not None:
            s += weights.lm * LN10 * lm.logprob(state, EOS)
        if last_opt is not None:
            bwd = span_orientation(last_opt.span, (n, n))
            p = _reordering_probs(models, last_opt)[3 + ORIENTATIONS.index(bwd)]
            s += getattr(weights, "ro_b" + bwd.lower()) * math.log(p)
        return s

    # per-option constants: coverage mask, weighted local score, weighted reordering logs
    prepared = []
    for opt in all_options:
        i, j = opt.span
        probs = _reordering_probs(models, opt)
        fwd = tuple(getattr(weights, "ro_f" + o.lower()) * math.log(probs[k]) for k, o in enumerate(ORIENTATIONS))
        bwd = tuple(getattr(weights, "ro_b" + o.lower()) * math.log(probs[3 + k]) for k, o in enumerate(ORIENTATIONS))
        mask = ((1 << (j - i + 1)) - 1) << i
        prepared.append((opt, i, j, mask, _weighted(opt.local_features(), weights), fwd, bwd))
    bwd_logs = {id(p[0]): p[6] for p in prepared}
    lm_weight = weights.lm * LN10

    counter = 0
    root_state = lm.begin_state() if lm is not None else ()
    root = Hypothesis(counter, 0, (-1, -1), root_state, None, 0.0,
                      _future_cost(0, n, fc_table, end_bound))
    if n == 0:
        root.score = end_cost(root_state, None)
        root.future_cost = 0.0
    stacks: list[dict] = [dict() for _ in range(n + 1)]
    stacks[0][None] = root
    expanded = []
    fc_cache: dict[int, float] = {}
    lm_cache: dict[tuple, tuple] = {}

    for k in range(n):
        hyps = sorted(stacks[k].values(), key=lambda h: (-h.total, h.id))
        if beam_size is not None:
            hyps = hyps[:beam_size]
        for h in hyps:
            if trace:
                expanded.append(h)
            prev_bwd = bwd_logs[id(h.last_option)] if h.last_option is not None else None
            last_start, last_end = h.last_span
            for opt, i, j, mask, local, fwd_logs, _ in prepared:
                if h.coverage & mask:
                    continue
                jump = abs(i - last_end - 1)
                coverage = h.coverage | mask
                if distortion_limit is not None:
                    if jump > distortion_limit:
                        continue
                    gap = next((p for p in range(n) if not coverage >> p & 1), None)
                    if gap is not None and abs(gap - j - 1) > distortion_limit:
                        continue
                # orientation index: 0 monotone, 1 swap, 2 discontinuous
                o = 0 if i == last_end + 1 else (1 if j == last_start - 1 else 2)
                delta = local - weights.distortion * jump + fwd_logs[o]
                if prev_bwd is not None:
                    delta += prev_bwd[o]
                state = h.lm_state
                if lm is not None:
                    cached = lm_cache.get((state, opt.tgt))
                    if cached is None:
                        lm_sum = 0.0
                        for w in opt.tgt:
                            state, lp = lm.score_word(state, w)
                            lm_sum += lp
                        cached = lm_cache[(h.lm_state, opt.tgt)] = (state, lm_sum)
                    state, lm_sum = cached
                    delta += lm_weight * lm_sum
                if coverage == full:
                    delta += end_cost(state, opt)
                score = h.score + delta
                key = (coverage, opt.span, state, opt.src, opt.tgt)
                stack = stacks[k + j - i + 1]
                existing = stack.get(key)
                if existing is None:
                    counter += 1
                    fc = fc_cache.get(coverage)
                    if fc is None:
                        fc = fc_cache[coverage] = _future_cost(coverage, n, fc_table, end_bound)
                    new = Hypothesis(counter, coverage, opt.span, state, opt, score, fc, (h, opt))
                    new.arcs.append((h, opt, delta))
                    stack[key] = new
                else:
                    existing.arcs.append((h, opt, delta))
                    if score > existing.score:
                        existing.score = score
                        existing.back = (h, opt)

    finals = sorted(stacks[n].values(), key=lambda h: (-h.score, h.id))
    if not finals:
        if distortion_limit is not None:
            return decode(sentence, models, weights, beam_size, None, nbest, ttable_limit, future, trace)
        raise RuntimeError("search produced no complete hypothesis")
    best = finals[0]
    derivation = best.derivation()
    result = DecodeResult([w for o in derivation for w in o.tgt], best.score, derivation)
    if trace:
        result.expanded = expanded
    if nbest > 0:
        result.nbest = _nbest(stacks, finals, nbest, n, models, weights)
    return result


def _nbest(stacks, finals, k, n, models, weights) -> list[NBestEntry]:
    # k best paths per node over the recombination lattice, in stack order
    kbest: dict[int, list] = {}
    for stack in stacks:
        for h in sorted(stack.values(), key=lambda x: x.id):
            if not h.arcs:
                kbest[h.id] = [(h.score, None)]
                continue
            cands = []
            for prev, opt, delta in h.arcs:
                for rank, (s, _) in enumerate(kbest.get(prev.id, [])):
                    cands.append((s + delta, (prev, opt, rank)))
            cands.sort(key=lambda c: (-c[0], c[1][0].id, c[1][2]))
            kbest[h.id] = cands[:k]
    pool = []
    for h in finals:
        for rank, (s, _) in enumerate(kbest[h.id]):
            pool.append((s, h.id, rank, h))
    pool.sort(key=lambda x: (-x[0], x[1], x[2]))
    entries = []
    for s, _, rank, h in pool[:k]:
        derivation = []
        node, r = h, rank
        while True:
            _, ptr = kbest[node.id][r]
            if ptr is None:
                break
            prev, opt, r = ptr
            derivation.append(opt)
            node = prev
        derivation.reverse()
        feats = score_hypothesis(derivation, n, models, weights)
        entries.append(NBestEntry([w for o in derivation for w in o.tgt], derivation, feats, s))
    return entries


def format_nbest(sent_id: int, entries: Sequence[NBestEntry]) -> str:
    lines = []
    for e in entries:
        feats = " ".join(f"{name}:{e.features[name]:.6f}" for name in FEATURES)
        lines.append(f"{sent_id} ||| {' '.join(e.translation)} ||| {feats} ||| {e.total:.6f}")
    return "".join(line + "\n" for line in lines)
