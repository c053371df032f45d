"""Interpolated Kneser-Ney n-gram language model with ARPA serialization.

Probabilities are log10 throughout. The trained model is stored in back-off
form: every seen n-gram carries its full interpolated probability and every
seen context its interpolation weight, which makes ARPA lookup exact.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

BOS, EOS, UNK = "<s>", "</s>", "<unk>"
DEFAULT_DISCOUNT = 0.75
NO_PROB = -99.0

NGram = tuple[str, ...]


class LMError(Exception):
    pass


class EmptyCorpus(LMError):
    pass


class DegenerateCounts(LMError):
    def __init__(self, order: int):
        super().__init__(f"no {order}-grams in training data")
        self.order = order


class MalformedArpa(LMError):
    def __init__(self, line: int, message: str = ""):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class NGramModel:
    order: int
    vocab: tuple[str, ...]
    prob: dict[NGram, float]
    backoff: dict[NGram, float]
    discounts: tuple[float, ...] = ()
    _vocab_set: frozenset = field(init=False, repr=False, compare=False)
    _max_cache: dict | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        self._vocab_set = frozenset(self.vocab)

    def __contains__(self, word: str) -> bool:
        return word in self._vocab_set

    @property
    def predictable(self) -> list[str]:
        """Words the model can emit (everything except ``<s>``)."""
        return [w for w in self.vocab if w != BOS]

    def map_word(self, word: str) -> str:
        return word if word in self._vocab_set else UNK

    def contexts(self) -> list[NGram]:
        """Every context with its own distribution, including the empty one."""
        return [()] + sorted(h for h in self.backoff if h[-1] != EOS)

    def logprob(self, context: Sequence[str], word: str) -> float:
        return logprob(self, context, word)

    def score_word(self, state: NGram, word: str) -> tuple[NGram, float]:
        """Advance an LM state (last order-1 words) by one word."""
        w = self.map_word(word)
        lp = logprob(self, state, w)
        new_state = (state + (w,))[-(self.order - 1):] if self.order > 1 else ()
        return new_state, lp

    def begin_state(self) -> NGram:
        return (BOS,) if self.order > 1 else ()

    def sentence_logprob(self, words: Sequence[str], eos: bool = True) -> float:
        state = self.begin_state()
        total = 0.0
        for w in list(words) + ([EOS] if eos else []):
            state, lp = self.score_word(state, w)
            total += lp
        return total

    def max_logprob(self, word: str) -> float:
        """Upper bound on ``logprob(ctx, word)`` over all contexts."""
        if self._max_cache is None:
            best: dict[str, float] = {}
            for g, lp in self.prob.items():
                if lp > best.get(g[-1], -math.inf):
                    best[g[-1]] = lp
            # positive back-off weights (possible in foreign ARPA files) can lift a path
            slack = max([0.0] + list(self.backoff.values())) * (self.order - 1)
            self._max_cache = {w: lp + slack for w, lp in best.items()}
        return self._max_cache[self.map_word(word)]


def _pad(sentence: Sequence[str]) -> list[str]:
    return [BOS] + list(sentence) + [EOS]


def _estimate_discount(counts: Counter) -> float:
    n1 = sum(1 for c in counts.values() if c == 1)
    n2 = sum(1 for c in counts.values() if c == 2)
    if n1 == 0 or n2 == 0:
        return DEFAULT_DISCOUNT
    return n1 / (n1 + 2 * n2)


def kn_counts(sentences: Sequence[Sequence[str]], order: int) -> list[Counter]:
    """Per-order counts used by Kneser-Ney, index 0 = unigrams.

    The highest order and n-grams starting with ``<s>`` keep raw counts;
    the rest use continuation counts (number of distinct left neighbours).
    """
    raw = [Counter() for _ in range(order)]
    for sent in sentences:
        padded = _pad(sent)
        for n in range(1, order + 1):
            for i in range(len(padded) - n + 1):
                g = tuple(padded[i:i + n])
                if g != (BOS,):
                    raw[n - 1][g] += 1
    counts = [Counter() for _ in range(order)]
    counts[order - 1] = raw[order - 1]
    for n in range(order - 1, 0, -1):
        left = defaultdict(set)
        for g in raw[n]:
            left[g[1:]].add(g[0])
        for g, c in raw[n - 1].items():
            counts[n - 1][g] = c if g[0] == BOS else len(left[g])
    return counts


def train_kn(sentences: Iterable[Sequence[str]], order: int = 5, discount=None,
             unk_singletons: bool = False) -> NGramModel:
    """Train an interpolated Kneser-Ney model.

    ``discount`` overrides the counts-of-counts estimate: a float for every
    order or a sequence with one value per order. With ``unk_singletons``
    words seen once are mapped to ``<unk>`` before counting.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    sents = [list(s) for s in sentences]
    if not sents:
        raise EmptyCorpus("no training sentences")
    if unk_singletons:
        freq = Counter(w for s in sents for w in s)
        sents = [[w if freq[w] > 1 else UNK for w in s] for s in sents]

    counts = kn_counts(sents, order)
    for n, c in enumerate(counts, start=1):
        if not c:
            raise DegenerateCounts(n)
    if discount is None:
        discounts = tuple(_estimate_discount(c) for c in counts)
    elif isinstance(discount, (int, float)):
        discounts = (float(discount),) * order
    else:
        discounts = tuple(float(d) for d in discount)
        if len(discounts) != order:
            raise ValueError("need one discount per order")

    vocab = sorted({w for s in sents for w in s} | {BOS, EOS, UNK})
    predictable = [w for w in vocab if w != BOS]
    model = NGramModel(order, tuple(vocab), {}, {}, discounts)

    d1 = discounts[0]
    total = sum(counts[0].values())
    gamma = d1 * len(counts[0]) / total
    for w in predictable:
        p = max(counts[0].get((w,), 0) - d1, 0.0) / total + gamma / len(predictable)
        model.prob[(w,)] = math.log10(p)
    model.prob[(BOS,)] = NO_PROB

    for n in range(2, order + 1):
        dn = discounts[n - 1]
        ctx_total: Counter = Counter()
        ctx_types: Counter = Counter()
        for g, c in counts[n - 1].items():
            ctx_total[g[:-1]] += c
            ctx_types[g[:-1]] += 1
        for h in sorted(ctx_total):
            model.backoff[h] = math.log10(dn * ctx_types[h] / ctx_total[h])
        new_probs = {}
        for g in sorted(counts[n - 1]):
            h = g[:-1]
            lower = 10 ** logprob(model, h[1:], g[-1])
            gamma_h = dn * ctx_types[h] / ctx_total[h]
            new_probs[g] = math.log10((counts[n - 1][g] - dn) / ctx_total[h] + gamma_h * lower)
        model.prob.update(new_probs)
    return model


def logprob(model: NGramModel, context: Sequence[str], word: str) -> float:
    """log10 P(word | context) by back-off lookup; OOV words score as ``<unk>``."""
    w = model.map_word(word)
    ctx = tuple(model.map_word(c) for c in context)
    ctx = ctx[-(model.order - 1):] if model.order > 1 else ()
    total = 0.0
    while True:
        lp = model.prob.get(ctx + (w,))
        if lp is not None:
            return total + lp
        if not ctx:
            raise LMError(f"word {w!r} missing from unigram table")
        total += model.backoff.get(ctx, 0.0)
        ctx = ctx[1:]


def perplexity(model: NGramModel, sentences: Iterable[Sequence[str]]) -> float:
    """10 ** (-mean log10 prob per token), ``</s>`` included."""
    total = 0.0
    tokens = 0
    for sent in sentences:
        total += model.sentence_logprob(sent)
        tokens += len(sent) + 1
    if tokens == 0:
        raise EmptyCorpus("nothing to evaluate")
    return 10 ** (-total / tokens)


def save_arpa(model: NGramModel, path) -> None:
    Path(path).write_text(dumps_arpa(model), encoding="utf-8")


def dumps_arpa(model: NGramModel) -> str:
    by_order: dict[int, list[NGram]] = defaultdict(list)
    for g in model.prob:
        by_order[len(g)].append(g)
    lines = ["", "\\data\\"]
    for n in range(1, model.order + 1):
        lines.append(f"ngram {n}={len(by_order[n])}")
    for n in range(1, model.order + 1):
        lines += ["", f"\\{n}-grams:"]
        for g in sorted(by_order[n]):
            fields = [f"{model.prob[g]:.4f}", " ".join(g)]
            if n < model.order:
                fields.append(f"{model.backoff.get(g, 0.0):.4f}")
            lines.append("\t".join(fields))
    lines += ["", "\\end\\", ""]
    return "\n".join(lines)


def load_arpa(path) -> NGramModel:
    return loads_arpa(Path(path).read_text(encoding="utf-8"))


def loads_arpa(text: str) -> NGramModel:
    lines = text.split("\n")
    i = 0

    def skip_blank():
        nonlocal i
        while i < len(lines) and not lines[i].strip():
            i += 1

    skip_blank()
    if i >= len(lines) or lines[i].strip() != "\\data\\":
        raise MalformedArpa(i + 1, "expected \\data\\")
    i += 1
    expected: dict[int, int] = {}
    while i < len(lines) and lines[i].strip().startswith("ngram "):
        try:
            n, c = lines[i].strip()[6:].split("=")
            expected[int(n)] = int(c)
        except ValueError:
            raise MalformedArpa(i + 1, "bad ngram count line") from None
        i += 1
    if not expected:
        raise MalformedArpa(i + 1, "no ngram counts")
    order = max(expected)
    prob: dict[NGram, float] = {}
    backoff: dict[NGram, float] = {}
    for n in range(1, order + 1):
        skip_blank()
        if i >= len(lines) or lines[i].strip() != f"\\{n}-grams:":
            raise MalformedArpa(i + 1, f"expected \\{n}-grams:")
        i += 1
        for _ in range(expected.get(n, 0)):
            if i >= len(lines) or not lines[i].strip():
                raise MalformedArpa(i + 1, f"truncated {n}-gram section")
            parts = lines[i].split("\t") if "\t" in lines[i] else lines[i].split()
            try:
                if "\t" in lines[i]:
                    lp, words = float(parts[0]), tuple(parts[1].split())
                    bo = float(parts[2]) if len(parts) > 2 else None
                else:
                    lp, words = float(parts[0]), tuple(parts[1:1 + n])
                    bo = float(parts[1 + n]) if len(parts) > 1 + n else None
            except (ValueError, IndexError):
                raise MalformedArpa(i + 1, "bad n-gram entry") from None
            if len(words) != n:
                raise MalformedArpa(i + 1, f"expected {n} words")
            prob[words] = lp
            if bo is not None:
                backoff[words] = bo
            i += 1
    skip_blank()
    if i >= len(lines) or lines[i].strip() != "\\end\\":
        raise MalformedArpa(i + 1, "expected \\end\\")
    vocab = sorted(g[0] for g in prob if len(g) == 1)
    if UNK not in vocab:
        vocab.append(UNK)
        prob[(UNK,)] = NO_PROB
        vocab.sort()
    return NGramModel(order, tuple(vocab), prob, backoff)
