"""Parallel corpus loading, tokenization, cleaning and splitting."""

from __future__ import annotations

import random
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

Tokens = tuple[str, ...]

PUNCT = ".,!?;:"
_PUNCT_RE = re.compile("([" + re.escape(PUNCT) + "])")
_TAG_RE = re.compile(r"<[^<>]*>")

POLISH_LETTERS = "ąćęłńóśźżĄĆĘŁŃÓŚŹŻ"
ASCII_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
ASCII_PUNCT = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~"
DIGITS = "0123456789"

# Letters accepted per language code; codes not listed accept any Latin letter.
ALPHABETS = {
    "pl": frozenset(ASCII_LETTERS + POLISH_LETTERS),
    "en": frozenset(ASCII_LETTERS),
}


class CorpusError(Exception):
    pass


class LineCountMismatch(CorpusError):
    def __init__(self, src_n: int, tgt_n: int):
        super().__init__(f"line counts differ: {src_n} source vs {tgt_n} target")
        self.src_n = src_n
        self.tgt_n = tgt_n


class EncodingError(CorpusError):
    def __init__(self, path: str, line: int):
        super().__init__(f"{path}:{line}: not valid UTF-8")
        self.path = path
        self.line = line


class InsufficientData(CorpusError):
    pass


@dataclass(frozen=True)
class SentencePair:
    src_tokens: Tokens
    tgt_tokens: Tokens
    origin_line: int = 1

    def __post_init__(self):
        object.__setattr__(self, "src_tokens", tuple(self.src_tokens))
        object.__setattr__(self, "tgt_tokens", tuple(self.tgt_tokens))
        if self.origin_line < 1:
            raise ValueError("origin_line must be >= 1")
        for tok in self.src_tokens + self.tgt_tokens:
            if not tok or any(ch.isspace() for ch in tok):
                raise ValueError(f"invalid token {tok!r}")

    @property
    def key(self) -> tuple[Tokens, Tokens]:
        return self.src_tokens, self.tgt_tokens


@dataclass(frozen=True)
class ParallelCorpus:
    pairs: tuple[SentencePair, ...] = ()
    src_lang: str = "pl"
    tgt_lang: str = "en"

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def with_pairs(self, pairs: Iterable[SentencePair]) -> "ParallelCorpus":
        return replace(self, pairs=tuple(pairs))

    @classmethod
    def from_lines(cls, src_lines: Sequence[str], tgt_lines: Sequence[str],
                   src_lang: str = "pl", tgt_lang: str = "en") -> "ParallelCorpus":
        if len(src_lines) != len(tgt_lines):
            raise LineCountMismatch(len(src_lines), len(tgt_lines))
        pairs = [SentencePair(tokenize(s), tokenize(t), n)
                 for n, (s, t) in enumerate(zip(src_lines, tgt_lines), start=1)]
        return cls(tuple(pairs), src_lang, tgt_lang)


@dataclass(frozen=True)
class VocabStats:
    src_unique: int = 0
    tgt_unique: int = 0
    src_total: int = 0
    tgt_total: int = 0
    line_count: int = 0


@dataclass(frozen=True)
class CleaningConfig:
    max_len: int = 80
    len_unit: str = "characters"
    strip_markup: bool = True
    drop_repetitions: bool = True
    drop_nonlanguage_symbols: bool = True
    lowercase: bool = False

    def __post_init__(self):
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        unit = {"chars": "characters", "characters": "characters", "tokens": "tokens"}.get(self.len_unit)
        if unit is None:
            raise ValueError(f"unknown len_unit {self.len_unit!r}")
        object.__setattr__(self, "len_unit", unit)


@dataclass(frozen=True)
class CleaningRecord:
    line: int
    reason: str
    side: str

    def __str__(self):
        return f"{self.line}\t{self.reason}\t{self.side}"


@dataclass
class CleaningLog:
    records: list[CleaningRecord] = field(default_factory=list)

    def add(self, line: int, reason: str, side: str):
        self.records.append(CleaningRecord(line, reason, side))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def dump(self) -> str:
        return "".join(f"{r}\n" for r in self.records)


def _read_lines(path: Path) -> list[str]:
    data = Path(path).read_bytes()
    if not data:
        return []
    raw = data.split(b"\n")
    if raw[-1] == b"":
        raw.pop()
    lines = []
    for n, chunk in enumerate(raw, start=1):
        try:
            lines.append(chunk.decode("utf-8").rstrip("\r"))
        except UnicodeDecodeError:
            raise EncodingError(str(path), n) from None
    return lines


def load_parallel(src_path, tgt_path, src_lang: str = "pl", tgt_lang: str = "en") -> ParallelCorpus:
    """Join line i of both files into pair i (tokenized)."""
    src_lines = _read_lines(src_path)
    tgt_lines = _read_lines(tgt_path)
    return ParallelCorpus.from_lines(src_lines, tgt_lines, src_lang, tgt_lang)


def write_parallel(corpus: ParallelCorpus, src_path, tgt_path):
    Path(src_path).write_text("".join(" ".join(p.src_tokens) + "\n" for p in corpus), encoding="utf-8")
    Path(tgt_path).write_text("".join(" ".join(p.tgt_tokens) + "\n" for p in corpus), encoding="utf-8")


def tokenize(line: str) -> list[str]:
    """Whitespace split with ``.,!?;:`` detached as separate tokens.

    Hyphens and apostrophes stay inside words.

    >>> tokenize("Kupiłem sobie nowy samochód.")
    ['Kupiłem', 'sobie', 'nowy', 'samochód', '.']
    """
    return _PUNCT_RE.sub(r" \1 ", line).split()


def _strip_markup(text: str) -> str:
    # repeat until stable: removing one tag can expose another ("<<b>i>")
    while True:
        stripped = _TAG_RE.sub(" ", text)
        if stripped == text:
            return text
        text = stripped


def _is_allowed_char(ch: str, letters: frozenset | None) -> bool:
    if ch in DIGITS or ch in ASCII_PUNCT:
        return True
    if letters is not None:
        return ch in letters
    return ch.isalpha() and unicodedata.name(ch, "").startswith("LATIN")


def _filter_symbols(tokens: Sequence[str], lang: str) -> list[str]:
    letters = ALPHABETS.get(lang)
    out = []
    for tok in tokens:
        kept = "".join(ch for ch in tok if _is_allowed_char(ch, letters))
        if kept:
            out.append(kept)
    return out


def collapse_repeats(tokens: Sequence[str], min_run: int = 3) -> list[str]:
    """Collapse every run of >= ``min_run`` identical adjacent tokens to one."""
    out: list[str] = []
    i = 0
    while i < len(tokens):
        j = i
        while j < len(tokens) and tokens[j] == tokens[i]:
            j += 1
        run = j - i
        out.extend(tokens[i:i + 1] if run >= min_run else tokens[i:j])
        i = j
    return out


def _clean_side(tokens: Tokens, lang: str, cfg: CleaningConfig) -> list[str]:
    toks = list(tokens)
    if cfg.strip_markup:
        toks = _strip_markup(" ".join(toks)).split()
    if cfg.lowercase:
        toks = [t.lower() for t in toks]
    if cfg.drop_nonlanguage_symbols:
        toks = _filter_symbols(toks, lang)
    if cfg.drop_repetitions:
        toks = collapse_repeats(toks)
    return toks


def _length(tokens: Sequence[str], unit: str) -> int:
    return len(tokens) if unit == "tokens" else len(" ".join(tokens))


def _side_label(src_bad: bool, tgt_bad: bool) -> str:
    return "both" if src_bad and tgt_bad else ("src" if src_bad else "tgt")


def clean(corpus: ParallelCorpus, cfg: CleaningConfig = CleaningConfig()) -> tuple[ParallelCorpus, CleaningLog]:
    """Apply the cleaning rules; returns surviving pairs (in order) and a drop log.

    Length is measured on the space-joined tokens of each side; a pair is
    dropped when either side exceeds ``cfg.max_len``.
    """
    log = CleaningLog()
    kept: list[SentencePair] = []
    previous = None
    for pair in corpus:
        src = _clean_side(pair.src_tokens, corpus.src_lang, cfg)
        tgt = _clean_side(pair.tgt_tokens, corpus.tgt_lang, cfg)
        if not src or not tgt:
            log.add(pair.origin_line, "Empty", _side_label(not src, not tgt))
            continue
        src_long = _length(src, cfg.len_unit) > cfg.max_len
        tgt_long = _length(tgt, cfg.len_unit) > cfg.max_len
        if src_long or tgt_long:
            log.add(pair.origin_line, "TooLong", _side_label(src_long, tgt_long))
            continue
        key = (tuple(src), tuple(tgt))
        if cfg.drop_repetitions and key == previous:
            log.add(pair.origin_line, "Duplicate", "both")
            continue
        previous = key
        kept.append(SentencePair(src, tgt, pair.origin_line))
    return corpus.with_pairs(kept), log


def lowercase(corpus: ParallelCorpus) -> ParallelCorpus:
    return corpus.with_pairs(
        SentencePair([t.lower() for t in p.src_tokens], [t.lower() for t in p.tgt_tokens], p.origin_line)
        for p in corpus)


def vocab_stats(corpus: ParallelCorpus) -> VocabStats:
    src = Counter(t for p in corpus for t in p.src_tokens)
    tgt = Counter(t for p in corpus for t in p.tgt_tokens)
    return VocabStats(len(src), len(tgt), sum(src.values()), sum(tgt.values()), len(corpus))


def split_random(corpus: ParallelCorpus, dev_n: int, test_n: int, seed: int = 0,
                 remove_overlap: bool = True):
    """Random dev/test held out from the corpus; returns ``(train, dev, test)``.

    With ``remove_overlap`` training pairs identical to any dev or test pair
    are removed from train, so held-out sentences never leak into training.
    """
    n = len(corpus)
    if dev_n < 0 or test_n < 0 or dev_n + test_n >= n:
        raise InsufficientData(f"cannot hold out {dev_n}+{test_n} pairs from {n}")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    dev_idx = sorted(order[:dev_n])
    test_idx = sorted(order[dev_n:dev_n + test_n])
    train_idx = sorted(order[dev_n + test_n:])
    dev = [corpus.pairs[i] for i in dev_idx]
    test = [corpus.pairs[i] for i in test_idx]
    train = [corpus.pairs[i] for i in train_idx]
    if remove_overlap:
        held = {p.key for p in dev} | {p.key for p in test}
        train = [p for p in train if p.key not in held]
    return corpus.with_pairs(train), corpus.with_pairs(dev), corpus.with_pairs(test)
