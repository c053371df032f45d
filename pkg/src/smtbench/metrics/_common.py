from __future__ import annotations

from collections import Counter
from typing import Sequence


class EmptyInput(ValueError):
    pass


def tokens(sentence) -> list[str]:
    return sentence.split() if isinstance(sentence, str) else list(sentence)


def ngrams(words: Sequence[str], n: int) -> Counter:
    return Counter(tuple(words[i:i + n]) for i in range(len(words) - n + 1))


def prepare(candidates, references) -> tuple[list[list[str]], list[list[list[str]]]]:
    """Tokenize a candidate list and its per-sentence reference sets."""
    cands = [tokens(c) for c in candidates]
    refs = []
    for r in references:
        if isinstance(r, str):
            r = [r]
        refs.append([tokens(x) for x in r])
    if not cands:
        raise EmptyInput("no candidates")
    if len(cands) != len(refs):
        raise EmptyInput(f"{len(cands)} candidates but {len(refs)} reference sets")
    if any(not rs for rs in refs):
        raise EmptyInput("sentence without references")
    return cands, refs


def transpose_refs(ref_files: Sequence[Sequence[str]]) -> list[list[str]]:
    """Reference files (one list of lines per file) to per-sentence sets."""
    lengths = {len(f) for f in ref_files}
    if len(lengths) != 1:
        raise EmptyInput("reference files differ in length")
    return [list(lines) for lines in zip(*ref_files)]
