"""Translation edit rate: fewest word edits plus block shifts.

Short sentence pairs get an exact search over shift sequences; longer ones
use the usual greedy shift search, which can overshoot the minimum.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ._common import EmptyInput, tokens

MAX_SHIFT_LEN = 10
EXACT_MAX_LEN = 8
EXACT_BUDGET = 5000


@dataclass
class TerComponents:
    E: int
    W_R: float
    score: float
    shifts: int = 0


def edit_distance(a, b) -> int:
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def apply_shift(words: list, start: int, length: int, dest: int) -> list:
    """Move ``words[start:start+length]`` so it begins at ``dest`` in the result."""
    block = words[start:start + length]
    rest = words[:start] + words[start + length:]
    return rest[:dest] + block + rest[dest:]


def _ref_spans(ref, max_len):
    spans = set()
    for i in range(len(ref)):
        for n in range(1, min(max_len, len(ref) - i) + 1):
            spans.add(tuple(ref[i:i + n]))
    return spans


def shift_edits(hyp, ref, max_len: int = MAX_SHIFT_LEN) -> tuple[int, int]:
    """Greedy shift search; returns ``(shifts, edit distance after shifts)``.

    Each round tries every hypothesis span of up to ``max_len`` words that
    also occurs in the reference, moved to every other position, and applies
    the shift giving the smallest edit distance, as long as it lowers
    shifts + edits. Ties go to the earliest start, shortest span, then
    earliest destination.
    """
    hyp = list(hyp)
    spans = _ref_spans(ref, max_len)
    cur = edit_distance(hyp, ref)
    shifts = 0
    while cur > 0:
        best = None
        for start in range(len(hyp)):
            for length in range(1, min(max_len, len(hyp) - start) + 1):
                if tuple(hyp[start:start + length]) not in spans:
                    break
                for dest in range(len(hyp) - length + 1):
                    if dest == start:
                        continue
                    moved = apply_shift(hyp, start, length, dest)
                    d = edit_distance(moved, ref)
                    if best is None or d < best[0]:
                        best = (d, moved)
        if best is None or best[0] + 1 >= cur:
            break
        cur, hyp = best
        shifts += 1
    return shifts, cur


def _moves(words: tuple, max_len: int):
    n = len(words)
    for start in range(n):
        for length in range(1, min(max_len, n - start) + 1):
            for dest in range(n - length + 1):
                if dest != start:
                    yield tuple(apply_shift(list(words), start, length, dest))


def exact_shift_edits(hyp, ref, upper: tuple[int, int] | None = None, max_len: int = MAX_SHIFT_LEN,
                      budget: int = EXACT_BUDGET) -> tuple[int, int] | None:
    """Fewest ``(shifts, edits)`` over any sequence of block moves.

    Breadth-first over orderings of the hypothesis. Shifts keep the word
    multiset, so its difference to the reference bounds the edits from
    below and stops the search early. Returns None once more than
    ``budget`` orderings would be visited.
    """
    hyp, ref = tuple(hyp), tuple(ref)
    common = sum((Counter(hyp) & Counter(ref)).values())
    floor = max(len(hyp), len(ref)) - common
    best = upper or (0, edit_distance(hyp, ref))
    frontier, seen = [hyp], {hyp}
    depth = 0
    while frontier and depth + 1 + floor < sum(best):
        depth += 1
        nxt = []
        for state in frontier:
            for moved in _moves(state, max_len):
                if moved in seen:
                    continue
                seen.add(moved)
                if len(seen) > budget:
                    return None
                d = edit_distance(moved, ref)
                if depth + d < sum(best):
                    best = (depth, d)
                nxt.append(moved)
        frontier = nxt
    return best


def min_edits(hyp, ref, max_len: int = MAX_SHIFT_LEN, exact_max_len: int = EXACT_MAX_LEN) -> tuple[int, int]:
    """Greedy ``(shifts, edits)``, replaced by the exact minimum when both
    sides have at most ``exact_max_len`` words and the search fits its budget."""
    greedy = shift_edits(hyp, ref, max_len)
    if max(len(hyp), len(ref)) > exact_max_len or sum(greedy) <= 1:
        return greedy
    return exact_shift_edits(hyp, ref, greedy, max_len) or greedy


def ter(cand, refs, max_len: int = MAX_SHIFT_LEN, exact_max_len: int = EXACT_MAX_LEN) -> TerComponents:
    """E is the minimum edit count over references; W_R the mean reference length.

    ``exact_max_len=0`` gives plain greedy shifting throughout.
    """
    if isinstance(refs, str):
        refs = [refs]
    refs = [tokens(r) for r in refs]
    if not refs:
        raise EmptyInput("no references")
    hyp = tokens(cand)
    best = None
    for ref in refs:
        s, d = min_edits(hyp, ref, max_len, exact_max_len)
        if best is None or s + d < best[0] + best[1]:
            best = (s, d)
    w_r = sum(len(r) for r in refs) / len(refs)
    e = best[0] + best[1]
    score = e / w_r if w_r else (0.0 if e == 0 else float("inf"))
    return TerComponents(e, w_r, score, best[0])


def ter_corpus(candidates, references, max_len: int = MAX_SHIFT_LEN,
               exact_max_len: int = EXACT_MAX_LEN) -> TerComponents:
    """Total edits over total average reference length."""
    if not candidates or len(candidates) != len(references):
        raise EmptyInput("candidate and reference counts differ or are zero")
    e = shifts = 0
    w = 0.0
    for cand, refs in zip(candidates, references):
        comp = ter(cand, refs, max_len, exact_max_len)
        e += comp.E
        w += comp.W_R
        shifts += comp.shifts
    return TerComponents(e, w, e / w if w else 0.0, shifts)
