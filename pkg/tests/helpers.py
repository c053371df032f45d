"""Small random model builders shared by the decoder, tuning and acceptance tests."""

import random

from smtbench.decoder import Models
from smtbench.lm import train_kn
from smtbench.phrase import PhraseTable, ReorderingModel

SRC_VOCAB = ("a", "b", "c", "d", "e")
TGT_VOCAB = ("x", "y", "z", "w")


def random_models(seed, with_lm=True, with_reordering=True, max_src=2):
    """A phrase table over a five-word source vocabulary with one or more
    options per span of up to ``max_src`` words, plus optional random
    reordering probabilities and a trigram LM on random target text."""
    rng = random.Random(seed)
    entries = {}
    for w in SRC_VOCAB:
        for t in rng.sample(TGT_VOCAB, rng.randint(1, 2)):
            entries[((w,), (t,))] = _scores(rng)
    for _ in range(6):
        src = tuple(rng.choice(SRC_VOCAB) for _ in range(rng.randint(2, max_src))) if max_src > 1 else None
        if src:
            tgt = tuple(rng.choice(TGT_VOCAB) for _ in range(rng.randint(1, 2)))
            entries[(src, tgt)] = _scores(rng)
    reordering = None
    if with_reordering:
        probs = {}
        for key in entries:
            f = [rng.uniform(0.05, 1.0) for _ in range(3)]
            b = [rng.uniform(0.05, 1.0) for _ in range(3)]
            probs[key] = tuple(x / sum(f) for x in f) + tuple(x / sum(b) for x in b)
        reordering = ReorderingModel(probs)
    lm = None
    if with_lm:
        text = [[rng.choice(TGT_VOCAB) for _ in range(rng.randint(1, 5))] for _ in range(30)]
        lm = train_kn(text, order=3)
    return Models(PhraseTable(entries), reordering, lm)


def _scores(rng):
    return tuple(rng.uniform(0.05, 1.0) for _ in range(4))


def random_sentence(rng, max_len=5, oov_rate=0.0):
    words = []
    for _ in range(rng.randint(1, max_len)):
        words.append("q" if rng.random() < oov_rate else rng.choice(SRC_VOCAB))
    return words
