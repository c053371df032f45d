import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import random_models, random_sentence
from smtbench.decoder import FEATURES, FeatureWeights, Models, decode
from smtbench.metrics import bleu
from smtbench.metrics.bleu import sentence_stats
from smtbench.phrase import PhraseTable
from smtbench.tuning import (EmptyDev, PoolEntry, _upper_envelope, line_search, optimize, pool_bleu,
                             tune_weights)

P_TS = FEATURES.index("p_ts")
LEX_TS = FEATURES.index("lex_ts")


def threshold_models():
    # x wins on p_ts, y wins on lex_ts by the same log ratio
    return Models(PhraseTable({
        (("s",), ("x",)): (0.9, 0.5, 0.1, 0.5),
        (("s",), ("y",)): (0.1, 0.5, 0.9, 0.5),
    }))


def threshold_pool():
    entries = []
    for tgt, scores in (("x", (0.9, 0.5, 0.1, 0.5)), ("y", (0.1, 0.5, 0.9, 0.5))):
        feats = [0.0] * len(FEATURES)
        for k, value in enumerate(scores):
            feats[k] = math.log(value)
        feats[FEATURES.index("word_penalty")] = -1.0
        entries.append(PoolEntry((tgt,), tuple(feats), sentence_stats([tgt], [["y"]])))
    return [entries]


def test_threshold_pool_starts_wrong():
    pools = threshold_pool()
    assert pool_bleu(pools, FeatureWeights().vector()) == 0.0


def test_line_search_finds_the_breakpoint_side():
    pools = threshold_pool()
    v = FeatureWeights().vector()
    # y overtakes x once the lex_ts weight passes the p_ts weight of 0.2
    value, score = line_search(pools, v, LEX_TS)
    assert score == 1.0 and value > 0.2
    value, score = line_search(pools, v, P_TS)
    assert score == 1.0 and value < 0.2


def test_line_search_keeps_current_value_when_optimal():
    pools = threshold_pool()
    v = FeatureWeights(lex_ts=0.7).vector()
    assert line_search(pools, v, LEX_TS) == (0.7, 1.0)


def test_optimize_reaches_the_reference():
    weights, score = optimize(threshold_pool(), FeatureWeights())
    assert score == 1.0
    assert decode(["s"], threshold_models(), weights).translation == ["y"]


def test_tune_weights_on_threshold_instance():
    weights = tune_weights([["s"]], [[["y"]]], threshold_models(), FeatureWeights(), rounds=2, nbest=5)
    assert decode(["s"], threshold_models(), weights).translation == ["y"]
    assert weights.oov == 1.0


def test_zero_rounds_returns_init():
    init = FeatureWeights(lm=0.9)
    assert tune_weights([["s"]], [[["y"]]], threshold_models(), init, rounds=0) is init


def test_empty_dev():
    with pytest.raises(EmptyDev):
        tune_weights([], [], threshold_models(), FeatureWeights())


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=8))
def test_upper_envelope_matches_pointwise_max(lines):
    indexed = [(s, b, k) for k, (s, b) in enumerate(lines)]
    starts, idxs = _upper_envelope(indexed)
    assert starts[0] == -math.inf
    assert all(a < b for a, b in zip(starts, starts[1:]))
    bounds = starts[1:] + [math.inf]
    for lo, hi, k in zip(starts, bounds, idxs):
        lo_f = -50.0 if lo == -math.inf else lo
        hi_f = 50.0 if hi == math.inf else hi
        if hi_f - lo_f < 1e-6:
            continue
        x = (lo_f + hi_f) / 2
        best = max(s * x + b for s, b in lines)
        assert lines[k][0] * x + lines[k][1] == pytest.approx(best, abs=1e-9)


def _dev_set(seed, n=6):
    rng = random.Random(seed)
    models = random_models(seed)
    src = [random_sentence(rng, max_len=4) for _ in range(n)]
    refs = [[decode(s, models, FeatureWeights(**{f: rng.uniform(-1, 1) for f in FEATURES})).translation]
            for s in src]
    return models, src, refs


def _dev_bleu(models, src, refs, weights):
    outputs = [decode(s, models, weights).translation for s in src]
    return bleu(outputs, refs).score


@pytest.mark.parametrize("seed", range(4))
def test_tuning_never_ends_below_init(seed):
    models, src, refs = _dev_set(seed)
    init = FeatureWeights()
    tuned = tune_weights(src, refs, models, init, rounds=3, seed=seed, nbest=10)
    assert _dev_bleu(models, src, refs, tuned) >= _dev_bleu(models, src, refs, init) - 1e-12


def test_tuning_is_deterministic():
    models, src, refs = _dev_set(11)
    a = tune_weights(src, refs, models, FeatureWeights(), rounds=2, seed=3, nbest=10)
    b = tune_weights(src, refs, models, FeatureWeights(), rounds=2, seed=3, nbest=10)
    assert a == b


def test_tuning_log_reports_rounds():
    lines = []
    tune_weights([["s"]], [[["y"]]], threshold_models(), FeatureWeights(), rounds=3, nbest=5, log=lines.append)
    assert lines[0].startswith("round 0: dev BLEU")
    # the second round already reaches 1.0, the third finds no gain and stops
    assert len(lines) == 3
