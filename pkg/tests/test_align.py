import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ibm1_oracle
from smtbench.align import (AlignmentMatrix, DimensionMismatch, EmptyCorpus, SymmetrizationHeuristic,
                            TranslationTable, align_corpus, link_posteriors, read_alignments, symmetrize,
                            train_ibm1, viterbi_align, write_alignments)

CLASSIC = [(("das", "haus"), ("the", "house")), (("das", "buch"), ("the", "book"))]
HEURISTICS = list(SymmetrizationHeuristic)


def test_classic_corpus_matches_oracle():
    table = train_ibm1(CLASSIC, iterations=20)
    assert table.prob("das", "the") > 0.9
    oracle = ibm1_oracle(CLASSIC, 20)
    assert set(table.t) == set(oracle)
    for key, p in oracle.items():
        assert table.t[key] == pytest.approx(p, abs=1e-9)
    assert table.prob("das", "the") == pytest.approx(0.96613, abs=1e-5)


def test_one_iteration_by_hand_without_null():
    # das co-occurs with the, house, book: expected counts 1, 1/2, 1/2 over total 2
    table = train_ibm1(CLASSIC, iterations=1, use_null=False)
    assert table.prob("das", "the") == pytest.approx(0.5, abs=1e-12)
    assert table.prob("das", "house") == pytest.approx(0.25, abs=1e-12)
    assert table.prob("haus", "house") == pytest.approx(0.5, abs=1e-12)


def test_single_pair():
    with_null = train_ibm1([(("a",), ("x",))], iterations=1)
    without = train_ibm1([(("a",), ("x",))], iterations=1, use_null=False)
    # each source row normalizes over its only target word
    assert with_null.prob("a", "x") == 1.0
    assert without.prob("a", "x") == 1.0
    # the half shows up as the link posterior against NULL
    [post] = link_posteriors(with_null, ("a",), ("x",))
    assert post == {0: 0.5, -1: 0.5}


def test_deterministic():
    assert train_ibm1(CLASSIC, 7).t == train_ibm1(CLASSIC, 7).t


def random_pairs(rng, n):
    src_v, tgt_v = "abcdef", "uvwxyz"
    return [(tuple(rng.choice(src_v) for _ in range(rng.randint(1, 5))),
             tuple(rng.choice(tgt_v) for _ in range(rng.randint(1, 5)))) for _ in range(n)]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.booleans())
def test_loglik_non_decreasing_and_rows_normalized(seed, use_null):
    table = train_ibm1(random_pairs(random.Random(seed), 12), iterations=6, use_null=use_null)
    ll = table.loglik
    assert len(ll) == 7
    assert all(b >= a - 1e-9 for a, b in zip(ll, ll[1:]))
    assert all(s == pytest.approx(1.0, abs=1e-6) for s in table.row_sums().values())


def test_reverse_direction():
    table = train_ibm1(CLASSIC, 5, reverse=True)
    assert table.direction == "tgt->src" and table.prob("the", "das") > 0.5


def test_empty_corpus_and_bad_iterations():
    with pytest.raises(EmptyCorpus):
        train_ibm1([], 3)
    with pytest.raises(ValueError):
        train_ibm1(CLASSIC, 0)


def test_viterbi_examples():
    perfect = TranslationTable({("a", "x"): 1.0, ("b", "y"): 1.0}, use_null=False)
    assert viterbi_align(perfect, ("a", "b"), ("x", "y")).links == {(0, 0), (1, 1)}
    null_pref = TranslationTable({("<null>", "x"): 0.9, ("a", "x"): 0.1}, use_null=True)
    assert viterbi_align(null_pref, ("a",), ("x",)).links == frozenset()
    tie = TranslationTable({("a", "x"): 0.5, ("b", "x"): 0.5}, use_null=False)
    assert viterbi_align(tie, ("a", "b"), ("x",)).links == {(0, 0)}
    null_tie = TranslationTable({("<null>", "x"): 0.5, ("a", "x"): 0.5}, use_null=True)
    assert viterbi_align(null_tie, ("a",), ("x",)).links == {(0, 0)}


def matrix_pairs(max_n=5):
    @st.composite
    def build(draw):
        n, m = draw(st.integers(1, max_n)), draw(st.integers(1, max_n))
        cells = st.tuples(st.integers(0, n - 1), st.integers(0, m - 1))
        fwd = draw(st.frozensets(cells))
        bwd = draw(st.frozensets(cells))
        return AlignmentMatrix(n, m, fwd), AlignmentMatrix(n, m, bwd)
    return build()


@settings(max_examples=300)
@given(matrix_pairs())
def test_result_between_intersection_and_union(pair):
    fwd, bwd = pair
    for h in HEURISTICS:
        links = symmetrize(fwd, bwd, h).links
        assert fwd.links & bwd.links <= links <= fwd.links | bwd.links


@given(matrix_pairs())
def test_equal_inputs_fixed(pair):
    fwd, _ = pair
    assert all(symmetrize(fwd, fwd, h).links == fwd.links for h in HEURISTICS)


def test_hand_traced_example():
    fwd = AlignmentMatrix(2, 2, {(0, 0)})
    bwd = AlignmentMatrix(2, 2, {(0, 0), (1, 1)})
    assert symmetrize(fwd, bwd, "intersection").links == {(0, 0)}
    assert symmetrize(fwd, bwd, "grow-diag-final-and").links == {(0, 0), (1, 1)}


def test_disjoint_inputs():
    fwd = AlignmentMatrix(2, 2, {(0, 0)})
    bwd = AlignmentMatrix(2, 2, {(1, 1)})
    assert symmetrize(fwd, bwd, "intersection").links == frozenset()
    assert symmetrize(fwd, bwd, "union").links == {(0, 0), (1, 1)}


def test_grow_diag_depends_on_visit_order():
    # Growing is greedy: adding (1, 2) or (2, 1) first aligns row 1 / column 1
    # and blocks (1, 1) in one order but not the other.
    inter = {(0, 0), (0, 3), (3, 0)}
    extra = {(1, 1), (1, 2), (2, 1)}
    fwd = AlignmentMatrix(4, 4, inter | extra)
    bwd = AlignmentMatrix(4, 4, inter)
    row_major = symmetrize(fwd, bwd, "grow-diag").links
    reverse = symmetrize(fwd, bwd, "grow-diag", grow_order=sorted(extra, reverse=True)).links
    assert row_major == inter | extra
    assert reverse == inter | {(1, 2), (2, 1)}


def test_final_and_is_not_a_subset_of_final():
    # The final steps are greedy too: "final" spends the unaligned words on
    # (0, 2) and (2, 0), "final-and" can only add (2, 2).
    fwd = AlignmentMatrix(3, 3, {(0, 0), (0, 2), (2, 0), (2, 2)})
    bwd = AlignmentMatrix(3, 3, {(0, 0)})
    assert symmetrize(fwd, bwd, "grow-diag-final").links == {(0, 0), (0, 2), (2, 0)}
    assert symmetrize(fwd, bwd, "grow-diag-final-and").links == {(0, 0), (2, 2)}


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        symmetrize(AlignmentMatrix(2, 2), AlignmentMatrix(2, 3))


def test_matrix_validation_and_pharaoh(tmp_path):
    with pytest.raises(ValueError):
        AlignmentMatrix(1, 1, {(1, 0)})
    a = AlignmentMatrix(3, 2, {(2, 1), (0, 0)})
    assert a.to_pharaoh() == "0-0 2-1"
    assert AlignmentMatrix.from_pharaoh("0-0 2-1", 3, 2) == a
    assert a.transpose().links == {(0, 0), (1, 2)}
    write_alignments([a, AlignmentMatrix(1, 1)], tmp_path / "al")
    assert read_alignments(tmp_path / "al") == [a.links, frozenset()]


def test_align_corpus_classic():
    _, _, alignments = align_corpus(CLASSIC, iterations=10)
    assert [a.links for a in alignments] == [{(0, 0), (1, 1)}, {(0, 0), (1, 1)}]
