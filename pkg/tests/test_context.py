import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rdmcmc.context import (CYCLIC, LINEAR, ContextDelta, ContextTable, apply_flip,
                            affected_contexts, build_counts, conditional_entropy,
                            entropy_functional)


def literal_counts(y, k, mode=LINEAR):
    """Direct enumeration of (context, symbol) pairs, farthest neighbour first."""
    n = len(y)
    start = k if mode == LINEAR else 0
    c = Counter()
    for i in range(start, n):
        ctx = tuple(int(y[(i - k + j) % n]) for j in range(k))
        c[(ctx, int(y[i]))] += 1
    return dict(c)


def literal_entropy(y, k, mode=LINEAR):
    cells = literal_counts(y, k, mode)
    cols = Counter()
    for (ctx, _), v in cells.items():
        cols[ctx] += v
    total = sum(cells.values())
    h = 0.0
    for (ctx, _), v in cells.items():
        h -= v / total * math.log2(v / cols[ctx])
    return h


seqs = st.lists(st.integers(0, 2), min_size=2, max_size=40)


class TestBuildCounts:
    def test_constant(self):
        cm = build_counts([0, 0, 0, 0], 1)
        assert cm.as_dict() == {((0,), 0): 3}
        assert cm.total == 3

    def test_alternating(self):
        cm = build_counts([0, 1, 0, 1], 1)
        assert cm.as_dict() == {((0,), 1): 2, ((1,), 0): 1}
        assert cm.total == 3

    def test_two_runs(self):
        cm = build_counts([0, 0, 1, 1], 1)
        assert cm.as_dict() == {((0,), 0): 1, ((0,), 1): 1, ((1,), 1): 1}

    def test_too_short(self):
        with pytest.raises(ValueError):
            build_counts([0, 1], 2)

    def test_symbol_outside_alphabet(self):
        with pytest.raises(ValueError):
            build_counts([0, 3, 1], 1, alphabet_size=2)

    def test_cyclic_total_is_n(self):
        cm = build_counts([0, 1, 1, 0, 1], 2, CYCLIC)
        assert cm.total == 5
        assert cm.as_dict() == literal_counts([0, 1, 1, 0, 1], 2, CYCLIC)

    @given(seqs, st.integers(0, 3), st.sampled_from([LINEAR, CYCLIC]))
    def test_matches_enumeration(self, y, k, mode):
        if len(y) <= k:
            return
        cm = build_counts(y, k, mode, alphabet_size=3)
        assert cm.as_dict() == literal_counts(y, k, mode)
        assert cm.counts.sum() == cm.total == (len(y) - k if mode == LINEAR else len(y))
        assert cm.counts.min() >= 0


class TestEntropy:
    def test_functional_examples(self):
        assert entropy_functional((1, 1)) == 1.0
        assert entropy_functional((0, 0)) == 0.0
        assert entropy_functional((1, 3)) == pytest.approx(0.811278, abs=1e-6)

    def test_functional_rejects_negative(self):
        with pytest.raises(ValueError):
            entropy_functional((1, -1))

    def test_conditional_examples(self):
        assert conditional_entropy(build_counts([1] * 9, 3)) == 0.0
        assert conditional_entropy(build_counts([0, 1, 0, 1], 1)) == 0.0
        assert conditional_entropy(build_counts([0, 0, 1, 1], 1)) == pytest.approx(2 / 3, abs=1e-12)

    @given(seqs, st.integers(0, 3))
    def test_matches_literal(self, y, k):
        if len(y) <= k:
            return
        h = build_counts(y, k, alphabet_size=3).entropy()
        assert h == pytest.approx(literal_entropy(y, k), abs=1e-9)
        assert -1e-12 <= h <= math.log2(3) + 1e-12

    @given(seqs, st.integers(0, 3), st.permutations([0, 1, 2]))
    def test_relabel_invariance(self, y, k, perm):
        if len(y) <= k:
            return
        relabeled = [perm[v] for v in y]
        np.testing.assert_allclose(build_counts(relabeled, k, alphabet_size=3).entropy(),
                                   build_counts(y, k, alphabet_size=3).entropy(), atol=1e-12)


class TestFlips:
    def test_same_symbol_is_noop(self):
        y = np.array([0, 0, 1, 1])
        cm = build_counts(y, 1)
        before = cm.counts.copy()
        _, dh = apply_flip(cm, y, 2, 1)
        assert dh == 0.0
        np.testing.assert_array_equal(cm.counts, before)

    def test_flip_matches_rebuild(self):
        y = np.array([0, 0, 1, 1])
        cm = build_counts(y, 1)
        h0 = cm.entropy()
        _, dh = apply_flip(cm, y, 1, 1)
        rebuilt = build_counts(y, 1)
        np.testing.assert_array_equal(cm.counts, rebuilt.counts)
        assert abs(dh - (rebuilt.entropy() - h0)) <= 1e-12

    def test_involution(self):
        y = np.array([0, 1, 1, 0, 1, 0, 0])
        cm = build_counts(y, 2)
        before = cm.counts.copy()
        cm.apply_flip(y, 3, 1)
        cm.apply_flip(y, 3, 0)
        np.testing.assert_array_equal(cm.counts, before)

    def test_rejects_bad_symbol(self):
        y = np.array([0, 1, 1])
        with pytest.raises(ValueError):
            build_counts(y, 1).apply_flip(y, 0, 2)

    @given(st.lists(st.integers(0, 1), min_size=10, max_size=30), st.integers(0, 4),
           st.sampled_from([LINEAR, CYCLIC]),
           st.lists(st.tuples(st.integers(0, 29), st.integers(0, 1)), max_size=25))
    def test_sequence_of_flips_matches_rebuild(self, y, k, mode, flips):
        y = np.array(y)
        cm = build_counts(y, k, mode)
        for i, b in flips:
            i %= len(y)
            h0 = cm.entropy()
            dh = cm.apply_flip(y, i, b)
            ref = build_counts(y, k, mode)
            np.testing.assert_array_equal(cm.counts, ref.counts)
            assert abs(dh - (ref.entropy() - h0)) <= 1e-9


class TestAffectedContexts:
    def test_noop(self):
        y = np.zeros(6, dtype=np.int64)
        assert len(affected_contexts(build_counts(y, 1), y, 2, 0)) == 0

    def test_two_positions(self):
        y = np.zeros(6, dtype=np.int64)
        delta = affected_contexts(build_counts(y, 1), y, 2, 1)
        assert isinstance(delta, ContextDelta)
        assert [m.position for m in delta.moves] == [2, 3]
        assert delta.moves[0].old == ((0,), 0) and delta.moves[0].new == ((0,), 1)
        assert delta.moves[1].old == ((0,), 0) and delta.moves[1].new == ((1,), 0)
        assert delta.cell_changes == 4

    @given(st.lists(st.integers(0, 1), min_size=10, max_size=25), st.integers(0, 5),
           st.integers(0, 24))
    def test_bound_and_rebuild(self, y, k, i):
        y = np.array(y)
        i %= len(y)
        cm = build_counts(y, k)
        b = 1 - y[i]
        delta = affected_contexts(cm, y, i, b)
        assert delta.cell_changes <= 2 * k + 2
        net = Counter(literal_counts(y, k))
        for m in delta.moves:
            net[m.old] -= 1
            net[m.new] += 1
        after = y.copy()
        after[i] = b
        assert {c: v for c, v in net.items() if v} == literal_counts(after, k)


class TestContextTable:
    def test_raster_rejects_non_causal(self):
        with pytest.raises(ValueError):
            ContextTable.raster(3, 3, [(0, 1)])

    def test_raster_off_image_reads_zero(self):
        t = ContextTable.raster(2, 2, [(0, -1), (-1, 0)])
        np.testing.assert_array_equal(t.ctx, [[-1, -1], [0, -1], [-1, 0], [2, 1]])
        assert t.total == 4

    def test_raster_flips_match_rebuild(self, rng):
        t = ContextTable.raster(6, 7, [(0, -1), (0, -2), (-1, -1), (-1, 0), (-1, 1), (-2, 0)])
        y = rng.integers(0, 2, 42)
        cm = build_counts(y, table=t)
        for _ in range(300):
            i, b = rng.integers(0, 42), rng.integers(0, 2)
            h0 = cm.entropy()
            dh = cm.apply_flip(y, i, b)
            ref = build_counts(y, table=t)
            np.testing.assert_array_equal(cm.counts, ref.counts)
            assert abs(dh - (ref.entropy() - h0)) <= 1e-9

    def test_dense_guard(self):
        with pytest.raises(ValueError):
            build_counts(np.zeros(40, dtype=np.int64), 30)
