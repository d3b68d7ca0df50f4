import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rdmcmc.context import build_counts
from rdmcmc.lossless import (MalformedStream, enumerative_header, enumerative_length,
                             log2_multinomial, lz78_decode, lz78_encode, lz78_length, lz78_parse)
from rdmcmc.sources import bernoulli, bsms


def literal_lz78(y):
    """Reference parse: list of phrases as tuples, by direct dictionary lookup."""
    seen = {(): 0}
    phrases, cur = [], ()
    for s in y:
        if cur + (s,) in seen:
            cur = cur + (s,)
        else:
            phrases.append(cur + (s,))
            seen[cur + (s,)] = len(seen)
            cur = ()
    if cur:
        phrases.append(cur)
    return phrases


class TestLZ78:
    def test_single_symbol(self):
        assert lz78_length([0], 2) == 1
        assert len(lz78_parse([0], 2).phrases) == 1

    def test_known_parse(self):
        y = [0, 1, 0, 0, 1, 0, 1, 1]
        assert [len(p) for p in literal_lz78(y)] == [1, 1, 2, 2, 2]
        assert len(lz78_parse(y).phrases) == 5

    @given(st.lists(st.integers(0, 3), min_size=1, max_size=300), st.integers(0, 2))
    def test_round_trip(self, y, extra):
        a = max(y) + 1 + extra
        out = lz78_decode(lz78_encode(y, a))
        np.testing.assert_array_equal(out, y)

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=300))
    def test_parse_matches_reference(self, y):
        ref = literal_lz78(y)
        parse = lz78_parse(y, 2)
        assert len(parse.phrases) == len(ref) <= len(y)

    def test_length_matches_payload(self, rng):
        y = rng.integers(0, 2, 5000)
        data = lz78_encode(y)
        assert len(data) - 24 == math.ceil(lz78_length(y) / 8)

    def test_length_below_fixed_width_variant(self, rng):
        y = rng.integers(0, 2, 3000)
        phrases = lz78_parse(y).phrases
        fixed = sum(math.ceil(math.log2(j)) + (1 if s is not None else 0)
                    for j, (_, s) in enumerate(phrases, start=1))
        assert lz78_length(y) <= fixed

    def test_compresses_redundant_input(self):
        y = bsms(0.05, 20000, seed=1)
        assert lz78_length(y) / y.size < 0.6

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            lz78_encode([])

    @pytest.mark.parametrize("mutate", [
        lambda d: d[:10],
        lambda d: b"XXXX" + d[4:],
        lambda d: d[:4] + bytes([9]) + d[5:],
        lambda d: d[:-1],
        lambda d: d + b"\x00",
    ])
    def test_malformed(self, mutate):
        data = lz78_encode(bernoulli(0.5, 200, seed=3))
        with pytest.raises(MalformedStream):
            lz78_decode(mutate(data))

    def test_wrong_symbol_count(self):
        data = bytearray(lz78_encode([0, 1, 1, 0, 1]))
        data[12] += 1  # low byte of n
        with pytest.raises(MalformedStream):
            lz78_decode(bytes(data))


class TestEnumerative:
    @pytest.mark.parametrize("counts", [(2, 2), (0, 5), (3, 1, 2), (1, 1, 1, 1), (12,), (6, 6)])
    def test_multinomial_exact(self, counts):
        ref = math.log2(math.factorial(sum(counts)) / math.prod(math.factorial(c) for c in counts))
        assert log2_multinomial(counts) == pytest.approx(ref, abs=1e-9)

    def test_two_two(self):
        assert log2_multinomial((2, 2)) == pytest.approx(math.log2(6), abs=1e-12)

    @pytest.mark.parametrize("n", range(2, 13))
    def test_length_matches_factorial_oracle(self, n):
        rng = np.random.default_rng(n)
        y = rng.integers(0, 2, n)
        k = 1
        cm = build_counts(y, k)
        body = 0.0
        for col in cm.counts:
            if col.sum():
                body += math.log2(math.factorial(int(col.sum()))
                                  / math.prod(math.factorial(int(c)) for c in col))
        assert enumerative_length(y, k) == pytest.approx(body + enumerative_header(n, k), abs=1e-9)

    def test_constant_is_header_only(self):
        assert enumerative_length([1] * 50, 2) == enumerative_header(50, 2)
        assert enumerative_header(50, 2) == 8 * 6 + 2

    @given(st.lists(st.integers(0, 2), min_size=5, max_size=200), st.integers(0, 3))
    def test_at_least_n_hk(self, y, k):
        if len(y) <= k:
            return
        cm = build_counts(y, k, alphabet_size=3)
        assert enumerative_length(y, k, 3) / len(y) >= cm.entropy() - 1e-12

    @pytest.mark.parametrize("k", [0, 1, 2, 4])
    def test_stirling_gap(self, k):
        y = bsms(0.2, 10_000, seed=k)
        cm = build_counts(y, k)
        gap = enumerative_length(y, k) - cm.code_length() - enumerative_header(y.size, k)
        assert gap <= 0
        assert -gap / y.size <= 0.05
