"""Tests for the encoder, the IG timing channel and the threshold identifier."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ig_ident.codebook import Codebook, build_greedy_packing, codeword_pair, scaling_quantities
from ig_ident.codec import (
    DecodingRule,
    decoding_measure,
    decoding_measures_batch,
    encode,
    identify,
    transmit,
)
from ig_ident.errors import DomainError, InvalidInputError
from ig_ident.ig_distribution import IGParams, ig_moments
from ig_ident.streams import substream

finite = st.floats(-1e3, 1e3, allow_nan=False)


@pytest.fixture
def small_book(rng):
    return build_greedy_packing(5, 4.0, 1.0, 12, 5000, rng)


class TestDecodingRule:
    def test_for_channel(self):
        rule = DecodingRule.for_channel(IGParams(1, 4), 10_000, 1.0, 0.5)
        assert rule.delta_n == pytest.approx(0.13333333333333333)
        assert rule.alpha == pytest.approx(1.25)

    def test_alpha_ties_to_moments(self):
        p = IGParams(2, 10)
        m = ig_moments(p)
        assert DecodingRule.for_channel(p, 100, 1, 0.5).alpha == pytest.approx(m.mean**2 + m.variance)

    @pytest.mark.parametrize("delta,alpha", [(-0.1, 1.0), (0.1, 0.0)])
    def test_invalid(self, delta, alpha):
        with pytest.raises(DomainError):
            DecodingRule(delta, alpha)


class TestEncode:
    def test_first(self, small_book):
        np.testing.assert_array_equal(encode(small_book, 1), small_book.codewords[0])

    def test_repeatable(self, small_book):
        np.testing.assert_array_equal(encode(small_book, 3), encode(small_book, 3))

    def test_returns_copy(self, small_book):
        c = encode(small_book, 2)
        c[:] = -1
        assert small_book.audit() == []

    @pytest.mark.parametrize("i", [0, 13, -1])
    def test_range(self, small_book, i):
        with pytest.raises(InvalidInputError):
            encode(small_book, i)

    def test_peak_constraint(self, small_book):
        for i in range(1, small_book.M + 1):
            c = encode(small_book, i)
            assert np.all((c >= 0) & (c <= small_book.t_max))


class TestTransmit:
    def test_mean(self, rng):
        y = transmit(np.zeros(100_000), IGParams(1, 1), rng)
        assert abs(y.mean() - 1.0) < 3 / math.sqrt(y.size)

    def test_strictly_later(self, rng):
        c = np.linspace(0, 10, 1000)
        assert np.all(transmit(c, IGParams(0.1, 0.05), rng) > c)

    def test_seeded(self):
        c = np.arange(5.0)
        a = transmit(c, IGParams(1, 1), substream(3, "tx", 0))
        b = transmit(c, IGParams(1, 1), substream(3, "tx", 0))
        np.testing.assert_array_equal(a, b)

    def test_non_finite(self, rng):
        with pytest.raises(InvalidInputError):
            transmit([0.0, math.inf], IGParams(1, 1), rng)


class TestDecodingMeasure:
    def test_zero_noise(self):
        c = np.ones(7)
        assert decoding_measure(c, c, IGParams(1, 1)) == -2.0
        assert decoding_measure(c, c, IGParams(2, 10)) == pytest.approx(-4.8)

    def test_unbiased(self):
        p = IGParams(1, 4)
        c = np.zeros(20)
        T = decoding_measures_batch(c, c, p, 100_000, substream(8, "unbiased", 0))
        assert abs(T.mean()) < 3 * T.std(ddof=1) / math.sqrt(T.size)

    def test_batch_matches_scalar(self):
        p = IGParams(1, 4)
        c1, c2 = np.full(50, 2.0), np.full(50, 3.0)
        rng_a, rng_b = substream(1, "b", 0), substream(1, "b", 0)
        batch = decoding_measures_batch(c1, c2, p, 3, rng_a)
        from ig_ident.ig_distribution import ig_sample
        noise = ig_sample(p, rng_b, size=(3, 50))
        scalar = [decoding_measure(c1 + z, c2, p) for z in noise]
        np.testing.assert_allclose(batch, scalar, rtol=1e-12, atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            decoding_measure(np.ones(3), np.ones(4), IGParams(1, 1))

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            decoding_measure([], [], IGParams(1, 1))

    @given(
        y=arrays(np.float64, 16, elements=finite),
        c=arrays(np.float64, 16, elements=finite),
        s=finite,
    )
    def test_shift_invariance(self, y, c, s):
        p = IGParams(1, 1)
        a = decoding_measure(y, c, p)
        b = decoding_measure(y + s, c + s, p)
        scale = max(1.0, float(np.mean((y - c) ** 2)))
        assert abs(a - b) <= 1e-12 * scale * 1e3

    def test_large_n_accuracy(self):
        # Compensated summation keeps n = 10^6 to 1e-10 relative.
        n = 10**6
        y = np.full(n, 1.0 + 1e-3)
        c = np.zeros(n)
        p = IGParams(1, 1)
        assert decoding_measure(y, c, p) + 2.0 == pytest.approx((1 + 1e-3) ** 2, rel=1e-10)


class TestIdentify:
    def test_closed_boundary(self):
        p = IGParams(1, 1)
        y, c = np.array([2.0]), np.array([0.0])
        T = decoding_measure(y, c, p)
        assert identify(y, c, p, DecodingRule(abs(T), 1.0))
        assert not identify(y, c, p, DecodingRule(np.nextafter(abs(T), 0), 1.0))

    def test_zero_noise_rejected(self):
        p = IGParams(1, 1)
        c = np.ones(4)
        assert not identify(c, c, p, DecodingRule(1.0, p.second_moment))

    def test_own_codeword_accepted(self):
        p = IGParams(1, 4)
        n = 10_000
        rule = DecodingRule.for_channel(p, n, 1.0, 0.5)
        c = np.full(n, 5.0)
        T = decoding_measures_batch(c, c, p, 10_000, substream(2, "own", 0))
        assert np.mean(np.abs(T) <= rule.delta_n) >= 0.999

    @given(seed=st.integers(0, 2**32), s=st.floats(-5, 5))
    @settings(max_examples=50)
    def test_depends_on_distance_only(self, seed, s):
        p = IGParams(1, 1)
        rng = substream(seed, "sym", 0)
        y = rng.uniform(0, 3, 8)
        c = rng.uniform(0, 3, 8)
        rule = DecodingRule(0.5, p.second_moment)
        # Reflecting y about c preserves ||y - c||.
        assert identify(y, c, p, rule) == identify(2 * c - y, c, p, rule)
        assert identify(y, c, p, rule) == identify(y + s, c + s, p, rule)

    def test_no_argmin(self):
        # Overlapping regions: several candidates may be accepted at once.
        p = IGParams(1, 1)
        y = np.array([1.0, 1.0])
        cands = [np.array([0.0, 0.0]), np.array([0.0, 0.0]) + 1e-9]
        rule = DecodingRule(10.0, p.second_moment)
        assert all(identify(y, c, p, rule) for c in cands)
