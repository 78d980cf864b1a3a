"""Tests for error estimation, Chebyshev bounds and the converse checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ig_ident.codebook import Codebook, build_greedy_packing, codeword_pair, scaling_quantities
from ig_ident.codec import DecodingRule
from ig_ident.error_analysis import (
    ErrorEstimate,
    chebyshev_bounds,
    estimate_events,
    estimate_type1,
    estimate_type2,
    lemma3_bound_check,
    log_likelihood_ratio,
    regularity_check,
    separation_check,
)
from ig_ident.errors import DomainError, InvalidInputError, PreconditionError
from ig_ident.ig_distribution import IGParams, ig_cdf, ig_sample, vector_log_pdf
from ig_ident.streams import substream

# Oracle: difference of two direct joint log-densities at n = 1.
LLR_EXAMPLE = 0.11378204684448345
# Oracle: 40-digit evaluation of n [log f(0.5 - alpha_n/2) - log f(0.5)] at n = 100, b = 0.1.
LEMMA3_RATIO_N100 = 1.3474056247549663

P14 = IGParams(1, 4)


@pytest.fixture(scope="module")
def reference_pair():
    """Codeword pair at exactly 2 r0 for n = 10^4, a = 1, b = 0.5, t_max = 10."""
    q = scaling_quantities(10_000, 1.0, 0.5)
    return codeword_pair(10_000, 10.0, 2 * q.r0, substream(1, "pair", 0))


class TestErrorEstimate:
    def test_bounds(self):
        e = ErrorEstimate.from_counts(0, 1000)
        assert e.p_hat == 0.0 and e.ci_low == 0.0 and 0 < e.ci_high < 0.005

    def test_shrinks_with_trials(self):
        widths = [ErrorEstimate.from_counts(t // 10, t).ci_halfwidth for t in (100, 1000, 10_000)]
        assert widths[0] > widths[1] > widths[2]

    @given(k=st.integers(0, 1000), extra=st.integers(0, 1000))
    def test_valid(self, k, extra):
        e = ErrorEstimate.from_counts(k, k + extra + 1)
        assert 0 <= e.p_hat <= 1
        assert 0 <= e.ci_low <= e.p_hat <= e.ci_high <= 1


class TestTypeErrors:
    def test_accept_all(self, rng):
        cb = Codebook(50, 10.0, 0.0, np.full((2, 50), 3.0))
        e = estimate_type1(cb, 1, P14, DecodingRule(1e9, P14.second_moment), 1000, rng)
        assert e.p_hat == 0.0

    def test_zero_threshold(self, rng):
        cb = Codebook(50, 10.0, 0.0, np.full((2, 50), 3.0))
        e = estimate_type1(cb, 1, P14, DecodingRule(0.0, P14.second_moment), 1000, rng)
        assert e.p_hat == 1.0

    def test_type1_reference(self, reference_pair):
        rule = DecodingRule.for_channel(P14, 10_000, 1.0, 0.5)
        e = estimate_type1(reference_pair, 1, P14, rule, 10_000, substream(1, "t1", 0))
        assert e.p_hat == 0.0
        assert e.ci_high <= 4e-4

    def test_type2_reference(self, reference_pair):
        rule = DecodingRule.for_channel(P14, 10_000, 1.0, 0.5)
        e = estimate_type2(reference_pair, 1, 2, P14, rule, 10_000, substream(1, "t2", 0))
        assert e.p_hat <= 0.01

    def test_type2_far_pair(self, rng):
        n = 100
        q = scaling_quantities(n, 1.0, 0.5)
        cb = Codebook(n, 1e6, 0.0, np.vstack([np.zeros(n), np.full(n, 1e3 * q.r0 / math.sqrt(n))]))
        rule = DecodingRule.for_channel(P14, n, 1.0, 0.5)
        assert estimate_type2(cb, 1, 2, P14, rule, 1000, rng).p_hat == 0.0

    def test_coincident_codewords_complement(self):
        n = 100
        cb = Codebook(n, 10.0, 0.0, np.full((2, n), 4.0))
        rule = DecodingRule.for_channel(P14, n, 1.0, 0.5)
        e1 = estimate_type1(cb, 1, P14, rule, 20_000, substream(6, "c1", 0))
        e2 = estimate_type2(cb, 1, 2, P14, rule, 20_000, substream(6, "c2", 0))
        tol = 3 * (e1.ci_halfwidth + e2.ci_halfwidth)
        assert abs(e2.p_hat - (1 - e1.p_hat)) < tol

    def test_same_index(self, reference_pair, rng):
        rule = DecodingRule(0.1, 1.0)
        with pytest.raises(InvalidInputError):
            estimate_type2(reference_pair, 1, 1, P14, rule, 100, rng)

    def test_index_range(self, reference_pair, rng):
        with pytest.raises(InvalidInputError):
            estimate_type1(reference_pair, 3, P14, DecodingRule(0.1, 1.0), 100, rng)

    def test_trial_minimum(self, reference_pair, rng):
        with pytest.raises(DomainError):
            estimate_type1(reference_pair, 1, P14, DecodingRule(0.1, 1.0), 99, rng)

    def test_monotone_decay(self):
        # lam = 1 keeps the statistic wide enough to see errors at n = 100.
        p = IGParams(1, 1)
        ests = []
        for n in (100, 1000, 10_000):
            cb = Codebook(n, 10.0, 0.0, np.full((2, n), 5.0))
            rule = DecodingRule.for_channel(p, n, 1.0, 0.5)
            ests.append(estimate_type1(cb, 1, p, rule, 4000, substream(7, f"decay/{n}", 0)))
        for a, b in zip(ests, ests[1:]):
            assert b.p_hat <= a.p_hat + 2 * max(a.ci_halfwidth, b.ci_halfwidth)

    def test_bound_dominance(self):
        # t_max = 1 makes zeta0 + zeta1 non-vacuous at n = 10^4.
        n, a, b, t_max = 10_000, 1.0, 0.5, 1.0
        bounds = chebyshev_bounds(P14, t_max, n, a, b)
        assert not bounds.eta0_vacuous and not bounds.type2_vacuous
        q = scaling_quantities(n, a, b)
        cb = codeword_pair(n, t_max, 2 * q.r0, substream(2, "dom", 0))
        rule = DecodingRule.for_channel(P14, n, a, b)
        e1 = estimate_type1(cb, 1, P14, rule, 2000, substream(2, "dom1", 0))
        e2 = estimate_type2(cb, 1, 2, P14, rule, 2000, substream(2, "dom2", 0))
        assert e1.p_hat - e1.ci_halfwidth <= bounds.eta0
        assert e2.p_hat - e2.ci_halfwidth <= bounds.type2_bound

    def test_events(self):
        n = 400
        q = scaling_quantities(n, 1.0, 0.5)
        cb = codeword_pair(n, 10.0, 2 * q.r0, substream(3, "ev", 0))
        rule = DecodingRule.for_channel(P14, n, 1.0, 0.5)
        ev = estimate_events(*cb.codewords, P14, rule, 2000, substream(3, "ev", 1))
        t2 = estimate_type2(cb, 1, 2, P14, rule, 2000, substream(3, "ev", 1))
        # Same stream: the type II event is e2 exactly.
        assert ev.e2.errors == t2.errors
        assert ev.e2.p_hat <= ev.e0.p_hat + ev.e1.p_hat + 1e-12


class TestChebyshevBounds:
    def test_reference(self):
        cb = chebyshev_bounds(P14, 10.0, 10_000, 1.0, 0.5)
        assert cb.eta0 == pytest.approx(0.021457672119140625, rel=1e-12)
        assert cb.zeta1 == cb.eta0
        assert cb.zeta0 == pytest.approx(2.25, rel=1e-12)
        assert cb.zeta0_vacuous and not cb.eta0_vacuous

    def test_eta_equals_zeta1_on_grid(self):
        for mu in (0.1, 1, 7):
            for lam in (0.2, 4, 50):
                for n in (2, 100, 10**6):
                    cb = chebyshev_bounds(IGParams(mu, lam), 10.0, n, 0.7, 0.3)
                    assert cb.eta0 == cb.zeta1

    def test_unclamped(self):
        cb = chebyshev_bounds(IGParams(5, 1), 10.0, 2, 1.0, 0.1)
        assert cb.eta0 > 1 and cb.eta0_vacuous

    def test_domain(self):
        with pytest.raises(DomainError):
            chebyshev_bounds(P14, 10.0, 1, 1.0, 0.5)


class TestRegularity:
    def test_pass(self):
        rep = regularity_check([0.2, 0.3], 100, 1.0, 0.5)
        assert rep.passed and rep.threshold == pytest.approx(0.1)

    def test_fail(self):
        rep = regularity_check([0.05, 0.3], 100, 1.0, 0.5)
        assert not rep.passed and rep.violations == (1,)

    def test_strict(self):
        assert not regularity_check([0.1], 100, 1.0, 0.5).passed

    def test_rate_matches_cdf(self, rng):
        p = IGParams(1, 1)
        z = ig_sample(p, rng, size=10_000)
        rep = regularity_check(z, 10_000, 1.0, 0.5)
        q = float(ig_cdf(p, 0.01))
        se = math.sqrt(max(q * (1 - q), 1e-12) / z.size)
        assert abs(rep.violation_rate - q) <= 3 * se + 1 / z.size


class TestLikelihoodRatio:
    def test_identical(self):
        rep = log_likelihood_ratio([2.0, 3.0], [0.5, 1.0], [0.5, 1.0], IGParams(1, 1))
        assert rep.log_A == 0 and rep.log_B == 0 and rep.ratio == 1.0

    def test_example(self):
        rep = log_likelihood_ratio([2.0], [0.0], [0.1], IGParams(1, 1))
        assert rep.log_ratio == pytest.approx(LLR_EXAMPLE, rel=1e-12)
        assert rep.ratio == pytest.approx(1.1205078800399169, rel=1e-12)
        direct = vector_log_pdf(IGParams(1, 1), [1.9]) - vector_log_pdf(IGParams(1, 1), [2.0])
        assert rep.log_ratio_direct == pytest.approx(direct, rel=1e-14)

    def test_swap(self):
        p = IGParams(1.3, 2.1)
        y, c1, c2 = [2.0, 3.5], [0.2, 1.0], [0.7, 0.4]
        a = log_likelihood_ratio(y, c1, c2, p)
        b = log_likelihood_ratio(y, c2, c1, p)
        assert a.log_ratio == pytest.approx(-b.log_ratio, rel=1e-12)

    def test_support(self):
        with pytest.raises(DomainError, match="coordinate 2"):
            log_likelihood_ratio([1.0, 1.0], [0.0, 0.0], [0.0, 1.0], IGParams(1, 1))

    def test_identity_random(self):
        rng = substream(77, "llr", 0)
        for _ in range(1000):
            n = int(rng.integers(1, 50))
            p = IGParams(float(rng.uniform(0.1, 5)), float(rng.uniform(0.1, 20)))
            c1 = rng.uniform(0, 10, n)
            c2 = rng.uniform(0, 10, n)
            y = np.maximum(c1, c2) + ig_sample(p, rng, size=n)
            rep = log_likelihood_ratio(y, c1, c2, p)
            direct = vector_log_pdf(p, y - c2) - vector_log_pdf(p, y - c1)
            scale = max(1.0, abs(vector_log_pdf(p, y - c1)), abs(vector_log_pdf(p, y - c2)))
            assert abs(rep.log_ratio - direct) <= 1e-9 * scale


class TestLemma3:
    @staticmethod
    def matched(n, b=0.1):
        alpha = scaling_quantities(n, 1.0, b).alpha_n
        c1 = np.zeros(n)
        return c1, c1 + alpha / 2, np.full(n, 0.5)

    def test_identical(self):
        c1, _, z = self.matched(100)
        rep = lemma3_bound_check(c1, c1, z, IGParams(1, 1), 100, 1.0, 0.1)
        assert rep.ratio == 1.0 and rep.within_bound

    def test_reference(self):
        c1, c2, z = self.matched(100)
        rep = lemma3_bound_check(c1, c2, z, IGParams(1, 1), 100, 1.0, 0.1)
        assert rep.within_bound
        assert rep.ratio == pytest.approx(LEMMA3_RATIO_N100, rel=1e-9)
        n_alpha = 100 * scaling_quantities(100, 1.0, 0.1).alpha_n
        assert rep.tau_bound == pytest.approx(1.5 * n_alpha / 0.5 + 0.5 * n_alpha * (1 + 4))
        # z = 0.5 sits below the regularity threshold 100^-0.1; reported, not enforced.
        assert rep.regular is False

    def test_shrinks(self):
        gaps = []
        for n in (100, 10_000):
            c1, c2, z = self.matched(n)
            gaps.append(abs(1 - lemma3_bound_check(c1, c2, z, IGParams(1, 1), n, 1.0, 0.1).ratio))
        assert gaps[1] < gaps[0]

    def test_premise(self):
        c1, c2, z = self.matched(100)
        c2 = c2.copy()
        c2[4] = scaling_quantities(100, 1.0, 0.1).alpha_n
        with pytest.raises(PreconditionError, match="coordinate 5"):
            lemma3_bound_check(c1, c2, z, IGParams(1, 1), 100, 1.0, 0.1)


class TestSeparation:
    def test_packing_passes(self, rng):
        n = 50
        md = 2 * scaling_quantities(n, 1.0, 0.5).r0
        cb = build_greedy_packing(n, 10.0, md, 20, 2000, rng)
        rep = separation_check(cb, n, 1.0, 0.5)
        assert rep.passed
        assert rep.min_max_gap >= md / math.sqrt(n) * (1 - 1e-12)

    def test_duplicate(self):
        cw = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]])
        rep = separation_check(Codebook(2, 1.0, 0.0, cw), 2, 1.0, 0.5)
        assert not rep.passed and rep.offending_pair == (1, 3)

    def test_boundary(self):
        alpha = scaling_quantities(2, 1.0, 0.5).alpha_n
        cb = Codebook(1, 1.0, 0.0, [[0.0], [alpha]])
        assert separation_check(cb, 2, 1.0, 0.5).passed

    @given(n=st.integers(2, 10**6), a=st.floats(1e-3, 1.0), b=st.floats(0.01, 0.99))
    @settings(max_examples=200)
    def test_gap_beats_alpha(self, n, a, b):
        q = scaling_quantities(n, a, b)
        assert 2 * q.r0 / math.sqrt(n) > q.alpha_n
