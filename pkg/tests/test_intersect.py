"""
Tests for the finite and archimedean intersection numbers and the predicted coefficient
"""

from fractions import Fraction
from math import log, pi, sqrt

import numpy as np
import pytest
from scipy.special import exp1

from src.services.base_field import new_field
from src.services.cm_field import new_real_field
from src.services.green import beta1_log_series
from src.services.intersect import (
    alpha_contributions,
    arch_terms,
    i_arch,
    i_fin,
    i_fin_by_prime,
    predicted_c_phi,
    total_and_prediction,
)
from src.utils.resilience import TruncationCapError


GOLDEN = [1, -1, -1]


@pytest.fixture(scope="module")
def k3():
    return new_field(3)


@pytest.fixture(scope="module")
def golden(k3):
    return new_real_field(GOLDEN, k3)


class TestFinitePart:
    def test_trace_one(self, k3, golden):
        """Test the two α of trace 1: only 3 contributes, with coefficient 2/3"""
        finite = i_fin(k3, golden, 1)
        assert finite.alpha_count == 2
        assert finite.terms == {3: Fraction(2, 3)}
        assert finite.value == pytest.approx(2 / 3 * log(3), abs=1e-14)

    def test_trace_two(self, k3, golden):
        finite = i_fin(k3, golden, 2)
        assert finite.alpha_count == 5
        assert i_fin_by_prime(k3, golden, 2) == {3: Fraction(2), 5: Fraction(1, 3)}
        assert finite.value == pytest.approx(2 * log(3) + log(5) / 3, abs=1e-13)

    @pytest.mark.parametrize("m", [-1, -4])
    def test_negative_trace_has_no_finite_part(self, k3, golden, m):
        finite = i_fin(k3, golden, m)
        assert finite.value == 0.0
        assert finite.terms == {}
        assert finite.alpha_count == 0

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_alpha_first_matches_prime_first(self, k3, golden, m):
        finite = i_fin(k3, golden, m)
        assert finite.alpha_first == pytest.approx(finite.value, abs=1e-10)

    def test_split_primes_never_contribute(self, k3, golden):
        """Test that primes p ≡ 1 mod 3, split in k and so in K/F, stay out of the sums"""
        for m in (1, 2, 3, 4, 5):
            assert not [p for p in i_fin(k3, golden, m).terms if p % 3 == 1]

    def test_inert_prime_contributes(self, k3, golden):
        """Test that 11, inert in k though split in F, enters the trace-3 sum"""
        assert i_fin(k3, golden, 3).terms == {3: Fraction(4, 3), 5: Fraction(2, 3), 11: Fraction(2, 3)}

    def test_contributions_are_per_alpha(self, k3, golden):
        from src.services.cm_field import enumerate_totally_positive

        alphas = enumerate_totally_positive(golden, 1)
        parts = [alpha_contributions(k3, golden, a) for a in alphas]
        assert parts == [{3: Fraction(1, 3)}, {3: Fraction(1, 3)}]

    def test_coefficients_report(self, k3, golden):
        coefficients = i_fin(k3, golden, 2).as_coefficients()
        assert [c.prime for c in coefficients] == [3, 5]
        assert coefficients[1].coefficient == "1/3"
        assert coefficients[1].value == pytest.approx(log(5) / 3)


class TestArchimedeanPart:
    def test_terms_are_negative_at_one_place(self, k3, golden):
        for term in arch_terms(k3, golden, 1, 1.0, 8.0):
            signs = golden.signs(term.alpha)
            assert signs[term.place] == -1 and signs.count(-1) == 1
            assert term.rho >= 0
            if term.rho == 0:
                assert term.beta == 0.0

    def test_tail_is_within_tolerance(self, k3, golden):
        arch = i_arch(k3, golden, 1, 1.0, 1e-8)
        assert arch.tail_bound <= 1e-8
        assert arch.value > 0

    def test_decreasing_in_v(self, k3, golden):
        values = [i_arch(k3, golden, 1, v, 1e-9) for v in (1.0, 2.0, 4.0, 8.0)]
        for smaller, larger in zip(values[1:], values):
            assert smaller.value <= larger.value + smaller.tail_bound + larger.tail_bound
        assert values[-1].value < values[0].value

    def test_height_cap(self, k3, golden):
        with pytest.raises(TruncationCapError):
            i_arch(k3, golden, 1, 0.01, 1e-14, max_height=2.0)

    def test_invalid_parameters(self, k3, golden):
        with pytest.raises(ValueError):
            i_arch(k3, golden, 1, 0.0, 1e-8)

    def test_negative_trace_is_nonzero(self, k3, golden):
        """Test m = −1: no finite part, but α = −1/2 ± 3√5/10 (ρ = 1) carry the archimedean sum"""
        arch = i_arch(k3, golden, -1, 1.0, 1e-14)
        expected = exp1(4 * pi * (5 + 3 * sqrt(5)) / 10) / 3
        assert i_fin(k3, golden, -1).value == 0.0
        assert arch.value > 0
        assert arch.value == pytest.approx(expected, rel=1e-5)

    def test_small_x_asymptote(self, k3, golden):
        """Test β₁(x) ≈ −log x − γ term by term, within the first omitted series term"""
        v = 0.01
        terms = [t for t in arch_terms(k3, golden, -1, v, 4.0) if t.rho]
        assert terms
        asymptotic = remainder = exact = 0.0
        for term in terms:
            x = 4 * pi * v * term.abs_value
            approx, bound = beta1_log_series(x, terms=0)
            assert approx == pytest.approx(-log(x) - np.euler_gamma, abs=1e-12)
            assert abs(term.beta - approx) <= bound
            asymptotic += term.rho * approx
            remainder += term.rho * bound
            exact += term.rho * term.beta
        assert abs(exact - asymptotic) <= remainder


class TestPrediction:
    def test_inversion(self):
        """Test total = −(h/w)·(√N(d_{K/F})/2^{r−1})·c_Φ"""
        h, w, r, rel_disc = 1, 6, 3, 9
        for total in (-2.5, 0.0, 0.731, 12.0):
            c_phi = predicted_c_phi(total, h, w, r, rel_disc)
            rebuilt = -(h / w) * (sqrt(rel_disc) / 2 ** (r - 1)) * c_phi
            assert rebuilt == pytest.approx(total, abs=1e-12)

    def test_report(self, k3, golden):
        report = total_and_prediction(k3, golden, 1, 1.0, 1e-8)
        assert report.r == 3
        assert report.norm_rel_disc == 9
        assert (report.h_k, report.w_k) == (1, 6)
        assert report.total == pytest.approx(report.i_fin + report.i_arch, abs=1e-14)
        assert report.alpha_count == 2
        assert report.error_bound <= 1e-8

    def test_deterministic_across_threads(self, k3, golden):
        single = total_and_prediction(k3, golden, 2, 1.0, 1e-8, threads=1)
        pooled = total_and_prediction(k3, golden, 2, 1.0, 1e-8, threads=4)
        assert single.model_dump() == pooled.model_dump()


class TestRationalBaseField:
    """F = Q: K = k, 𝔡_F = (1) and every sum has at most one α"""

    @pytest.fixture(scope="class")
    def rational(self, k3):
        return new_real_field([1, 0], k3)

    @pytest.mark.parametrize(
        "m, expected",
        [(1, {3: Fraction(1, 6)}), (2, {2: Fraction(1, 3)}), (3, {3: Fraction(1, 3)})],
    )
    def test_finite_part(self, k3, rational, m, expected):
        finite = i_fin(k3, rational, m)
        assert finite.alpha_count == 1
        assert finite.terms == expected
        assert finite.alpha_first == pytest.approx(finite.value, abs=1e-14)

    def test_archimedean_part_keeps_alpha_beyond_unit_height(self, k3, rational):
        arch = i_arch(k3, rational, -3, 0.01, 1e-8)
        assert len(arch.terms) == 1
        assert arch.terms[0].rho == 1
        assert arch.height >= 3
        assert arch.tail_bound == 0.0
        assert arch.value == pytest.approx(exp1(0.12 * pi) / 6, rel=1e-12)

    def test_positive_trace_has_no_archimedean_part(self, k3, rational):
        arch = i_arch(k3, rational, 2, 1.0, 1e-8)
        assert arch.terms == []
        assert arch.value == 0.0

    def test_height_cap_applies(self, k3, rational):
        with pytest.raises(TruncationCapError):
            i_arch(k3, rational, -3, 0.01, 1e-8, max_height=2.0)

    def test_report(self, k3, rational):
        report = total_and_prediction(k3, rational, -3, 0.01, 1e-8)
        assert (report.r, report.norm_rel_disc) == (2, 3)
        assert report.i_fin == 0.0
        assert report.total == pytest.approx(report.i_arch, abs=1e-15)
        assert report.arch_alpha_count == 1
        rebuilt = -(1 / 6) * (sqrt(3) / 2) * report.predicted_c_phi
        assert rebuilt == pytest.approx(report.total, abs=1e-12)
