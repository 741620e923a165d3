"""Exact polynomial ring, Wirtinger differentiation, Gaussian expectations."""

import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cwchaos.cgauss import GaussianSpec, sample
from cwchaos.cpoly import (
    CWPoly,
    QC_I,
    QC_ONE,
    RationalComplex,
    random_poly,
    rational_sigma,
)


def z(j=0, n=1):
    return CWPoly.variable(n, j)


def zb(j=0, n=1):
    return CWPoly.variable(n, j, conjugated=True)


def wick_expectation_oracle(poly: CWPoly) -> complex:
    """Independent moment oracle: enumerate z-to-zbar pairings per monomial.

    Uses nothing from the library's expectation code path; standard law
    (identity covariance), complex Wick rule.
    """
    total = 0j
    for (p, q), coeff in poly.terms.items():
        zs = [j for j, e in enumerate(p) for _ in range(e)]
        zbs = [j for j, e in enumerate(q) for _ in range(e)]
        if len(zs) != len(zbs):
            continue
        moment = 0
        for perm in itertools.permutations(range(len(zbs))):
            if all(zs[a] == zbs[b] for a, b in enumerate(perm)):
                moment += 1
        total += coeff.to_complex() * moment
    return total


class TestRationalComplex:
    def test_ring_ops(self):
        a = RationalComplex(Fraction(1, 2), Fraction(-3))
        b = RationalComplex(Fraction(2), Fraction(1, 3))
        assert a + b == RationalComplex(Fraction(5, 2), Fraction(-8, 3))
        assert a * b == RationalComplex(Fraction(2), Fraction(1, 6) - Fraction(6))

    def test_division_inverts(self):
        a = RationalComplex(Fraction(3, 7), Fraction(5, 2))
        assert a / a == QC_ONE
        with pytest.raises(ZeroDivisionError):
            a / RationalComplex(Fraction(0), Fraction(0))

    def test_conjugation_and_abs_sq(self):
        a = RationalComplex(Fraction(2), Fraction(-5))
        assert a.conjugate().im == Fraction(5)
        assert a.abs_sq() == Fraction(29)

    def test_float_round_trip_is_exact(self):
        v = 0.1 + 0.7j  # binary floats convert exactly to rationals
        assert RationalComplex.from_complex(v).to_complex() == v


class TestArithmetic:
    def test_mul_z_zbar(self):
        prod = z() * zb()
        assert prod.terms == {((1,), (1,)): QC_ONE}

    def test_conj_swaps_exponents(self):
        f = z() * z() - CWPoly.one(1)
        assert f.conj() == zb() * zb() - CWPoly.one(1)

    def test_scale_by_i_then_conj(self):
        f = z().scale(QC_I)
        assert f.conj() == zb().scale(-QC_I)

    def test_variable_count_mismatch(self):
        with pytest.raises(ValueError):
            z(0, 1) + z(0, 2)

    def test_pow(self):
        assert z() ** 3 == z() * z() * z()
        assert z() ** 0 == CWPoly.one(1)

    @given(st.integers(0, 100), st.integers(0, 100), st.integers(0, 100))
    @settings(max_examples=30, deadline=None)
    def test_ring_laws(self, sa, sb, sc):
        rng = np.random.default_rng(10_000 + sa * 101 + sb * 13 + sc)
        n = int(rng.integers(1, 3))
        a = random_poly(rng, n, 3)
        b = random_poly(rng, n, 3)
        c = random_poly(rng, n, 3)
        assert a * (b + c) == a * b + a * c
        assert (a * b) * c == a * (b * c)
        assert a + b == b + a
        assert (a * b).conj() == a.conj() * b.conj()
        assert a.conj().conj() == a


class TestWirtingerDiff:
    def test_formal_rule(self):
        f = z() * z() * zb()
        assert f.diff(0) == (z() * zb()).scale(2)

    def test_holomorphic_kills_conjugate_slot(self):
        assert (z() * z()).diff(0, conjugated=True).is_zero

    def test_mixed(self):
        f = z() * zb() - CWPoly.one(1)
        assert f.diff(0, conjugated=True) == z()

    def test_partials_commute(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            f = random_poly(rng, 2, 4)
            assert f.diff(0).diff(1, conjugated=True) == f.diff(1, conjugated=True).diff(0)


class TestGaussianExpectation:
    def test_spec_values(self):
        assert (z() * zb()).gaussian_expectation() == QC_ONE
        assert (z() ** 2 * zb() ** 2).gaussian_expectation() == RationalComplex.of(2)
        f = z(0, 2) ** 2 * zb(1, 2) ** 2
        assert f.gaussian_expectation().is_zero

    def test_pure_powers_vanish(self):
        assert (z() ** 3).gaussian_expectation().is_zero
        assert (zb() ** 2).gaussian_expectation().is_zero

    def test_against_pairing_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            f = random_poly(rng, int(rng.integers(1, 4)), 4)
            lib = f.gaussian_expectation().to_complex()
            assert lib == wick_expectation_oracle(f)

    def test_conjugation_property(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            f = random_poly(rng, 2, 4)
            assert f.conj().gaussian_expectation() == f.gaussian_expectation().conjugate()

    def test_self_product_nonnegative(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            f = random_poly(rng, 2, 4)
            val = (f * f.conj()).gaussian_expectation()
            assert val.is_real and val.re >= 0

    def test_expect_product_matches_full_expansion(self):
        rng = np.random.default_rng(14)
        for _ in range(40):
            f = random_poly(rng, 2, 4)
            g = random_poly(rng, 2, 4)
            assert f.expect_product(g) == (f * g.conj()).gaussian_expectation()

    def test_covariance_route_reduces_to_standard(self):
        rng = np.random.default_rng(15)
        eye = rational_sigma(np.eye(2))
        for _ in range(20):
            f = random_poly(rng, 2, 4)
            assert f.gaussian_expectation_cov(eye) == f.gaussian_expectation()

    def test_covariance_route_scalar_scaling(self):
        # E[|Z|^(2p)] = p! sigma^(2p) for CN(0, sigma^2)
        sig = rational_sigma(np.array([[4.0]]))
        for p in range(4):
            f = z() ** p * zb() ** p
            expected = Fraction(math.factorial(p)) * Fraction(4) ** p
            assert f.gaussian_expectation_cov(sig) == RationalComplex.of(expected)

    def test_monte_carlo_agreement(self):
        """Exact expectations sit within 4 standard errors of sample means."""
        rng = np.random.default_rng(16)
        count = 1_000_000
        for trial in range(20):
            n = int(rng.integers(1, 4))
            f = random_poly(rng, n, 4)
            exact = f.gaussian_expectation().to_complex()
            pts = sample(GaussianSpec.standard(n), count, seed=500 + trial)
            vals = f.evaluate_batch(pts)
            mean = vals.mean()
            se = float(np.sqrt(np.mean(np.abs(vals - mean) ** 2) / count))
            assert abs(mean - exact) <= 4 * se + 1e-12


class TestEvaluation:
    def test_spec_examples(self):
        f = z() * zb() - CWPoly.one(1)
        assert f.evaluate([1 + 1j]) == pytest.approx(1.0)
        assert (z() ** 2).evaluate([1j]) == pytest.approx(-1.0)
        c = CWPoly.constant(1, Fraction(3, 2))
        assert c.evaluate([123 - 4j]) == pytest.approx(1.5)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(17)
        f = random_poly(rng, 2, 4)
        pts = (rng.standard_normal((8, 2)) + 1j * rng.standard_normal((8, 2)))
        batch = f.evaluate_batch(pts)
        for i in range(8):
            assert batch[i] == pytest.approx(f.evaluate(pts[i]), rel=1e-12, abs=1e-12)

    def test_substitute(self):
        phi = z() * zb()                      # w -> |w|^2
        inner = z(0, 1) * z(0, 1)             # w = z^2
        composed = phi.substitute([inner])    # |z^2|^2 = z^2 zb^2
        assert composed == z() ** 2 * zb() ** 2


class TestInterchange:
    def test_round_trip(self):
        rng = np.random.default_rng(18)
        for _ in range(20):
            f = random_poly(rng, int(rng.integers(1, 4)), 4)
            assert CWPoly.from_json(f.to_json()) == f

    def test_format_shape(self):
        f = z().scale(RationalComplex(Fraction(1, 2), Fraction(-2, 3)))
        doc = f.to_json_dict()
        assert doc["n"] == 1
        assert doc["terms"] == [{"p": [1], "q": [0], "re": "1/2", "im": "-2/3"}]

    def test_rejects_negative_exponents(self):
        doc = {"n": 1, "terms": [{"p": [-1], "q": [0], "re": "1", "im": "0"}]}
        with pytest.raises(ValueError):
            CWPoly.from_json_dict(doc)

    def test_rejects_duplicate_monomials(self):
        doc = {
            "n": 1,
            "terms": [
                {"p": [1], "q": [0], "re": "1", "im": "0"},
                {"p": [1], "q": [0], "re": "2", "im": "0"},
            ],
        }
        with pytest.raises(ValueError):
            CWPoly.from_json_dict(doc)
