"""Complex Hermite polynomials: sum formula vs weight-derivative oracle,
orthonormality, conjugation symmetry, expansion round trips."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from cwchaos.cpoly import CWPoly, QC_ONE, RationalComplex, random_poly
from cwchaos.hermite import (
    HermiteExpansion,
    from_hermite,
    hermite_norm_sq,
    hermite_poly,
    hermite_product,
    phi_basis_element,
    to_hermite,
)


def rodrigues_oracle(p: int, q: int) -> CWPoly:
    """(-1)^(p+q) e^{|z|^2} d_zbar^p d_z^q e^{-|z|^2}, by formal differentiation.

    Represents P(z, zbar) e^{-z zbar} through its polynomial factor only:
    d_z maps P to dP/dz - zbar P, and d_zbar to dP/dzbar - z P.  Independent
    of the library's explicit-sum implementation.

    Operator assignment: the index convention with leading monomial
    z^p zbar^q (and H_{p,0} = z^p) pairs p with d_zbar and q with d_z; the
    transposed assignment generates the conjugate family H_{q,p} instead
    (both appear in the literature).
    """
    P = CWPoly.one(1)
    z = CWPoly.variable(1, 0)
    zbar = CWPoly.variable(1, 0, conjugated=True)
    for _ in range(q):
        P = P.diff(0) - zbar * P
    for _ in range(p):
        P = P.diff(0, conjugated=True) - z * P
    return P.scale((-1) ** (p + q))


class TestHermitePoly:
    def test_h_p0_is_monomial(self):
        for p in range(6):
            assert hermite_poly(p, 0) == CWPoly.variable(1, 0) ** p

    def test_spec_examples(self):
        z = CWPoly.variable(1, 0)
        zb = CWPoly.variable(1, 0, conjugated=True)
        assert hermite_poly(1, 0) == z
        assert hermite_poly(1, 1) == z * zb - CWPoly.one(1)
        assert hermite_poly(2, 1) == z ** 2 * zb - z.scale(2)

    def test_rodrigues_agreement_through_degree_8(self):
        for p in range(9):
            for q in range(9 - p):
                assert hermite_poly(p, q) == rodrigues_oracle(p, q), (p, q)

    def test_conjugation_swaps_indices(self):
        for p in range(5):
            for q in range(5):
                assert hermite_poly(p, q).conj() == hermite_poly(q, p)

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError):
            hermite_poly(-1, 0)

    def test_norm(self):
        for p in range(4):
            for q in range(4):
                h = hermite_poly(p, q)
                expected = Fraction(math.factorial(p) * math.factorial(q))
                assert h.expect_product(h) == RationalComplex.of(expected)


class TestBasisElements:
    def test_unnormalized_products(self):
        z1 = CWPoly.variable(2, 0)
        z2 = CWPoly.variable(2, 1)
        assert hermite_product((1, 1), (0, 0)) == z1 * z2
        assert hermite_norm_sq((1, 1), (0, 0)) == 1

    def test_spec_examples(self):
        el = phi_basis_element((1,), (0,))
        assert el.poly == CWPoly.variable(1, 0) and el.norm_sq == 1
        el2 = phi_basis_element((2,), (0,))
        assert el2.poly == CWPoly.variable(1, 0) ** 2 and el2.norm_sq == 2
        el3 = phi_basis_element((1, 1), (0, 0))
        assert el3.norm_sq == 1

    def test_normalized_evaluation(self):
        el = phi_basis_element((2,), (0,))
        assert el.evaluate([1 + 0j]) == pytest.approx(1 / math.sqrt(2))

    def test_normalized_inner_products_exact(self):
        el_a = phi_basis_element((2,), (1,))
        el_b = phi_basis_element((1,), (0,))
        assert el_a.inner(el_a) == QC_ONE
        assert el_a.inner(el_b).is_zero

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            hermite_product((1, 0), (1,))


class TestExpansion:
    def test_spec_examples(self):
        z = CWPoly.variable(1, 0)
        zb = CWPoly.variable(1, 0, conjugated=True)
        e = to_hermite(z * zb)
        assert e.coeffs == {
            ((1,), (1,)): QC_ONE,
            ((0,), (0,)): QC_ONE,
        }
        assert to_hermite(z).coeffs == {((1,), (0,)): QC_ONE}
        c = CWPoly.constant(1, Fraction(5, 3))
        assert to_hermite(c).coeffs == {((0,), (0,)): RationalComplex.of(Fraction(5, 3))}

    def test_round_trip(self):
        rng = np.random.default_rng(21)
        for _ in range(40):
            f = random_poly(rng, int(rng.integers(1, 4)), 5)
            assert from_hermite(to_hermite(f)) == f

    def test_coefficients_equal_gaussian_inner_products(self):
        """Expansion coefficients agree with E[f conj(H_a)] / ||H_a||^2.

        This pins the fast ladder route to the defining inner-product
        characterization of the orthonormal expansion.
        """
        rng = np.random.default_rng(22)
        for _ in range(15):
            n = int(rng.integers(1, 3))
            f = random_poly(rng, n, 4)
            expansion = to_hermite(f)
            deg = max(f.degree(), 0)
            singles = [
                combo
                for total in range(deg + 1)
                for combo in itertools.product(range(total + 1), repeat=n)
                if sum(combo) == total
            ]
            for mp in singles:
                for mq in singles:
                    if sum(mp) + sum(mq) > deg:
                        continue
                    h = hermite_product(mp, mq)
                    inner = f.expect_product(h)
                    norm = RationalComplex.of(hermite_norm_sq(mp, mq))
                    lib = expansion.coeffs.get((mp, mq))
                    if lib is None:
                        assert inner.is_zero
                    else:
                        assert inner == lib * norm

    def test_eigenvalue_bookkeeping(self):
        z = CWPoly.variable(1, 0)
        zb = CWPoly.variable(1, 0, conjugated=True)
        e = to_hermite(z * zb + z)
        assert e.support_eigenvalues() == {0, 1, 2}
        assert e.project(2).coeffs == {((1,), (1,)): QC_ONE}

    def test_phi_coeff_views(self):
        f = CWPoly.variable(1, 0) ** 2
        e = to_hermite(f)
        key = ((2,), (0,))
        assert e.phi_coeff_abs_sq(key) == Fraction(2)
        assert e.phi_coeff(key) == pytest.approx(math.sqrt(2))
        assert e.l2_norm_sq() == Fraction(2)
