"""Complex Hermite polynomials and the product eigenbasis of the number operator.

The bivariate-degree family H_{p,q}(z) = sum_{j=0}^{p^q} C(p,j) C(q,j) j!
(-1)^j z^(p-j) zbar^(q-j) is orthogonal under the standard complex Gaussian
with E|H_{p,q}|^2 = p! q!.  Products over independent coordinates span the
eigenspaces of the complex Ornstein-Uhlenbeck generator: the product indexed
by multi-indices (m_p, m_q) has eigenvalue |m_p| + |m_q|.

Exactness note: the orthonormalized basis element divides the raw product by
sqrt(prod m_p(j)! m_q(j)!), which is irrational in general.  To keep every
identity exact, expansions are stored over the *unnormalized* Hermite
products together with their exact integer squared norms; normalized
coefficients are derived views (their squared moduli are exact rationals,
their values are floats on demand).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .cpoly import CWPoly, Monomial, QC_ZERO, RationalComplex

HermiteKey = tuple[tuple[int, ...], tuple[int, ...]]


def hermite_poly(p: int, q: int) -> CWPoly:
    """The one-variable complex Hermite polynomial H_{p,q}.

    Explicit sum with the j = 0 term included (required for the leading
    monomial z^p zbar^q and for H_{p,0} = z^p); agreement with the
    Rodrigues-type weight derivative is enforced by the test suite.
    """
    if p < 0 or q < 0:
        raise ValueError("Hermite indices must be nonnegative")
    terms: dict[Monomial, RationalComplex] = {}
    for j in range(min(p, q) + 1):
        coeff = math.comb(p, j) * math.comb(q, j) * math.factorial(j) * (-1) ** j
        terms[((p - j,), (q - j,))] = RationalComplex.of(coeff)
    return CWPoly(1, terms)


def hermite_product(m_p: Sequence[int], m_q: Sequence[int]) -> CWPoly:
    """Unnormalized product prod_j H_{m_p(j), m_q(j)} in variable j."""
    if len(m_p) != len(m_q):
        raise ValueError("multi-index length mismatch")
    n = len(m_p)
    result = CWPoly.one(n)
    for j, (pj, qj) in enumerate(zip(m_p, m_q)):
        if pj == 0 and qj == 0:
            continue
        uni = hermite_poly(pj, qj)
        embedded: dict[Monomial, RationalComplex] = {}
        for ((a,), (b,)), coeff in uni.terms.items():
            pe = [0] * n
            qe = [0] * n
            pe[j] = a
            qe[j] = b
            embedded[(tuple(pe), tuple(qe))] = coeff
        result = result * CWPoly(n, embedded)
    return result


def hermite_norm_sq(m_p: Sequence[int], m_q: Sequence[int]) -> int:
    """E|prod_j H_{m_p(j), m_q(j)}|^2 = prod_j m_p(j)! m_q(j)!."""
    out = 1
    for pj, qj in zip(m_p, m_q):
        out *= math.factorial(pj) * math.factorial(qj)
    return out


@dataclass(frozen=True)
class NormalizedPoly:
    """A polynomial divided by the square root of an exact integer norm.

    Represents poly / sqrt(norm_sq) without leaving exact arithmetic; the
    division is applied only in float-valued views.
    """

    poly: CWPoly
    norm_sq: int

    def evaluate(self, point: Sequence[complex]) -> complex:
        return self.poly.evaluate(point) / math.sqrt(self.norm_sq)

    def inner(self, other: "NormalizedPoly") -> RationalComplex | complex:
        """E[self * conj(other)]; exact unless the norm product is a non-square."""
        raw = self.poly.expect_product(other.poly)
        if raw.is_zero:
            return raw
        prod = self.norm_sq * other.norm_sq
        root = math.isqrt(prod)
        if root * root == prod:
            return raw * RationalComplex(Fraction(1, root), Fraction(0))
        return raw.to_complex() / math.sqrt(prod)


def phi_basis_element(m_p: Sequence[int], m_q: Sequence[int]) -> NormalizedPoly:
    """Orthonormal eigenbasis element: Hermite product over sqrt of its norm."""
    return NormalizedPoly(hermite_product(m_p, m_q), hermite_norm_sq(m_p, m_q))


def _monomial_ladder(a: int, b: int) -> list[tuple[int, int, int]]:
    """Expansion z^a zbar^b = sum_j C(a,j) C(b,j) j! H_{a-j, b-j} per variable.

    Returns (p_index, q_index, integer coefficient) triples.
    """
    return [
        (a - j, b - j, math.comb(a, j) * math.comb(b, j) * math.factorial(j))
        for j in range(min(a, b) + 1)
    ]


@dataclass(frozen=True)
class HermiteExpansion:
    """Coefficients of a polynomial over the unnormalized Hermite products.

    ``coeffs`` maps (m_p, m_q) multi-index pairs to exact coefficients c so
    that the polynomial equals sum c * hermite_product(m_p, m_q).  The
    normalized-basis coefficient is c * sqrt(norm_sq); its squared modulus
    ``phi_coeff_abs_sq`` stays rational and is what exact computations use.
    """

    n: int
    coeffs: Mapping[HermiteKey, RationalComplex]

    def eigenvalue_of(self, key: HermiteKey) -> int:
        return sum(key[0]) + sum(key[1])

    def support_eigenvalues(self) -> set[int]:
        return {self.eigenvalue_of(k) for k in self.coeffs}

    def max_eigenvalue(self) -> int:
        return max(self.support_eigenvalues(), default=0)

    def project(self, eigenvalue: int) -> "HermiteExpansion":
        return HermiteExpansion(
            self.n,
            {k: c for k, c in self.coeffs.items() if self.eigenvalue_of(k) == eigenvalue},
        )

    def scaled_by_eigenvalue(self, factor) -> "HermiteExpansion":
        """New expansion with coefficient of eigenvalue lam multiplied by factor(lam)."""
        out: dict[HermiteKey, RationalComplex] = {}
        for key, coeff in self.coeffs.items():
            scaled = coeff * RationalComplex.of(factor(self.eigenvalue_of(key)))
            if not scaled.is_zero:
                out[key] = scaled
        return HermiteExpansion(self.n, out)

    def phi_coeff_abs_sq(self, key: HermiteKey) -> Fraction:
        """|coefficient over the orthonormal basis|^2, exact."""
        coeff = self.coeffs.get(key, QC_ZERO)
        return coeff.abs_sq() * hermite_norm_sq(*key)

    def phi_coeff(self, key: HermiteKey) -> complex:
        coeff = self.coeffs.get(key, QC_ZERO)
        return coeff.to_complex() * math.sqrt(hermite_norm_sq(*key))

    def l2_norm_sq(self) -> Fraction:
        return sum((self.phi_coeff_abs_sq(k) for k in self.coeffs), Fraction(0))

    def to_poly(self) -> CWPoly:
        result = CWPoly.zero(self.n)
        for (m_p, m_q), coeff in self.coeffs.items():
            result = result + hermite_product(m_p, m_q).scale(coeff)
        return result


def to_hermite(f: CWPoly) -> HermiteExpansion:
    """Exact Hermite-product expansion of a polynomial.

    Works monomial by monomial through the per-variable inverse ladder; the
    result coincides with computing exact Gaussian inner products against
    every basis element (asserted by tests), but costs only the tensor
    expansion of each monomial.
    """
    coeffs: dict[HermiteKey, RationalComplex] = {}
    for (p, q), coeff in f.terms.items():
        partial: list[tuple[tuple[int, ...], tuple[int, ...], int]] = [((), (), 1)]
        for a, b in zip(p, q):
            step = _monomial_ladder(a, b)
            partial = [
                (mp + (i,), mq + (j,), w * wj)
                for (mp, mq, w) in partial
                for (i, j, wj) in step
            ]
        for m_p, m_q, weight in partial:
            key = (m_p, m_q)
            add = coeff * RationalComplex.of(weight)
            cur = coeffs.get(key)
            total = add if cur is None else cur + add
            if total.is_zero:
                coeffs.pop(key, None)
            else:
                coeffs[key] = total
    return HermiteExpansion(f.n, coeffs)


def from_hermite(e: HermiteExpansion) -> CWPoly:
    return e.to_poly()
