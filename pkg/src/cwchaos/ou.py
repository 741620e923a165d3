"""Complex Ornstein-Uhlenbeck generator on polynomials over C^n.

Two interchangeable routes are provided for the generator L and the carre du
champ Gamma, and they must agree exactly:

- spectral route: expand over Hermite products and scale the coefficient of
  eigenvalue lam by -lam;
- differential route: L = sum_j [2 d_{z_j} d_{zbar_j} - z_j d_{z_j}
  - zbar_j d_{zbar_j}] (the real OU generator with invariant N(0, 1/2) per
  real coordinate, transported through d_x = d_z + d_zbar,
  d_y = i(d_z - d_zbar)).

Gamma is sesquilinear: 2 Gamma(f, g) = L(f conj(g)) - f L(conj g)
- conj(g) L(f), with the closed form sum_j [d_{z_j} f conj(d_{z_j} g)
+ d_{zbar_j} f conj(d_{zbar_j} g)].

Everything here is exact rational arithmetic end to end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cpoly import CWPoly, QC_ZERO, RationalComplex
from .hermite import HermiteExpansion, from_hermite, to_hermite


def apply_L(f: CWPoly, route: str = "differential") -> CWPoly:
    """Generator action L f.  Routes: "differential" (default) or "hermite"."""
    if route == "differential":
        out = CWPoly.zero(f.n)
        for j in range(f.n):
            z_j = CWPoly.variable(f.n, j)
            zb_j = CWPoly.variable(f.n, j, conjugated=True)
            out = out + f.diff(j).diff(j, conjugated=True).scale(2)
            out = out - z_j * f.diff(j)
            out = out - zb_j * f.diff(j, conjugated=True)
        return out
    if route == "hermite":
        return from_hermite(to_hermite(f).scaled_by_eigenvalue(lambda lam: -lam))
    raise ValueError(f"unknown route {route!r}")


def gamma(f: CWPoly, g: CWPoly, route: str = "closed") -> CWPoly:
    """Carre du champ Gamma(f, g).  Routes: "closed" (default) or "defining"."""
    if f.n != g.n:
        raise ValueError(f"variable count mismatch: {f.n} vs {g.n}")
    if route == "closed":
        out = CWPoly.zero(f.n)
        for j in range(f.n):
            out = out + f.diff(j) * g.diff(j).conj()
            out = out + f.diff(j, conjugated=True) * g.diff(j, conjugated=True).conj()
        return out
    if route == "defining":
        gc = g.conj()
        combo = apply_L(f * gc) - f * apply_L(gc) - gc * apply_L(f)
        return combo.scale(Fraction(1, 2))
    raise ValueError(f"unknown route {route!r}")


def apply_L_inverse(f: CWPoly) -> CWPoly:
    """Pseudo-inverse on exactly centered inputs: L(L^{-1} f) = f.

    Scales the eigenvalue-lam Hermite coefficients by -1/lam.  Centering is
    the caller's job; a nonzero mean is rejected rather than subtracted.
    """
    expansion = to_hermite(f)
    zero_key = ((0,) * f.n, (0,) * f.n)
    mean = expansion.coeffs.get(zero_key, QC_ZERO)
    if not mean.is_zero:
        raise ValueError("apply_L_inverse requires an exactly centered input")
    return from_hermite(
        expansion.scaled_by_eigenvalue(lambda lam: Fraction(-1, lam) if lam else 0)
    )


def project(f: CWPoly, eigenvalue: int) -> CWPoly:
    """Orthogonal projection onto the eigenspace of the given eigenvalue."""
    if eigenvalue < 0:
        raise ValueError("eigenvalue must be nonnegative")
    return from_hermite(to_hermite(f).project(eigenvalue))


@dataclass(frozen=True)
class Eigenfunction:
    """A polynomial supported on a single eigenspace, with its eigenvalue."""

    poly: CWPoly
    eigenvalue: int

    def __post_init__(self):
        support = to_hermite(self.poly).support_eigenvalues()
        if support and support != {self.eigenvalue}:
            raise ValueError(
                f"polynomial is not a pure eigenfunction: support {sorted(support)}"
            )

    @property
    def n(self) -> int:
        return self.poly.n


def eigenfunction(poly: CWPoly) -> Eigenfunction:
    """Wrap a polynomial as an eigenfunction, inferring the eigenvalue."""
    support = to_hermite(poly).support_eigenvalues()
    if len(support) > 1:
        raise ValueError(f"mixed eigenspace support {sorted(support)}")
    return Eigenfunction(poly, support.pop() if support else 0)


def is_jointly_chaotic(f1: Eigenfunction, f2: Eigenfunction) -> bool:
    """Both products f1*f2 and f1*conj(f2) expand over eigenvalues <= lam1+lam2."""
    if f1.n != f2.n:
        raise ValueError("variable count mismatch")
    cap = f1.eigenvalue + f2.eigenvalue
    for product in (f1.poly * f2.poly, f1.poly * f2.poly.conj()):
        if any(lam > cap for lam in to_hermite(product).support_eigenvalues()):
            return False
    return True


@dataclass(frozen=True)
class ChaoticVector:
    """Vector of pairwise jointly chaotic eigenfunctions over a shared C^n.

    ``scales_sq`` carries an optional exact squared scalar per component: the
    represented component is poly_j * sqrt(scales_sq[j]).  Bound computations
    only ever need even powers of the scale, so exactness is preserved (the
    normalization 1/sqrt(n) of averaged families is the motivating case).
    """

    components: tuple[Eigenfunction, ...]
    scales_sq: tuple[Fraction, ...] = ()

    def __post_init__(self):
        if not self.components:
            raise ValueError("empty chaotic vector")
        n = self.components[0].n
        if any(c.n != n for c in self.components):
            raise ValueError("components disagree on variable count")
        if not self.scales_sq:
            object.__setattr__(
                self, "scales_sq", tuple(Fraction(1) for _ in self.components)
            )
        elif len(self.scales_sq) != len(self.components):
            raise ValueError("scales_sq length mismatch")
        for a in self.components:
            for b in self.components:
                if not is_jointly_chaotic(a, b):
                    raise ValueError("components are not jointly chaotic")

    @property
    def d(self) -> int:
        return len(self.components)

    @property
    def n(self) -> int:
        return self.components[0].n

    def is_centered(self) -> bool:
        return all(c.poly.gaussian_expectation().is_zero for c in self.components)


@dataclass(frozen=True)
class SpectralInequalityResult:
    """Exact values of the two-sided spectral inequality for one input."""

    lhs: Fraction    # integral of F (L + eta)^2 conj(F)
    mid: Fraction    # eta * integral of F (L + eta) conj(F)
    rhs: Fraction    # c * lhs
    c: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs <= self.mid <= self.rhs


def spectral_inequality(f: CWPoly, eta: Fraction) -> SpectralInequalityResult:
    """Two-sided bound between the first and second spectral-gap moments.

    For f supported on eigenvalues <= lam_max and eta >= lam_max:

        int f (L+eta)^2 conj(f)  <=  eta * int f (L+eta) conj(f)
                                 <=  c * int f (L+eta)^2 conj(f),

    with c = eta / min({eta - lam_k : lam_k in [0, lam_max]} minus {0}).
    The set-minus-zero convention drops the gap at eta itself; the eta
    factor in c is required for the upper bound to hold (single-eigenspace
    inputs make it sharp).
    """
    eta = Fraction(eta)
    expansion = to_hermite(f)
    lam_max = expansion.max_eigenvalue()
    if eta < lam_max:
        raise ValueError(f"eta={eta} below maximal eigenvalue {lam_max}")
    lhs = Fraction(0)
    first = Fraction(0)
    for key, _ in expansion.coeffs.items():
        lam = expansion.eigenvalue_of(key)
        weight = expansion.phi_coeff_abs_sq(key)
        lhs += weight * (eta - lam) ** 2
        first += weight * (eta - lam)
    gaps = {eta - Fraction(lam) for lam in range(lam_max + 1)} - {Fraction(0)}
    c = eta / min(gaps) if gaps else Fraction(0)
    return SpectralInequalityResult(lhs=lhs, mid=eta * first, rhs=c * lhs, c=c)


@dataclass(frozen=True)
class GammaMomentInequalityResult:
    """Exact values of the Gamma second-moment inequality for a chaotic pair."""

    lhs: Fraction    # integral of |Gamma(F1, F2)|^2
    rhs: Fraction    # (lam1 + lam2)/2 * integral of conj(F1) F2 Gamma(F1, F2)

    @property
    def holds(self) -> bool:
        return Fraction(0) <= self.rhs and self.lhs <= self.rhs


def gamma_moment_inequality(
    f1: Eigenfunction, f2: Eigenfunction
) -> GammaMomentInequalityResult:
    """int |Gamma(F1,F2)|^2 <= (lam1+lam2)/2 * int conj(F1) F2 Gamma(F1,F2).

    The right side is real and nonnegative (this is what makes it usable
    under a square root downstream); both sides are exact rationals.
    """
    if not is_jointly_chaotic(f1, f2):
        raise ValueError("inputs are not jointly chaotic")
    g = gamma(f1.poly, f2.poly)
    lhs = g.expect_product(g)
    rhs = (f1.poly.conj() * f2.poly * g).gaussian_expectation()
    if not (lhs.is_real and rhs.is_real):
        raise AssertionError("Gamma moment integrals must be real")
    half_sum = Fraction(f1.eigenvalue + f2.eigenvalue, 2)
    return GammaMomentInequalityResult(lhs=lhs.re, rhs=half_sum * rhs.re)
