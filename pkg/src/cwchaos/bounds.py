"""Fourth-moment bounds on the Wasserstein distance to complex Gaussian laws.

Two routes are provided and cross-checked:

- the carre-du-champ route (exact): 2 c(Sigma) sqrt( int ||Gamma(conj F,
  -L^-1 F)||_HS^2 + int ||Gamma(F, -L^-1 F) - Sigma||_HS^2 ), evaluated in
  rational arithmetic with a single float conversion at the final root;
- the moment route: c(Sigma) sqrt(Psi_1 + Psi_2 + Psi_3) from second and
  fourth absolute moments, available both exactly (symbolic moments) and
  stochastically (sample moments with propagated standard errors).

Psi_2 subtlety: the moment bound's middle term uses the *squared* second
moment, Psi_2 = sum_{j,k} sqrt( E|F_j|^4 ( E|F_k|^4 / 2 - (E|F_k|^2)^2 ) );
the unsquared variant fails the requirement that exact Gaussian moments give
Psi_2 = 0 (sigma^4 vs sigma^2), and the variance identity behind the bound
forces the square.

Scaled components: a chaotic vector may carry exact squared scales s_j (the
component is poly_j * sqrt(s_j)); all quantities here involve even powers of
each scale except the cross moments E[F_j conj(F_k)], which are exact
whenever s_j s_k is a perfect rational square or the unscaled moment
vanishes.  Anything else raises :class:`ExactnessError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .cpoly import CWPoly, QC_ZERO, RationalComplex, rational_sigma
from .hermite import to_hermite
from .ou import ChaoticVector, apply_L_inverse, gamma
from .stein import stein_constant

EPS_CLIP_DEFAULT = 1e-12


class ExactnessError(ValueError):
    """Raised when a requested exact quantity would leave rational arithmetic."""


def sqrt_bounds(x: Fraction, digits: int) -> tuple[Fraction, Fraction]:
    """Rational lower/upper bounds on sqrt(x) accurate to ~10^-digits."""
    if x < 0:
        raise ValueError("negative radicand")
    scale = 10 ** digits
    # sqrt(a/b) = sqrt(a b)/b; isqrt gives the floor at integer resolution.
    root = math.isqrt(x.numerator * x.denominator * scale * scale)
    return (
        Fraction(root, x.denominator * scale),
        Fraction(root + 1, x.denominator * scale),
    )


def exact_sqrt(x: Fraction) -> Fraction | None:
    """sqrt(x) when x is a perfect rational square, else None."""
    if x < 0:
        return None
    rn = math.isqrt(x.numerator)
    rd = math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


def leq_with_sqrt_sum(
    lhs: Fraction, base: Fraction, radicands: Sequence[Fraction]
) -> bool:
    """Decide lhs <= base + sum_i sqrt(r_i) in exact arithmetic.

    Perfect squares are folded into ``base``; the rest are bracketed by
    rational bounds refined until the comparison is decided.
    """
    pending = []
    for r in radicands:
        root = exact_sqrt(r)
        if root is not None:
            base += root
        elif r > 0:
            pending.append(r)
    if not pending:
        return lhs <= base
    for digits in (24, 48, 96, 192):
        lo = base + sum(sqrt_bounds(r, digits)[0] for r in pending)
        if lhs <= lo:
            return True
        hi = base + sum(sqrt_bounds(r, digits)[1] for r in pending)
        if lhs > hi:
            return False
    raise ArithmeticError("comparison undecided at 192 digits; inputs are degenerate")


def _pair_scale_root(s1: Fraction, s2: Fraction) -> Fraction | None:
    return exact_sqrt(s1 * s2)


@dataclass(frozen=True)
class MomentSummary:
    """Second and fourth absolute moments of a complex random vector.

    ``second_moments[j, k] = E[F_j conj(F_k)]`` (Hermitian) and
    ``abs4[j, k] = E|F_j F_k|^2`` (symmetric, nonnegative).  The exact
    payloads are present on the symbolic route; the standard errors on the
    Monte Carlo route.
    """

    d: int
    second_moments: np.ndarray
    abs4: np.ndarray
    gram_sq: np.ndarray | None = None
    exact_m2: Mapping[tuple[int, int], RationalComplex] | None = None
    exact_abs4: Mapping[tuple[int, int], Fraction] | None = None
    m2_se: np.ndarray | None = None
    abs4_se: np.ndarray | None = None

    @property
    def is_exact(self) -> bool:
        return self.exact_m2 is not None and self.exact_abs4 is not None


def exact_moments(F: ChaoticVector, with_gram_sq: bool = True) -> MomentSummary:
    """Exact moment summary of a chaotic vector via symbolic expectations."""
    d = F.d
    m2: dict[tuple[int, int], RationalComplex] = {}
    a4: dict[tuple[int, int], Fraction] = {}
    for j in range(d):
        fj = F.components[j].poly
        for k in range(d):
            fk = F.components[k].poly
            raw = fj.expect_product(fk)
            pair_scale = F.scales_sq[j] * F.scales_sq[k]
            if raw.is_zero:
                m2[(j, k)] = QC_ZERO
            else:
                root = exact_sqrt(pair_scale)
                if root is None:
                    raise ExactnessError(
                        f"cross moment ({j},{k}) needs sqrt({pair_scale}); "
                        "rescale the components or use the Monte Carlo route"
                    )
                m2[(j, k)] = raw * RationalComplex.of(root)
            prod = fj * fk
            quart = prod.expect_product(prod)
            assert quart.is_real
            a4[(j, k)] = quart.re * pair_scale
    gram = None
    if with_gram_sq:
        gram_vals = []
        for k in range(d):
            fk = F.components[k].poly
            g = gamma(fk, apply_L_inverse(fk).scale(-1))
            val = (g * g).gaussian_expectation() * RationalComplex.of(
                F.scales_sq[k] ** 2
            )
            gram_vals.append(val.to_complex())
        gram = np.asarray(gram_vals)
    sm = np.array(
        [[m2[(j, k)].to_complex() for k in range(d)] for j in range(d)]
    )
    ab = np.array([[float(a4[(j, k)]) for k in range(d)] for j in range(d)])
    return MomentSummary(
        d=d, second_moments=sm, abs4=ab, gram_sq=gram, exact_m2=m2, exact_abs4=a4
    )


def mc_moments(samples: np.ndarray) -> MomentSummary:
    """Moment summary estimated from a (N, d) complex sample matrix."""
    samples = np.asarray(samples, dtype=np.complex128)
    n, d = samples.shape
    sm = np.empty((d, d), dtype=np.complex128)
    ab = np.empty((d, d))
    sm_se = np.empty((d, d))
    ab_se = np.empty((d, d))
    for j in range(d):
        for k in range(d):
            prod2 = samples[:, j] * np.conj(samples[:, k])
            sm[j, k] = prod2.mean()
            sm_se[j, k] = math.sqrt(np.mean(np.abs(prod2 - prod2.mean()) ** 2) / n)
            prod4 = np.abs(samples[:, j] * samples[:, k]) ** 2
            ab[j, k] = prod4.mean()
            ab_se[j, k] = prod4.std(ddof=1) / math.sqrt(n)
    return MomentSummary(
        d=d, second_moments=sm, abs4=ab, m2_se=sm_se, abs4_se=ab_se
    )


@dataclass(frozen=True)
class PsiTerms:
    """The three moment discrepancies entering the bound, with provenance."""

    psi1: float
    psi2: float
    psi3: float
    psi1_exact: Fraction | None = None
    psi3_exact: Fraction | None = None
    psi2_radicands: tuple[Fraction, ...] | None = None   # exact route, row-major
    se: float | None = None                              # MC route, on psi1+psi2+psi3

    @property
    def total(self) -> float:
        return self.psi1 + self.psi2 + self.psi3


def _psi_exact(moments: MomentSummary, sigma: np.ndarray) -> PsiTerms:
    d = moments.d
    sig = rational_sigma(sigma)
    psi1 = Fraction(0)
    psi3 = Fraction(0)
    radicands: list[Fraction] = []
    psi2 = 0.0
    for j in range(d):
        for k in range(d):
            diff = moments.exact_m2[(j, k)] - sig[j][k]
            psi1 += diff.abs_sq()
            m2jj = moments.exact_m2[(j, j)]
            m2kk = moments.exact_m2[(k, k)]
            assert m2jj.is_real and m2kk.is_real
            rad = moments.exact_abs4[(j, j)] * (
                moments.exact_abs4[(k, k)] / 2 - m2kk.re * m2kk.re
            )
            radicands.append(rad)
            if rad < 0:
                raise ExactnessError(
                    f"negative Psi_2 radicand {rad} on the exact route; "
                    "the input cannot be chaotic"
                )
            psi2 += math.sqrt(rad)
            psi3 += (
                moments.exact_abs4[(j, k)]
                - m2jj.re * m2kk.re
                - moments.exact_m2[(j, k)].abs_sq()
            )
    return PsiTerms(
        psi1=float(psi1),
        psi2=psi2,
        psi3=float(psi3),
        psi1_exact=psi1,
        psi3_exact=psi3,
        psi2_radicands=tuple(radicands),
    )


def _psi_mc(moments: MomentSummary, sigma: np.ndarray, eps_clip: float) -> PsiTerms:
    d = moments.d
    sm, ab = moments.second_moments, moments.abs4
    sm_se = moments.m2_se if moments.m2_se is not None else np.zeros((d, d))
    ab_se = moments.abs4_se if moments.abs4_se is not None else np.zeros((d, d))
    psi1 = psi2 = psi3 = 0.0
    var1 = var2 = var3 = 0.0
    for j in range(d):
        for k in range(d):
            diff = sm[j, k] - sigma[j, k]
            psi1 += abs(diff) ** 2
            var1 += (2 * abs(diff) * sm_se[j, k]) ** 2
            rad = ab[j, j] * (ab[k, k] / 2 - sm[k, k].real ** 2)
            rad_se = math.sqrt(
                (ab_se[j, j] * (ab[k, k] / 2 - sm[k, k].real ** 2)) ** 2
                + (ab[j, j] * ab_se[k, k] / 2) ** 2
                + (ab[j, j] * 2 * sm[k, k].real * sm_se[k, k]) ** 2
            )
            # Sampling noise may push a vanishing radicand slightly negative;
            # anything beyond the statistical allowance is a real violation.
            allowance = max(eps_clip, 4.0 * rad_se)
            if rad < -allowance:
                raise ValueError(f"Psi_2 radicand {rad} negative beyond {allowance}")
            rad = max(rad, 0.0)
            root = math.sqrt(rad)
            psi2 += root
            var2 += (rad_se / (2 * root)) ** 2 if root > 0 else rad_se
            psi3 += ab[j, k] - sm[j, j].real * sm[k, k].real - abs(sm[j, k]) ** 2
            var3 += (
                ab_se[j, k] ** 2
                + (sm[k, k].real * sm_se[j, j]) ** 2
                + (sm[j, j].real * sm_se[k, k]) ** 2
                + (2 * abs(sm[j, k]) * sm_se[j, k]) ** 2
            )
    return PsiTerms(
        psi1=psi1, psi2=psi2, psi3=psi3, se=math.sqrt(var1 + var2 + var3)
    )


def psi_terms(
    moments: MomentSummary, sigma: np.ndarray, eps_clip: float = EPS_CLIP_DEFAULT
) -> PsiTerms:
    sigma = np.asarray(sigma, dtype=np.complex128).reshape(moments.d, moments.d)
    if moments.is_exact:
        return _psi_exact(moments, sigma)
    return _psi_mc(moments, sigma, eps_clip)


@dataclass(frozen=True)
class BoundReport:
    """All bound quantities for one experiment point."""

    psi1: float
    psi2: float
    psi3: float
    thm4_bound: float
    c_sigma: float
    thm1_bound: float | None = None
    empirical_w1: float | None = None
    w1_se: float | None = None
    n_label: int | str | None = None
    bound_se: float | None = None
    psi1_exact: Fraction | None = None
    psi3_exact: Fraction | None = None
    psi2_radicands: tuple[Fraction, ...] | None = None
    gamma_integrals: tuple[Fraction, Fraction] | None = None

    def to_json_dict(self) -> dict:
        return {
            "n_label": self.n_label,
            "psi1": self.psi1,
            "psi2": self.psi2,
            "psi3": self.psi3,
            "thm4_bound": self.thm4_bound,
            "thm1_bound": self.thm1_bound,
            "c_sigma": self.c_sigma,
            "empirical_w1": self.empirical_w1,
            "w1_se": self.w1_se,
        }


def moment_bound(
    moments: MomentSummary,
    sigma: np.ndarray,
    n_label: int | str | None = None,
    eps_clip: float = EPS_CLIP_DEFAULT,
) -> BoundReport:
    """Moment-route Wasserstein bound c(Sigma) sqrt(Psi_1 + Psi_2 + Psi_3)."""
    sigma = np.asarray(sigma, dtype=np.complex128).reshape(moments.d, moments.d)
    psis = psi_terms(moments, sigma, eps_clip)
    c = stein_constant(sigma)
    bound = c * math.sqrt(psis.total)
    bound_se = None
    if psis.se is not None and psis.total > 0:
        bound_se = c * psis.se / (2 * math.sqrt(psis.total))
    return BoundReport(
        psi1=psis.psi1,
        psi2=psis.psi2,
        psi3=psis.psi3,
        thm4_bound=bound,
        c_sigma=c,
        n_label=n_label,
        bound_se=bound_se,
        psi1_exact=psis.psi1_exact,
        psi3_exact=psis.psi3_exact,
        psi2_radicands=psis.psi2_radicands,
    )


def gamma_integrals_exact(
    F: ChaoticVector, sigma: np.ndarray
) -> tuple[Fraction, Fraction]:
    """The two exact carre-du-champ integrals of the distance bound.

    Returns (sum_jk int |Gamma(conj F_j, -L^-1 F_k)|^2,
             sum_jk int |Gamma(F_j, -L^-1 F_k) - sigma_jk|^2).
    """
    d = F.d
    sig = rational_sigma(sigma)
    conj_side = Fraction(0)
    centered_side = Fraction(0)
    inverses = [apply_L_inverse(c.poly).scale(-1) for c in F.components]
    for j in range(d):
        fj = F.components[j].poly
        for k in range(d):
            pair_scale = F.scales_sq[j] * F.scales_sq[k]
            g_conj = gamma(fj.conj(), inverses[k])
            val = g_conj.expect_product(g_conj)
            assert val.is_real
            conj_side += val.re * pair_scale
            g = gamma(fj, inverses[k])
            # |sqrt(s) g - sigma|^2 = s |g|^2 - 2 Re(sqrt(s) int g conj(sigma)) + |sigma|^2
            g_sq = g.expect_product(g)
            g_mean = g.gaussian_expectation()
            assert g_sq.is_real
            cross = g_mean * sig[j][k].conjugate()
            if cross.is_zero:
                cross_term = Fraction(0)
            else:
                root = _pair_scale_root(F.scales_sq[j], F.scales_sq[k])
                if root is None:
                    raise ExactnessError(
                        f"Gamma cross term ({j},{k}) needs sqrt({pair_scale})"
                    )
                cross_term = 2 * root * cross.re
            centered_side += g_sq.re * pair_scale - cross_term + sig[j][k].abs_sq()
    return conj_side, centered_side


def gamma_bound_exact(
    F: ChaoticVector, sigma: np.ndarray, n_label: int | str | None = None
) -> BoundReport:
    """Carre-du-champ-route bound 2 c(Sigma) sqrt(g1 + g2), plus moment terms.

    Exact rational integrals with a single float conversion at the root.
    The moment-route quantities are filled in from exact moments so one
    report carries both bounds; note the two routes carry their printed
    prefactors (2 c(Sigma) here, c(Sigma) for the moment route).
    """
    if not F.is_centered():
        raise ValueError("the distance bound requires centered components")
    sigma = np.asarray(sigma, dtype=np.complex128).reshape(F.d, F.d)
    g1, g2 = gamma_integrals_exact(F, sigma)
    c = stein_constant(sigma)
    thm1 = 2 * c * math.sqrt(float(g1 + g2))
    report = moment_bound(exact_moments(F), sigma, n_label=n_label)
    return BoundReport(
        psi1=report.psi1,
        psi2=report.psi2,
        psi3=report.psi3,
        thm4_bound=report.thm4_bound,
        c_sigma=c,
        thm1_bound=thm1,
        n_label=n_label,
        psi1_exact=report.psi1_exact,
        psi3_exact=report.psi3_exact,
        psi2_radicands=report.psi2_radicands,
        gamma_integrals=(g1, g2),
    )


def proof_chain_holds(F: ChaoticVector, sigma: np.ndarray) -> bool:
    """Exact check that the Gamma integrals are dominated by the Psi terms.

    This is the inequality chain that turns the carre-du-champ bound into
    the moment bound; it is decided in rational arithmetic (square roots
    bracketed to rational bounds as needed).
    """
    g1, g2 = gamma_integrals_exact(F, sigma)
    psis = psi_terms(exact_moments(F), sigma)
    base = psis.psi1_exact + psis.psi3_exact
    return leq_with_sqrt_sum(g1 + g2, base, psis.psi2_radicands)


def wick_fourth_moment(sigma: np.ndarray, j: int, k: int) -> float:
    """E|Z_j Z_k|^2 for Z ~ CN(0, sigma): sigma_jj sigma_kk + |sigma_jk|^2."""
    sigma = np.asarray(sigma, dtype=np.complex128)
    return float(
        sigma[j, j].real * sigma[k, k].real + abs(sigma[j, k]) ** 2
    )


@dataclass(frozen=True)
class ConvergenceVerdict:
    labels: tuple
    second_moment_gaps: tuple[float, ...]
    fourth_moment_gaps: tuple[float, ...]
    decreasing: bool
    final_below_threshold: bool
    threshold: float

    @property
    def converging(self) -> bool:
        return self.decreasing and self.final_below_threshold


def convergence_diagnostic(
    sequence: Sequence[tuple[int | str, MomentSummary]],
    sigma: np.ndarray,
    threshold: float = 1.0,
) -> ConvergenceVerdict:
    """Fourth-moment convergence criterion along a sequence of summaries.

    Tracks max-entry gaps |E F_j conj(F_k) - sigma_jk| and
    |E|F_j F_k|^2 - E|Z_j Z_k|^2| and reports "converging" iff both gap
    sequences are non-increasing and end below the threshold.
    """
    if len(sequence) < 2:
        raise ValueError("need at least two sequence points")
    sigma = np.asarray(sigma, dtype=np.complex128)
    d = sequence[0][1].d
    labels = tuple(label for label, _ in sequence)
    g2: list[float] = []
    g4: list[float] = []
    for _, moments in sequence:
        g2.append(float(np.max(np.abs(moments.second_moments - sigma))))
        wick = np.array([[wick_fourth_moment(sigma, j, k) for k in range(d)] for j in range(d)])
        g4.append(float(np.max(np.abs(moments.abs4 - wick))))
    dec = all(b <= a + 1e-15 for a, b in zip(g2, g2[1:])) and all(
        b <= a + 1e-15 for a, b in zip(g4, g4[1:])
    )
    below = g2[-1] <= threshold and g4[-1] <= threshold
    return ConvergenceVerdict(
        labels=labels,
        second_moment_gaps=tuple(g2),
        fourth_moment_gaps=tuple(g4),
        decreasing=dec,
        final_below_threshold=below,
        threshold=threshold,
    )


def eigenspace_pair_defect(F: ChaoticVector, j: int) -> Fraction:
    """Exact value of int pi_{2 lam}(F_j^2) pi_{2 lam}(conj(F_j)^2) - 2 (int |F_j|^2)^2.

    The quantity whose vanishing (along equal-eigenvalue subsequences) lets
    marginal Gaussian limits combine into a joint one.
    """
    comp = F.components[j]
    lam2 = 2 * comp.eigenvalue
    sq = comp.poly * comp.poly
    projected = to_hermite(sq).project(lam2).to_poly()
    first = projected.expect_product(projected)
    assert first.is_real
    m2 = comp.poly.expect_product(comp.poly)
    assert m2.is_real
    s = F.scales_sq[j]
    return first.re * s * s - 2 * (m2.re * s) ** 2


@dataclass(frozen=True)
class JointConvergenceReport:
    labels: tuple
    marginal_verdicts: tuple[bool, ...]
    pair_defects: dict
    hypothesis_ok: bool
    joint_verdict: bool


def joint_convergence_diagnostic(
    sequence: Sequence[tuple[int | str, ChaoticVector]],
    sigma: np.ndarray,
    threshold: float = 1.0,
) -> JointConvergenceReport:
    """Componentwise fourth-moment criteria plus the equal-eigenvalue check.

    Marginal verdicts follow the scalar criterion per component; for pairs
    of components sharing an eigenvalue the eigenspace pair defect must also
    decrease below the threshold, and then the joint verdict is the
    conjunction of the marginal ones.
    """
    sigma = np.asarray(sigma, dtype=np.complex128)
    labels = tuple(label for label, _ in sequence)
    d = sequence[0][1].d
    marginals = []
    for j in range(d):
        sub_sigma = sigma[j:j + 1, j:j + 1]
        summaries = []
        for label, F in sequence:
            comp = ChaoticVector((F.components[j],), (F.scales_sq[j],))
            summaries.append((label, exact_moments(comp, with_gram_sq=False)))
        marginals.append(convergence_diagnostic(summaries, sub_sigma, threshold).converging)
    defects: dict[tuple, list[Fraction]] = {}
    final = sequence[-1][1]
    for j in range(d):
        for k in range(j + 1, d):
            if final.components[j].eigenvalue == final.components[k].eigenvalue:
                for idx in (j, k):
                    defects[(j, k, idx)] = [
                        eigenspace_pair_defect(F, idx) for _, F in sequence
                    ]
    hypothesis_ok = all(
        all(b <= a for a, b in zip(vals, vals[1:])) and abs(vals[-1]) <= threshold
        for vals in defects.values()
    )
    joint = hypothesis_ok and all(marginals)
    return JointConvergenceReport(
        labels=labels,
        marginal_verdicts=tuple(marginals),
        pair_defects={k: [float(v) for v in vals] for k, vals in defects.items()},
        hypothesis_ok=hypothesis_ok,
        joint_verdict=joint,
    )
