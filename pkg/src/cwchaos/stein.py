"""Numerical solution of the complex Stein equation and its verification.

The solution for a smooth bounded test function h is the time integral

    U_h(z) = int_0^1 (1/2t) (E h(sqrt(t) z + sqrt(1-t) Z) - E h(Z)) dt,

computed after the substitution t = exp(-2s), which removes the 1/(2t)
singularity: the integrand becomes E h(e^-s z + sqrt(1-e^-2s) Z) - E h(Z)
on [0, s_max].  A single frozen Monte Carlo sample of Z is shared across all
quadrature nodes and across the AD pass, so U_h is a smooth deterministic
function of z and Wirtinger differentiation commutes with the estimator.

Sign convention: with U_h as above, the residual identity that holds is

    <grad U_h(z), zbar> + <gradbar U_h(z), z>
        - <gradbar grad U_h(z), conj(Sigma)>_HS
        - <grad gradbar U_h(z), Sigma>_HS  =  h(z) - E h(Z),

i.e. gradient terms positive (verified against exact Ornstein-Uhlenbeck
eigenfunction closed forms; the all-terms-negated variant is the same
characterization for the = 0 statement but is not solved by this U_h).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .cgauss import GaussianSpec, MCReport, generator, sample
from .cpoly import CWPoly, rational_sigma
from .wirtinger import JetField, WirtingerJet2, constant_like, seed_second_order

DEFAULT_TRUNCATION_EPS = 1e-6


def default_s_max(eps: float = DEFAULT_TRUNCATION_EPS) -> float:
    """Truncation horizon: the integrand tail decays like e^-s."""
    return 0.5 * math.log(1.0 / eps)


@dataclass(frozen=True)
class SteinSolverConfig:
    mc_samples: int = 200_000
    quadrature_nodes: int = 64
    s_max: float = default_s_max()
    seed: int = 0

    def __post_init__(self):
        if self.s_max <= 0:
            raise ValueError("s_max must be positive")
        if self.quadrature_nodes < 8:
            raise ValueError("need at least 8 quadrature nodes")


@dataclass(frozen=True)
class SteinTestFunction:
    """A test function with AD access plus optional exact/analytic metadata.

    ``poly`` enables exact expectations under the target law; the sup norms
    of the first Wirtinger derivatives feed the Hessian bound checks.
    """

    name: str
    field: JetField
    poly: CWPoly | None = None
    sup_dz: float | None = None
    sup_dzbar: float | None = None


def stein_constant(sigma: np.ndarray) -> float:
    """c(Sigma) = ||Sigma^-1||_op ||Sigma||_op^(1/2) = sqrt(lam_max)/lam_min."""
    sigma = np.asarray(sigma, dtype=np.complex128)
    eigvals = np.linalg.eigvalsh(sigma)
    if eigvals.min() <= 0:
        raise ValueError("covariance must be positive definite")
    return float(np.sqrt(eigvals.max()) / eigvals.min())


def _quadrature(cfg: SteinSolverConfig) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(cfg.quadrature_nodes)
    s = 0.5 * cfg.s_max * (x + 1.0)
    return s, 0.5 * cfg.s_max * w


def _frozen_sample(spec: GaussianSpec, cfg: SteinSolverConfig) -> np.ndarray:
    return sample(spec, cfg.mc_samples, cfg.seed, stream=0)


def solve_stein(
    h: JetField, spec: GaussianSpec, z: Sequence[complex], cfg: SteinSolverConfig
) -> WirtingerJet2:
    """Second-order jet of U_h at z (value and all Wirtinger derivatives)."""
    if not np.allclose(spec.mu, 0):
        raise ValueError("the Stein solution is defined for the centered law")
    z = np.asarray(z, dtype=np.complex128).reshape(spec.d, 1)
    frozen = _frozen_sample(spec, cfg)  # (M, d), shared by all nodes
    base = seed_second_order(z)

    h_at_sample = h([constant_like(base[0], frozen[:, j]) for j in range(spec.d)])
    mean_h = complex(np.asarray(h_at_sample.value).mean())

    nodes, weights = _quadrature(cfg)
    acc: WirtingerJet2 | None = None
    for s, w in zip(nodes, weights):
        decay = math.exp(-s)
        mix = math.sqrt(1.0 - decay * decay)
        moved = [base[j] * decay + mix * frozen[:, j] for j in range(spec.d)]
        term = h(moved).batch_mean() + (-mean_h)
        if not np.isfinite(np.asarray(term.value)).all():
            raise FloatingPointError("non-finite test-function values in solver")
        term = term * w
        acc = term if acc is None else acc + term
    assert acc is not None
    return acc


@dataclass(frozen=True)
class SteinResidualReport:
    point: np.ndarray
    lhs: complex
    rhs: complex
    residual: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.residual <= self.tolerance


def stein_operator_value(jet: WirtingerJet2, z: np.ndarray, sigma: np.ndarray) -> complex:
    """Left side of the residual identity assembled from a U_h jet."""
    z = np.asarray(z, dtype=np.complex128).reshape(-1)
    dz = np.asarray(jet.dz).reshape(-1)
    dzbar = np.asarray(jet.dzbar).reshape(-1)
    d = z.shape[0]
    dzbz = np.asarray(jet.dzbz).reshape(d, d)
    dzzb = np.asarray(jet.dzzb).reshape(d, d)
    grad_terms = np.sum(dz * z) + np.sum(dzbar * np.conj(z))
    hess_terms = np.sum(dzbz * sigma) + np.sum(dzzb * np.conj(sigma))
    return complex(grad_terms - hess_terms)


def expected_value(h: SteinTestFunction, spec: GaussianSpec, cfg: SteinSolverConfig) -> complex:
    """E h(Z): exact moments for polynomial h, frozen-sample MC otherwise."""
    if h.poly is not None:
        return h.poly.gaussian_expectation_cov(rational_sigma(spec.sigma)).to_complex()
    frozen = _frozen_sample(spec, cfg)
    base = seed_second_order(np.zeros((spec.d, 1), dtype=np.complex128))
    out = h.field([constant_like(base[0], frozen[:, j]) for j in range(spec.d)])
    return complex(np.asarray(out.value).mean())


def check_stein_residual(
    h: SteinTestFunction,
    spec: GaussianSpec,
    points: Sequence[Sequence[complex]],
    cfg: SteinSolverConfig,
    tolerance: float = 2e-2,
) -> list[SteinResidualReport]:
    """Residuals of the Stein identity for U_h at the given points."""
    mean_h = expected_value(h, spec, cfg)
    reports = []
    for point in points:
        pt = np.asarray(point, dtype=np.complex128).reshape(spec.d)
        jet = solve_stein(h.field, spec, pt, cfg)
        lhs = stein_operator_value(jet, pt, spec.sigma)
        h_at_pt = h.field(seed_second_order(pt.reshape(spec.d, 1)))
        rhs = complex(np.asarray(h_at_pt.value).reshape(())) - mean_h
        reports.append(
            SteinResidualReport(
                point=pt, lhs=lhs, rhs=rhs, residual=abs(lhs - rhs), tolerance=tolerance
            )
        )
    return reports


@dataclass(frozen=True)
class HessianBoundReport:
    point: np.ndarray
    norms: dict[str, float]          # HS norms of the four Hessian blocks
    limits: dict[str, float]         # allowed bounds including slack
    alpha: float

    @property
    def ok(self) -> bool:
        return all(self.norms[k] <= self.limits[k] for k in self.norms)


def estimate_sup_gradients(
    h: SteinTestFunction, spec: GaussianSpec, count: int = 4096, seed: int = 7
) -> tuple[float, float]:
    """Grid estimate of sup|d_z h| and sup|d_zbar h| on a Gaussian cloud."""
    if h.sup_dz is not None and h.sup_dzbar is not None:
        return h.sup_dz, h.sup_dzbar
    cloud = sample(spec, count, seed, stream=9) * 1.5
    jets = seed_second_order(cloud.T)
    out = h.field(jets)
    dz = np.asarray(out.dz)
    dzbar = np.asarray(out.dzbar)
    return float(np.abs(dz).max()), float(np.abs(dzbar).max())


def check_hessian_bounds(
    h: SteinTestFunction,
    spec: GaussianSpec,
    points: Sequence[Sequence[complex]],
    cfg: SteinSolverConfig,
    alpha: float | Sequence[float] = 0.5,
    slack: float = 0.05,
) -> list[HessianBoundReport]:
    """Hessian norms of U_h against c(Sigma)-weighted gradient sups.

    The mixed blocks obey the alpha-interpolated bound for every alpha in
    [0, 1]; the pure blocks use the corresponding single-slot sup.  ``slack``
    widens the limits multiplicatively to absorb solver error.  Passing a
    sequence of alphas reuses one solve per point for all of them.
    """
    alphas = (alpha,) if isinstance(alpha, (int, float)) else tuple(alpha)
    if any(not 0.0 <= a <= 1.0 for a in alphas):
        raise ValueError("alpha must lie in [0, 1]")
    sup_dz, sup_dzbar = estimate_sup_gradients(h, spec, seed=cfg.seed + 1)
    c = stein_constant(spec.sigma)
    reports = []
    for point in points:
        pt = np.asarray(point, dtype=np.complex128).reshape(spec.d)
        jet = solve_stein(h.field, spec, pt, cfg)
        norms = {
            name: float(np.linalg.norm(np.asarray(getattr(jet, name)).reshape(spec.d, spec.d)))
            for name in ("dzzb", "dzbz", "dzz", "dzbzb")
        }
        for a in alphas:
            mixed_limit = c * (a * sup_dz + (1 - a) * sup_dzbar)
            limits = {
                "dzzb": mixed_limit * (1 + slack),
                "dzbz": mixed_limit * (1 + slack),
                "dzz": c * sup_dz * (1 + slack),
                "dzbzb": c * sup_dzbar * (1 + slack),
            }
            reports.append(HessianBoundReport(point=pt, norms=norms, limits=limits, alpha=a))
    return reports


def characterization_residual(
    spec: GaussianSpec, f: JetField, count: int, seed: int
) -> MCReport:
    """MC expectation of the Stein operator at f under the target law.

    Zero in expectation characterizes CN_d(0, Sigma); evaluated per sample
    and averaged (the sign convention is immaterial for a zero target).
    """
    block = 1 << 15
    values = np.empty(count, dtype=np.complex128)
    done = 0
    block_index = 0
    while done < count:
        m = min(block, count - done)
        z = sample(spec, m, seed, stream=block_index)
        jets = seed_second_order(z.T)
        out = f(jets)
        dz = np.broadcast_to(_column(out.dz), (spec.d, m))
        dzbar = np.broadcast_to(_column(out.dzbar), (spec.d, m))
        dzbz = np.broadcast_to(_block(out.dzbz, spec.d), (spec.d, spec.d, m))
        dzzb = np.broadcast_to(_block(out.dzzb, spec.d), (spec.d, spec.d, m))
        grad = np.sum(dz * z.T, axis=0) + np.sum(dzbar * np.conj(z.T), axis=0)
        hess = (np.sum(dzbz * spec.sigma[:, :, None], axis=(0, 1))
                + np.sum(dzzb * np.conj(spec.sigma)[:, :, None], axis=(0, 1)))
        values[done:done + m] = grad - hess
        done += m
        block_index += 1
    mean = complex(values.mean())
    se = float(np.sqrt(np.mean(np.abs(values - mean) ** 2) / count))
    return MCReport("stein characterization", mean, se, count)


def stein_operator_expectation_exact(sigma: np.ndarray, f: CWPoly) -> complex:
    """Exact E[Stein operator at f] under CN(0, sigma) via Wick moments.

    The operator is assembled as a polynomial; for the target law the
    expectation vanishes identically, which cross-checks the MC estimates.
    """
    d = f.n
    sig = rational_sigma(sigma)
    total = CWPoly.zero(d)
    for j in range(d):
        zj = CWPoly.variable(d, j)
        zbj = CWPoly.variable(d, j, conjugated=True)
        total = total + zj * f.diff(j) + zbj * f.diff(j, conjugated=True)
    for j in range(d):
        for k in range(d):
            hess_zb_z = f.diff(j, conjugated=True).diff(k)
            hess_z_zb = f.diff(j).diff(k, conjugated=True)
            total = total - hess_zb_z.scale(sig[j][k])
            total = total - hess_z_zb.scale(sig[j][k].conjugate())
    return total.gaussian_expectation_cov(sig).to_complex()


def _column(x) -> np.ndarray:
    x = np.asarray(x)
    return x[:, None] if x.ndim == 1 else x


def _block(x, d: int) -> np.ndarray:
    x = np.asarray(x)
    return x[:, :, None] if x.ndim == 2 else x


def standard_battery(variance: float = 1.0) -> list[SteinTestFunction]:
    """Scalar (d = 1) test functions with exact metadata where available.

    Re z and |z|^2 - variance are polynomial (exact expectations, known
    gradient sups); the Gaussian bump exercises a non-polynomial h whose
    gradient sup max |z| e^{-|z|^2} = e^{-1/2}/sqrt(2) is attained on the
    circle |z| = 1/sqrt(2).
    """
    from fractions import Fraction

    from .wirtinger import GAUSS_BUMP, compose

    z = CWPoly.variable(1, 0)
    zb = CWPoly.variable(1, 0, conjugated=True)
    re_poly = (z + zb).scale(Fraction(1, 2))
    abs_poly = z * zb - CWPoly.constant(1, Fraction(variance))

    def re_field(jets):
        return (jets[0] + jets[0].conj()) * 0.5

    def abs_field(jets):
        return jets[0] * jets[0].conj() + (-variance)

    def bump_field(jets):
        return compose(GAUSS_BUMP, jets[0])

    bump_sup = float(np.exp(-0.5) / np.sqrt(2.0))
    return [
        SteinTestFunction("re", re_field, poly=re_poly, sup_dz=0.5, sup_dzbar=0.5),
        SteinTestFunction("centered_abs_sq", abs_field, poly=abs_poly,
                          sup_dz=None, sup_dzbar=None),
        SteinTestFunction("gauss_bump", bump_field, sup_dz=bump_sup, sup_dzbar=bump_sup),
    ]


def truncation_sensitivity(
    h: SteinTestFunction,
    spec: GaussianSpec,
    point: Sequence[complex],
    cfg: SteinSolverConfig,
) -> float:
    """Change in U_h value when the truncation horizon s_max doubles."""
    base = solve_stein(h.field, spec, point, cfg)
    doubled = solve_stein(h.field, spec, point, replace(cfg, s_max=2 * cfg.s_max))
    return float(abs(np.asarray(base.value).reshape(()) - np.asarray(doubled.value).reshape(())))
