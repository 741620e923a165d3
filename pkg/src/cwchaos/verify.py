"""Exact-identity verification battery.

Each check decides an algebraic identity or inequality in rational
arithmetic: eigenbasis orthonormality, the generator eigen-relation, the two
carre du champ routes, integration by parts, the diffusion property and
chain rule, and the spectral / Gamma-moment inequalities on randomized
inputs.  The CLI ``verify`` subcommand and the acceptance tests both consume
these results.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cpoly import CWPoly, random_poly
from .hermite import hermite_norm_sq, hermite_product, to_hermite
from .ou import (
    apply_L,
    apply_L_inverse,
    eigenfunction,
    gamma,
    gamma_moment_inequality,
    is_jointly_chaotic,
    project,
    spectral_inequality,
)

DEFAULT_SEED = 20240811


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _multi_indices(n_vars: int, max_total: int):
    """All (m_p, m_q) pairs over n_vars variables with total degree <= max_total."""
    def indices(total_cap):
        out = []
        for total in range(total_cap + 1):
            for combo in itertools.product(range(total + 1), repeat=n_vars):
                if sum(combo) == total:
                    out.append(combo)
        return out
    singles = indices(max_total)
    return [
        (mp, mq) for mp in singles for mq in singles
        if sum(mp) + sum(mq) <= max_total
    ]


def check_orthonormality(max_degree: int = 4, n_vars: int = 3) -> CheckResult:
    """E[Phi_a conj(Phi_b)] = delta_ab for all basis pairs up to the degree cap.

    Stated exactly over the unnormalized products: E[H_a conj(H_b)] must be
    0 for a != b and the exact integer norm for a = b (the normalizations
    then cancel symbolically).
    """
    keys = _multi_indices(n_vars, max_degree)
    polys = {key: hermite_product(*key) for key in keys}
    failures = 0
    for a in keys:
        for b in keys:
            value = polys[a].expect_product(polys[b])
            if a == b:
                ok = value.is_real and value.re == hermite_norm_sq(*a)
            else:
                ok = value.is_zero
            failures += not ok
    return CheckResult(
        "hermite orthonormality",
        failures == 0,
        f"{len(keys) ** 2} exact inner products, {failures} failures",
    )


def check_eigen_relation(max_degree: int = 6, n_vars: int = 3) -> CheckResult:
    """L H_a = -(|m_p| + |m_q|) H_a exactly for every basis element."""
    keys = _multi_indices(n_vars, max_degree)
    failures = 0
    for key in keys:
        h = hermite_product(*key)
        lam = sum(key[0]) + sum(key[1])
        if apply_L(h) != h.scale(-lam):
            failures += 1
    return CheckResult(
        "generator eigen-relation",
        failures == 0,
        f"{len(keys)} basis elements up to eigenvalue {max_degree}, {failures} failures",
    )


def check_generator_routes(trials: int = 200, seed: int = DEFAULT_SEED) -> CheckResult:
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        n = int(rng.integers(1, 4))
        f = random_poly(rng, n, max_degree=5)
        if apply_L(f, route="differential") != apply_L(f, route="hermite"):
            failures += 1
    return CheckResult(
        "generator route agreement",
        failures == 0,
        f"{trials} random polynomials, {failures} disagreements",
    )


def check_gamma_routes(trials: int = 200, seed: int = DEFAULT_SEED + 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        n = int(rng.integers(1, 4))
        f = random_poly(rng, n, max_degree=4)
        g = random_poly(rng, n, max_degree=4)
        if gamma(f, g, route="closed") != gamma(f, g, route="defining"):
            failures += 1
    return CheckResult(
        "carre du champ route agreement",
        failures == 0,
        f"{trials} random pairs, {failures} disagreements",
    )


def check_integration_by_parts(trials: int = 200, seed: int = DEFAULT_SEED + 2) -> CheckResult:
    """E[Gamma(F, G)] = -E[F L conj(G)] exactly on random pairs."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        n = int(rng.integers(1, 4))
        f = random_poly(rng, n, max_degree=4)
        g = random_poly(rng, n, max_degree=4)
        lhs = gamma(f, g).gaussian_expectation()
        rhs = -(f * apply_L(g.conj())).gaussian_expectation()
        if lhs != rhs:
            failures += 1
    return CheckResult(
        "integration by parts",
        failures == 0,
        f"{trials} random pairs, {failures} disagreements",
    )


def _random_eigenfunction(rng: np.random.Generator, n: int, lam_cap: int = 4):
    for _ in range(64):
        f = random_poly(rng, n, max_degree=lam_cap)
        lam = int(rng.integers(1, lam_cap + 1))
        candidate = project(f, lam)
        if not candidate.is_zero:
            return eigenfunction(candidate)
    raise RuntimeError("failed to draw a nonzero eigenfunction")


def check_diffusion_property(trials: int = 20, seed: int = DEFAULT_SEED + 3) -> CheckResult:
    """L phi(F) expands into first derivatives times L F plus Gamma pairings.

    phi ranges over small polynomials in the components and their
    conjugates; F over random vectors of eigenfunctions.  The pairing is the
    mixed one: d_{z_j z_k} phi couples to Gamma(F_j, conj(F_k)) and
    d_{z_j zbar_k} phi couples to Gamma(F_j, F_k).
    """
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        n = int(rng.integers(1, 3))
        d = int(rng.integers(1, 3))
        comps = [_random_eigenfunction(rng, n, lam_cap=2).poly for _ in range(d)]
        phi = random_poly(rng, d, max_degree=2, max_terms=4, coeff_range=2)
        phi_f = phi.substitute(comps)
        lhs = apply_L(phi_f)
        rhs = CWPoly.zero(n)
        for j in range(d):
            rhs = rhs + phi.diff(j).substitute(comps) * apply_L(comps[j])
            rhs = rhs + phi.diff(j, conjugated=True).substitute(comps) * apply_L(comps[j].conj())
        for j in range(d):
            for k in range(d):
                rhs = rhs + phi.diff(j).diff(k).substitute(comps) * gamma(comps[j], comps[k].conj())
                rhs = rhs + (
                    phi.diff(j, conjugated=True).diff(k, conjugated=True).substitute(comps)
                    * gamma(comps[j].conj(), comps[k])
                )
                rhs = rhs + phi.diff(j).diff(k, conjugated=True).substitute(comps) * gamma(comps[j], comps[k])
                rhs = rhs + (
                    phi.diff(j, conjugated=True).diff(k).substitute(comps)
                    * gamma(comps[j].conj(), comps[k].conj())
                )
        if lhs != rhs:
            failures += 1
    return CheckResult(
        "diffusion property",
        failures == 0,
        f"{trials} random (phi, F) pairs, {failures} disagreements",
    )


def check_chain_rule(trials: int = 20, seed: int = DEFAULT_SEED + 4) -> CheckResult:
    """Gamma(phi(F), G) = sum_j [d_j phi(F) Gamma(F_j, G) + dbar_j phi(F) Gamma(conj F_j, G)]."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        n = int(rng.integers(1, 3))
        d = int(rng.integers(1, 3))
        comps = [_random_eigenfunction(rng, n, lam_cap=2).poly for _ in range(d)]
        phi = random_poly(rng, d, max_degree=2, max_terms=4, coeff_range=2)
        g = random_poly(rng, n, max_degree=3, max_terms=4)
        lhs = gamma(phi.substitute(comps), g)
        rhs = CWPoly.zero(n)
        for j in range(d):
            rhs = rhs + phi.diff(j).substitute(comps) * gamma(comps[j], g)
            rhs = rhs + phi.diff(j, conjugated=True).substitute(comps) * gamma(comps[j].conj(), g)
        if lhs != rhs:
            failures += 1
    return CheckResult(
        "chain rule",
        failures == 0,
        f"{trials} random (phi, F, G) triples, {failures} disagreements",
    )


def check_spectral_inequality(trials: int = 100, seed: int = DEFAULT_SEED + 5) -> CheckResult:
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        n = int(rng.integers(1, 3))
        f = random_poly(rng, n, max_degree=4)
        if f.is_zero:
            continue
        lam_max = max(to_hermite(f).support_eigenvalues())
        eta = Fraction(lam_max) + Fraction(int(rng.integers(0, 7)), 2)
        result = spectral_inequality(f, eta)
        if not result.holds:
            failures += 1
    return CheckResult(
        "spectral inequality",
        failures == 0,
        f"{trials} randomized inputs, {failures} violations",
    )


def check_gamma_moment_inequality(trials: int = 100, seed: int = DEFAULT_SEED + 6) -> CheckResult:
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        n = int(rng.integers(1, 3))
        f1 = _random_eigenfunction(rng, n)
        f2 = _random_eigenfunction(rng, n)
        if not is_jointly_chaotic(f1, f2):
            failures += 1
            continue
        result = gamma_moment_inequality(f1, f2)
        if not result.holds:
            failures += 1
    return CheckResult(
        "Gamma second-moment inequality",
        failures == 0,
        f"{trials} randomized chaotic pairs, {failures} violations",
    )


def check_inverse_and_projections(trials: int = 50, seed: int = DEFAULT_SEED + 7) -> CheckResult:
    """L L^-1 = id on centered inputs; projections resolve the identity."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        n = int(rng.integers(1, 4))
        f = random_poly(rng, n, max_degree=4)
        centered = f - CWPoly.constant(n, f.gaussian_expectation())
        if apply_L(apply_L_inverse(centered)) != centered:
            failures += 1
        total = CWPoly.zero(n)
        for lam in range(f.degree() + 1 if not f.is_zero else 1):
            total = total + project(f, lam)
        if total != f:
            failures += 1
    return CheckResult(
        "inverse and projections",
        failures == 0,
        f"{trials} random inputs, {failures} failures",
    )


def run_all(fast: bool = False) -> list[CheckResult]:
    """The full exact-identity suite; ``fast`` shrinks the randomized counts."""
    k = 0.25 if fast else 1.0
    return [
        check_orthonormality(),
        check_eigen_relation(),
        check_generator_routes(trials=int(200 * k) or 8),
        check_gamma_routes(trials=int(200 * k) or 8),
        check_integration_by_parts(trials=int(200 * k) or 8),
        check_diffusion_property(trials=int(20 * k) or 4),
        check_chain_rule(trials=int(20 * k) or 4),
        check_spectral_inequality(trials=int(100 * k) or 8),
        check_gamma_moment_inequality(trials=int(100 * k) or 8),
        check_inverse_and_projections(trials=int(50 * k) or 8),
    ]
