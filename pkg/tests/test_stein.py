"""Stein solver: closed-form semigroup values, residuals, Hessian bounds."""

import math

import numpy as np
import pytest

from cwchaos.cgauss import GaussianSpec, sample
from cwchaos.cpoly import CWPoly, random_poly
from cwchaos.stein import (
    SteinSolverConfig,
    SteinTestFunction,
    characterization_residual,
    check_hessian_bounds,
    check_stein_residual,
    solve_stein,
    standard_battery,
    stein_constant,
    stein_operator_expectation_exact,
    stein_operator_value,
    truncation_sensitivity,
)
from cwchaos.wirtinger import constant_like, poly_field

FAST_CFG = SteinSolverConfig(mc_samples=50_000, quadrature_nodes=48, seed=2)


def jet_value(jet):
    return complex(np.asarray(jet.value).reshape(()))


class TestSteinConstant:
    def test_identity(self):
        assert stein_constant(np.eye(3)) == pytest.approx(1.0)

    def test_scalar(self):
        for lam in (0.5, 1.0, 2.0):
            assert stein_constant([[lam]]) == pytest.approx(1 / math.sqrt(lam))

    def test_diagonal(self):
        assert stein_constant(np.diag([1.0, 4.0])) == pytest.approx(2.0)

    def test_rejects_singular(self):
        with pytest.raises(ValueError):
            stein_constant(np.zeros((2, 2)))


class TestSolver:
    def test_constant_test_function_gives_zero(self):
        spec = GaussianSpec.standard(1)
        jet = solve_stein(lambda jets: constant_like(jets[0], 5.0), spec, [0.3 + 0.1j], FAST_CFG)
        assert abs(jet_value(jet)) < 1e-12
        assert np.max(np.abs(np.asarray(jet.dz))) < 1e-12
        assert np.max(np.abs(np.asarray(jet.dzzb))) < 1e-12

    def test_real_part_closed_form(self):
        """Degree-one eigenfunction: the time integral reproduces h itself."""
        spec = GaussianSpec.standard(1)
        battery = standard_battery(1.0)
        for z0 in (0.5 + 0.2j, -1.1 + 0.4j, 0.9j):
            jet = solve_stein(battery[0].field, spec, [z0], FAST_CFG)
            assert jet_value(jet) == pytest.approx(z0.real, abs=1e-2)

    def test_centered_abs_sq_closed_form(self):
        """Eigenvalue-two component integrates e^{-2s}: U = (|z|^2 - 1)/2."""
        spec = GaussianSpec.standard(1)
        battery = standard_battery(1.0)
        for z0 in (0.5 + 0.2j, 1.0 + 0j, -0.3 - 0.7j):
            jet = solve_stein(battery[1].field, spec, [z0], FAST_CFG)
            assert jet_value(jet) == pytest.approx((abs(z0) ** 2 - 1) / 2, abs=1e-2)

    def test_determinism(self):
        spec = GaussianSpec.standard(1)
        battery = standard_battery(1.0)
        a = solve_stein(battery[1].field, spec, [0.4 + 0.6j], FAST_CFG)
        b = solve_stein(battery[1].field, spec, [0.4 + 0.6j], FAST_CFG)
        for slot in ("value", "dz", "dzbar", "dzz", "dzbzb", "dzbz", "dzzb"):
            np.testing.assert_array_equal(np.asarray(getattr(a, slot)),
                                          np.asarray(getattr(b, slot)))

    def test_rejects_noncentered_law(self):
        spec = GaussianSpec(1, np.array([1.0 + 0j]), np.array([[1.0]]))
        with pytest.raises(ValueError):
            solve_stein(lambda jets: jets[0], spec, [0j], FAST_CFG)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SteinSolverConfig(quadrature_nodes=4)
        with pytest.raises(ValueError):
            SteinSolverConfig(s_max=-1.0)


class TestResiduals:
    def test_zero_test_function(self):
        spec = GaussianSpec.standard(1)
        fn = SteinTestFunction(
            "zero", lambda jets: constant_like(jets[0], 0.0), poly=CWPoly.zero(1)
        )
        reports = check_stein_residual(fn, spec, [[0.2 + 0.1j]], FAST_CFG)
        assert reports[0].residual < 1e-12

    def test_battery_residuals(self):
        spec = GaussianSpec.standard(1)
        points = sample(spec, 4, seed=21)
        for fn in standard_battery(1.0):
            reports = check_stein_residual(fn, spec, points, FAST_CFG, tolerance=2e-2)
            assert all(r.ok for r in reports), (fn.name, [r.residual for r in reports])

    def test_spec_points(self):
        spec = GaussianSpec.standard(1)
        battery = standard_battery(1.0)
        rep_re = check_stein_residual(battery[0], spec, [[0.5 + 0.2j]], FAST_CFG)
        assert rep_re[0].residual < 2e-2
        rep_abs = check_stein_residual(battery[1], spec, [[1.0 + 0j]], FAST_CFG)
        assert rep_abs[0].residual < 2e-2

    def test_operator_assembly_on_known_jet(self):
        """lhs assembled from U = (|z|^2 - 1)/2 equals |z|^2 - 1 exactly."""
        from cwchaos.wirtinger import seed_second_order

        z0 = 0.7 - 0.4j
        jets = seed_second_order(np.array([z0]))
        u = (jets[0] * jets[0].conj() + (-1.0)) * 0.5
        lhs = stein_operator_value(u, np.array([z0]), np.eye(1))
        assert lhs == pytest.approx(abs(z0) ** 2 - 1, abs=1e-14)


class TestHessianBounds:
    def test_linear_h_has_zero_hessians(self):
        spec = GaussianSpec.standard(1)
        battery = standard_battery(1.0)
        reports = check_hessian_bounds(
            battery[0], spec, [[0.1 + 0.9j]], FAST_CFG, alpha=(0.0, 0.5, 1.0)
        )
        assert all(r.ok for r in reports)
        assert all(max(r.norms.values()) < 1e-10 for r in reports)

    def test_bump_bounds_all_alphas(self):
        spec = GaussianSpec.standard(1)
        bump = standard_battery(1.0)[2]
        points = sample(spec, 3, seed=22)
        reports = check_hessian_bounds(bump, spec, points, FAST_CFG, alpha=(0.0, 0.5, 1.0))
        assert all(r.ok for r in reports)

    def test_alpha_validation(self):
        spec = GaussianSpec.standard(1)
        with pytest.raises(ValueError):
            check_hessian_bounds(standard_battery(1.0)[0], spec, [[0j]], FAST_CFG, alpha=1.5)


class TestCharacterization:
    def test_exact_zero_for_polynomials(self):
        rng = np.random.default_rng(23)
        sigma = np.array([[2.0, 0.5], [0.5, 1.0]])
        for _ in range(10):
            f = random_poly(rng, 2, 3)
            assert stein_operator_expectation_exact(sigma, f) == 0

    def test_mc_within_four_se(self):
        rng = np.random.default_rng(24)
        spec = GaussianSpec(2, np.zeros(2), np.array([[2.0, 0.5], [0.5, 1.0]]))
        for trial in range(3):
            f = random_poly(rng, 2, 3)
            rep = characterization_residual(spec, poly_field(f), 100_000, seed=25 + trial)
            assert rep.within(4), (trial, rep)


class TestTruncation:
    def test_doubling_changes_little(self):
        spec = GaussianSpec.standard(1)
        battery = standard_battery(1.0)
        for fn in battery[:2]:
            delta = truncation_sensitivity(fn, spec, [0.5 + 0.5j], FAST_CFG)
            assert delta < 0.1 * 2e-2, (fn.name, delta)
