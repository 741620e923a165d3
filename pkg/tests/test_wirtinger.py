"""Forward-mode Wirtinger jets: product/chain rules, conjugation, FD checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cwchaos.cpoly import CWPoly, random_poly
from cwchaos.wirtinger import (
    ABS_SQ,
    CONJ,
    EXP,
    GAUSS_BUMP,
    WirtingerJet2,
    check_against_finite_differences,
    compose,
    constant_like,
    poly_field,
    seed_first_order,
    seed_second_order,
)

complex_st = st.complex_numbers(
    min_magnitude=0, max_magnitude=3, allow_nan=False, allow_infinity=False
)


def jet_at(point):
    return seed_second_order(np.asarray(point, dtype=np.complex128))


class TestSeeds:
    def test_coordinate_seed_invariants(self):
        jets = jet_at([1 + 2j, -0.5j])
        for k, jet in enumerate(jets):
            unit = np.zeros(2, dtype=complex)
            unit[k] = 1
            np.testing.assert_array_equal(np.asarray(jet.dz), unit)
            np.testing.assert_array_equal(np.asarray(jet.dzbar), np.zeros(2))

    def test_conj_of_coordinate(self):
        jet = jet_at([2 - 1j])[0].conj()
        assert np.asarray(jet.dz)[0] == 0
        assert np.asarray(jet.dzbar)[0] == 1


class TestArithmetic:
    def test_spec_mul_example(self):
        # |z|^2 at z = 1+i: value 2, dz = 1-i, dzbar = 1+i, dzzb = 1
        j = jet_at([1 + 1j])[0]
        out = j * j.conj()
        assert complex(np.asarray(out.value)) == pytest.approx(2.0)
        assert complex(np.asarray(out.dz)[0]) == pytest.approx(1 - 1j)
        assert complex(np.asarray(out.dzbar)[0]) == pytest.approx(1 + 1j)
        assert complex(np.asarray(out.dzzb)[0, 0]) == pytest.approx(1.0)
        assert complex(np.asarray(out.dzz)[0, 0]) == pytest.approx(0.0)

    def test_holomorphic_square(self):
        j = jet_at([2 + 0j])[0]
        out = j * j
        assert complex(np.asarray(out.value)) == pytest.approx(4.0)
        assert complex(np.asarray(out.dz)[0]) == pytest.approx(4.0)
        assert complex(np.asarray(out.dzbar)[0]) == pytest.approx(0.0)

    @given(complex_st, complex_st, complex_st)
    @settings(max_examples=50, deadline=None)
    def test_product_rule_first_order(self, za, zb_, w):
        jets = jet_at([za, zb_])
        a = jets[0] * jets[0] + jets[1] * w
        b = jets[1].conj() * jets[0] + w
        prod = a * b
        # d(ab) = da * b + a * db, entrywise
        expected_dz = np.asarray(a.dz) * np.asarray(b.value) + np.asarray(a.value) * np.asarray(b.dz)
        np.testing.assert_allclose(np.asarray(prod.dz), expected_dz, rtol=4e-15, atol=4e-15)

    def test_conjugation_identity_on_composites(self):
        rng = np.random.default_rng(41)
        for _ in range(25):
            f = random_poly(rng, 2, 4)
            pt = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            out = poly_field(f)(jet_at(pt))
            flipped = out.conj()
            np.testing.assert_allclose(
                np.asarray(flipped.dz), np.conj(np.asarray(out.dzbar)), rtol=1e-14, atol=1e-14
            )
            np.testing.assert_allclose(
                np.asarray(flipped.dzbzb), np.conj(np.asarray(out.dzz)), rtol=1e-14, atol=1e-14
            )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            jet_at([1 + 0j])[0] * jet_at([1 + 0j, 2 + 0j])[0]

    def test_holomorphy_detector(self):
        """Composites of +, *, scalars, and z only have dzbar == 0 everywhere."""
        rng = np.random.default_rng(42)
        for _ in range(100):
            pt = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            jets = jet_at(pt)
            f = (jets[0] * jets[0] * jets[1] + jets[1] * (2 - 1j)) * jets[0] + 5
            np.testing.assert_array_equal(np.asarray(f.dzbar), np.zeros(2))
            np.testing.assert_array_equal(np.asarray(f.dzbz), np.zeros((2, 2)))
            np.testing.assert_array_equal(np.asarray(f.dzbzb), np.zeros((2, 2)))


class TestCompose:
    def test_exp_of_coordinate(self):
        out = compose(EXP, jet_at([0j])[0])
        assert complex(np.asarray(out.value)) == pytest.approx(1.0)
        assert complex(np.asarray(out.dz)[0]) == pytest.approx(1.0)
        assert complex(np.asarray(out.dzbar)[0]) == pytest.approx(0.0)

    def test_abs_sq_of_z_squared(self):
        # d_z |z^2|^2 = 2 z zbar^2; at z = 1 this equals 2 (oracle: direct
        # expansion |z|^4 = z^2 zbar^2 and the formal Wirtinger rule).
        inner = jet_at([1 + 0j])[0]
        out = compose(ABS_SQ, inner * inner)
        assert complex(np.asarray(out.dz)[0]) == pytest.approx(2.0)

    def test_conj_of_conj_is_identity(self):
        j = jet_at([0.3 - 0.8j])[0]
        out = compose(CONJ, j.conj())
        assert complex(np.asarray(out.value)) == pytest.approx(0.3 - 0.8j)
        assert complex(np.asarray(out.dz)[0]) == pytest.approx(1.0)
        assert complex(np.asarray(out.dzbar)[0]) == pytest.approx(0.0)

    def test_compose_second_order_against_direct(self):
        # |g|^2 via compose must match jet arithmetic g * conj(g)
        rng = np.random.default_rng(43)
        for _ in range(10):
            f = random_poly(rng, 2, 3)
            pt = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            inner = poly_field(f)(jet_at(pt))
            via_outer = compose(ABS_SQ, inner)
            direct = inner * inner.conj()
            for slot in ("value", "dz", "dzbar", "dzz", "dzbzb", "dzbz", "dzzb"):
                np.testing.assert_allclose(
                    np.asarray(getattr(via_outer, slot)),
                    np.asarray(getattr(direct, slot)),
                    rtol=1e-12, atol=1e-12,
                )


class TestFiniteDifferences:
    def test_cubic(self):
        field = lambda jets: jets[0] * jets[0] * jets[0]
        assert check_against_finite_differences(field, [1 + 1j], h=1e-5) < 1e-6

    def test_exp_times_conj(self):
        # Oracle: d_z (e^z zbar) = e^z zbar, d_zbar = e^z, checked both via
        # the closed form here and central differences inside the helper.
        point = 0.3 - 0.2j
        field = lambda jets: compose(EXP, jets[0]) * jets[0].conj()
        assert check_against_finite_differences(field, [point], h=1e-5) < 1e-6
        out = field(jet_at([point]))
        ez = np.exp(point)
        assert complex(np.asarray(out.dz)[0]) == pytest.approx(ez * np.conj(point))
        assert complex(np.asarray(out.dzbar)[0]) == pytest.approx(ez)

    def test_constant(self):
        field = lambda jets: constant_like(jets[0], 7.0)
        assert check_against_finite_differences(field, [0.4 + 4j]) == 0.0

    def test_multivariate_polynomials(self):
        rng = np.random.default_rng(44)
        for _ in range(10):
            f = random_poly(rng, 2, 4)
            pt = 0.5 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
            err = check_against_finite_differences(poly_field(f), pt, h=1e-5)
            assert err < 1e-6

    def test_bump_second_derivatives_against_fd(self):
        # second-order slots via nested first-order finite differences
        z0 = 0.4 - 0.3j
        h = 1e-4
        out = compose(GAUSS_BUMP, jet_at([z0])[0])

        def dz_at(p):
            return complex(np.asarray(compose(GAUSS_BUMP, jet_at([p])[0]).dz)[0])

        fx = (dz_at(z0 + h) - dz_at(z0 - h)) / (2 * h)
        fy = (dz_at(z0 + 1j * h) - dz_at(z0 - 1j * h)) / (2 * h)
        dzz_fd = 0.5 * (fx - 1j * fy)
        dzbz_fd = 0.5 * (fx + 1j * fy)
        assert complex(np.asarray(out.dzz)[0, 0]) == pytest.approx(dzz_fd, abs=1e-6)
        assert complex(np.asarray(out.dzbz)[0, 0]) == pytest.approx(dzbz_fd, abs=1e-6)

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            check_against_finite_differences(lambda jets: jets[0], [0j], h=0.0)


class TestBatchedJets:
    def test_batch_matches_scalar_seeds(self):
        rng = np.random.default_rng(45)
        f = random_poly(rng, 2, 4)
        pts = rng.standard_normal((2, 6)) + 1j * rng.standard_normal((2, 6))
        batched = poly_field(f)(seed_second_order(pts))
        for i in range(6):
            single = poly_field(f)(jet_at(pts[:, i]))
            assert complex(np.asarray(batched.value)[i]) == pytest.approx(
                complex(np.asarray(single.value)), rel=1e-12
            )
            np.testing.assert_allclose(
                np.asarray(batched.dzbz)[:, :, i], np.asarray(single.dzbz), rtol=1e-12, atol=1e-14
            )

    def test_batch_mean(self):
        pts = np.array([[1 + 1j, 3 - 1j]])
        out = poly_field(CWPoly.variable(1, 0) ** 2)(seed_second_order(pts)).batch_mean()
        assert complex(np.asarray(out.value)) == pytest.approx(((1 + 1j) ** 2 + (3 - 1j) ** 2) / 2)
        assert np.asarray(out.dz).shape == (1,)

    def test_first_order_seeds(self):
        pts = np.array([[0.5 + 0.5j, -1j]])
        jets = seed_first_order(pts)
        out = jets[0] * jets[0].conj()
        np.testing.assert_allclose(np.asarray(out.value), np.abs(pts[0]) ** 2)
