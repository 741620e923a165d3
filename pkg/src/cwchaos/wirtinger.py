"""Forward-mode automatic differentiation in the Wirtinger calculus.

A jet carries the value of a scalar field on C^d together with its
derivatives with respect to z_j and zbar_j, treated as independent symbols
(d_z = (d_x - i d_y)/2, d_zbar = (d_x + i d_y)/2 on the underlying R^{2d}).
Second-order jets hold all four Hessian blocks explicitly because downstream
consumers pair the mixed blocks with different matrices; no symmetry between
them is assumed for complex-valued fields.

Slots are numpy arrays and may carry a trailing batch axis, so one jet can
evaluate a field and its derivatives over an entire Monte Carlo sample:
seed with a (d, N) point matrix and every slot broadcasts along the last
axis.  Jets are immutable values; arithmetic never mutates operands.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

ArrayLike = np.ndarray


def _as_array(x) -> np.ndarray:
    return np.asarray(x, dtype=np.complex128)


def _outer(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Outer product over the leading (variable) axis, batch-aware."""
    if x.ndim == 1 and y.ndim == 1:
        return x[:, None] * y[None, :]
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    return x[:, None, :] * y[None, :, :]


def _slot_mean(x: np.ndarray, batched_ndim: int) -> np.ndarray:
    """Mean over the trailing batch axis if present."""
    x = np.asarray(x)
    if x.ndim > batched_ndim:
        return x.mean(axis=-1)
    return x


@dataclass(frozen=True)
class WirtingerJet1:
    """Value plus first Wirtinger derivatives of a scalar field on C^d."""

    value: ArrayLike
    dz: ArrayLike
    dzbar: ArrayLike

    @property
    def d(self) -> int:
        return np.shape(self.dz)[0]

    def __add__(self, other):
        if isinstance(other, WirtingerJet1):
            return WirtingerJet1(self.value + other.value, self.dz + other.dz,
                                 self.dzbar + other.dzbar)
        return WirtingerJet1(self.value + other, self.dz, self.dzbar)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other if isinstance(other, WirtingerJet1) else self + (-other)

    def __mul__(self, other):
        if isinstance(other, WirtingerJet1):
            a, b = self, other
            return WirtingerJet1(
                a.value * b.value,
                a.dz * b.value + a.value * b.dz,
                a.dzbar * b.value + a.value * b.dzbar,
            )
        return WirtingerJet1(self.value * other, self.dz * other, self.dzbar * other)

    __rmul__ = __mul__

    def conj(self) -> "WirtingerJet1":
        return WirtingerJet1(np.conj(self.value), np.conj(self.dzbar), np.conj(self.dz))

    def batch_mean(self) -> "WirtingerJet1":
        return WirtingerJet1(
            _slot_mean(self.value, 0), _slot_mean(self.dz, 1), _slot_mean(self.dzbar, 1)
        )


@dataclass(frozen=True)
class WirtingerJet2:
    """Value plus first and second Wirtinger derivatives on C^d.

    Index conventions: dzz[j, k] = d_{z_j} d_{z_k} f, dzbz[j, k] =
    d_{zbar_j} d_{z_k} f, dzzb[j, k] = d_{z_j} d_{zbar_k} f.  dzz and dzbzb
    are symmetric; dzbz and dzzb are each other's transposes for C^2 fields
    but are stored separately.
    """

    value: ArrayLike
    dz: ArrayLike
    dzbar: ArrayLike
    dzz: ArrayLike
    dzbzb: ArrayLike
    dzbz: ArrayLike
    dzzb: ArrayLike

    @property
    def d(self) -> int:
        return np.shape(self.dz)[0]

    def first_order(self) -> WirtingerJet1:
        return WirtingerJet1(self.value, self.dz, self.dzbar)

    def __add__(self, other):
        if isinstance(other, WirtingerJet2):
            return WirtingerJet2(
                self.value + other.value,
                self.dz + other.dz,
                self.dzbar + other.dzbar,
                self.dzz + other.dzz,
                self.dzbzb + other.dzbzb,
                self.dzbz + other.dzbz,
                self.dzzb + other.dzzb,
            )
        return WirtingerJet2(self.value + other, self.dz, self.dzbar,
                             self.dzz, self.dzbzb, self.dzbz, self.dzzb)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other if isinstance(other, WirtingerJet2) else self + (-other)

    def __mul__(self, other):
        if not isinstance(other, WirtingerJet2):
            return WirtingerJet2(
                self.value * other, self.dz * other, self.dzbar * other,
                self.dzz * other, self.dzbzb * other, self.dzbz * other,
                self.dzzb * other,
            )
        a, b = self, other
        if a.d != b.d:
            raise ValueError(f"jet dimension mismatch: {a.d} vs {b.d}")
        value = a.value * b.value
        dz = a.dz * b.value + a.value * b.dz
        dzbar = a.dzbar * b.value + a.value * b.dzbar
        dzz = (a.dzz * b.value + a.value * b.dzz
               + _outer(a.dz, b.dz) + _outer(b.dz, a.dz))
        dzbzb = (a.dzbzb * b.value + a.value * b.dzbzb
                 + _outer(a.dzbar, b.dzbar) + _outer(b.dzbar, a.dzbar))
        dzbz = (a.dzbz * b.value + a.value * b.dzbz
                + _outer(a.dzbar, b.dz) + _outer(b.dzbar, a.dz))
        dzzb = (a.dzzb * b.value + a.value * b.dzzb
                + _outer(a.dz, b.dzbar) + _outer(b.dz, a.dzbar))
        return WirtingerJet2(value, dz, dzbar, dzz, dzbzb, dzbz, dzzb)

    __rmul__ = __mul__

    def conj(self) -> "WirtingerJet2":
        return WirtingerJet2(
            np.conj(self.value),
            np.conj(self.dzbar),
            np.conj(self.dz),
            np.conj(self.dzbzb),
            np.conj(self.dzz),
            np.conj(self.dzzb),
            np.conj(self.dzbz),
        )

    def batch_mean(self) -> "WirtingerJet2":
        return WirtingerJet2(
            _slot_mean(self.value, 0),
            _slot_mean(self.dz, 1),
            _slot_mean(self.dzbar, 1),
            _slot_mean(self.dzz, 2),
            _slot_mean(self.dzbzb, 2),
            _slot_mean(self.dzbz, 2),
            _slot_mean(self.dzzb, 2),
        )


Jet = WirtingerJet1 | WirtingerJet2


def seed_first_order(point: np.ndarray) -> list[WirtingerJet1]:
    """Coordinate jets at a point: (d,) for scalar seeds, (d, N) for a batch."""
    point = _as_array(point)
    d = point.shape[0]
    batched = point.ndim == 2
    jets = []
    for j in range(d):
        unit = np.zeros((d, 1) if batched else d, dtype=np.complex128)
        unit[j] = 1.0
        zero = np.zeros_like(unit)
        jets.append(WirtingerJet1(point[j], unit, zero))
    return jets


def seed_second_order(point: np.ndarray) -> list[WirtingerJet2]:
    """Second-order coordinate jets; Hessian blocks seed to zero."""
    point = _as_array(point)
    d = point.shape[0]
    batched = point.ndim == 2
    jets = []
    for j in range(d):
        unit = np.zeros((d, 1) if batched else d, dtype=np.complex128)
        unit[j] = 1.0
        zero1 = np.zeros_like(unit)
        zero2 = np.zeros((d, d, 1) if batched else (d, d), dtype=np.complex128)
        jets.append(WirtingerJet2(point[j], unit, zero1, zero2, zero2, zero2, zero2))
    return jets


def constant_like(jet: Jet, value) -> Jet:
    """A constant field seeded with the same dimension/batch layout as ``jet``."""
    zero1 = np.zeros_like(np.asarray(jet.dz))
    if isinstance(jet, WirtingerJet1):
        return WirtingerJet1(_as_array(value), zero1, np.zeros_like(zero1))
    zero2 = np.zeros_like(np.asarray(jet.dzz))
    return WirtingerJet2(_as_array(value), zero1, np.zeros_like(zero1),
                         zero2, np.zeros_like(zero2), np.zeros_like(zero2),
                         np.zeros_like(zero2))


@dataclass(frozen=True)
class OuterFunction:
    """Smooth scalar field of one complex variable with tabulated derivatives.

    Each slot is a callable of the inner value w; second derivatives assume
    the mixed partials commute (C^2 outer functions).
    """

    value: Callable[[np.ndarray], np.ndarray]
    dw: Callable[[np.ndarray], np.ndarray]
    dwbar: Callable[[np.ndarray], np.ndarray]
    dww: Callable[[np.ndarray], np.ndarray]
    dwbwb: Callable[[np.ndarray], np.ndarray]
    dwwb: Callable[[np.ndarray], np.ndarray]


def _zeros(w):
    return np.zeros_like(w)


def _ones(w):
    return np.ones_like(w)


#: exp(w): holomorphic, all conjugate slots vanish.
EXP = OuterFunction(np.exp, np.exp, _zeros, np.exp, _zeros, _zeros)

#: conj(w): antiholomorphic degree-one map.
CONJ = OuterFunction(np.conj, _zeros, _ones, _zeros, _zeros, _zeros)

#: |w|^2 = w wbar.
ABS_SQ = OuterFunction(
    lambda w: w * np.conj(w), np.conj, lambda w: w, _zeros, _zeros, _ones
)

#: exp(-|w|^2): smooth radial bump with bounded derivatives of all orders.
GAUSS_BUMP = OuterFunction(
    lambda w: np.exp(-w * np.conj(w)),
    lambda w: -np.conj(w) * np.exp(-w * np.conj(w)),
    lambda w: -w * np.exp(-w * np.conj(w)),
    lambda w: np.conj(w) ** 2 * np.exp(-w * np.conj(w)),
    lambda w: w ** 2 * np.exp(-w * np.conj(w)),
    lambda w: (w * np.conj(w) - 1) * np.exp(-w * np.conj(w)),
)


def compose(outer: OuterFunction, inner: WirtingerJet2) -> WirtingerJet2:
    """Second-order Wirtinger chain rule for outer(inner(z)).

    First order: d_{z_j}(f o g) = (d_w f o g) d_{z_j} g
    + (d_wbar f o g) d_{z_j} conj(g), and conjugate-slot analogue; the
    second-order blocks follow by differentiating once more.
    """
    w = inner.value
    fw, fwb = outer.dw(w), outer.dwbar(w)
    fww, fwbwb, fwwb = outer.dww(w), outer.dwbwb(w), outer.dwwb(w)
    gz, gzb = inner.dz, inner.dzbar
    cgz, cgzb = np.conj(gz), np.conj(gzb)

    dz = fw * gz + fwb * cgzb
    dzbar = fw * gzb + fwb * cgz
    dzz = (fww * _outer(gz, gz)
           + fwwb * (_outer(cgzb, gz) + _outer(gz, cgzb))
           + fwbwb * _outer(cgzb, cgzb)
           + fw * inner.dzz + fwb * np.conj(inner.dzbzb))
    dzbzb = (fww * _outer(gzb, gzb)
             + fwwb * (_outer(cgz, gzb) + _outer(gzb, cgz))
             + fwbwb * _outer(cgz, cgz)
             + fw * inner.dzbzb + fwb * np.conj(inner.dzz))
    dzbz = (fww * _outer(gzb, gz)
            + fwwb * (_outer(cgz, gz) + _outer(gzb, cgzb))
            + fwbwb * _outer(cgz, cgzb)
            + fw * inner.dzbz + fwb * np.conj(inner.dzzb))
    dzzb = (fww * _outer(gz, gzb)
            + fwwb * (_outer(cgzb, gzb) + _outer(gz, cgz))
            + fwbwb * _outer(cgzb, cgz)
            + fw * inner.dzzb + fwb * np.conj(inner.dzbz))
    return WirtingerJet2(outer.value(w), dz, dzbar, dzz, dzbzb, dzbz, dzzb)


#: A jet field maps coordinate jets to the jet of a scalar field.
JetField = Callable[[Sequence[Jet]], Jet]


def poly_field(poly) -> JetField:
    """Jet field evaluating an exact polynomial (z and zbar monomials)."""

    def field(jets: Sequence[Jet]) -> Jet:
        conj_jets = [j.conj() for j in jets]
        acc = None
        for (p, q), coeff in poly.terms.items():
            term = None
            for j, e in enumerate(p):
                for _ in range(e):
                    term = jets[j] if term is None else term * jets[j]
            for j, e in enumerate(q):
                for _ in range(e):
                    term = conj_jets[j] if term is None else term * conj_jets[j]
            c = coeff.to_complex()
            term = constant_like(jets[0], c) if term is None else term * c
            acc = term if acc is None else acc + term
        return acc if acc is not None else constant_like(jets[0], 0.0)

    return field


def check_against_finite_differences(
    field: JetField, point: Sequence[complex], h: float = 1e-5
) -> float:
    """Max abs deviation between AD first derivatives and central differences.

    The finite differences act on the (x, y)-representation and are combined
    through d_z = (d_x - i d_y)/2, d_zbar = (d_x + i d_y)/2.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    point = _as_array(point)
    d = point.shape[0]

    def value_at(p: np.ndarray) -> complex:
        out = field(seed_second_order(p))
        return complex(np.asarray(out.value))

    jet = field(seed_second_order(point))
    err = 0.0
    for j in range(d):
        ej = np.zeros(d, dtype=np.complex128)
        ej[j] = 1.0
        fx = (value_at(point + h * ej) - value_at(point - h * ej)) / (2 * h)
        fy = (value_at(point + 1j * h * ej) - value_at(point - 1j * h * ej)) / (2 * h)
        if not (np.isfinite(fx) and np.isfinite(fy)):
            raise ValueError("field is not finite near the requested point")
        dz_fd = 0.5 * (fx - 1j * fy)
        dzb_fd = 0.5 * (fx + 1j * fy)
        err = max(err, abs(dz_fd - complex(np.asarray(jet.dz)[j])))
        err = max(err, abs(dzb_fd - complex(np.asarray(jet.dzbar)[j])))
    return err
