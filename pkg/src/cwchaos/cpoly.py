"""Exact polynomial algebra in paired complex variables.

Polynomials live in the ring Q(i)[z_1..z_n, zbar_1..zbar_n] where z_j and
zbar_j are treated as formally independent symbols.  Coefficients are exact
Gaussian rationals (pairs of ``fractions.Fraction``), so every identity in
this package that is asserted "exactly" is an equality of reduced fractions,
never a floating-point comparison.

The module provides:

- :class:`RationalComplex` -- exact complex scalars,
- :class:`CWPoly` -- sparse polynomials keyed by monomial exponent pairs,
- formal Wirtinger differentiation (z and zbar slots are independent),
- exact expectations under the standard complex Gaussian product measure
  (unit variance per coordinate, E|Z_j|^2 = 1) and, via Wick pairings,
  under an arbitrary rational Hermitian covariance,
- a JSON interchange format for polynomial files.

Numeric evaluation (plain or vectorized over a sample batch) converts to
``complex``/``numpy`` only at the call site.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

#: A monomial is a pair of exponent tuples (powers of z_j, powers of zbar_j).
Monomial = tuple[tuple[int, ...], tuple[int, ...]]

ScalarLike = Union[int, Fraction, "RationalComplex"]

_FACTORIALS = [math.factorial(k) for k in range(64)]


def _factorial(k: int) -> int:
    if k < len(_FACTORIALS):
        return _FACTORIALS[k]
    return math.factorial(k)


@dataclass(frozen=True, slots=True)
class RationalComplex:
    """Exact complex number with rational real and imaginary parts."""

    re: Fraction
    im: Fraction

    @staticmethod
    def of(value: ScalarLike) -> "RationalComplex":
        if isinstance(value, RationalComplex):
            return value
        if isinstance(value, (int, Fraction)):
            return RationalComplex(Fraction(value), Fraction(0))
        raise TypeError(f"cannot coerce {type(value).__name__} to RationalComplex")

    @staticmethod
    def from_complex(value: complex) -> "RationalComplex":
        # Binary floats convert exactly; nothing is rounded here.
        return RationalComplex(Fraction(value.real), Fraction(value.imag))

    def __add__(self, other: "RationalComplex") -> "RationalComplex":
        return RationalComplex(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "RationalComplex") -> "RationalComplex":
        return RationalComplex(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "RationalComplex":
        return RationalComplex(-self.re, -self.im)

    def __mul__(self, other: "RationalComplex") -> "RationalComplex":
        a, b, c, d = self.re, self.im, other.re, other.im
        return RationalComplex(a * c - b * d, a * d + b * c)

    def __truediv__(self, other: "RationalComplex") -> "RationalComplex":
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by zero RationalComplex")
        a, b, c, d = self.re, self.im, other.re, other.im
        return RationalComplex((a * c + b * d) / norm, (b * c - a * d) / norm)

    def conjugate(self) -> "RationalComplex":
        return RationalComplex(self.re, -self.im)

    def abs_sq(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def __str__(self) -> str:
        return f"{self.re}{'+' if self.im >= 0 else ''}{self.im}i"


QC_ZERO = RationalComplex(Fraction(0), Fraction(0))
QC_ONE = RationalComplex(Fraction(1), Fraction(0))
QC_I = RationalComplex(Fraction(0), Fraction(1))


def monomial_degree(m: Monomial) -> int:
    return sum(m[0]) + sum(m[1])


def _sort_key(m: Monomial) -> tuple:
    return (monomial_degree(m), m[0], m[1])


class CWPoly:
    """Sparse polynomial in (z_1..z_n, zbar_1..zbar_n) over the Gaussian rationals.

    Immutable by convention: no public method mutates ``terms``.  Zero
    coefficients are never stored, so equality of term maps is equality of
    polynomials.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Monomial, RationalComplex] | None = None):
        if n < 0:
            raise ValueError("variable count must be nonnegative")
        self.n = n
        cleaned: dict[Monomial, RationalComplex] = {}
        if terms:
            for mono, coeff in terms.items():
                if len(mono[0]) != n or len(mono[1]) != n:
                    raise ValueError(f"monomial {mono} does not match n={n}")
                if not coeff.is_zero:
                    cleaned[mono] = coeff
        self.terms = cleaned

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(n: int) -> "CWPoly":
        return CWPoly(n, {})

    @staticmethod
    def constant(n: int, value: ScalarLike) -> "CWPoly":
        c = RationalComplex.of(value)
        zero_mono = ((0,) * n, (0,) * n)
        return CWPoly(n, {zero_mono: c})

    @staticmethod
    def one(n: int) -> "CWPoly":
        return CWPoly.constant(n, 1)

    @staticmethod
    def variable(n: int, j: int, conjugated: bool = False) -> "CWPoly":
        """The coordinate z_j (or zbar_j when ``conjugated``)."""
        if not 0 <= j < n:
            raise ValueError(f"variable index {j} out of range for n={n}")
        p = [0] * n
        q = [0] * n
        (q if conjugated else p)[j] = 1
        return CWPoly(n, {(tuple(p), tuple(q)): QC_ONE})

    @staticmethod
    def variables(n: int) -> tuple["CWPoly", ...]:
        return tuple(CWPoly.variable(n, j) for j in range(n))

    @staticmethod
    def monomial(n: int, p: Sequence[int], q: Sequence[int],
                 coeff: ScalarLike = 1) -> "CWPoly":
        return CWPoly(n, {(tuple(p), tuple(q)): RationalComplex.of(coeff)})

    # -- ring operations ---------------------------------------------------

    def _check_compatible(self, other: "CWPoly") -> None:
        if self.n != other.n:
            raise ValueError(f"variable count mismatch: {self.n} vs {other.n}")

    def __add__(self, other: "CWPoly") -> "CWPoly":
        self._check_compatible(other)
        out = dict(self.terms)
        for mono, coeff in other.terms.items():
            cur = out.get(mono)
            out[mono] = coeff if cur is None else cur + coeff
        return CWPoly(self.n, out)

    def __sub__(self, other: "CWPoly") -> "CWPoly":
        return self + (-other)

    def __neg__(self) -> "CWPoly":
        return CWPoly(self.n, {m: -c for m, c in self.terms.items()})

    def __mul__(self, other: "CWPoly") -> "CWPoly":
        self._check_compatible(other)
        out: dict[Monomial, RationalComplex] = {}
        for (p1, q1), c1 in self.terms.items():
            for (p2, q2), c2 in other.terms.items():
                mono = (
                    tuple(a + b for a, b in zip(p1, p2)),
                    tuple(a + b for a, b in zip(q1, q2)),
                )
                prod = c1 * c2
                cur = out.get(mono)
                out[mono] = prod if cur is None else cur + prod
        return CWPoly(self.n, out)

    def scale(self, factor: ScalarLike) -> "CWPoly":
        c = RationalComplex.of(factor)
        if c.is_zero:
            return CWPoly.zero(self.n)
        return CWPoly(self.n, {m: coeff * c for m, coeff in self.terms.items()})

    def conj(self) -> "CWPoly":
        """Complex conjugation: swaps (p, q) and conjugates coefficients."""
        return CWPoly(
            self.n,
            {(q, p): c.conjugate() for (p, q), c in self.terms.items()},
        )

    def __pow__(self, k: int) -> "CWPoly":
        if k < 0:
            raise ValueError("negative power")
        result = CWPoly.one(self.n)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CWPoly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.n, tuple(sorted(self.terms.items(), key=lambda kv: _sort_key(kv[0])))))

    # -- calculus ----------------------------------------------------------

    def diff(self, var: int, conjugated: bool = False) -> "CWPoly":
        """Formal Wirtinger derivative d/dz_var (or d/dzbar_var).

        z and zbar are independent symbols: d/dz (z^p zbar^q) = p z^(p-1) zbar^q.
        """
        if not 0 <= var < self.n:
            raise ValueError(f"variable index {var} out of range for n={self.n}")
        out: dict[Monomial, RationalComplex] = {}
        for (p, q), coeff in self.terms.items():
            exps = q if conjugated else p
            e = exps[var]
            if e == 0:
                continue
            new = list(exps)
            new[var] = e - 1
            mono = (p, tuple(new)) if conjugated else (tuple(new), q)
            scaled = coeff * RationalComplex.of(e)
            cur = out.get(mono)
            out[mono] = scaled if cur is None else cur + scaled
        return CWPoly(self.n, out)

    def substitute(self, inner: Sequence["CWPoly"]) -> "CWPoly":
        """Composition: z_j -> inner[j], zbar_j -> conj(inner[j])."""
        if len(inner) != self.n:
            raise ValueError(f"need {self.n} inner polynomials, got {len(inner)}")
        if not inner:
            raise ValueError("cannot substitute into a polynomial over zero variables")
        m = inner[0].n
        if any(g.n != m for g in inner):
            raise ValueError("inner polynomials disagree on variable count")
        conj_inner = [g.conj() for g in inner]
        out = CWPoly.zero(m)
        for (p, q), coeff in self.terms.items():
            term = CWPoly.constant(m, coeff)
            for j, e in enumerate(p):
                if e:
                    term = term * inner[j] ** e
            for j, e in enumerate(q):
                if e:
                    term = term * conj_inner[j] ** e
            out = out + term
        return out

    # -- expectations ------------------------------------------------------

    def gaussian_expectation(self) -> RationalComplex:
        """E[f(Z, Zbar)] for Z_j iid standard complex Gaussian (E|Z_j|^2 = 1).

        Monomial rule: E[prod Z_j^{p_j} Zbar_j^{q_j}] = prod p_j!  if p == q
        entrywise, else 0.  Extended linearly; the result is exact.
        """
        total = QC_ZERO
        for (p, q), coeff in self.terms.items():
            if p != q:
                continue
            weight = 1
            for e in p:
                weight *= _factorial(e)
            total = total + coeff * RationalComplex.of(weight)
        return total

    def expect_product(self, other: "CWPoly") -> RationalComplex:
        """E[self * conj(other)] without materializing the product polynomial.

        Terms are grouped by the signature p - q, which is invariant under
        multiplication by a conjugated monomial exactly when the pairing has
        a nonzero Gaussian moment.
        """
        self._check_compatible(other)
        groups: dict[tuple[int, ...], list[tuple[Monomial, RationalComplex]]] = {}
        for (p, q), coeff in other.terms.items():
            key = tuple(a - b for a, b in zip(p, q))
            groups.setdefault(key, []).append(((p, q), coeff))
        total = QC_ZERO
        for (p1, q1), c1 in self.terms.items():
            key = tuple(a - b for a, b in zip(p1, q1))
            for (p2, q2), c2 in groups.get(key, ()):
                # conj(other) contributes monomial (q2, p2); the product
                # monomial (p1+q2, q1+p2) is diagonal by the key match.
                weight = 1
                for a, b in zip(p1, q2):
                    weight *= _factorial(a + b)
                total = total + c1 * c2.conjugate() * RationalComplex.of(weight)
        return total

    def l2_norm_sq(self) -> Fraction:
        """E|f|^2 under the standard complex Gaussian product measure."""
        value = self.expect_product(self)
        assert value.is_real
        return value.re

    def gaussian_expectation_cov(
        self, sigma: Sequence[Sequence[RationalComplex]]
    ) -> RationalComplex:
        """E[f(Z, Zbar)] for Z ~ CN_n(0, sigma) with exact rational sigma.

        Uses the Wick rule for circularly symmetric complex Gaussians: only
        pairings of a z-slot with a zbar-slot contribute, and
        E[prod Z_{i_a} prod Zbar_{j_b}] is the permanent of the covariance
        submatrix (sigma_{i_a, j_b}).
        """
        total = QC_ZERO
        for (p, q), coeff in self.terms.items():
            zs = [j for j, e in enumerate(p) for _ in range(e)]
            zbars = [j for j, e in enumerate(q) for _ in range(e)]
            if len(zs) != len(zbars):
                continue
            moment = QC_ZERO
            for perm in itertools.permutations(range(len(zbars))):
                prod = QC_ONE
                for a, b in enumerate(perm):
                    prod = prod * sigma[zs[a]][zbars[b]]
                    if prod.is_zero:
                        break
                moment = moment + prod
            total = total + coeff * moment
        return total

    # -- numeric evaluation --------------------------------------------------

    def evaluate(self, point: Sequence[complex]) -> complex:
        """Numeric value with zbar_j = conj(point_j) substituted."""
        if len(point) != self.n:
            raise ValueError(f"point length {len(point)} != n={self.n}")
        z = [complex(v) for v in point]
        zb = [v.conjugate() for v in z]
        total = 0j
        for (p, q), coeff in self.terms.items():
            val = coeff.to_complex()
            for j, e in enumerate(p):
                if e:
                    val *= z[j] ** e
            for j, e in enumerate(q):
                if e:
                    val *= zb[j] ** e
            total += val
        return total

    def evaluate_batch(self, samples: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on a (N, n) complex sample matrix."""
        samples = np.asarray(samples, dtype=np.complex128)
        if samples.ndim != 2 or samples.shape[1] != self.n:
            raise ValueError(f"expected sample shape (N, {self.n})")
        zb = np.conj(samples)
        total = np.zeros(samples.shape[0], dtype=np.complex128)
        for (p, q), coeff in self.terms.items():
            val = np.full(samples.shape[0], coeff.to_complex())
            for j, e in enumerate(p):
                if e:
                    val = val * samples[:, j] ** e
            for j, e in enumerate(q):
                if e:
                    val = val * zb[:, j] ** e
            total += val
        return total

    # -- inspection ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Maximum total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(monomial_degree(m) for m in self.terms)

    def constant_term(self) -> RationalComplex:
        return self.terms.get(((0,) * self.n, (0,) * self.n), QC_ZERO)

    def sorted_terms(self) -> Iterator[tuple[Monomial, RationalComplex]]:
        for mono in sorted(self.terms, key=_sort_key):
            yield mono, self.terms[mono]

    def __repr__(self) -> str:
        return f"CWPoly(n={self.n}, {self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (p, q), coeff in self.sorted_terms():
            factors = []
            for j, e in enumerate(p):
                if e:
                    factors.append(f"z{j + 1}" + (f"^{e}" if e > 1 else ""))
            for j, e in enumerate(q):
                if e:
                    factors.append(f"zb{j + 1}" + (f"^{e}" if e > 1 else ""))
            body = "*".join(factors) if factors else "1"
            parts.append(f"({coeff})*{body}")
        return " + ".join(parts)

    # -- interchange format ---------------------------------------------------

    def to_json_dict(self) -> dict:
        """Interchange form: {"n": int, "terms": [{"p", "q", "re", "im"}]}."""
        entries = []
        for (p, q), coeff in self.sorted_terms():
            entries.append(
                {"p": list(p), "q": list(q), "re": str(coeff.re), "im": str(coeff.im)}
            )
        return {"n": self.n, "terms": entries}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def from_json_dict(doc: Mapping) -> "CWPoly":
        n = int(doc["n"])
        terms: dict[Monomial, RationalComplex] = {}
        for entry in doc["terms"]:
            mono = (tuple(int(x) for x in entry["p"]), tuple(int(x) for x in entry["q"]))
            if any(x < 0 for x in mono[0] + mono[1]):
                raise ValueError(f"negative exponent in {entry}")
            coeff = RationalComplex(Fraction(entry["re"]), Fraction(entry["im"]))
            if mono in terms:
                raise ValueError(f"duplicate monomial {mono}")
            terms[mono] = coeff
        return CWPoly(n, terms)

    @staticmethod
    def from_json(text: str) -> "CWPoly":
        return CWPoly.from_json_dict(json.loads(text))


def rational_sigma(sigma: np.ndarray) -> list[list[RationalComplex]]:
    """Exact Gaussian-rational view of a numeric covariance matrix.

    Binary floats convert exactly, so no information is lost; this is the
    bridge between numeric covariance inputs and exact Wick computations.
    """
    sigma = np.asarray(sigma)
    d = sigma.shape[0]
    return [
        [RationalComplex.from_complex(complex(sigma[j, k])) for k in range(d)]
        for j in range(d)
    ]


def random_poly(
    rng: np.random.Generator,
    n: int,
    max_degree: int,
    max_terms: int = 8,
    coeff_range: int = 4,
) -> CWPoly:
    """Random sparse polynomial with small integer Gaussian coefficients."""
    terms: dict[Monomial, RationalComplex] = {}
    n_terms = int(rng.integers(1, max_terms + 1))
    for _ in range(n_terms):
        while True:
            p = tuple(int(x) for x in rng.integers(0, max_degree + 1, size=n))
            q = tuple(int(x) for x in rng.integers(0, max_degree + 1, size=n))
            if sum(p) + sum(q) <= max_degree:
                break
        coeff = RationalComplex(
            Fraction(int(rng.integers(-coeff_range, coeff_range + 1))),
            Fraction(int(rng.integers(-coeff_range, coeff_range + 1))),
        )
        if not coeff.is_zero:
            terms[(p, q)] = terms.get((p, q), QC_ZERO) + coeff
    return CWPoly(n, terms)
