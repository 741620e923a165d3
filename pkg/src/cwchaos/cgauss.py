"""The multivariate complex normal law CN_d(mu, Sigma).

Conventions: Sigma is Hermitian positive definite with E[(Z-mu)(Z-mu)*] =
Sigma and zero relation matrix E[(Z-mu)(Z-mu)^T] = 0 (circular symmetry).
The standard law CN(0, 1) has E|Z|^2 = 1, i.e. real and imaginary parts are
independent N(0, 1/2); this matches the density exp(-|z|^2)/pi and the
moment formula E[Z^p Zbar^q] = p! delta_{pq}.

Sampling uses counter-based Philox streams keyed by (seed, stream) so that
parallel Monte Carlo stays reproducible; all reducers below accumulate in a
fixed block order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .wirtinger import JetField, seed_first_order

_HERMITICITY_TOL = 1e-12
_SQRT_RECONSTRUCTION_TOL = 1e-10
_MC_BLOCK = 1 << 17


def generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Reproducible Philox generator for the given (seed, stream) pair."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, stream))))


@dataclass(frozen=True)
class GaussianSpec:
    """Mean and Hermitian positive-definite covariance of a CN_d law."""

    d: int
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.complex128).reshape(self.d)
        sigma = np.asarray(self.sigma, dtype=np.complex128).reshape(self.d, self.d)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        if np.max(np.abs(sigma - sigma.conj().T)) > _HERMITICITY_TOL:
            raise ValueError("covariance is not Hermitian")
        eigvals = np.linalg.eigvalsh(sigma)
        if eigvals.min() <= 0:
            raise ValueError(f"covariance is not positive definite: eigenvalues {eigvals}")

    @staticmethod
    def standard(d: int) -> "GaussianSpec":
        return GaussianSpec(d, np.zeros(d), np.eye(d))

    @staticmethod
    def scalar(variance: float) -> "GaussianSpec":
        return GaussianSpec(1, np.zeros(1), np.array([[variance]]))

    @cached_property
    def sqrt_factor(self) -> np.ndarray:
        """Hermitian square root A with A* A = A A = Sigma (spectral root)."""
        eigvals, vecs = np.linalg.eigh(self.sigma)
        root = (vecs * np.sqrt(eigvals)) @ vecs.conj().T
        if np.max(np.abs(root.conj().T @ root - self.sigma)) > _SQRT_RECONSTRUCTION_TOL:
            raise ValueError("square-root factor failed to reproduce the covariance")
        return root

    @cached_property
    def sigma_inv(self) -> np.ndarray:
        return np.linalg.inv(self.sigma)

    @cached_property
    def _abs_det(self) -> float:
        return float(abs(np.linalg.det(self.sigma)))


def density(spec: GaussianSpec, z: Sequence[complex]) -> float:
    """pi^-d |det Sigma|^-1 exp(-(z-mu)* Sigma^-1 (z-mu))."""
    z = np.asarray(z, dtype=np.complex128).reshape(spec.d)
    w = z - spec.mu
    quad = np.real(w.conj() @ spec.sigma_inv @ w)
    return float(np.exp(-quad) / (np.pi ** spec.d * spec._abs_det))


def char_fn(spec: GaussianSpec, zeta: Sequence[complex]) -> complex:
    """exp(i Re<mu, zeta> - <Sigma zeta, zeta>/4) with <a,b> = sum a_j conj(b_j)."""
    zeta = np.asarray(zeta, dtype=np.complex128).reshape(spec.d)
    phase = np.real(np.sum(spec.mu * np.conj(zeta)))
    quad = np.real(np.sum((spec.sigma @ zeta) * np.conj(zeta)))
    return complex(np.exp(1j * phase - 0.25 * quad))


def sample(spec: GaussianSpec, count: int, seed: int, stream: int = 0) -> np.ndarray:
    """(count, d) matrix of iid CN_d(mu, Sigma) rows; deterministic in seed."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = generator(seed, stream)
    real = rng.standard_normal((count, spec.d))
    imag = rng.standard_normal((count, spec.d))
    std = (real + 1j * imag) * np.sqrt(0.5)
    return spec.mu + std @ spec.sqrt_factor.T


@dataclass(frozen=True)
class MCReport:
    """Monte Carlo estimate of a quantity whose target value is zero."""

    label: str
    estimate: complex
    std_error: float
    count: int

    @property
    def residual(self) -> float:
        return abs(self.estimate)

    def within(self, k: float = 4.0) -> bool:
        return self.residual <= k * self.std_error


def _mc_mean(values: np.ndarray, label: str, count: int) -> MCReport:
    mean = complex(values.mean())
    if not np.isfinite(values).all():
        raise FloatingPointError(f"non-finite Monte Carlo values in {label}")
    var = float(np.mean(np.abs(values - mean) ** 2))
    return MCReport(label, mean, float(np.sqrt(var / len(values))), count)


def verify_ibp(
    spec: GaussianSpec,
    phi: JetField,
    i: int,
    count: int,
    seed: int,
    conjugated: bool = False,
) -> MCReport:
    """Residual of the Gaussian integration-by-parts identity, estimated by MC.

    Checks E[Z_i phi(Z)] = sum_j E[Z_i Zbar_j] E[d_zbar_j phi(Z)] (and, with
    ``conjugated``, the conjugate identity E[Zbar_i phi(Z)] =
    sum_j E[Z_j Zbar_i] E[d_z_j phi(Z)]).  Both sides are evaluated on the
    same samples, so the report is the mean and standard error of the
    per-sample difference.
    """
    if not np.allclose(spec.mu, 0):
        raise ValueError("integration by parts is stated for the centered law")
    values = np.empty(count, dtype=np.complex128)
    done = 0
    block_index = 0
    while done < count:
        m = min(_MC_BLOCK, count - done)
        z = sample(spec, m, seed, stream=block_index)
        jets = seed_first_order(z.T)
        out = phi(jets)
        grads = np.asarray(out.dz if conjugated else out.dzbar)
        if grads.ndim == 1:
            grads = grads[:, None]
        grads = np.broadcast_to(grads, (spec.d, m))
        phi_vals = np.broadcast_to(np.asarray(out.value), (m,))
        if conjugated:
            lhs = np.conj(z[:, i]) * phi_vals
            rhs = np.sum(spec.sigma[:, i][:, None] * grads, axis=0)
        else:
            lhs = z[:, i] * phi_vals
            rhs = np.sum(spec.sigma[i, :][:, None] * grads, axis=0)
        values[done:done + m] = lhs - rhs
        done += m
        block_index += 1
    return MCReport(
        label=f"ibp[{'conj ' if conjugated else ''}i={i}]",
        estimate=complex(values.mean()),
        std_error=float(np.sqrt(np.mean(np.abs(values - values.mean()) ** 2) / count)),
        count=count,
    )


def verify_first_order_characterization(
    f: JetField, count: int, seed: int
) -> MCReport:
    """MC residual of E[d_z f(Z)] - E[Zbar f(Z)] for the standard scalar law."""
    spec = GaussianSpec.standard(1)
    values = np.empty(count, dtype=np.complex128)
    done = 0
    block_index = 0
    while done < count:
        m = min(_MC_BLOCK, count - done)
        z = sample(spec, m, seed, stream=block_index)
        jets = seed_first_order(z.T)
        out = f(jets)
        dz = np.asarray(out.dz)
        dz0 = np.broadcast_to(dz[0] if dz.ndim > 1 else dz[0:1], (m,))
        f_vals = np.broadcast_to(np.asarray(out.value), (m,))
        values[done:done + m] = dz0 - np.conj(z[:, 0]) * f_vals
        done += m
        block_index += 1
    return MCReport(
        label="first-order characterization",
        estimate=complex(values.mean()),
        std_error=float(np.sqrt(np.mean(np.abs(values - values.mean()) ** 2) / count)),
        count=count,
    )


def write_samples_csv(path, samples: np.ndarray) -> None:
    """Dump complex samples as CSV columns re_1, im_1, ..., re_d, im_d."""
    samples = np.asarray(samples, dtype=np.complex128)
    if samples.ndim != 2:
        raise ValueError("expected a (count, d) sample matrix")
    d = samples.shape[1]
    header = [x for j in range(1, d + 1) for x in (f"re_{j}", f"im_{j}")]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in samples:
            writer.writerow(
                [x for v in row for x in (repr(float(v.real)), repr(float(v.imag)))]
            )


def read_samples_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if len(header) % 2 or not header or header[0] != "re_1":
            raise ValueError(f"malformed sample CSV header: {header}")
        d = len(header) // 2
        rows = []
        for row in reader:
            vals = [float(x) for x in row]
            rows.append([complex(vals[2 * j], vals[2 * j + 1]) for j in range(d)])
    return np.asarray(rows, dtype=np.complex128)
