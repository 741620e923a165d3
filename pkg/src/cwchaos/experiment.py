"""Reproducible experiment runner binding the exact and stochastic routes.

A single JSON config defines a family of chaotic vectors over a grid of
sizes, the target Gaussian law, and the Monte Carlo budgets.  For each grid
point the runner computes the exact carre-du-champ and moment bounds, an
optional sample-moment rerun of the moment bound (cross-checked against the
exact route as a hard invariant), and an optional empirical Wasserstein
estimate.  Outputs are a CSV (one row per grid point) and a JSON report
embedding the config hash, seed, and tool version; identical configs and
seeds produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import BoundReport, gamma_bound_exact, mc_moments, moment_bound
from .cgauss import GaussianSpec, sample
from .cpoly import CWPoly
from .ou import ChaoticVector, eigenfunction
from .transport import estimate_dw

GENERATORS = ("sum_of_squares", "custom_polynomial", "gaussian_control")

CSV_COLUMNS = (
    "n", "psi1", "psi2", "psi3", "thm4_bound", "thm1_bound", "empirical_w1", "w1_se"
)


class InvariantViolation(RuntimeError):
    """An internal consistency check failed during an experiment run."""


def load_sigma(doc: dict) -> np.ndarray:
    re = np.asarray(doc["re"], dtype=float)
    im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=float)
    return re + 1j * im


def sigma_to_doc(sigma: np.ndarray) -> dict:
    sigma = np.asarray(sigma, dtype=np.complex128)
    return {"re": sigma.real.tolist(), "im": sigma.imag.tolist()}


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    generator: str
    dimension: int
    n_grid: tuple[int, ...]
    target_sigma: np.ndarray
    mc_samples: int
    w1_sample_size: int
    w1_repeats: int
    seed: int
    output_dir: str
    polynomials: tuple[CWPoly, ...] = ()
    threads: int = 1

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if not self.n_grid:
            raise ValueError("n_grid must be nonempty")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if self.generator == "custom_polynomial" and not self.polynomials:
            raise ValueError("custom_polynomial requires a polynomials section")
        if self.generator == "sum_of_squares" and self.dimension != 1:
            raise ValueError("sum_of_squares is a scalar family (dimension 1)")

    @staticmethod
    def from_json_dict(doc: dict) -> "ExperimentConfig":
        if "seed" not in doc:
            raise ValueError("config must set a seed")
        polys = tuple(
            CWPoly.from_json_dict(p) for p in doc.get("polynomials", [])
        )
        dimension = int(doc.get("dimension", len(polys) or 1))
        if "target_sigma" in doc:
            sigma = load_sigma(doc["target_sigma"])
        else:
            sigma = np.eye(dimension, dtype=np.complex128)
        return ExperimentConfig(
            name=str(doc.get("name", "experiment")),
            generator=str(doc["generator"]),
            dimension=dimension,
            n_grid=tuple(int(n) for n in doc["n_grid"]),
            target_sigma=sigma,
            mc_samples=int(doc.get("mc_samples", 0)),
            w1_sample_size=int(doc.get("w1_sample_size", 0)),
            w1_repeats=int(doc.get("w1_repeats", 8)),
            seed=int(doc["seed"]),
            output_dir=str(doc.get("output_dir", "out")),
            polynomials=polys,
            threads=int(doc.get("threads", 1)),
        )

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "generator": self.generator,
            "dimension": self.dimension,
            "n_grid": list(self.n_grid),
            "target_sigma": sigma_to_doc(self.target_sigma),
            "mc_samples": self.mc_samples,
            "w1_sample_size": self.w1_sample_size,
            "w1_repeats": self.w1_repeats,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "polynomials": [p.to_json_dict() for p in self.polynomials],
            "threads": self.threads,
        }

    def config_hash(self) -> str:
        canon = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def build_vector(cfg: ExperimentConfig, n: int) -> ChaoticVector:
    """The chaotic vector at grid point n."""
    if cfg.generator == "gaussian_control":
        comps = tuple(
            eigenfunction(CWPoly.variable(cfg.dimension, j)) for j in range(cfg.dimension)
        )
        return ChaoticVector(comps)
    if cfg.generator == "sum_of_squares":
        z = CWPoly.variables(n)
        total = CWPoly.zero(n)
        for j in range(n):
            total = total + z[j] * z[j]
        return ChaoticVector((eigenfunction(total),), (Fraction(1, n),))
    comps = tuple(eigenfunction(p) for p in cfg.polynomials)
    return ChaoticVector(comps)


def _component_sampler(F: ChaoticVector, base_seed: int):
    """Sampler of F under the standard product law: (count, stream) -> (count, d)."""
    nvars = F.n
    spec = GaussianSpec.standard(nvars)
    scales = [math.sqrt(float(s)) for s in F.scales_sq]

    def draw(count: int, stream: int) -> np.ndarray:
        base = sample(spec, count, base_seed, stream=stream)
        cols = [
            comp.poly.evaluate_batch(base) * scale
            for comp, scale in zip(F.components, scales)
        ]
        return np.column_stack(cols)

    return draw


@dataclass(frozen=True)
class PointResult:
    n: int
    report: BoundReport
    mc_report: BoundReport | None
    consistency_gap: float | None

    def csv_row(self) -> list[str]:
        r = self.report
        return [
            str(self.n),
            repr(r.psi1),
            repr(r.psi2),
            repr(r.psi3),
            repr(r.thm4_bound),
            "" if r.thm1_bound is None else repr(r.thm1_bound),
            "" if r.empirical_w1 is None else repr(r.empirical_w1),
            "" if r.w1_se is None else repr(r.w1_se),
        ]


def run_point(cfg: ExperimentConfig, n: int, index: int) -> PointResult:
    F = build_vector(cfg, n)
    sigma = cfg.target_sigma
    report = gamma_bound_exact(F, sigma, n_label=n)

    mc_report = None
    consistency_gap = None
    if cfg.mc_samples > 0:
        sampler = _component_sampler(F, cfg.seed)
        samples = sampler(cfg.mc_samples, 1_000 + index)
        mc_report = moment_bound(mc_moments(samples), sigma, n_label=n)
        exact_total = report.psi1 + report.psi2 + report.psi3
        mc_total = mc_report.psi1 + mc_report.psi2 + mc_report.psi3
        # Route consistency is a hard invariant: the exact Psi sum must sit
        # within the Monte Carlo error band.
        se = _psi_total_se(mc_report)
        consistency_gap = abs(mc_total - exact_total)
        if consistency_gap > 4.0 * se + 1e-12:
            raise InvariantViolation(
                f"n={n}: exact/MC Psi totals differ by {consistency_gap:.3e} "
                f"(> 4 x SE {se:.3e})"
            )

    if cfg.w1_sample_size > 0:
        sampler = _component_sampler(F, cfg.seed + 1 + 2 * index)
        target = GaussianSpec(cfg.dimension, np.zeros(cfg.dimension), sigma)
        estimate = estimate_dw(
            sampler, target, cfg.w1_sample_size, cfg.w1_repeats,
            seed=cfg.seed + 2 + 2 * index,
        )
        report = _with_w1(report, estimate.mean, estimate.std_error)

    return PointResult(n=n, report=report, mc_report=mc_report,
                       consistency_gap=consistency_gap)


def _psi_total_se(mc_report: BoundReport) -> float:
    if mc_report.bound_se is None or mc_report.thm4_bound == 0:
        return 0.0
    # bound = c sqrt(total)  =>  se(total) = 2 bound se(bound) / c^2
    return 2 * mc_report.thm4_bound * mc_report.bound_se / mc_report.c_sigma ** 2


def _with_w1(report: BoundReport, mean: float, se: float) -> BoundReport:
    from dataclasses import replace

    return replace(report, empirical_w1=mean, w1_se=se)


def run_experiment(cfg: ExperimentConfig) -> list[PointResult]:
    """All grid points, a worker pool wide, results in n order."""
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            futures = [
                pool.submit(run_point, cfg, n, i) for i, n in enumerate(cfg.n_grid)
            ]
            results = [f.result() for f in futures]
    else:
        results = [run_point(cfg, n, i) for i, n in enumerate(cfg.n_grid)]
    return results


def write_outputs(cfg: ExperimentConfig, results: list[PointResult],
                  out_dir: str | Path | None = None) -> tuple[Path, Path]:
    """Write the CSV table and JSON report; returns their paths."""
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{cfg.name}.csv"
    json_path = out / f"{cfg.name}.json"

    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for res in results:
            writer.writerow(res.csv_row())

    doc = {
        "schema_version": 1,
        "tool_version": __version__,
        "name": cfg.name,
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "config": cfg.to_json_dict(),
        "points": [
            {
                **res.report.to_json_dict(),
                "mc_route": None if res.mc_report is None else res.mc_report.to_json_dict(),
                "route_consistency_gap": res.consistency_gap,
            }
            for res in results
        ],
    }
    with open(json_path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return csv_path, json_path
