"""Command-line interface.

Subcommands: run (experiment runner), moments, bound, wasserstein,
stein-check, verify.  Exit codes: 0 success, 1 usage error, 2 validation
error (bad files, bad config, malformed inputs), 3 invariant failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import exact_moments, gamma_bound_exact, mc_moments, moment_bound
from .cgauss import GaussianSpec, read_samples_csv, sample
from .cpoly import CWPoly
from .experiment import (
    ExperimentConfig,
    InvariantViolation,
    load_sigma,
    run_experiment,
    write_outputs,
)
from .ou import ChaoticVector, eigenfunction
from .stein import (
    SteinSolverConfig,
    check_hessian_bounds,
    check_stein_residual,
    standard_battery,
)
from .transport import TransportProblem, w1_exact, w1_sinkhorn
from .verify import run_all

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_INVARIANT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _load_polys(paths) -> list[CWPoly]:
    return [CWPoly.from_json_dict(_load_json(p)) for p in paths]


def _load_sigma_file(path: str) -> np.ndarray:
    return load_sigma(_load_json(path))


def _emit(doc: dict) -> None:
    json.dump(doc, sys.stdout, sort_keys=True, indent=2)
    sys.stdout.write("\n")


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_json_dict(_load_json(args.config))
    if args.seed is not None:
        cfg = ExperimentConfig.from_json_dict({**cfg.to_json_dict(), "seed": args.seed})
    if args.threads is not None:
        cfg = ExperimentConfig.from_json_dict({**cfg.to_json_dict(), "threads": args.threads})
    results = run_experiment(cfg)
    csv_path, json_path = write_outputs(cfg, results, out_dir=args.out)
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def cmd_moments(args) -> int:
    polys = _load_polys(args.poly)
    F = ChaoticVector(tuple(eigenfunction(p) for p in polys))
    moments = exact_moments(F)
    _emit(
        {
            "d": moments.d,
            "second_moments": {
                "re": moments.second_moments.real.tolist(),
                "im": moments.second_moments.imag.tolist(),
            },
            "abs4": moments.abs4.tolist(),
            "gram_sq": None
            if moments.gram_sq is None
            else {
                "re": moments.gram_sq.real.tolist(),
                "im": moments.gram_sq.imag.tolist(),
            },
        }
    )
    return EXIT_OK


def cmd_bound(args) -> int:
    polys = _load_polys(args.poly)
    sigma = _load_sigma_file(args.sigma)
    F = ChaoticVector(tuple(eigenfunction(p) for p in polys))
    if not F.is_centered():
        raise ValueError("bound requires centered polynomials (zero Gaussian mean)")
    report = gamma_bound_exact(F, sigma, n_label=args.label)
    if args.mc:
        samples_base = sample(GaussianSpec.standard(F.n), args.mc, args.seed)
        cols = [c.poly.evaluate_batch(samples_base) for c in F.components]
        mc = moment_bound(mc_moments(np.column_stack(cols)), sigma, n_label=args.label)
        doc = report.to_json_dict()
        doc["mc_route"] = mc.to_json_dict()
        _emit(doc)
    else:
        _emit(report.to_json_dict())
    return EXIT_OK


def cmd_wasserstein(args) -> int:
    a = read_samples_csv(args.a)
    b = read_samples_csv(args.b)
    problem = TransportProblem(a, b)
    if args.sinkhorn_eps is not None:
        result = w1_sinkhorn(problem, eps=args.sinkhorn_eps)
    else:
        result = w1_exact(problem, cap=args.cap)
    _emit(
        {
            "value": result.value,
            "method": result.method,
            "iterations": result.iterations,
            "dual_gap": result.dual_gap,
            "converged": result.converged,
            "n": problem.n,
        }
    )
    return EXIT_OK


def cmd_stein_check(args) -> int:
    spec = GaussianSpec.scalar(args.variance)
    cfg = SteinSolverConfig(mc_samples=args.mc, quadrature_nodes=args.nodes, seed=args.seed)
    points = sample(spec, args.points, args.seed + 17)
    reports = []
    all_ok = True
    for fn in standard_battery(args.variance):
        res = check_stein_residual(fn, spec, points, cfg, tolerance=args.tolerance)
        hess = check_hessian_bounds(fn, spec, points, cfg, alpha=0.5)
        resid_ok = all(r.ok for r in res)
        hess_ok = all(h.ok for h in hess)
        all_ok = all_ok and resid_ok and hess_ok
        reports.append(
            {
                "h": fn.name,
                "max_residual": max(r.residual for r in res),
                "residual_tolerance": args.tolerance,
                "residuals_ok": resid_ok,
                "hessian_ok": hess_ok,
            }
        )
    _emit({"variance": args.variance, "reports": reports, "ok": all_ok})
    return EXIT_OK if all_ok else EXIT_INVARIANT


def cmd_verify(args) -> int:
    results = run_all(fast=args.quick)
    for res in results:
        print(res.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} suites passed")
    return EXIT_OK if failed == 0 else EXIT_INVARIANT


def build_parser() -> _Parser:
    parser = _Parser(prog="cwchaos", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, default=None, help="override config seed")
    p_run.add_argument("--out", default=None, help="override output directory")
    p_run.add_argument("--threads", type=int, default=None)
    p_run.set_defaults(func=cmd_run)

    p_mom = sub.add_parser("moments", help="exact moment summary of polynomial files")
    p_mom.add_argument("--poly", action="append", required=True)
    p_mom.set_defaults(func=cmd_moments)

    p_bound = sub.add_parser("bound", help="distance bounds for polynomial files")
    p_bound.add_argument("--poly", action="append", required=True)
    p_bound.add_argument("--sigma", required=True)
    p_bound.add_argument("--label", default=None)
    p_bound.add_argument("--mc", type=int, default=0, help="sample-moment rerun size")
    p_bound.add_argument("--seed", type=int, default=0)
    p_bound.set_defaults(func=cmd_bound)

    p_w = sub.add_parser("wasserstein", help="empirical W1 between two sample CSVs")
    p_w.add_argument("--a", required=True)
    p_w.add_argument("--b", required=True)
    p_w.add_argument("--sinkhorn-eps", type=float, default=None)
    p_w.add_argument("--cap", type=int, default=1024)
    p_w.set_defaults(func=cmd_wasserstein)

    p_stein = sub.add_parser("stein-check", help="Stein solver battery (d=1)")
    p_stein.add_argument("--variance", type=float, default=1.0)
    p_stein.add_argument("--points", type=int, default=10)
    p_stein.add_argument("--mc", type=int, default=200_000)
    p_stein.add_argument("--nodes", type=int, default=64)
    p_stein.add_argument("--seed", type=int, default=0)
    p_stein.add_argument("--tolerance", type=float, default=2e-2)
    p_stein.set_defaults(func=cmd_stein_check)

    p_verify = sub.add_parser("verify", help="exact-identity suite")
    p_verify.add_argument("--quick", action="store_true")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
