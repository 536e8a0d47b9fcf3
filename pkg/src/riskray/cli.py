"""Command-line interface: region | solve | portfolio | risk | converge | bench.

Exit codes: 0 success/finite, 2 no solution, 3 infinite solution,
64 usage error, 65 data error.  ``RISKRAY_THREADS`` caps BLAS thread
pools before any heavy work runs.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from pathlib import Path

EXIT_OK = 0
EXIT_NONE = 2
EXIT_INFINITE = 3
EXIT_USAGE = 64
EXIT_DATA = 65


def _apply_thread_env():
    threads = os.environ.get("RISKRAY_THREADS")
    if not threads:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, threads)


_apply_thread_env()

import numpy as np

from .errors import DataError, RiskrayError
from .experiments import (DistributionSpec, benchmark, convergence_experiment,
                          paper_style_mixture)
from .io import (emit_result, jsonify, off_string, outcome_to_dict,
                 parse_generator_csv, parse_sample_csv, parse_univariate_csv,
                 region_to_json, weights_from_json, weights_to_json)
from .portfolio import grid_oracle, portfolio_solve
from .region import Sample, region_exact, region_support_oracle
from .solver import RobustLP, solve_iterative, solve_ray, transform_max
from .weights import (DistortionSpec, WeightVector, eval_risk,
                      make_weights_named)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_measure_flags(p: argparse.ArgumentParser):
    p.add_argument("--measure", choices=["expected_shortfall", "expectation"],
                   help="named distortion measure")
    p.add_argument("--alpha", type=float,
                   help="expected-shortfall level in (0, 1]")
    p.add_argument("--weights", metavar="FILE",
                   help="explicit ascending weight vector (JSON array)")
    p.add_argument("--generator", metavar="FILE",
                   help="two-column CSV grid (t, r(t)) of a generator")


def _measure_spec(args) -> DistortionSpec:
    picked = [x for x in (args.measure, args.weights, args.generator)
              if x is not None]
    if len(picked) != 1:
        raise RiskrayError(
            "pick exactly one of --measure, --weights, --generator")
    if args.weights:
        text = Path(args.weights).read_text(encoding="utf-8")
        return DistortionSpec.explicit(weights_from_json(text))
    if args.generator:
        return DistortionSpec.custom_generator(parse_generator_csv(args.generator))
    if args.measure == "expectation":
        return DistortionSpec.expectation()
    if args.alpha is None:
        raise RiskrayError("expected_shortfall needs --alpha")
    return DistortionSpec.expected_shortfall(args.alpha)


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _status_code(status: str) -> int:
    return {"finite": EXIT_OK, "none": EXIT_NONE,
            "infinite": EXIT_INFINITE}[status]


def _cmd_risk(args) -> int:
    spec = _measure_spec(args)
    if args.csv:
        y = parse_univariate_csv(args.csv)
        n = y.size
    else:
        if args.n is None:
            raise RiskrayError("risk needs --csv or --n")
        y, n = None, args.n
    w = make_weights_named(spec, n)
    doc = {"n": n, "weights": w.to_list(), "coherent": w.coherent}
    if y is not None:
        doc["risk"] = eval_risk(w, y)
    _write(jsonify(doc), args.out)
    return EXIT_OK


def _build_region(sample: Sample, spec: DistortionSpec, mode: str,
                  max_rounds: int, seed: int):
    w = make_weights_named(spec, sample.n)
    if mode == "exact":
        return region_exact(sample, w)
    return region_support_oracle(sample, w, max_rounds=max_rounds, seed=seed)


def _cmd_region(args) -> int:
    sample = parse_sample_csv(args.csv)
    region = _build_region(sample, _measure_spec(args), args.mode,
                           args.max_rounds, args.seed)
    _write(region_to_json(region), args.out)
    if args.off:
        Path(args.off).write_text(off_string(region.polytope), encoding="utf-8")
    return EXIT_OK


def _cmd_solve(args) -> int:
    t0 = time.perf_counter()
    sample = parse_sample_csv(args.csv)
    spec = _measure_spec(args)
    w = make_weights_named(spec, sample.n)
    c = np.array([float(v) for v in args.c.split(",")])

    if args.max_form:
        lp = transform_max(c=c, b=args.b, sample=sample, weights=w,
                           nonneg=args.nonneg)
    else:
        lp = RobustLP(c=c, b=args.b, sample=sample, weights=w,
                      nonneg=args.nonneg)

    region = None
    t1 = time.perf_counter()
    if args.mode == "iterative":
        outcome = solve_iterative(lp, seed=args.seed)
    else:
        from dataclasses import replace
        region = region_support_oracle(lp.sample, w, seed=args.seed)
        outcome = solve_ray(replace(lp, region=region, sample=None))
    t2 = time.perf_counter()
    timings = {"parse_ms": 1e3 * (t1 - t0), "solve_ms": 1e3 * (t2 - t1),
               "total_ms": 1e3 * (t2 - t0)}
    payload = emit_result(outcome, region=region, timings_ms=timings,
                          seed=args.seed)
    _write(payload.decode(), args.out)
    return _status_code(outcome.status)


def _cmd_portfolio(args) -> int:
    sample = parse_sample_csv(args.csv)
    spec = _measure_spec(args)
    result = portfolio_solve(sample.rows, spec, args.rho0,
                             nonneg=not args.allow_short, mode=args.mode,
                             jitter=args.jitter, seed=args.seed)
    doc = {
        "status": result.status,
        "x": result.x,
        "expected_return": result.expected_return,
        "risk": result.risk,
        "var": result.var_level,
        "rho0": result.risk_bound,
        "flags": list(result.flags),
    }
    if args.oracle_check and result.status == "finite":
        oracle_x = grid_oracle(sample.rows, spec, args.rho0, step=args.oracle_step)
        doc["oracle_x"] = oracle_x
        if oracle_x is not None and result.x is not None:
            doc["oracle_gap"] = float(np.max(np.abs(oracle_x - result.x)))
    _write(jsonify(doc), args.out)
    return _status_code(result.status)


def _dist_from_args(args) -> DistributionSpec:
    d = args.dim
    if args.dist == "uniform_box":
        return DistributionSpec.uniform_box([(0.0, 1.0)] * d, seed=args.seed)
    if args.dist == "gaussian":
        return DistributionSpec.gaussian([0.0] * d, np.eye(d).tolist(),
                                         seed=args.seed)
    if args.dist == "mixture":
        return paper_style_mixture(d, seed=args.seed)
    return DistributionSpec.point_mass([0.5] * d, seed=args.seed)


def _write_report_files(rows: list[dict], doc: dict, out_dir: Path, stem: str,
                        figure) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    (out_dir / f"{stem}.json").write_text(jsonify(doc), encoding="utf-8")
    figure(out_dir / f"{stem}.png")
    print(f"wrote {csv_path}, {stem}.json, {stem}.png in {out_dir}")


def _cmd_converge(args) -> int:
    from .plots import convergence_figure
    dist = _dist_from_args(args)
    spec = _measure_spec(args)
    n_list = [int(v) for v in args.n_list.split(",")]
    report = convergence_experiment(dist, spec, n_list, reps=args.reps,
                                    n_dirs=args.dirs,
                                    max_rounds=args.max_rounds)
    doc = {
        "dist": args.dist, "dim": args.dim, "seed": args.seed,
        "n_ref": report.n_ref, "reps": report.reps, "n_dirs": report.n_dirs,
        "rows": report.rows(),
        "inexact_cells": [list(c) for c in report.inexact_cells],
    }
    _write_report_files(report.rows(), doc, Path(args.out_dir), "convergence",
                        lambda p: convergence_figure(report, p))
    return EXIT_OK


def _cmd_bench(args) -> int:
    from .plots import benchmark_figure
    spec = _measure_spec(args)
    d_list = [int(v) for v in args.d_list.split(",")]
    n_list = [int(v) for v in args.n_list.split(",")]
    report = benchmark(d_list, n_list, spec, reps=args.reps, seed=args.seed,
                       timeout_s=args.timeout)
    doc = {
        "d_list": list(report.d_list), "n_list": list(report.n_list),
        "medians_s": [list(r) for r in report.medians],
        "slopes": list(report.slopes), "reps": report.reps,
        "timeouts": [list(t) for t in report.timeouts], "seed": args.seed,
    }
    _write_report_files(report.rows(), doc, Path(args.out_dir), "benchmark",
                        lambda p: benchmark_figure(report, p))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="riskray",
                     description="Robust LPs with distortion risk constraints "
                                 "via weighted-mean trimmed regions")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("risk", parents=[], help="build/evaluate a risk measure")
    _add_measure_flags(p)
    p.add_argument("--n", type=int, help="sample size for the weight vector")
    p.add_argument("--csv", help="univariate sample to evaluate")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_risk)

    p = sub.add_parser("region", help="construct the uncertainty region")
    _add_measure_flags(p)
    p.add_argument("--csv", required=True, help="sample rows")
    p.add_argument("--mode", choices=["exact", "oracle"], default="oracle")
    p.add_argument("--max-rounds", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.add_argument("--off", help="also write an OFF mesh (d=3)")
    p.set_defaults(func=_cmd_region)

    p = sub.add_parser("solve", help="solve the robust LP")
    _add_measure_flags(p)
    p.add_argument("--csv", required=True, help="sample rows")
    p.add_argument("--c", required=True, help="goal coefficients, comma list")
    p.add_argument("--b", type=float, required=True, help="right-hand side")
    p.add_argument("--nonneg", action="store_true",
                   help="restrict to nonnegative solutions")
    p.add_argument("--mode", choices=["exact", "iterative"], default="exact")
    p.add_argument("--max-form", action="store_true",
                   help="input is max c.x s.t. a.x <= b")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("portfolio", help="mean-risk portfolio selection")
    _add_measure_flags(p)
    p.add_argument("--csv", required=True, help="scenario rows x asset columns")
    p.add_argument("--rho0", type=float, required=True, help="risk bound")
    p.add_argument("--allow-short", action="store_true",
                   help="drop the no-short-sales restriction")
    p.add_argument("--mode", choices=["auto", "exact", "iterative"],
                   default="auto")
    p.add_argument("--jitter", action="store_true",
                   help="break riskless-asset degeneracy with 1e-8 noise")
    p.add_argument("--oracle-check", action="store_true",
                   help="compare against the simplex grid oracle (d<=3)")
    p.add_argument("--oracle-step", type=float, default=0.005)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_portfolio)

    p = sub.add_parser("converge", help="Hausdorff consistency experiment")
    _add_measure_flags(p)
    p.add_argument("--dist", choices=["uniform_box", "gaussian", "mixture",
                                      "point_mass"], default="uniform_box")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--n-list", default="250,1000,4000")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--dirs", type=int, default=500)
    p.add_argument("--max-rounds", type=int, default=14)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="reports")
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("bench", help="runtime-scaling benchmark")
    _add_measure_flags(p)
    p.add_argument("--d-list", default="3")
    p.add_argument("--n-list", default="1000,2000,3000,4000,5000")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--timeout", type=float, default=120.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="reports")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"riskray: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"riskray: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RiskrayError as exc:
        print(f"riskray: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
