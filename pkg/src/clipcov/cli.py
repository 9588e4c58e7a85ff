"""Command line interface: estimate, bench, validate."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .bench import ESTIMATORS, run_benchmark, validate_coverage
from .errors import ClipcovError, InputError
from .select import SELECTORS, run_pipeline
from .synth import ScenarioConfig

_LIMITER = None


def _pin_blas_single_thread() -> None:
    # BLAS thread scheduling changes floating-point reduction order; pinning
    # to one thread keeps outputs bit-identical across machines. The limiter
    # must stay referenced or the limit is restored when it is collected.
    global _LIMITER
    if _LIMITER is None:
        from threadpoolctl import threadpool_limits

        _LIMITER = threadpool_limits(limits=1)


def read_matrix_csv(path: str, header: bool = False) -> np.ndarray:
    """Read a numeric CSV into a float matrix.

    Errors name the offending line (1-based, counting the header if any).
    """
    rows = []
    width = None
    try:
        handle = open(path, newline="")
    except OSError as err:
        raise InputError(f"cannot read {path}: {err}") from err
    with handle:
        reader = csv.reader(handle)
        for line_no, record in enumerate(reader, start=1):
            if header and line_no == 1:
                continue
            if not record or all(field.strip() == "" for field in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise InputError(
                    f"{path}:{line_no}: expected {width} columns, got {len(record)}"
                )
            try:
                rows.append([float(field) for field in record])
            except ValueError as err:
                raise InputError(f"{path}:{line_no}: {err}") from err
    if not rows:
        raise InputError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def write_matrix_csv(path: str, matrix: np.ndarray) -> None:
    np.savetxt(path, matrix, fmt="%.17g", delimiter=",")


def _witness_json(witness):
    if witness is None:
        return None
    j, s, dist, bound = witness
    return {"index": int(j), "against": int(s), "distance": float(dist), "bound": float(bound)}


def _estimate_diagnostics(result) -> dict:
    sel = result.selection
    return {
        "method": sel.method,
        "selected_index": int(sel.index),
        "selected_gamma": float(sel.gamma),
        "gamma_grid": result.grid.values.tolist(),
        "radii": result.radii.table.tolist(),
        "radius_stabilizer_used": result.radii.stabilizer_used.tolist(),
        "fold_sizes": result.plan.fold_sizes.tolist(),
        "dropped_count": int(result.plan.dropped.size),
        "psi": result.envelope.psi.tolist(),
        "psi_bar": result.envelope.psi_bar.tolist(),
        "variance_proxy_norms": result.envelope.proxy_norms.tolist(),
        "bias_proxy": None if result.proxy is None else result.proxy.aggregated.tolist(),
        "objective": None if sel.objective is None else sel.objective.tolist(),
        "admissible": None if sel.admissible is None else sel.admissible.tolist(),
        "violation_witness": _witness_json(sel.violation_witness),
        "c_bias": sel.c_bias,
        "budget": {
            "delta": result.budget.delta,
            "delta_var": result.budget.delta_var,
            "delta_bias": result.budget.delta_bias,
            "alpha": result.budget.alpha,
            "mom_blocks": result.budget.B,
        },
    }


def _cmd_estimate(args) -> int:
    data = read_matrix_csv(args.input, header=args.header)
    result = run_pipeline(
        data,
        K=args.folds,
        delta=args.delta,
        rho=args.rho,
        c_bias=args.cbias,
        seed=args.seed,
        selector=args.selector,
        center=args.center == "paired",
    )
    write_matrix_csv(args.output, result.selection.estimate)
    diag_path = os.path.splitext(args.output)[0] + ".diagnostics.json"
    with open(diag_path, "w") as handle:
        json.dump(_estimate_diagnostics(result), handle, indent=2)
        handle.write("\n")
    print(f"wrote {args.output} (gamma={result.selection.gamma:g}, selector={result.selection.method})")
    print(f"wrote {diag_path}")
    return 0


def _scenario_json(config: ScenarioConfig) -> dict:
    return config.to_dict()


def _report_markdown(report) -> str:
    lines = [
        "| estimator | cov_err | subspace_err | eig_err | wall_time_s |",
        "|---|---|---|---|---|",
    ]
    for name in sorted(report.aggregates):
        agg = report.aggregates[name]
        cells = [
            f"{agg[m][0]:.4f} ± {agg[m][1]:.4f}"
            for m in ("cov_err", "subspace_err", "eig_err")
        ]
        cells.append(f"{agg['wall_time_seconds'][0]:.4f}")
        lines.append("| " + " | ".join([name] + cells) + " |")
    return "\n".join(lines)


def _cmd_bench(args) -> int:
    config = ScenarioConfig.from_file(args.config)
    report = run_benchmark(config, estimators=tuple(args.estimators))
    os.makedirs(args.out, exist_ok=True)

    metrics_path = os.path.join(args.out, "metrics.csv")
    with open(metrics_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["estimator", "replication", "cov_err", "subspace_err", "eig_err", "wall_time_seconds"])
        for row in report.rows:
            writer.writerow(
                [
                    row.estimator,
                    row.replication,
                    f"{row.cov_err:.17g}",
                    f"{row.subspace_err:.17g}",
                    f"{row.eig_err:.17g}",
                    f"{row.wall_time_seconds:.6f}",
                ]
            )

    aggregate_path = os.path.join(args.out, "aggregate.json")
    with open(aggregate_path, "w") as handle:
        json.dump(
            {
                "scenario": _scenario_json(report.scenario),
                "aggregates": report.aggregates,
                "diagnostics": report.diagnostics,
            },
            handle,
            indent=2,
        )
        handle.write("\n")

    table = _report_markdown(report)
    scenario = report.scenario
    report_path = os.path.join(args.out, "report.md")
    with open(report_path, "w") as handle:
        handle.write(
            f"# Benchmark: {scenario.distribution}, n={scenario.n}, d={scenario.d}, "
            f"r={scenario.r}, theta={scenario.theta:g}, epsilon={scenario.epsilon:g}, "
            f"kappa={scenario.kappa:g}, replications={scenario.replications}\n\n"
        )
        handle.write("Cells are mean ± sample std over replications.\n\n")
        handle.write(table)
        handle.write("\n")

    print(table)
    print(f"wrote {metrics_path}, {aggregate_path}, {report_path}")
    return 0


def _cmd_validate(args) -> int:
    result = validate_coverage(
        n=args.n,
        d=args.d,
        K=args.folds,
        delta=args.delta,
        replications=args.reps,
        seed=args.seed,
        oracle_size=args.oracle_size,
    )
    print(
        f"coverage {result.fraction:.4f} ({result.successes}/{result.replications}), "
        f"95% CI [{result.ci_low:.4f}, {result.ci_high:.4f}], target >= {1.0 - args.delta:.4f}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clipcov",
        description="Certified robust covariance estimation via cross-fitted norm clipping.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate a covariance matrix from a CSV of rows")
    est.add_argument("--input", required=True, help="CSV file, one observation per row")
    est.add_argument("--header", action="store_true", help="skip the first CSV line")
    est.add_argument("--center", choices=("none", "paired"), default="none",
                     help="'paired' centers by differencing disjoint pairs before estimation")
    est.add_argument("--delta", type=float, default=0.1, help="total failure budget")
    est.add_argument("--folds", type=int, default=2, help="number of cross-fitting folds")
    est.add_argument("--rho", type=float, default=2.0, help="gamma grid ratio in (1, 2]")
    est.add_argument("--cbias", type=float, default=1.0, help="bias multiplier for minupper, >= 1")
    est.add_argument("--selector", choices=SELECTORS, default="minupper")
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--output", required=True, help="covariance CSV path; diagnostics JSON is written alongside")
    est.set_defaults(func=_cmd_estimate)

    bench = sub.add_parser("bench", help="run a contaminated spiked-covariance benchmark scenario")
    bench.add_argument("--config", required=True, help="scenario JSON file")
    bench.add_argument("--out", required=True, help="output directory")
    bench.add_argument("--estimators", nargs="+", choices=ESTIMATORS, default=list(ESTIMATORS))
    bench.set_defaults(func=_cmd_bench)

    val = sub.add_parser("validate", help="Monte Carlo check of the variance certificates")
    val.add_argument("--n", type=int, default=200)
    val.add_argument("--d", type=int, default=20)
    val.add_argument("--folds", type=int, default=2)
    val.add_argument("--delta", type=float, default=0.1, help="variance budget; coverage target is 1 - delta")
    val.add_argument("--reps", type=int, default=500)
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--oracle-size", type=int, default=1_000_000)
    val.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    _pin_blas_single_thread()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ClipcovError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
