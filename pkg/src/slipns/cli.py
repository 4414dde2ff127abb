"""Command-line entry point.

    slipns run <experiment> --config cfg.txt [--out DIR] [--resume CKPT] [--plots]
    slipns verify
    slipns fit --csv diagnostics.csv --column l2_drho [--window a,b]

Exit codes: 0 pass, 1 assertion failure, 2 configuration error,
3 numerical blowup.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import diagnostics, operators
from .config import load_config, parse_config
from .errors import (
    CheckpointError,
    ConfigurationError,
    NumericalBlowupError,
    PositivityError,
    SlipnsError,
    StiffnessError,
)
from .experiments import EXPERIMENTS, run_experiment
from .grid import build_grid, fill_vector_field

EXIT_PASS = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="slipns",
        description="slip-wall compressible flow runs, diagnostics, and verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset experiment")
    run.add_argument("experiment", choices=EXPERIMENTS)
    run.add_argument("--config", help="key-value config file (defaults when omitted)")
    run.add_argument("--out", help="output directory (overrides the config)")
    run.add_argument("--resume", help="checkpoint file to resume from")
    run.add_argument("--plots", action="store_true", help="also write SVG plots")

    sub.add_parser("verify", help="operator oracles plus the inequality probes")

    fit = sub.add_parser("fit", help="exponential fit of one CSV column")
    fit.add_argument("--csv", required=True)
    fit.add_argument("--column", required=True)
    fit.add_argument("--window", help="t0,t1 (default: last 60%% of the series)")
    return parser


def _cmd_run(args):
    cfg = load_config(args.config) if args.config else parse_config("")
    if args.plots:
        cfg.plots = True
    report = run_experiment(args.experiment, cfg, out_dir=args.out, resume=args.resume)
    for failure in report.failures:
        print(f"FAIL {report.name}: {failure}")
    verdict = "pass" if report.passed else "FAIL"
    print(f"{report.name}: {verdict} ({report.artifacts['out_dir']})")
    return EXIT_PASS if report.passed else EXIT_ASSERTION


def _sbp_residual(n, seed):
    """Relative defect of <div u, p> + <u, grad p> for random fields."""
    from .diagnostics import _random_slip_field
    from .grid import ScalarField, fill_scalar_field

    grid = build_grid((1.0, 1.0, 1.0), (n, n, n))
    rng = np.random.default_rng(seed)
    u = fill_vector_field(_random_slip_field(grid, rng))
    p = ScalarField.zeros(grid)
    p.interior[...] = rng.standard_normal(grid.shape)
    fill_scalar_field(p)
    div_term = float(np.sum(operators.divergence(u).interior * p.interior))
    gp = operators.gradient(p)
    grad_term = sum(
        float(np.sum(u.component_interior(d) * gp.component_interior(d)))
        for d in range(3)
    )
    scale = abs(div_term) + abs(grad_term)
    return abs(div_term + grad_term) / scale if scale > 0 else 0.0


def _cmd_verify(args):
    failures = []
    reports = operators.measure_stencil_orders((16, 32, 64))
    for rep in reports:
        status = "ok" if rep.observed_order >= 1.5 else "FAIL"
        print(f"stencil {rep.operator:<11} order {rep.observed_order:.3f} "
              f"residual {rep.residual_norm:.3e}  {status}")
        if rep.observed_order < 1.5:
            failures.append(f"stencil {rep.operator} under-converges")

    sbp = max(_sbp_residual(16, s) for s in range(3))
    print(f"summation-by-parts defect {sbp:.3e}  {'ok' if sbp <= 1e-12 else 'FAIL'}")
    if sbp > 1e-12:
        failures.append("summation-by-parts defect exceeds 1e-12")

    for kind in ("poincare", "divcurl"):
        maxima = {}
        for n in (16, 32):
            grid = build_grid((1.0, 1.0, 1.0), (n, n, n))
            rep = diagnostics.inequality_probe(kind, 50, grid, seed=0)
            maxima[n] = rep.max_ratio
            print(f"probe {kind:<8} N={n:<3} max ratio {rep.max_ratio:.6f} "
                  f"(skipped {rep.skipped})")
        drift = abs(maxima[32] - maxima[16]) / maxima[16]
        status = "ok" if drift <= 0.15 else "FAIL"
        print(f"probe {kind:<8} drift {drift:.4f}  {status}")
        if drift > 0.15:
            failures.append(f"{kind} probe drift exceeds 15%")

    if failures:
        for f in failures:
            print(f"FAIL: {f}")
        return EXIT_ASSERTION
    print("verify: pass")
    return EXIT_PASS


def _cmd_fit(args):
    series = diagnostics.read_csv_series(args.csv, args.column)
    window = None
    if args.window:
        try:
            a, b = (float(v) for v in args.window.split(","))
        except ValueError:
            raise ConfigurationError("--window expects two comma-separated numbers")
        window = (a, b)
    fit = diagnostics.fit_decay(series, window=window)
    out = vars(fit).copy()
    out["column"] = args.column
    print(json.dumps(out, indent=2, default=float))
    if fit.constant or not math.isfinite(fit.rate):
        return EXIT_ASSERTION
    return EXIT_PASS


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_fit(args)
    except (ConfigurationError, CheckpointError, FileNotFoundError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalBlowupError, PositivityError, StiffnessError) as err:
        print(f"numerical blowup: {err}", file=sys.stderr)
        return EXIT_BLOWUP
    except SlipnsError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ASSERTION


if __name__ == "__main__":
    sys.exit(main())
