"""Command-line front end.

Subcommands: simulate (Monte Carlo sweep), bounds (bound curves on a ratio
grid), regimes (xi1/xi2 and their fits), fitp (kurtosis-matched shape), and
estimate (run one estimator on a saved batch).  Exit codes: 0 success,
1 usage error, 2 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import sys

from . import bounds as bounds_mod
from .estimators import (EstimatorKind, apply_weights, est_dml, est_ggml,
                         est_mean, est_midrange, est_nonlinear, est_q_mean,
                         est_qml, weights_alpha_outer, weights_nearly_best)
from .ggapprox import GGParams, fit_shape
from .harness import SweepConfig, emit_csv, run_sweep
from .numerics import NonConvergenceError
from .quantize import load_batch

import math

USAGE_ERROR = 1
NONCONVERGENCE_ERROR = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _float_list(text: str):
    return [float(tok) for tok in text.split(",") if tok]


def _int_list(text: str):
    return [int(tok) for tok in text.split(",") if tok]


def _grid(text: str):
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"grid must look like lo:hi:n, got {text!r}") from None
    if n < 1 or not lo <= hi:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    if n == 1:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def _build_parser() -> _Parser:
    parser = _Parser(prog="ditherlab",
                     description="Dithered-quantization estimation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo sweep")
    sim.add_argument("--r", type=_float_list, required=True,
                     help="comma-separated sigma_z/delta ratios")
    sim.add_argument("--k", type=_int_list, required=True,
                     help="comma-separated sample counts")
    sim.add_argument("--trials", type=int, default=20000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--delta", type=float, default=1.0)
    sim.add_argument("--estimators", default="all",
                     help="comma-separated estimator names, or 'all'")
    sim.add_argument("--out", default="-", help="output CSV path, '-' = stdout")

    bnd = sub.add_parser("bounds", help="tabulate bound curves")
    bnd.add_argument("--k", type=int, required=True)
    bnd.add_argument("--r-grid", type=_grid, required=True,
                     help="linear ratio grid lo:hi:n")

    reg = sub.add_parser("regimes", help="regime boundaries for one K")
    reg.add_argument("--k", type=int, required=True)

    fit = sub.add_parser("fitp", help="kurtosis-matched GG shape for a ratio")
    fit.add_argument("--ratio", type=float, required=True)

    est = sub.add_parser("estimate", help="run one estimator on a saved batch")
    est.add_argument("--input", required=True, help="batch CSV from save_batch")
    est.add_argument("--estimator", required=True)
    est.add_argument("--sigma-z", type=float, default=None,
                     help="override the sigma_z recorded in the batch header")
    est.add_argument("--p", type=float, default=None, help="GG shape to use")
    est.add_argument("--auto-p", action="store_true",
                     help="fit the shape from the batch header's sigma_z/delta")
    return parser


def _cmd_simulate(args, out) -> int:
    if args.estimators.strip().lower() == "all":
        kinds = list(EstimatorKind)
    else:
        kinds = [EstimatorKind.parse(tok) for tok in args.estimators.split(",")]
    config = SweepConfig(r_values=args.r, k_values=args.k, trials=args.trials,
                         master_seed=args.seed, delta=args.delta,
                         estimators=kinds)
    result = run_sweep(config)
    if args.out == "-":
        emit_csv(result, out)
    else:
        emit_csv(result, args.out)
    return 0


def _cmd_bounds(args, out) -> int:
    out.write("r,K,nmse_mean,nmse_mid,nvar_ggml,ncrb,nmse_q\n")
    for r in args.r_grid:
        c = bounds_mod.bound_curve(r, args.k)
        out.write(f"{c.r:.9g},{c.k},{c.nmse_mean:.9g},{c.nmse_mid:.9g},"
                  f"{c.nvar_ggml:.9g},{c.ncrb:.9g},{c.nmse_q:.9g}\n")
    return 0


def _cmd_regimes(args, out) -> int:
    k = args.k
    out.write("K,xi1,xi1_fit_cubic,xi1_fit_linear,xi2,xi2_fit\n")
    out.write(f"{k},{bounds_mod.xi1(k):.9g},{bounds_mod.xi1_fit_cubic(k):.9g},"
              f"{bounds_mod.xi1_fit_linear(k):.9g},{bounds_mod.xi2(k):.9g},"
              f"{bounds_mod.xi2_fit(k):.9g}\n")
    return 0


def _cmd_fitp(args, out) -> int:
    fit = fit_shape(args.ratio)
    out.write("r,p_hat,excess_kurtosis\n")
    out.write(f"{fit.sigma_over_delta:.9g},{fit.p_hat:.9g},"
              f"{fit.target_excess_kurtosis:.9g}\n")
    return 0


def _cmd_estimate(args, out) -> int:
    batch = load_batch(args.input)
    kind = EstimatorKind.parse(args.estimator)
    sigma_z = args.sigma_z if args.sigma_z is not None else batch.truth.sigma_z
    p = args.p
    if args.auto_p:
        if p is not None:
            raise _UsageError("--p and --auto-p are mutually exclusive")
        p = fit_shape(sigma_z / batch.spec.delta).p_hat
    if kind.needs_shape and p is None:
        raise _UsageError(f"{kind.value} needs --p or --auto-p")

    iterations = 0
    converged = True
    if kind is EstimatorKind.MEAN:
        value = est_mean(batch)
    elif kind is EstimatorKind.MIDRANGE:
        value = est_midrange(batch)
    elif kind is EstimatorKind.Q_MEAN:
        value = est_q_mean(batch)
    elif kind is EstimatorKind.QML:
        value, trace = est_qml(batch, sigma_z)
        iterations, converged = trace.iterations, trace.converged
    elif kind is EstimatorKind.DML:
        value, trace = est_dml(batch, sigma_z)
        iterations, converged = trace.iterations, trace.converged
    elif kind is EstimatorKind.GGML:
        value = est_ggml(batch, p)
    elif kind is EstimatorKind.NONLINEAR:
        value = est_nonlinear(batch, p)
    elif kind is EstimatorKind.NEARLY_BEST:
        sigma_v = batch.spec.delta * math.sqrt(
            (sigma_z / batch.spec.delta) ** 2 + 1.0 / 12.0)
        w = weights_nearly_best(batch.k, GGParams(mu=0.0, sigma=sigma_v, p=p))
        value = apply_weights(batch, w)
    elif kind is EstimatorKind.ALPHA_TRIM:
        value = apply_weights(batch, weights_alpha_outer(batch.k, 2.0 / p))
    else:
        raise AssertionError(kind)

    out.write("estimator,estimate,iterations\n")
    out.write(f"{kind.value},{value:.9g},{iterations}\n")
    return 0 if converged else NONCONVERGENCE_ERROR


def cli_main(argv, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        dispatch = {
            "simulate": _cmd_simulate,
            "bounds": _cmd_bounds,
            "regimes": _cmd_regimes,
            "fitp": _cmd_fitp,
            "estimate": _cmd_estimate,
        }
        return dispatch[args.command](args, out)
    except _UsageError as exc:
        err.write(f"usage error: {exc}\n")
        parser.print_usage(err)
        return USAGE_ERROR
    except NonConvergenceError as exc:
        err.write(f"numerical non-convergence: {exc}\n")
        return NONCONVERGENCE_ERROR
    except (OSError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return USAGE_ERROR


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
