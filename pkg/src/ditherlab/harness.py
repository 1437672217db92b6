"""Monte Carlo engine: trial sweeps over (sigma_z/delta, K), NMSE scoring,
and CSV emission.

Per trial, the location is drawn uniformly over one bin, one dithered and one
quantized batch are generated sharing the same Gaussian noise realizations,
and every requested estimator is scored as ((estimate - mu_x)/delta)^2.
Per-trial randomness comes from streams keyed by (master_seed, trial index),
and the final averages are accumulated in trial order from a collected
buffer, so results are bit-identical no matter how many workers run.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .estimators import (ALL_ESTIMATORS, EM_MAX_ITER, EM_STEP_TOL,
                         EstimatorKind, weights_alpha_outer,
                         weights_nearly_best)
from .ggapprox import GGParams, fit_shape
from .numerics import RandomStream
from .quantize import (QuantizerSpec, SignalModel, draw_dithered_batch,
                       draw_quantized_batch)

__all__ = [
    "SweepConfig",
    "SweepRow",
    "SweepResult",
    "TrialResult",
    "run_trial",
    "run_sweep",
    "emit_csv",
    "parse_csv",
]

_CHUNK = 2048


@dataclass(frozen=True)
class SweepConfig:
    """Grid, trial count, seed, and estimator set for one sweep."""

    r_values: tuple
    k_values: tuple
    trials: int = 20000
    master_seed: int = 0
    delta: float = 1.0
    estimators: tuple = ALL_ESTIMATORS

    def __post_init__(self):
        object.__setattr__(self, "r_values", tuple(float(r) for r in self.r_values))
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        object.__setattr__(self, "estimators",
                           tuple(EstimatorKind(e) for e in self.estimators))
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if any(r < 0.0 for r in self.r_values):
            raise ValueError("all ratios must be >= 0")
        if any(k < 1 for k in self.k_values):
            raise ValueError("all K must be >= 1")
        if not self.delta > 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")


@dataclass(frozen=True)
class SweepRow:
    r: float
    k: int
    estimator: EstimatorKind
    nmse: float
    trials: int
    seed: int


@dataclass(frozen=True)
class SweepResult:
    """One row per (r, K, estimator) plus EM non-convergence tallies."""

    rows: tuple
    flagged: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TrialResult:
    """Squared errors of one trial, normalized by delta^2, plus the set of
    estimators whose iteration hit its cap (still scored)."""

    sq_errors: dict
    non_converged: frozenset


class _Precomputed:
    """Per-(r, K) quantities shared by every trial: the fitted shape and the
    two data-independent weight vectors."""

    def __init__(self, r: float, k: int, delta: float, estimators):
        self.p_hat = fit_shape(r).p_hat
        self.w_nearly_best = None
        self.w_alpha = None
        if EstimatorKind.NEARLY_BEST in estimators and k >= 2:
            sigma_v = delta * math.sqrt(r * r + 1.0 / 12.0)
            params = GGParams(mu=0.0, sigma=sigma_v, p=self.p_hat)
            self.w_nearly_best = weights_nearly_best(k, params).weights
        if EstimatorKind.ALPHA_TRIM in estimators:
            self.w_alpha = weights_alpha_outer(k, 2.0 / self.p_hat).weights


def _score_chunk(r, k, delta, estimators, master_seed, t0, t1, pre):
    """Squared errors for trials [t0, t1): returns ((t1-t0, n_est) errors,
    per-estimator non-convergence counts)."""
    n = t1 - t0
    sigma_z = r * delta
    spec = QuantizerSpec(delta=delta)
    need_quantized = any(e.needs_quantized for e in estimators)
    y = np.empty((n, k))
    u = np.empty((n, k)) if need_quantized else None
    mu = np.empty(n)
    for i, t in enumerate(range(t0, t1)):
        stream = RandomStream(master_seed, stream_id=t)
        mu_x = delta * (stream.substream(2).uniforms(1)[0] - 0.5)
        model = SignalModel(mu_x=mu_x, sigma_z=sigma_z)
        y[i] = draw_dithered_batch(model, spec, k, stream).samples
        if need_quantized:
            u[i] = draw_quantized_batch(model, spec, k, stream).samples
        mu[i] = mu_x

    y_sorted = None
    errors = np.empty((n, len(estimators)))
    flags = {}
    for j, kind in enumerate(estimators):
        non_conv = 0
        if kind is EstimatorKind.MEAN:
            est = y.mean(axis=1)
        elif kind is EstimatorKind.MIDRANGE:
            est = 0.5 * (y.min(axis=1) + y.max(axis=1))
        elif kind is EstimatorKind.Q_MEAN:
            est = u.mean(axis=1)
        elif kind in (EstimatorKind.QML, EstimatorKind.DML):
            if not sigma_z > 0.0:
                raise ValueError(f"{kind.value} requires sigma_z > 0 (r > 0)")
            if kind is EstimatorKind.QML:
                init = u.mean(axis=1)
                data = u
            else:
                init = 0.5 * (y.min(axis=1) + y.max(axis=1))
                data = y
            est, _, conv = _kernels.em_batch(
                data, sigma_z, delta, init, EM_STEP_TOL * delta, EM_MAX_ITER)
            non_conv = int(np.count_nonzero(~conv))
        else:
            if y_sorted is None:
                y_sorted = np.sort(y, axis=1)
            if kind is EstimatorKind.GGML:
                est = _kernels.ggml_batch(y_sorted, pre.p_hat)
            elif kind is EstimatorKind.NONLINEAR:
                if k < 2:
                    raise ValueError("nonlinear estimator requires K >= 2")
                est = _kernels.nonlinear_batch(y_sorted, pre.p_hat)
            elif kind is EstimatorKind.NEARLY_BEST:
                if pre.w_nearly_best is None:
                    raise ValueError("nearly_best estimator requires K >= 2")
                est = y_sorted @ pre.w_nearly_best
            elif kind is EstimatorKind.ALPHA_TRIM:
                est = y_sorted @ pre.w_alpha
            else:
                raise AssertionError(kind)
        errors[:, j] = ((est - mu) / delta) ** 2
        if non_conv:
            flags[kind] = non_conv
    return errors, flags


def run_trial(r: float, k: int, delta: float, estimators,
              stream: RandomStream) -> TrialResult:
    """Score one Monte Carlo trial.

    ``stream`` identifies the trial: its stream_id is the trial index and
    substreams 0/1/2 supply the signal noise, dither, and location draws.
    """
    estimators = tuple(EstimatorKind(e) for e in estimators)
    pre = _Precomputed(r, k, delta, estimators)
    errors, flags = _score_chunk(r, k, delta, estimators, stream.master_seed,
                                 stream.stream_id, stream.stream_id + 1, pre)
    sq = {kind: float(errors[0, j]) for j, kind in enumerate(estimators)}
    return TrialResult(sq_errors=sq, non_converged=frozenset(flags))


def _worker_count() -> int:
    env = os.environ.get("DITHERLAB_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return 1


def run_sweep(config: SweepConfig) -> SweepResult:
    """NMSE of every requested estimator over the full (r, K) grid.

    Trials are scored in independent chunks (optionally on worker threads,
    see DITHERLAB_THREADS) into a preallocated buffer; the NMSE is then a
    compensated sum over that buffer in trial-index order, making the output
    independent of the worker count.
    """
    rows = []
    flagged = {}
    t_total = config.trials
    workers = _worker_count()
    for r in config.r_values:
        for k in config.k_values:
            pre = _Precomputed(r, k, config.delta, config.estimators)
            errors = np.empty((t_total, len(config.estimators)))
            chunk_flags = []

            def score(t0, t1):
                return _score_chunk(r, k, config.delta, config.estimators,
                                    config.master_seed, t0, t1, pre)

            spans = [(t0, min(t0 + _CHUNK, t_total))
                     for t0 in range(0, t_total, _CHUNK)]
            if workers > 1 and len(spans) > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    results = list(pool.map(lambda s: score(*s), spans))
            else:
                results = [score(*s) for s in spans]
            for (t0, t1), (err, flags) in zip(spans, results):
                errors[t0:t1] = err
                chunk_flags.append(flags)

            for j, kind in enumerate(config.estimators):
                nmse = math.fsum(errors[:, j]) / t_total
                rows.append(SweepRow(r=r, k=k, estimator=kind, nmse=nmse,
                                     trials=t_total, seed=config.master_seed))
                n_flagged = sum(f.get(kind, 0) for f in chunk_flags)
                if n_flagged:
                    flagged[(r, k, kind)] = n_flagged
    return SweepResult(rows=tuple(rows), flagged=flagged)


def emit_csv(result: SweepResult, dest) -> None:
    """Write a sweep as CSV: header, one row per (r, K, estimator) with
    floats at 9 significant digits, then one comment line per non-converged
    tally (omitted when everything converged)."""
    own = isinstance(dest, (str, bytes))
    try:
        fh = open(dest, "w", encoding="utf-8") if own else dest
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV to {dest!r}: {exc}") from exc
    try:
        fh.write("r,K,estimator,nmse,trials,seed\n")
        for row in result.rows:
            fh.write(f"{row.r:.9g},{row.k},{row.estimator.value},"
                     f"{row.nmse:.9g},{row.trials},{row.seed}\n")
        for (r, k, kind), count in sorted(
                result.flagged.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].value)):
            fh.write(f"# non_converged r={r:.9g} K={k} "
                     f"estimator={kind.value} count={count}\n")
    finally:
        if own:
            fh.close()


def parse_csv(src) -> SweepResult:
    """Inverse of emit_csv (floats round-trip at 9 significant digits)."""
    own = isinstance(src, (str, bytes))
    fh = open(src, "r", encoding="utf-8") if own else src
    try:
        lines = [ln.strip() for ln in fh if ln.strip()]
    finally:
        if own:
            fh.close()
    if not lines or lines[0] != "r,K,estimator,nmse,trials,seed":
        raise ValueError("not a sweep CSV (missing header)")
    rows = []
    flagged = {}
    for ln in lines[1:]:
        if ln.startswith("#"):
            fields = dict(tok.split("=", 1) for tok in ln[1:].split()
                          if "=" in tok)
            key = (float(fields["r"]), int(fields["K"]),
                   EstimatorKind(fields["estimator"]))
            flagged[key] = int(fields["count"])
            continue
        r, k, est, nmse, trials, seed = ln.split(",")
        rows.append(SweepRow(r=float(r), k=int(k),
                             estimator=EstimatorKind(est), nmse=float(nmse),
                             trials=int(trials), seed=int(seed)))
    return SweepResult(rows=tuple(rows), flagged=flagged)
