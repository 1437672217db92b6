"""Location estimators for quantized and dithered measurement batches.

Nine estimators: sample mean, midrange, quantized-sample mean, the quantized
and dithered maximum-likelihood estimates (EM iteration), the generalized
Gaussian MLE (monotone root), and three order-statistics weight families
(nearly-best L-estimate, alpha-outer trimmed mean, gap-weighted nonlinear).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from ._special import normal_interval
from .ggapprox import GGParams, gg_inv_cdf, gg_pdf
from .quantize import MeasurementBatch

__all__ = [
    "EstimatorKind",
    "WeightVector",
    "EmTrace",
    "est_mean",
    "est_midrange",
    "est_q_mean",
    "est_qml",
    "est_dml",
    "est_ggml",
    "est_nonlinear",
    "weights_nearly_best",
    "weights_alpha_outer",
    "apply_weights",
]

EM_MAX_ITER = 500
EM_STEP_TOL = 1e-9  # scaled by delta


class EstimatorKind(str, Enum):
    MEAN = "mean"
    MIDRANGE = "mid"
    Q_MEAN = "q_mean"
    QML = "qml"
    DML = "dml"
    GGML = "ggml"
    NEARLY_BEST = "nearly_best"
    ALPHA_TRIM = "alpha_trim"
    NONLINEAR = "nonlinear"

    @classmethod
    def parse(cls, name: str) -> "EstimatorKind":
        name = name.strip().lower()
        if name == "midrange":
            name = "mid"
        try:
            return cls(name)
        except ValueError:
            raise ValueError(f"unknown estimator {name!r}; choose from "
                             f"{[k.value for k in cls]}") from None

    @property
    def needs_quantized(self) -> bool:
        return self in (EstimatorKind.Q_MEAN, EstimatorKind.QML)

    @property
    def needs_shape(self) -> bool:
        return self in (EstimatorKind.GGML, EstimatorKind.NEARLY_BEST,
                        EstimatorKind.ALPHA_TRIM, EstimatorKind.NONLINEAR)


ALL_ESTIMATORS = tuple(EstimatorKind)


@dataclass(frozen=True)
class WeightVector:
    """Coefficients applied to the ascending order statistics.

    Weights must sum to one and be symmetric (both to 1e-12); every family
    here produces such a vector, and the constructor enforces it.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).copy()
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a non-empty 1-D array")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        if np.max(np.abs(w - w[::-1])) > 1e-12:
            raise ValueError("weights must be symmetric")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class EmTrace:
    """Iterate and log-likelihood history of one EM run."""

    iterates: tuple
    log_likelihoods: tuple
    converged: bool
    iterations: int


def _require_kind(batch: MeasurementBatch, kind: str, name: str) -> None:
    if batch.kind != kind:
        raise ValueError(f"{name} requires a {kind} batch, got {batch.kind}")


def est_mean(batch: MeasurementBatch) -> float:
    """Arithmetic mean of a dithered batch."""
    _require_kind(batch, "dithered", "est_mean")
    return float(batch.samples.mean())


def est_midrange(batch: MeasurementBatch) -> float:
    """Average of the extreme order statistics of a dithered batch."""
    _require_kind(batch, "dithered", "est_midrange")
    return 0.5 * (float(batch.samples.min()) + float(batch.samples.max()))


def est_q_mean(batch: MeasurementBatch) -> float:
    """Mean of the quantized samples."""
    _require_kind(batch, "quantized", "est_q_mean")
    return float(batch.samples.mean())


def _em_log_likelihood(x: np.ndarray, mu: float, sigma: float, half: float) -> float:
    den = normal_interval((x - mu - half) / sigma, (x - mu + half) / sigma)
    return float(np.log(np.maximum(den, 1e-300)).sum())


def _em_locate(x: np.ndarray, sigma: float, delta: float, mu0: float):
    """Traced EM ascent of the interval-censored Gaussian log-likelihood.

    Each update adds sigma/(K sqrt(2 pi)) times the summed conditional-mean
    residuals; it is an exact EM step, so the log-likelihood never decreases.
    """
    k = x.size
    half = 0.5 * delta
    coef = sigma / (k * math.sqrt(2.0 * math.pi))
    mu = float(mu0)
    iterates = [mu]
    lls = [_em_log_likelihood(x, mu, sigma, half)]
    converged = False
    iterations = 0
    with np.errstate(under="ignore", over="ignore"):
        for _ in range(EM_MAX_ITER):
            arg_p = (x - mu + half) / sigma
            arg_m = (x - mu - half) / sigma
            num = np.exp(-0.5 * arg_m * arg_m) - np.exp(-0.5 * arg_p * arg_p)
            den = np.maximum(normal_interval(arg_m, arg_p), 1e-300)
            step = coef * float(np.sum(num / den))
            mu += step
            iterations += 1
            iterates.append(mu)
            lls.append(_em_log_likelihood(x, mu, sigma, half))
            if abs(step) < EM_STEP_TOL * delta:
                converged = True
                break
    trace = EmTrace(tuple(iterates), tuple(lls), converged, iterations)
    return mu, trace


def est_qml(batch: MeasurementBatch, sigma_z: float):
    """Quantized-sample ML location via EM, started at the quantized mean.

    Returns (estimate, EmTrace); a non-converged run is flagged on the trace
    and the last iterate is returned.
    """
    _require_kind(batch, "quantized", "est_qml")
    if not sigma_z > 0.0:
        raise ValueError(f"est_qml requires sigma_z > 0, got {sigma_z}")
    return _em_locate(batch.samples, sigma_z, batch.spec.delta,
                      float(batch.samples.mean()))


def est_dml(batch: MeasurementBatch, sigma_z: float):
    """Dithered-sample ML location via EM, started at the midrange."""
    _require_kind(batch, "dithered", "est_dml")
    if not sigma_z > 0.0:
        raise ValueError(f"est_dml requires sigma_z > 0, got {sigma_z}")
    mid = 0.5 * (float(batch.samples.min()) + float(batch.samples.max()))
    return _em_locate(batch.samples, sigma_z, batch.spec.delta, mid)


def est_ggml(batch: MeasurementBatch, p: float) -> float:
    """GG maximum-likelihood location: the root of the signed-power sum
    sum sign(y_i - mu) |y_i - mu|^(p-1), bisected on [Y(1), Y(K)]."""
    _require_kind(batch, "dithered", "est_ggml")
    if not p >= 2.0:
        raise ValueError(f"est_ggml requires p >= 2, got {p}")
    y_sorted = np.sort(batch.samples)[None, :]
    return float(_kernels.ggml_batch(y_sorted, p)[0])


def est_nonlinear(batch: MeasurementBatch, p: float) -> float:
    """Gap-weighted nonlinear order-statistics estimate."""
    _require_kind(batch, "dithered", "est_nonlinear")
    if batch.k < 2:
        raise ValueError("est_nonlinear requires K >= 2")
    if not p >= 2.0:
        raise ValueError(f"est_nonlinear requires p >= 2, got {p}")
    y_sorted = np.sort(batch.samples)[None, :]
    return float(_kernels.nonlinear_batch(y_sorted, p)[0])


def weights_nearly_best(k: int, params: GGParams) -> WeightVector:
    """Nearly-best L-estimate weights from the GG density at its quantiles.

    b_i = f(c_i) [f(c_{i-1}) - 2 f(c_i) + f(c_{i+1})] with c_i the i/(K+1)
    quantile and f(c_0) = f(c_{K+1}) = 0, normalized to sum one; the second
    difference discretizes the asymptotically optimal weight density.
    """
    if k < 2:
        raise ValueError(f"weights_nearly_best requires K >= 2, got {k}")
    half = (k + 1) // 2
    f = np.empty(k)
    for i in range(1, half + 1):
        q = i / (k + 1.0)
        c = params.mu if q == 0.5 else gg_inv_cdf(q, params)
        f[i - 1] = gg_pdf(c, params)
        f[k - i] = f[i - 1]  # density is symmetric about mu
    fpad = np.concatenate([[0.0], f, [0.0]])
    b = f * (fpad[:-2] - 2.0 * f + fpad[2:])
    a = b / b.sum()
    a = 0.5 * (a + a[::-1])
    return WeightVector(a)


def weights_alpha_outer(k: int, alpha: float) -> WeightVector:
    """Outer trimmed-mean weights keeping the fraction alpha outermost
    order statistics: uniform at alpha = 1, midrange at alpha = 0."""
    if k < 1:
        raise ValueError(f"weights_alpha_outer requires K >= 1, got {k}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    w = np.zeros(k)
    if k == 1:
        w[0] = 1.0
        return WeightVector(w)
    if k * alpha < 1e-300:  # degenerate trim (incl. subnormal alpha): midrange
        w[0] = w[-1] = 0.5
        return WeightVector(w)
    ka = k * alpha
    full = math.floor(0.5 * ka)
    frac_even = (0.5 * ka - full) / ka
    half = (k + 1) // 2
    for i in range(1, half + 1):
        if i <= full:
            w[i - 1] = 1.0 / ka
        elif i == full + 1:
            if k % 2 == 1 and i == half and alpha >= 1.0 - 1.0 / k:
                # odd-K middle weight when the kept fraction wraps around it
                w[i - 1] = (ka - 2.0 * full) / ka
            else:
                w[i - 1] = frac_even
        w[k - i] = w[i - 1]
    return WeightVector(w)


def apply_weights(batch: MeasurementBatch, w: WeightVector) -> float:
    """Inner product of the weight vector with the sorted samples."""
    if len(w) != batch.k:
        raise ValueError(f"weight length {len(w)} does not match K={batch.k}")
    return float(np.sort(batch.samples) @ w.weights)
