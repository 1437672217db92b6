"""Pure-numpy batch kernels: the fallback when the compiled extension is absent.

Each function operates on a (trials, K) block at once.  Semantics match the
native kernels trial for trial: the EM loop freezes a trial as soon as its
own step falls below tolerance, so per-trial results do not depend on how
trials are grouped into blocks.
"""

from __future__ import annotations

import math

import numpy as np

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def em_batch(y, sigma, delta, mu0, step_tol, max_iter):
    """EM iteration for the quantized/dithered Gaussian location MLE.

    y is (T, K); mu0 the per-trial initial estimate.  Returns
    (estimates, iterations, converged) arrays of length T.
    """
    from .._special import normal_interval  # deferred: backend resolution

    y = np.ascontiguousarray(y, dtype=np.float64)
    T, K = y.shape
    mu = np.array(mu0, dtype=np.float64).copy()
    iters = np.zeros(T, dtype=np.int64)
    conv = np.zeros(T, dtype=bool)
    half = 0.5 * delta
    coef = sigma / (K * _SQRT_2PI)

    active = np.arange(T)
    y_act = y
    mu_act = mu.copy()
    with np.errstate(under="ignore", over="ignore"):
        for j in range(1, max_iter + 1):
            arg_p = (y_act - mu_act[:, None] + half) / sigma
            arg_m = (y_act - mu_act[:, None] - half) / sigma
            num = np.exp(-0.5 * arg_m * arg_m) - np.exp(-0.5 * arg_p * arg_p)
            den = np.maximum(normal_interval(arg_m, arg_p), 1e-300)
            step = coef * np.sum(num / den, axis=1)
            mu_act = mu_act + step
            iters[active] = j
            done = np.abs(step) < step_tol
            if done.any():
                idx = active[done]
                mu[idx] = mu_act[done]
                conv[idx] = True
                keep = ~done
                active = active[keep]
                mu_act = mu_act[keep]
                y_act = y_act[keep]
                if active.size == 0:
                    break
    mu[active] = mu_act
    return mu, iters, conv


def ggml_batch(y_sorted, p, rel_tol=1e-10, max_iter=128):
    """Root of sum sign(y - mu) |y - mu|^(p-1) by bisection on [y(1), y(K)].

    Powers are evaluated on gaps scaled by their per-trial maximum so that
    large p neither overflows nor flushes the whole sum to zero.
    """
    y = np.ascontiguousarray(y_sorted, dtype=np.float64)
    T, K = y.shape
    lo = y[:, 0].copy()
    hi = y[:, -1].copy()
    span = hi - lo
    tol = rel_tol * span
    live = span > 0.0
    with np.errstate(under="ignore"):
        for _ in range(max_iter):
            if not np.any((hi - lo > tol) & live):
                break
            mid = 0.5 * (lo + hi)
            d = y - mid[:, None]
            ad = np.abs(d)
            s = ad.max(axis=1)
            s[s == 0.0] = 1.0
            g = np.sum(np.sign(d) * (ad / s[:, None]) ** (p - 1.0), axis=1)
            go_up = g > 0.0
            lo = np.where(go_up, mid, lo)
            hi = np.where(go_up, hi, mid)
    return 0.5 * (lo + hi)


def nonlinear_batch(y_sorted, p):
    """Gap-weighted symmetric pair estimator (order-statistic pairs, odd
    median dropped); weights proportional to pair gap^(p-2)."""
    y = np.ascontiguousarray(y_sorted, dtype=np.float64)
    T, K = y.shape
    if K < 2:
        return y[:, 0].copy()
    M = K // 2
    upper = y[:, K - 1:K - 1 - M:-1]  # Y(K), Y(K-1), ..., Y(K-M+1)
    lower = y[:, :M]
    gaps = upper - lower
    gmax = gaps.max(axis=1)
    degenerate = gmax == 0.0
    gmax_safe = np.where(degenerate, 1.0, gmax)
    with np.errstate(under="ignore"):
        w = (gaps / gmax_safe[:, None]) ** (p - 2.0)
    wsum = w.sum(axis=1)
    est = np.sum(w * 0.5 * (upper + lower), axis=1) / wsum
    return np.where(degenerate, y[:, 0], est)
