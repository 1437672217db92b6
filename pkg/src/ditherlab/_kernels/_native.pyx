# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled batch kernels: per-trial loops over (trials, K) blocks.

Mirrors the pure-numpy kernels in _pure.py; the EM loop exits each trial
independently, and saturation fast paths skip erfc/exp calls whose result is
exactly 0 or 1 in double precision.
"""

import numpy as np

from libc.math cimport erfc, exp, fabs, log, pow, sqrt

cdef double SQRT_HALF = 0.70710678118654752440
cdef double SQRT_2PI = 2.50662827463100050242
cdef double INV_SQRT_2PI = 0.39894228040143267794


cdef inline double _interval_prob(double a_lo, double a_hi) nogil:
    # P(a_lo < X <= a_hi), evaluated from whichever tail avoids the
    # catastrophic 1 - 1 rounding of a naive CDF difference
    if a_lo >= 0.0:
        return 0.5 * (erfc(a_lo * SQRT_HALF) - erfc(a_hi * SQRT_HALF))
    if a_hi <= 0.0:
        return 0.5 * (erfc(-a_hi * SQRT_HALF) - erfc(-a_lo * SQRT_HALF))
    return 1.0 - 0.5 * erfc(a_hi * SQRT_HALF) - 0.5 * erfc(-a_lo * SQRT_HALF)


cdef inline double _exp_neg_half_sq(double a) nogil:
    if a > 39.0 or a < -39.0:  # exp(-a*a/2) underflows to exactly 0 there
        return 0.0
    return exp(-0.5 * a * a)


def erfc_vec(x):
    """Complementary error function, elementwise."""
    flat = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef double[::1] xv = flat
    out = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            ov[i] = erfc(xv[i])
    return out.reshape(np.shape(x))


def ndtri(q):
    """Standard normal quantile, elementwise, for arguments in (0, 1).

    A&S 26.2.23 rational start plus three Newton steps on the CDF.
    """
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64).ravel()
    out = np.empty(qv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef double ql, t, x, err
    cdef int k
    for i in range(qv.shape[0]):
        if not (0.0 < qv[i] < 1.0):
            raise ValueError("quantile arguments must lie in (0, 1)")
    with nogil:
        for i in range(qv.shape[0]):
            ql = qv[i] if qv[i] < 0.5 else 1.0 - qv[i]
            if ql == 0.5:
                ov[i] = 0.0
                continue
            t = sqrt(-2.0 * log(ql))
            x = -(t - ((0.010328 * t + 0.802853) * t + 2.515517)
                  / (((0.001308 * t + 0.189269) * t + 1.432788) * t + 1.0))
            for k in range(3):
                err = 0.5 * erfc(-x * SQRT_HALF) - ql
                x -= err / (INV_SQRT_2PI * exp(-0.5 * x * x))
            ov[i] = x if qv[i] < 0.5 else -x
    return out.reshape(np.shape(q))


def em_batch(y, double sigma, double delta, mu0, double step_tol, int max_iter):
    """EM iteration for the quantized/dithered Gaussian location MLE.

    Returns (estimates, iterations, converged) arrays of length T.
    """
    cdef double[:, ::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] m0 = np.ascontiguousarray(mu0, dtype=np.float64)
    cdef Py_ssize_t T = yv.shape[0], K = yv.shape[1]
    mu_arr = np.empty(T, dtype=np.float64)
    it_arr = np.zeros(T, dtype=np.int64)
    cv_arr = np.zeros(T, dtype=np.uint8)
    cdef double[::1] mu = mu_arr
    cdef long long[::1] iters = it_arr
    cdef unsigned char[::1] conv = cv_arr
    cdef double half = 0.5 * delta
    cdef double coef = sigma / (K * SQRT_2PI)
    cdef Py_ssize_t t, k
    cdef int j
    cdef double m, s, ap, am, num, den, step
    with nogil:
        for t in range(T):
            m = m0[t]
            for j in range(1, max_iter + 1):
                s = 0.0
                for k in range(K):
                    ap = (yv[t, k] - m + half) / sigma
                    am = (yv[t, k] - m - half) / sigma
                    num = _exp_neg_half_sq(am) - _exp_neg_half_sq(ap)
                    if num != 0.0:
                        den = _interval_prob(am, ap)
                        if den < 1e-300:
                            den = 1e-300
                        s += num / den
                step = coef * s
                m += step
                if fabs(step) < step_tol:
                    conv[t] = 1
                    break
            iters[t] = j
            mu[t] = m
    return mu_arr, it_arr, cv_arr.view(bool)


def ggml_batch(y_sorted, double p, double rel_tol=1e-10, int max_iter=128):
    """Root of sum sign(y - mu)|y - mu|^(p-1) by bisection on [y(1), y(K)]."""
    cdef double[:, ::1] yv = np.ascontiguousarray(y_sorted, dtype=np.float64)
    cdef Py_ssize_t T = yv.shape[0], K = yv.shape[1]
    out = np.empty(T, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t t, k
    cdef int j
    cdef double lo, hi, tol, mid, s, ad, g, d
    with nogil:
        for t in range(T):
            lo = yv[t, 0]
            hi = yv[t, K - 1]
            if hi == lo:
                ov[t] = lo
                continue
            tol = rel_tol * (hi - lo)
            for j in range(max_iter):
                if hi - lo <= tol:
                    break
                mid = 0.5 * (lo + hi)
                s = 0.0
                for k in range(K):
                    ad = fabs(yv[t, k] - mid)
                    if ad > s:
                        s = ad
                if s == 0.0:
                    break
                g = 0.0
                for k in range(K):
                    d = yv[t, k] - mid
                    if d > 0.0:
                        g += pow(d / s, p - 1.0)
                    elif d < 0.0:
                        g -= pow(-d / s, p - 1.0)
                if g > 0.0:
                    lo = mid
                else:
                    hi = mid
            ov[t] = 0.5 * (lo + hi)
    return out


def nonlinear_batch(y_sorted, double p):
    """Gap-weighted symmetric pair estimator (odd median dropped)."""
    cdef double[:, ::1] yv = np.ascontiguousarray(y_sorted, dtype=np.float64)
    cdef Py_ssize_t T = yv.shape[0], K = yv.shape[1]
    out = np.empty(T, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t t, i, M = K // 2
    cdef double gmax, g, w, wsum, acc
    if K < 2:
        return np.ascontiguousarray(y_sorted, dtype=np.float64)[:, 0].copy()
    with nogil:
        for t in range(T):
            gmax = 0.0
            for i in range(M):
                g = yv[t, K - 1 - i] - yv[t, i]
                if g > gmax:
                    gmax = g
            if gmax == 0.0:
                ov[t] = yv[t, 0]
                continue
            wsum = 0.0
            acc = 0.0
            for i in range(M):
                g = (yv[t, K - 1 - i] - yv[t, i]) / gmax
                if g == 0.0:
                    w = 1.0 if p == 2.0 else 0.0
                else:
                    w = pow(g, p - 2.0)
                wsum += w
                acc += w * 0.5 * (yv[t, K - 1 - i] + yv[t, i])
            ov[t] = acc / wsum
    return out
