"""Performance bounds and the regime boundaries of the noise ratio.

All quantities are normalized by delta^2 and expressed in the ratio
r = sigma_z/delta.  Three regimes: below xi1 the total noise is effectively
uniform (midrange territory), above xi2 effectively Gaussian (mean
territory), and in between the generalized Gaussian approximation pays off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ggapprox import beta_coefficient, fit_shape, nvar_ggml
from .numerics import ToleranceConfig, find_root, integrate, minimize_1d, std_normal_cdf, std_normal_pdf

__all__ = [
    "BoundCurve",
    "RegimeBoundaries",
    "nmse_mean",
    "nmse_mid",
    "ncrb",
    "nmse_q",
    "xi1",
    "xi1_fit_cubic",
    "xi1_fit_linear",
    "xi2",
    "xi2_fit",
    "bound_curve",
    "regime_boundaries",
]

_QUAD_TOL = ToleranceConfig(abs_tol=1e-11)


def nmse_mean(r: float, k: int) -> float:
    """Normalized MSE of the sample mean on dithered data: (r^2 + 1/12)/K."""
    _check_rk(r, k)
    return (r * r + 1.0 / 12.0) / k


def nmse_mid(k: int) -> float:
    """Normalized MSE of the midrange under pure uniform noise:
    1/[2(K+1)(K+2)], independent of r."""
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    return 1.0 / (2.0 * (k + 1.0) * (k + 2.0))


def ncrb(r: float, k: int = 1) -> float:
    """Normalized Cramer-Rao bound for K dithered measurements.

    r^2 divided by the Fisher-information integral of the uniform-convolved
    Gaussian, evaluated by adaptive quadrature on panels that meet at the
    half-bin edges where the integrand's mass concentrates, then 1/K scaling.
    Undefined at r = 0 (the uniform density violates the regularity needed
    for the bound).
    """
    if not r > 0.0:
        raise ValueError(f"ncrb requires r > 0, got {r}")
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")

    def integrand(u: float) -> float:
        num = std_normal_pdf((u - 0.5) / r) - std_normal_pdf((u + 0.5) / r)
        den = std_normal_cdf((u + 0.5) / r) - std_normal_cdf((u - 0.5) / r)
        if den <= 0.0:
            return 0.0
        return num * num / den

    # integrand is even in u; tails beyond half a bin plus 8 sigma are below
    # 1e-14 of the total
    lim = 0.5 + 8.0 * r
    info = 2.0 * (integrate(integrand, 0.0, 0.5, _QUAD_TOL)
                  + integrate(integrand, 0.5, lim, _QUAD_TOL))
    return r * r / info / k


def _bin_prob(m: int, x: float, r: float) -> float:
    return (std_normal_cdf((m + 0.5 - x) / r)
            - std_normal_cdf((m - 0.5 - x) / r))


def nmse_q(r: float, k: int, tol: ToleranceConfig = ToleranceConfig(abs_tol=1e-9)) -> float:
    """Expected normalized MSE of the quantized-sample mean, the location
    averaged uniformly over one bin.

    Iterated-expectation form: 1/12 plus quantizer-moment integrals with the
    level sum truncated at M = ceil(1 + 6r) (bin probabilities beyond that
    are below 1e-9).  Tends to 1/12 (pure squared bias) as r -> 0.
    """
    _check_rk(r, k)
    if r == 0.0:
        return 1.0 / 12.0
    m_max = math.ceil(1.0 + 6.0 * r)
    levels = range(-m_max, m_max + 1)

    def first_moment(x: float) -> float:
        return sum(m * _bin_prob(m, x, r) for m in levels if m != 0)

    def second_moment(x: float) -> float:
        return sum(m * m * _bin_prob(m, x, r) for m in levels if m != 0)

    i2 = integrate(second_moment, -0.5, 0.5, tol)
    i1sq = integrate(lambda x: first_moment(x) ** 2, -0.5, 0.5, tol)
    ix = integrate(lambda x: x * first_moment(x), -0.5, 0.5, tol)
    return 1.0 / 12.0 + i2 / k + (k - 1.0) / k * i1sq - 2.0 * ix


def xi1(k: int) -> float:
    """Regime I/II boundary: the ratio where the midrange MSE curve crosses
    the asymptotic GG-MLE variance, solved with the kurtosis-matched shape
    refreshed at every candidate ratio."""
    _check_k_regime(k)
    rhs = (k / 2.0) / (k * k + 3.0 * k + 2.0)

    def resid(r: float) -> float:
        p_hat = fit_shape(r).p_hat
        return beta_coefficient(p_hat) * (r * r + 1.0 / 12.0) - rhs

    return find_root(resid, 1e-6, 1.0, ToleranceConfig(abs_tol=1e-12, max_iter=300))


def xi1_fit_cubic(k: int) -> float:
    """Published log-log-cubic least-squares fit to xi1(K)."""
    _check_k_regime(k)
    lk = math.log(k)
    return math.exp(0.0104 * lk ** 3 - 0.1760 * lk ** 2 + 0.0274 * lk - 1.8511)


def xi1_fit_linear(k: int) -> float:
    """Published log-log-linear fit 0.8217 / K^0.9301 (intended for K > 20)."""
    _check_k_regime(k)
    return 0.8217 * k ** -0.9301


def xi2(k: int) -> float:
    """Regime II/III boundary: the ratio minimizing the quantized-sample
    mean's expected NMSE, located by golden section on [0.05, 1]."""
    _check_k_regime(k)
    return minimize_1d(lambda r: nmse_q(r, k), 0.05, 1.0,
                       ToleranceConfig(abs_tol=1e-4))


def xi2_fit(k: int) -> float:
    """Published square-root-of-log-quadratic fit to xi2(K), as printed.

    The printed coefficients evaluate to roughly 1.0 at K = 25 where the
    exact boundary is 0.313, an apparent misprint in the source; the formula
    is shipped verbatim for reference and never asserted against xi2().
    """
    _check_k_regime(k)
    lk = math.log(k)
    radicand = -0.000756 * lk * lk + 0.328 * lk
    if radicand <= 0.0:
        raise ValueError(f"fit undefined for K={k} (radicand {radicand})")
    return math.sqrt(radicand)


@dataclass(frozen=True)
class BoundCurve:
    """All five bounds evaluated at one (r, K) grid point."""

    r: float
    k: int
    nmse_mean: float
    nmse_mid: float
    nvar_ggml: float
    ncrb: float
    nmse_q: float


def bound_curve(r: float, k: int) -> BoundCurve:
    """Evaluate every bound at (r, K); the CRB entry is NaN at r = 0."""
    _check_rk(r, k)
    p_hat = fit_shape(r).p_hat
    return BoundCurve(
        r=r,
        k=k,
        nmse_mean=nmse_mean(r, k),
        nmse_mid=nmse_mid(k),
        nvar_ggml=nvar_ggml(p_hat, r, k),
        ncrb=ncrb(r, k) if r > 0.0 else math.nan,
        nmse_q=nmse_q(r, k),
    )


@dataclass(frozen=True)
class RegimeBoundaries:
    """Exact (xi1, xi2) for one K with the regime classification rule."""

    k: int
    xi1: float
    xi2: float

    def __post_init__(self):
        if not 0.0 < self.xi1 < self.xi2:
            raise ValueError(
                f"boundaries must satisfy 0 < xi1 < xi2, got "
                f"({self.xi1}, {self.xi2})")

    def regime(self, r: float) -> str:
        if r < 0.0:
            raise ValueError(f"ratio must be >= 0, got {r}")
        if r < self.xi1:
            return "I"
        return "II" if r < self.xi2 else "III"


def regime_boundaries(k: int) -> RegimeBoundaries:
    return RegimeBoundaries(k=k, xi1=xi1(k), xi2=xi2(k))


def _check_rk(r: float, k: int) -> None:
    if r < 0.0:
        raise ValueError(f"ratio must be >= 0, got {r}")
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")


def _check_k_regime(k: int) -> None:
    # regime boundaries are inconsistent below K = 3 (xi1 would exceed xi2)
    if k < 3:
        raise ValueError(f"regime boundaries require K >= 3, got {k}")
