"""Generalized Gaussian machinery for the Gaussian-plus-uniform total noise.

The total noise of a subtractively-dithered quantizer is the sum of a
Gaussian (std sigma_z) and a uniform on [-delta/2, delta/2].  A generalized
Gaussian (GG) with matched mean, variance, and kurtosis approximates it
closely; the shape parameter p runs from 2 (Gaussian) to infinity (uniform).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import (ToleranceConfig, find_root, ln_gamma,
                       reg_lower_inc_gamma, std_normal_cdf,
                       _reg_lower_inc_gamma_logx)

__all__ = [
    "GGParams",
    "ShapeFit",
    "P_MAX",
    "gg_pdf",
    "gg_cdf",
    "gg_inv_cdf",
    "sum_excess_kurtosis",
    "gg_excess_kurtosis",
    "fit_shape",
    "beta_coefficient",
    "nvar_ggml",
    "true_total_noise_pdf",
]

# Shape assigned when the ratio sigma_z/delta is effectively zero: the
# kurtosis match has no finite solution there, and the weight formulas are
# numerically indistinguishable from the uniform limit at this value.
P_MAX = 1e6
_RATIO_FLOOR = 1e-6


def _a_of_p(sigma: float, p: float) -> float:
    """GG scale A(p) = sqrt(sigma^2 Gamma(1/p) / Gamma(3/p))."""
    return sigma * math.exp(0.5 * (ln_gamma(1.0 / p) - ln_gamma(3.0 / p)))


@dataclass(frozen=True)
class GGParams:
    """Location mu, standard deviation sigma, and shape p of a GG density."""

    mu: float
    sigma: float
    p: float
    a_of_p: float = None  # derived when omitted

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not self.p > 0.0:
            raise ValueError(f"p must be positive, got {self.p}")
        a = _a_of_p(self.sigma, self.p)
        if self.a_of_p is None:
            object.__setattr__(self, "a_of_p", a)
        elif not math.isclose(self.a_of_p, a, rel_tol=1e-12):
            raise ValueError(
                f"a_of_p={self.a_of_p} inconsistent with (sigma={self.sigma}, "
                f"p={self.p}); expected {a}")


@dataclass(frozen=True)
class ShapeFit:
    """Kurtosis-matched GG shape for a given noise ratio sigma_z/delta."""

    sigma_over_delta: float
    p_hat: float
    target_excess_kurtosis: float


def gg_pdf(v: float, params: GGParams) -> float:
    """GG density exp(-(|v-mu|/A)^p) / (2 Gamma(1+1/p) A)."""
    p = params.p
    a = params.a_of_p
    norm = 0.5 / (a * math.exp(ln_gamma(1.0 + 1.0 / p)))
    r = abs(v - params.mu) / a
    if r == 0.0:
        return norm
    e = p * math.log(r)
    if e > 700.0:  # exp argument would overflow: density is exactly 0 here
        return 0.0
    return norm * math.exp(-math.exp(e))


def gg_cdf(v: float, params: GGParams) -> float:
    """GG CDF 1/2 + sign(v-mu)/2 * P(1/p, (|v-mu|/A)^p).

    The incomplete-gamma argument is handed over in log form so that huge
    shapes (near-uniform densities) keep full accuracy near the median.
    """
    d = v - params.mu
    if d == 0.0:
        return 0.5
    r = abs(d) / params.a_of_p
    if r == 0.0:
        return 0.5
    tail = 0.5 * _reg_lower_inc_gamma_logx(1.0 / params.p,
                                           params.p * math.log(r))
    return 0.5 + tail if d > 0.0 else 0.5 - tail


def gg_inv_cdf(q: float, params: GGParams) -> float:
    """Quantile of the GG distribution for q in (0, 1)."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile argument must be in (0, 1), got {q}")
    if q == 0.5:
        return params.mu
    lo = params.mu - 20.0 * params.sigma
    hi = params.mu + 20.0 * params.sigma
    tol = ToleranceConfig(abs_tol=1e-13 * max(params.sigma, 1e-30))
    return find_root(lambda v: gg_cdf(v, params) - q, lo, hi, tol)


def sum_excess_kurtosis(r: float) -> float:
    """Excess kurtosis of Gaussian(sigma_z) + uniform(delta) at r = sigma_z/delta.

    -6/5 at r = 0 (pure uniform), rising to 0 in the Gaussian limit.
    """
    if r < 0.0:
        raise ValueError(f"ratio must be >= 0, got {r}")
    return -1.2 / (12.0 * r * r + 1.0) ** 2


def gg_excess_kurtosis(p: float) -> float:
    """Excess kurtosis Gamma(1/p) Gamma(5/p) / Gamma(3/p)^2 - 3 of a GG shape."""
    if not p > 0.0:
        raise ValueError(f"p must be positive, got {p}")
    return math.exp(ln_gamma(1.0 / p) + ln_gamma(5.0 / p)
                    - 2.0 * ln_gamma(3.0 / p)) - 3.0


def fit_shape(r: float) -> ShapeFit:
    """Shape whose GG excess kurtosis equals that of the noise sum at ratio r.

    Solved in log p on [2, P_MAX]; the bracket is first narrowed around the
    rough starting value max(2, 1/r).  Ratios below 1e-6 are clamped to the
    P_MAX sentinel (the equation has no finite solution at r = 0).
    """
    target = sum_excess_kurtosis(r)
    if r < _RATIO_FLOOR:
        return ShapeFit(r, P_MAX, target)

    def resid(log_p: float) -> float:
        return gg_excess_kurtosis(math.exp(log_p)) - target

    lo, hi = math.log(2.0), math.log(P_MAX)
    p0 = max(2.0, 1.0 / r)
    a = max(lo, math.log(p0 / 4.0))
    b = min(hi, math.log(4.0 * p0))
    if a < b and resid(a) * resid(b) <= 0.0:
        lo, hi = a, b
    tol = ToleranceConfig(abs_tol=1e-13, max_iter=300)
    p_hat = math.exp(find_root(resid, lo, hi, tol))
    return ShapeFit(r, max(p_hat, 2.0), target)


def beta_coefficient(p: float) -> float:
    """Variance ratio beta(p) = Gamma(1/p)^2 / (p^2 Gamma(2-1/p) Gamma(3/p)).

    Equals 1 at p = 2 and decays steeply for flatter-topped shapes; it scales
    the asymptotic variance of the GG maximum-likelihood location estimate.
    """
    if not p >= 1.0:
        raise ValueError(f"beta_coefficient requires p >= 1, got {p}")
    return math.exp(2.0 * ln_gamma(1.0 / p) - ln_gamma((2.0 * p - 1.0) / p)
                    - ln_gamma(3.0 / p)) / (p * p)


def nvar_ggml(p: float, r: float, k: int) -> float:
    """Asymptotic variance (normalized by delta^2) of the GG location MLE:
    beta(p) (r^2 + 1/12) / K."""
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    if r < 0.0:
        raise ValueError(f"ratio must be >= 0, got {r}")
    return beta_coefficient(p) * (r * r + 1.0 / 12.0) / k


def true_total_noise_pdf(v: float, r: float, delta: float) -> float:
    """Exact density of the total noise: uniform convolved with a Gaussian.

    (1/delta) [Phi((v + delta/2)/sigma_z) - Phi((v - delta/2)/sigma_z)] with
    sigma_z = r * delta; degenerates to the uniform density at r = 0.
    """
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if r < 0.0:
        raise ValueError(f"ratio must be >= 0, got {r}")
    half = 0.5 * delta
    if r == 0.0:
        if abs(v) < half:
            return 1.0 / delta
        return 0.5 / delta if abs(v) == half else 0.0
    sigma = r * delta
    return (std_normal_cdf((v + half) / sigma)
            - std_normal_cdf((v - half) / sigma)) / delta
