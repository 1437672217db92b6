import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import gennorm

from ditherlab.ggapprox import (GGParams, P_MAX, beta_coefficient, fit_shape,
                                gg_cdf, gg_excess_kurtosis, gg_inv_cdf,
                                gg_pdf, nvar_ggml, sum_excess_kurtosis,
                                true_total_noise_pdf)
from ditherlab.numerics import RandomStream, ToleranceConfig, integrate, ln_gamma

SIGMA_V_004 = math.sqrt(0.04 ** 2 + 1.0 / 12.0)


def scipy_gg(params):
    """scipy.stats.gennorm frozen to the same (mu, sigma, p); oracle only."""
    return gennorm(params.p, loc=params.mu, scale=params.a_of_p)


def gg_quad(f, params, tol=1e-10):
    """Integrate f against panels that straddle the flat-top shoulders, which
    a single adaptive pass can miss entirely at large p."""
    s = params.sigma
    edges = [params.mu + t * s for t in (-20.0, -2.0, -1.0, 0.0, 1.0, 2.0, 20.0)]
    cfg = ToleranceConfig(abs_tol=tol)
    return sum(integrate(f, a, b, cfg) for a, b in zip(edges, edges[1:]))


class TestGGParams:
    def test_scale_matches_definition(self):
        g = GGParams(mu=0.0, sigma=2.0, p=3.0)
        expected = math.sqrt(4.0 * math.exp(ln_gamma(1 / 3) - ln_gamma(1.0)))
        assert g.a_of_p == pytest.approx(expected, rel=1e-14)

    def test_gaussian_scale(self):
        g = GGParams(mu=0.0, sigma=1.5, p=2.0)
        assert g.a_of_p == pytest.approx(1.5 * math.sqrt(2.0), rel=1e-13)

    def test_inconsistent_scale_rejected(self):
        with pytest.raises(ValueError):
            GGParams(mu=0.0, sigma=1.0, p=2.0, a_of_p=1.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            GGParams(mu=0.0, sigma=0.0, p=2.0)
        with pytest.raises(ValueError):
            GGParams(mu=0.0, sigma=1.0, p=0.0)

    @pytest.mark.parametrize("p", [1.0, 2.0, 2.16, 5.0, 14.3, 50.0])
    def test_quadrature_variance_matches_sigma(self, p):
        g = GGParams(mu=0.0, sigma=0.8, p=p)
        var = gg_quad(lambda v: v * v * gg_pdf(v, g), g)
        assert var == pytest.approx(g.sigma ** 2, rel=1e-6)


class TestGGPdf:
    def test_gaussian_peak(self):
        g = GGParams(mu=0.4, sigma=0.7, p=2.0)
        assert gg_pdf(0.4, g) == pytest.approx(1.0 / (0.7 * math.sqrt(2 * math.pi)), rel=1e-13)

    def test_laplace_peak(self):
        g = GGParams(mu=-1.0, sigma=0.5, p=1.0)
        assert gg_pdf(-1.0, g) == pytest.approx(1.0 / (0.5 * math.sqrt(2.0)), rel=1e-13)

    @pytest.mark.parametrize("p", [1.0, 2.0, 2.16, 5.0, 14.3, 50.0])
    def test_normalization(self, p):
        g = GGParams(mu=0.0, sigma=1.0, p=p)
        total = gg_quad(lambda v: gg_pdf(v, g), g)
        assert abs(total - 1.0) < 1e-8

    def test_near_uniform_limit(self):
        # p = 50 with variance 1/12: density close to 1 on the flat top
        g = GGParams(mu=0.0, sigma=math.sqrt(1.0 / 12.0), p=50.0)
        for v in (-0.39, -0.2, 0.0, 0.2, 0.39):
            assert gg_pdf(v, g) == pytest.approx(1.0, abs=0.05)

    def test_symmetry(self):
        g = GGParams(mu=0.3, sigma=1.2, p=3.4)
        for d in (0.1, 0.7, 2.4):
            assert gg_pdf(0.3 + d, g) == pytest.approx(gg_pdf(0.3 - d, g), rel=1e-13)

    def test_matches_scipy(self):
        for p in (1.5, 2.0, 4.0, 20.0):
            g = GGParams(mu=0.1, sigma=0.9, p=p)
            ref = scipy_gg(g)
            for v in np.linspace(-3, 3, 31):
                assert gg_pdf(v, g) == pytest.approx(ref.pdf(v), rel=1e-10, abs=1e-290)


class TestGGCdf:
    def test_median(self):
        g = GGParams(mu=2.5, sigma=0.3, p=7.0)
        assert gg_cdf(2.5, g) == 0.5

    def test_gaussian_reduction(self):
        # F(mu + sigma) = Phi(1) for p = 2 (Gaussian quantile oracle)
        g = GGParams(mu=0.0, sigma=1.3, p=2.0)
        assert gg_cdf(1.3, g) == pytest.approx(0.8413447460685429, abs=1e-12)

    @pytest.mark.parametrize("p", [2.0, 5.0, 20.0])
    def test_tail_limit(self, p):
        g = GGParams(mu=0.0, sigma=1.0, p=p)
        assert gg_cdf(10.0, g) > 1.0 - 1e-6

    def test_matches_scipy(self):
        for p in (1.0, 2.0, 3.7, 15.0):
            g = GGParams(mu=-0.4, sigma=0.6, p=p)
            ref = scipy_gg(g)
            for v in np.linspace(-2.5, 2.5, 41):
                assert gg_cdf(v, g) == pytest.approx(ref.cdf(v), abs=1e-12)

    def test_monotone(self):
        g = GGParams(mu=0.0, sigma=1.0, p=3.0)
        vals = [gg_cdf(v, g) for v in np.linspace(-6, 6, 301)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


class TestGGInvCdf:
    def test_median(self):
        g = GGParams(mu=-3.2, sigma=0.5, p=4.0)
        assert gg_inv_cdf(0.5, g) == -3.2

    def test_gaussian_quantile(self):
        g = GGParams(mu=1.0, sigma=2.0, p=2.0)
        assert gg_inv_cdf(0.975, g) == pytest.approx(1.0 + 1.9599639845400543 * 2.0, abs=1e-8)

    @pytest.mark.parametrize("p", [2.0, 5.0, 20.0, 100.0])
    def test_round_trip(self, p):
        g = GGParams(mu=0.2, sigma=0.9, p=p)
        for q in np.arange(0.01, 1.0, 0.07):
            assert gg_cdf(gg_inv_cdf(q, g), g) == pytest.approx(q, abs=1e-9)

    def test_matches_scipy_ppf(self):
        for p in (2.0, 6.3, 40.0):
            g = GGParams(mu=0.0, sigma=1.0, p=p)
            ref = scipy_gg(g)
            for q in (0.05, 0.2, 0.65, 0.99):
                assert gg_inv_cdf(q, g) == pytest.approx(ref.ppf(q), abs=1e-9)

    def test_huge_shape_quantiles(self):
        # the near-uniform sentinel shape: quantiles are the uniform's
        g = GGParams(mu=0.0, sigma=1.0, p=P_MAX)
        half_width = g.a_of_p
        for q in (0.1, 0.25, 0.75):
            assert gg_inv_cdf(q, g) == pytest.approx((2 * q - 1) * half_width, abs=1e-4)

    def test_domain(self):
        g = GGParams(mu=0.0, sigma=1.0, p=2.0)
        for q in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                gg_inv_cdf(q, g)


class TestKurtosis:
    def test_sum_pure_uniform(self):
        assert sum_excess_kurtosis(0.0) == pytest.approx(-1.2, abs=1e-15)

    def test_sum_gaussian_limit(self):
        assert abs(sum_excess_kurtosis(100.0)) < 1e-8

    def test_sum_at_0p4(self):
        assert sum_excess_kurtosis(0.4) == pytest.approx(-1.2 / (12 * 0.16 + 1) ** 2, rel=1e-14)

    def test_sum_matches_monte_carlo(self):
        # cross-check by simulated total-noise kurtosis
        r = 0.4
        rng = RandomStream(77, 0)
        z = r * rng.substream(0).normals(400000)
        w = rng.substream(1).uniforms(400000) - 0.5
        v = z + w
        m2 = np.mean(v * v)
        m4 = np.mean(v ** 4)
        assert m4 / m2 ** 2 - 3.0 == pytest.approx(sum_excess_kurtosis(r), abs=0.01)

    def test_gg_gaussian(self):
        assert gg_excess_kurtosis(2.0) == pytest.approx(0.0, abs=1e-13)

    def test_gg_laplace(self):
        assert gg_excess_kurtosis(1.0) == pytest.approx(3.0, rel=1e-12)

    def test_gg_uniform_limit(self):
        assert gg_excess_kurtosis(1e6) == pytest.approx(-1.2, abs=1e-4)


class TestFitShape:
    # published anchors from the kurtosis match
    @pytest.mark.parametrize("r,expected,tol", [
        (0.004, 158.0, 3.0),
        (0.04, 14.3, 0.2),
        (0.4, 2.16, 0.02),
    ])
    def test_published_anchors(self, r, expected, tol):
        assert fit_shape(r).p_hat == pytest.approx(expected, abs=tol)

    def test_monotone_nonincreasing(self):
        ratios = [0.001, 0.004, 0.01, 0.04, 0.1, 0.4, 1.0, 3.0]
        p_hats = [fit_shape(r).p_hat for r in ratios]
        assert all(a >= b for a, b in zip(p_hats, p_hats[1:]))

    def test_gaussian_convergence(self):
        assert fit_shape(3.0).p_hat < 2.001

    def test_floor_clamp(self):
        assert fit_shape(0.0).p_hat == P_MAX
        assert fit_shape(1e-9).p_hat == P_MAX

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=1e-3, max_value=2.0))
    def test_kurtosis_round_trip(self, r):
        fit = fit_shape(r)
        assert gg_excess_kurtosis(fit.p_hat) == pytest.approx(
            sum_excess_kurtosis(r), abs=1e-10)


class TestBetaCoefficient:
    def test_gaussian_is_one(self):
        assert beta_coefficient(2.0) == pytest.approx(1.0, abs=1e-12)

    def test_p4(self):
        # high-precision Gamma evaluation (mpmath oracle)
        assert beta_coefficient(4.0) == pytest.approx(0.7294798717421587, rel=1e-12)

    def test_ordering(self):
        assert beta_coefficient(100.0) < beta_coefficient(10.0) < beta_coefficient(3.0) < 1.0

    def test_strictly_decreasing(self):
        grid = np.linspace(2.0, 200.0, 397)
        vals = [beta_coefficient(p) for p in grid]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_domain(self):
        with pytest.raises(ValueError):
            beta_coefficient(0.5)


class TestNvarGgml:
    def test_gaussian_case_equals_mean_mse(self):
        assert nvar_ggml(2.0, 1.0, 125) == pytest.approx((1.0 + 1.0 / 12.0) / 125, rel=1e-12)

    def test_shape_fit_case(self):
        p = fit_shape(0.04).p_hat
        expected = beta_coefficient(p) * (0.04 ** 2 + 1.0 / 12.0) / 25
        assert nvar_ggml(p, 0.04, 25) == pytest.approx(expected, rel=1e-14)

    def test_inverse_k_scaling(self):
        assert nvar_ggml(5.0, 0.1, 50) == pytest.approx(2.0 * nvar_ggml(5.0, 0.1, 100), rel=1e-14)


class TestTrueTotalNoisePdf:
    def test_uniform_center(self):
        assert true_total_noise_pdf(0.0, 0.0, 2.0) == 0.5

    @pytest.mark.parametrize("r", [0.004, 0.04, 0.4])
    def test_normalization(self, r):
        lim = 0.5 + 10 * r + 0.5
        val = integrate(lambda v: true_total_noise_pdf(v, r, 1.0), -lim, lim,
                        ToleranceConfig(abs_tol=1e-10))
        assert abs(val - 1.0) < 1e-8

    @pytest.mark.parametrize("r", [0.004, 0.04, 0.4])
    def test_gg_approximation_close(self, r):
        # kurtosis-matched GG tracks the true density within 5% of its peak
        # over +-3 sigma_v
        p = fit_shape(r).p_hat
        sigma_v = math.sqrt(r * r + 1.0 / 12.0)
        g = GGParams(mu=0.0, sigma=sigma_v, p=p)
        peak = true_total_noise_pdf(0.0, r, 1.0)
        grid = np.linspace(-3 * sigma_v, 3 * sigma_v, 241)
        dev = max(abs(true_total_noise_pdf(v, r, 1.0) - gg_pdf(v, g)) for v in grid)
        assert dev < 0.05 * peak
