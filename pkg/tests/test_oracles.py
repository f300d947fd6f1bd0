import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from ssfcap.bounds import alpha_coefficient, cross_moment_bound, m_k
from ssfcap.oracles import (KerrMomentInput, cross_moment_bound_check, entropy_bound_check,
                            expected_kerr_output, expected_kerr_phase, expected_kerr_phase_magnitude,
                            expected_noise_kerr, expected_noise_kerr_magnitude, knn_entropy,
                            max_kerr_phase_magnitude, max_noise_kerr_magnitude, mc_kerr_moments,
                            noncentral_chi2_mgf)
from ssfcap.units import build_channel

N_MC = 10**6


def random_inputs(n, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        c = complex(rng.normal(0, 1.0), rng.normal(0, 1.0))
        out.append(KerrMomentInput(c, float(rng.uniform(0.1, 1.5)), float(rng.uniform(0.05, 2.0))))
    return out


def within(est, exact, se, k=3.0):
    # complex agreement: both components within k standard errors
    return abs((est - exact).real) <= k * se and abs((est - exact).imag) <= k * se


class TestMGF:
    def test_origin(self):
        for lam in (0.0, 0.7, 13.0):
            assert noncentral_chi2_mgf(0, lam) == 1

    def test_central_quarter(self):
        assert noncentral_chi2_mgf(0.25, 0.0) == pytest.approx(2.0)

    def test_monte_carlo(self):
        rng = np.random.default_rng(7)
        lam, t = 2.0, 0.3j
        # w = |x|^2 with x ~ N(mean, I_2), |mean|^2 = lam
        x = rng.standard_normal((N_MC, 2)) + np.array([math.sqrt(lam), 0.0])
        v = np.exp(t * np.sum(x * x, axis=1))
        se = v.std() / math.sqrt(N_MC)
        assert within(v.mean(), noncentral_chi2_mgf(t, lam), se)

    def test_pole(self):
        with pytest.raises(ValueError):
            noncentral_chi2_mgf(0.5, 1.0)
        with pytest.raises(ValueError):
            noncentral_chi2_mgf(0.7, 1.0)
        assert np.isfinite(noncentral_chi2_mgf(5j, 1.0))

    def test_input_validation(self):
        with pytest.raises(ValueError):
            KerrMomentInput(1.0, 0.0, 1.0)
        assert KerrMomentInput(1 + 1j, 0.5, 1.0).noncentrality == pytest.approx(8.0)


class TestKerrPhase:
    def test_trivial_cases(self):
        assert expected_kerr_phase(KerrMomentInput(0.3 - 1j, 0.4, 0.0)) == pytest.approx(1.0)
        s, th = 0.4, 1.7
        assert expected_kerr_phase(KerrMomentInput(0, s, th)) == pytest.approx(1 / (1 - 1j * th * s))

    def test_closed_form_expression(self):
        inp = KerrMomentInput(0.7 - 0.3j, 0.5, 1.3)
        d = 1 - 1j * inp.theta * inp.sigma2
        assert expected_kerr_phase(inp) == pytest.approx(np.exp(1j * inp.theta * abs(inp.c) ** 2 / d) / d)

    @pytest.mark.parametrize("inp", random_inputs(3, 1))
    def test_monte_carlo(self, inp):
        res = mc_kerr_moments(inp, N_MC, np.random.default_rng(2))
        mean, se = res["phase"]
        assert within(mean, expected_kerr_phase(inp), se)

    @pytest.mark.parametrize("inp", random_inputs(5, 3))
    def test_magnitude(self, inp):
        assert abs(expected_kerr_phase(inp)) == pytest.approx(expected_kerr_phase_magnitude(inp), rel=1e-12)

    def test_extremal(self):
        s, th = 0.3, 2.0
        f = lambda r: -r * expected_kerr_phase_magnitude(KerrMomentInput(r, s, th))
        best = minimize_scalar(f, bounds=(0, 100 * math.sqrt(s)), method="bounded",
                               options={"xatol": 1e-10})
        # the closed form drops the 1/sqrt(1 + s^2 th^2) prefactor, so it is an upper bound
        assert -best.fun <= max_kerr_phase_magnitude(s, th)


class TestNoiseKerr:
    def test_trivial_cases(self):
        assert expected_noise_kerr(KerrMomentInput(0.5 + 1j, 0.7, 0.0)) == 0
        assert expected_noise_kerr(KerrMomentInput(0, 0.7, 1.1)) == 0

    @pytest.mark.parametrize("inp", random_inputs(3, 4))
    def test_monte_carlo(self, inp):
        res = mc_kerr_moments(inp, N_MC, np.random.default_rng(5))
        mean, se = res["noise"]
        assert within(mean, expected_noise_kerr(inp), se)

    @pytest.mark.parametrize("inp", random_inputs(5, 6))
    def test_magnitude(self, inp):
        assert abs(expected_noise_kerr(inp)) == pytest.approx(expected_noise_kerr_magnitude(inp), rel=1e-12)

    @pytest.mark.parametrize("sigma2,theta", [(0.5, 1.3), (2.0, 0.01), (1e-3, 40.0), (0.1, 100.0)])
    def test_max_against_search(self, sigma2, theta):
        f = lambda r: -expected_noise_kerr_magnitude(KerrMomentInput(r, sigma2, theta))
        s = sigma2 * theta
        r_star = math.sqrt((1 + s * s) / (2 * sigma2 * theta**2))
        hi = 4 * r_star  # 100 sigma misses the maximizer when sigma2 * theta is small
        best = minimize_scalar(f, bounds=(0, hi), method="bounded", options={"xatol": 1e-12 * hi})
        assert -best.fun == pytest.approx(max_noise_kerr_magnitude(sigma2, theta), rel=1e-6)

    def test_small_theta_limit(self):
        # the maximizer escapes to |c| ~ 1/theta, so the supremum tends to sqrt(sigma2/2e), not 0
        sigma2 = 0.8
        limit = math.sqrt(sigma2 / (2 * math.e))
        assert max_noise_kerr_magnitude(sigma2, 1e-8) == pytest.approx(limit, rel=1e-12)
        # while at any fixed |c| the magnitude vanishes linearly in theta
        inp = [KerrMomentInput(1.0, sigma2, th) for th in (1e-4, 1e-5)]
        ratio = expected_noise_kerr_magnitude(inp[0]) / expected_noise_kerr_magnitude(inp[1])
        assert ratio == pytest.approx(10.0, rel=1e-6)

    def test_large_theta_asymptote(self):
        sigma2, theta = 0.5, 1e4
        expected = 1 / (math.sqrt(sigma2) * theta * math.sqrt(2 * math.e))
        assert max_noise_kerr_magnitude(sigma2, theta) == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("inp", random_inputs(3, 8))
def test_output_decomposition(inp):
    res = mc_kerr_moments(inp, N_MC, np.random.default_rng(9))
    mean, se = res["output"]
    assert within(mean, expected_kerr_output(inp), se)


class TestCrossMoment:
    @pytest.fixture
    def small(self, phys):
        return build_channel(phys, 8, 8)

    def test_passes(self, small):
        rep = cross_moment_bound_check(small, 1e-3, 3, 20000, seed=1)
        assert rep.passed
        m, n = rep.worst_pair
        assert m != n and rep.std_error > 0 and rep.segment == 3

    def test_bound_equals_mk_over_alpha_k(self, small):
        assert cross_moment_bound(small) == pytest.approx(m_k(small) / (alpha_coefficient(small) * 8), rel=1e-12)

    def test_rejects_linear(self, linear_phys):
        with pytest.raises(ValueError, match="gamma"):
            cross_moment_bound_check(build_channel(linear_phys, 8, 8), 1e-3, 2, 100, seed=0)

    @pytest.mark.parametrize("k", [0, 8])
    def test_rejects_segment_index(self, small, k):
        with pytest.raises(ValueError, match="segment"):
            cross_moment_bound_check(small, 1e-3, k, 100, seed=0)


class TestEntropy:
    def test_knn_gaussian(self):
        rng = np.random.default_rng(11)
        var = 0.3
        x = rng.normal(0, math.sqrt(var), size=(20000, 3))
        exact = 1.5 * math.log2(2 * math.pi * math.e * var)
        assert knn_entropy(x) == pytest.approx(exact, abs=0.05)

    def test_knn_complex_equals_real_stack(self):
        rng = np.random.default_rng(12)
        z = rng.normal(size=(500, 2)) + 1j * rng.normal(size=(500, 2))
        assert knn_entropy(z) == pytest.approx(knn_entropy(np.hstack([z.real, z.imag])), rel=1e-12)

    def test_bound_holds_small_block(self, phys):
        # soft: the kNN estimator is biased in 16 real dimensions, so only the 3-sigma inequality is checked
        rep = entropy_bound_check(build_channel(phys, 8, 8), 1e-3, 10, 2000, seed=2)
        assert rep.kappa > 0
        assert rep.passed
