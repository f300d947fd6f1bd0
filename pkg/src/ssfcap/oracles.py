"""Closed-form Kerr/noise expectations and brute-force verifiers.

All expectations are over ``n ~ CN(0, sigma2)`` for a fixed signal sample
``c``, with ``theta = gamma * dz``.  The Monte Carlo helpers exist so each
closed form can be checked against sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma, gammaln

from .bounds import cross_moment_bound
from .channel import (NoiseSource, add_noise, complex_normal, linear_step,
                      nonlinear_step, propagate)
from .estimator import MonteCarloConfig, input_block, mean_conditional_variance
from .units import ChannelParams


@dataclass(frozen=True)
class KerrMomentInput:
    c: complex
    sigma2: float
    theta: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")

    @property
    def noncentrality(self) -> float:
        return 2.0 * abs(self.c) ** 2 / self.sigma2


def noncentral_chi2_mgf(t: complex, lam: float) -> complex:
    """MGF of a noncentral chi-squared variable with two degrees of freedom."""
    t = complex(t)
    if t == 0.5:
        raise ValueError("MGF has a pole at t = 1/2")
    if t.imag == 0 and t.real > 0.5:
        raise ValueError("MGF diverges for real t > 1/2")
    d = 1.0 - 2.0 * t
    return complex(np.exp(lam * t / d) / d)


def expected_kerr_phase(inp: KerrMomentInput) -> complex:
    """``E[exp(j theta |c+n|^2)]``."""
    # |c+n|^2 = (sigma2/2) w with w noncentral chi2(2, lambda)
    return noncentral_chi2_mgf(0.5j * inp.theta * inp.sigma2, inp.noncentrality)


def expected_kerr_phase_magnitude(inp: KerrMomentInput) -> float:
    q = 1.0 + (inp.sigma2 * inp.theta) ** 2
    return math.exp(-inp.sigma2 * inp.theta**2 * abs(inp.c) ** 2 / q) / math.sqrt(q)


def expected_noise_kerr(inp: KerrMomentInput) -> complex:
    """``E[n exp(j theta (|n|^2 + 2 Re(c n*)))]``."""
    s = inp.sigma2 * inp.theta
    d = 1.0 - 1j * s
    return complex(1j * s / d**2 * inp.c * np.exp(-inp.sigma2 * inp.theta**2 * abs(inp.c) ** 2 / d))


def expected_noise_kerr_magnitude(inp: KerrMomentInput) -> float:
    s = inp.sigma2 * inp.theta
    q = 1.0 + s * s
    return s / q * abs(inp.c) * math.exp(-inp.sigma2 * inp.theta**2 * abs(inp.c) ** 2 / q)


def expected_kerr_output(inp: KerrMomentInput) -> complex:
    """``E[(c+n) exp(j theta |c+n|^2)]``, split into signal and noise parts.

    The noise part carries the deterministic rotation ``exp(j theta |c|^2)``
    because ``|c+n|^2 = |c|^2 + |n|^2 + 2 Re(c n*)``.
    """
    rot = np.exp(1j * inp.theta * abs(inp.c) ** 2)
    return complex(inp.c * expected_kerr_phase(inp) + rot * expected_noise_kerr(inp))


def max_kerr_phase_magnitude(sigma2: float, theta: float) -> float:
    """``max_|c| |c| |E[exp(j theta |c+n|^2)]|``."""
    if sigma2 <= 0 or theta <= 0:
        raise ValueError("sigma2 and theta must be positive")
    return 1.0 / (math.sqrt(2 * math.e * sigma2) * theta)


def max_noise_kerr_magnitude(sigma2: float, theta: float) -> float:
    """``max_|c| |expected_noise_kerr|``.

    The maximizer moves out to ``|c| -> inf`` as theta -> 0, so the limit is
    ``sqrt(sigma2 / 2e)`` rather than 0, even though the magnitude is 0 at
    theta = 0 for every fixed ``c``.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    return math.sqrt(sigma2 / (2 * math.e * (1.0 + sigma2**2 * theta**2)))


def mc_kerr_moments(inp: KerrMomentInput, samples: int, rng: np.random.Generator):
    """Sample means and standard errors of the three expectations above.

    Returns a dict of ``name -> (mean, std_error)`` with keys ``phase``,
    ``noise`` and ``output``.
    """
    n = complex_normal(rng, (samples,), inp.sigma2)
    c = inp.c
    y = c + n
    draws = {
        "phase": np.exp(1j * inp.theta * np.abs(y) ** 2),
        "noise": n * np.exp(1j * inp.theta * (np.abs(n) ** 2 + 2 * (c * n.conj()).real)),
    }
    draws["output"] = y * draws["phase"]
    out = {}
    for name, x in draws.items():
        m = x.mean()
        se = math.sqrt(np.mean(np.abs(x - m) ** 2) / samples)
        out[name] = (complex(m), se)
    return out


@dataclass(frozen=True)
class CrossMomentReport:
    segment: int
    worst_pair: tuple
    estimate: complex
    std_error: float
    upper_3sigma: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.upper_3sigma <= self.bound


def cross_moment_bound_check(c: ChannelParams, P: float, k: int, samples: int,
                             seed: int) -> CrossMomentReport:
    """Check ``|E[u_{k+1,m} u*_{k+1,n} | a0]|`` against its closed-form bound.

    One input block is fixed, ``samples`` noise realizations are run through
    the first ``k`` segments, and every off-diagonal pair is tested; the report
    carries the pair with the largest 3-sigma upper estimate.
    """
    if c.gamma <= 0:
        raise ValueError("the cross-moment bound diverges for gamma = 0")
    if not 1 <= k < c.segments:
        raise ValueError(f"segment index must satisfy 1 <= k < K, got {k}")
    bound = cross_moment_bound(c)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(2,))))
    a0 = complex_normal(rng, (c.block_len,), P)
    ns = NoiseSource(seed, stream_id=1)
    a = np.broadcast_to(a0, (samples, c.block_len))
    for seg in range(k):
        a = add_noise(linear_step(nonlinear_step(a, c), c), c, ns, segment=seg)
    u = nonlinear_step(a, c)

    prod = u[:, :, None] * u[:, None, :].conj()
    mean = prod.mean(axis=0)
    se = np.sqrt(np.mean(np.abs(prod - mean) ** 2, axis=0) / samples)
    upper = np.abs(mean) + 3 * se
    np.fill_diagonal(upper, -np.inf)
    m, n = np.unravel_index(np.argmax(upper), upper.shape)
    return CrossMomentReport(k, (int(m), int(n)), complex(mean[m, n]), float(se[m, n]),
                             float(upper[m, n]), bound)


def knn_entropy(x: np.ndarray, k: int = 3) -> float:
    """Kozachenko-Leonenko differential entropy estimate in bits.

    ``x`` has shape (N, d) (real) or (N, L) (complex, treated as 2L reals).
    """
    x = np.asarray(x)
    if np.iscomplexobj(x):
        x = np.concatenate([x.real, x.imag], axis=1)
    N, d = x.shape
    tree = cKDTree(x)
    dist, _ = tree.query(x, k=k + 1)
    eps = dist[:, k]
    log_vd = d / 2 * math.log(math.pi) - gammaln(d / 2 + 1)
    h = digamma(N) - digamma(k) + log_vd + d * np.mean(np.log(eps))
    return float(h / math.log(2))


@dataclass(frozen=True)
class EntropyReport:
    h_bits: float
    h_std_error: float
    kappa: float
    bound_bits: float

    @property
    def passed(self) -> bool:
        return self.h_bits - 3 * self.h_std_error <= self.bound_bits


def entropy_bound_check(c: ChannelParams, P: float, n_outer: int, n_inner: int,
                        seed: int, k: int = 3) -> EntropyReport:
    """Compare a kNN estimate of ``h(a_K | a0)`` with the kappa entropy bound.

    Soft check: the kNN estimator is biased in 2L dimensions, so only use
    small blocks (L <= 8).
    """
    mc = MonteCarloConfig(n_outer, n_inner, seed, P)
    L = c.block_len
    scale = math.sqrt(P + c.noise_power)
    hs, variances = [], []
    for r in range(n_outer):
        a0 = input_block(c, mc, r)
        ns = NoiseSource(seed, stream_id=r)
        batch = np.broadcast_to(a0, (n_inner, L))
        y = propagate(batch, c, ns) / scale
        hs.append(knn_entropy(y, k=k))
        variances.append(mean_conditional_variance(np.abs(y) ** 2, bias_correction=True))
    # undo the normalization: h shifts by L log2(scale^2), kappa by scale^4
    h = float(np.mean(hs)) + L * math.log2(scale**2)
    h_se = float(np.std(hs, ddof=1) / math.sqrt(n_outer))
    kappa = L * float(np.mean(variances)) * scale**4
    bound = L / 2 * math.log2(2 * math.pi**3 * math.e * kappa / L)
    return EntropyReport(h, h_se, kappa, bound)
