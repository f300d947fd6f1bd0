"""Closed-form capacity bounds for the SSF channel, all returned in bits.

Quantities of the form ``|A00|**(4(K-1))`` are handled in log space: for
realistic links ``1 - |A00|**2`` is around 1e-3 to 1e-5 and the exponent runs
into the thousands, so the naive power both underflows the interesting digits
and cancels catastrophically in ``1 - |A00|**(4(K-1))``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .channel import dispersion_profile
from .units import ChannelParams, k_validity_threshold

E = math.e
LOG2E = 1.0 / math.log(2.0)


def _profile(c: ChannelParams) -> np.ndarray:
    return dispersion_profile(np.arange(c.block_len), c)


@functools.lru_cache(maxsize=64)
def _a_coeffs(c: ChannelParams) -> np.ndarray:
    phasors = np.exp(1j * c.dz * _profile(c))
    out = np.fft.fft(phasors) / c.block_len
    out.setflags(write=False)
    return out


def a_coeffs(c: ChannelParams) -> np.ndarray:
    """All L coefficients ``A_{0,m}`` of the one-segment dispersion operator."""
    return _a_coeffs(c)


def a_coeff(m: int, c: ChannelParams) -> complex:
    if not 0 <= m < c.block_len:
        raise IndexError(f"coefficient index {m} out of range")
    return complex(_a_coeffs(c)[m])


@functools.lru_cache(maxsize=64)
def a00_deficit(c: ChannelParams) -> float:
    """``1 - |A_{0,0}|**2`` without cancellation.

    For unit phasors ``z_l``, ``1 - |mean z|**2 = mean |z_l - mean z|**2``, and
    ``z_l - 1`` is formed from half-angle sines so both terms stay accurate.
    """
    phi = c.dz * _profile(c)
    zm1 = -2.0 * np.sin(phi / 2.0) ** 2 + 1j * np.sin(phi)
    dev = zm1 - zm1.mean()
    return float(np.mean(dev.real**2 + dev.imag**2))


def _log_a00_sq(c: ChannelParams) -> float:
    return math.log1p(-a00_deficit(c))


def alpha_from_coeffs(coeffs) -> float:
    """``(sum |A_m|)^2 - sum |A_m|^2``, the off-diagonal leakage mass."""
    mags = np.abs(np.asarray(coeffs))
    # clip rounding noise; the exact value is a sum of non-negative pair products
    return float(max(0.0, mags.sum() ** 2 - np.sum(mags**2)))


def alpha_coefficient(c: ChannelParams) -> float:
    return alpha_from_coeffs(_a_coeffs(c))


def cross_moment_bound(c: ChannelParams) -> float:
    """Bound on ``|E[u_m u_n* | a0]|`` for segments after the first, in W."""
    if c.gamma <= 0:
        raise ValueError("cross-moment bound needs gamma > 0")
    K, Z, g, pn = c.segments, c.z_total, c.gamma, c.noise_power
    return K**3 / (2 * E * g**2 * pn * Z**2) + K / (E * Z * g) + pn / (2 * E * K)


def m_k(c: ChannelParams) -> float:
    if c.gamma <= 0:
        raise ValueError("M_K is undefined for gamma = 0")
    return alpha_coefficient(c) * c.segments * cross_moment_bound(c)


def log_zeta(P: float, c: ChannelParams) -> float:
    if P <= 0:
        raise ValueError("zeta needs P > 0")
    la = _log_a00_sq(c)
    K = c.segments
    return 2 * (K - 1) * la - m_k(c) / (P * math.exp((K - 1) * la))


def zeta(P: float, c: ChannelParams) -> float:
    return math.exp(log_zeta(P, c))


def l2_from_zeta(P: float, Pn: float, one_minus_zeta: float) -> float:
    """L2 for a given ``1 - zeta``; kept separate so zeta near 1 loses nothing."""
    # (P+Pn)^2 - zeta P^2 = P^2 (1 - zeta) + 2 P Pn + Pn^2
    denom = P * P * one_minus_zeta + 2 * P * Pn + Pn * Pn
    return 0.5 * math.log2(E / (4 * math.pi) * (P + Pn) ** 2 / denom)


def lower_bound_L2(P: float, c: ChannelParams) -> float:
    return l2_from_zeta(P, c.noise_power, -math.expm1(log_zeta(P, c)))


def asymptote_L2(c: ChannelParams) -> float:
    """High-power limit of L2; ``inf`` when ``|A00| = 1`` (no dispersion, or K = 1)."""
    x = 2 * (c.segments - 1) * _log_a00_sq(c)
    gap = -math.expm1(x)
    if gap <= 0:
        return math.inf
    return -0.5 * math.log2(4 * math.pi / E * gap)


def c1(c: ChannelParams) -> float:
    f = _profile(c)
    return float(c.z_total**2 / c.block_len * np.sum(f**2))


def c2(c: ChannelParams) -> float:
    """Signed; negative for anomalous dispersion."""
    return float(math.sqrt(6.0) * c.z_total * np.sum(_profile(c)))


def g_const(c: ChannelParams, magnitude: bool = False) -> float:
    """Constant G of the explicit bound.

    With ``magnitude=True`` ``|C2|`` is used, which is what the supporting
    inequalities actually control when beta2 < 0.
    """
    if c.gamma <= 0:
        raise ValueError("G is undefined for gamma = 0")
    k2 = abs(c2(c)) if magnitude else c2(c)
    return k2 * (k2 / (4 * c.segments) + 1) * cross_moment_bound(c)


def validity_threshold(c: ChannelParams) -> float:
    return k_validity_threshold(c, c1(c))


def lower_bound_L3(P: float, c: ChannelParams, magnitude: bool = False) -> float:
    if P <= 0:
        raise ValueError("L3 needs P > 0")
    cc1 = c1(c)
    if cc1 == 0:
        raise ValueError("L3 is not defined without dispersion (C1 = 0)")
    thr = k_validity_threshold(c, cc1)
    if not c.segments > thr:
        raise ValueError(f"K = {c.segments} is not above the validity threshold {thr:.4g}")
    pn, K = c.noise_power, c.segments
    G = g_const(c, magnitude=magnitude)
    denom = 2 * cc1 * P * P / K + 2 * P * pn + P * G + pn * pn
    if not denom > 0:
        # only reachable with signed C2 when K > |C2|/4 makes G negative
        raise ValueError(f"L3 undefined: denominator {denom:.4g} <= 0 with signed C2 (G = {G:.4g})")
    return 0.5 * math.log2(E / (4 * math.pi) * (P + pn) ** 2 / denom)


def asymptote_L3(c: ChannelParams) -> float:
    cc1 = c1(c)
    if cc1 <= 0:
        raise ValueError("C1 = 0: asymptote undefined")
    return 0.5 * math.log2(E * c.segments / (8 * math.pi * cc1))


def awgn_upper(P: float, Pn: float) -> float:
    if Pn <= 0:
        raise ValueError("noise power must be positive")
    return math.log1p(P / Pn) * LOG2E


def low_power_approx(P: float, Pn: float) -> float:
    """L1 of the dispersion-only channel (gamma = 0), exact there."""
    if Pn <= 0:
        raise ValueError("noise power must be positive")
    return 0.5 * math.log2(E / (2 * math.pi) * (1 + P * P / ((2 * P + Pn) * Pn)))


@dataclass(frozen=True)
class BoundConstants:
    a_coeffs: np.ndarray
    alpha_coef: float
    m_k: float
    c1: float
    c2: float
    g: float

    @classmethod
    def of(cls, c: ChannelParams) -> "BoundConstants":
        return cls(
            a_coeffs=a_coeffs(c),
            alpha_coef=alpha_coefficient(c),
            m_k=m_k(c),
            c1=c1(c),
            c2=c2(c),
            g=g_const(c),
        )
