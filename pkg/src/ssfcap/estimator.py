"""Nested Monte Carlo evaluation of the simulation-based lower bound L1.

For each outer draw ``a0 ~ CN(0, P I_L)`` the channel is run ``n_inner`` times
with fresh noise, giving samples of ``|a_K,i|^2`` conditioned on ``a0``.  Two
per-draw statistics estimate the same quantity

    E = (1/L) sum_i E_a0[ E[|a_K,i|^2 | a0]^2 ]

* ``"direct"`` squares the inner means, exactly as the definition reads;
* ``"conditional_variance"`` (default) uses ``E = 2 (P+Pn)^2 - mean_i
  E_a0[Var(|a_K,i|^2 | a0)]``, the law of total variance combined with the
  exact fourth moment of the Gaussian output.  It avoids subtracting two
  nearly equal O(P^2) numbers and has far lower variance at moderate power.

Without bias correction both carry the same ``+Var/n_inner`` bias (the
conditional variance is taken with ``ddof=0``); with it both are unbiased.

Outer draws are independent work units.  Each uses its own Philox streams, and
results are reduced in draw order, so the output is bit-identical for any
worker count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial

import numpy as np

from .channel import NoiseSource, complex_normal, propagate
from .results import SweepRow
from .units import ChannelParams, dbm_to_watts

log = logging.getLogger(__name__)

ESTIMATORS = ("conditional_variance", "direct")
_INPUT_TAG = 0


@dataclass(frozen=True)
class MonteCarloConfig:
    n_outer: int
    n_inner: int
    seed: int
    input_power: float
    bias_correction: bool = False
    estimator: str = "conditional_variance"

    def __post_init__(self):
        if self.n_outer < 2 or self.n_inner < 2:
            raise ValueError("n_outer and n_inner must both be >= 2")
        if self.input_power < 0 or not math.isfinite(self.input_power):
            raise ValueError(f"input power must be finite and >= 0, got {self.input_power!r}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    n_outer: int
    n_inner: int


def stream_id(point: int, draw: int) -> int:
    return (point << 32) | draw


def input_block(c: ChannelParams, mc: MonteCarloConfig, draw: int, point: int = 0) -> np.ndarray:
    ss = np.random.SeedSequence(mc.seed, spawn_key=(_INPUT_TAG, point, draw))
    rng = np.random.Generator(np.random.Philox(ss))
    return complex_normal(rng, (c.block_len,), mc.input_power)


def conditional_samples(a0, c: ChannelParams, n_inner: int, ns: NoiseSource) -> np.ndarray:
    """``|a_K|^2`` for ``n_inner`` noise realizations sharing input ``a0``; shape (n_inner, L)."""
    batch = np.broadcast_to(np.asarray(a0, dtype=np.complex128), (n_inner, c.block_len))
    out = propagate(batch, c, ns)
    return out.real**2 + out.imag**2


def direct_statistic(powers: np.ndarray, bias_correction: bool = False) -> float:
    """``(1/L) sum_i m_i^2`` from inner samples of ``|a_K,i|^2``."""
    n = powers.shape[0]
    m = powers.mean(axis=0)
    sq = m * m
    if bias_correction:
        sq = sq - powers.var(axis=0, ddof=1) / n
    return float(sq.mean())


def mean_conditional_variance(powers: np.ndarray, bias_correction: bool = False) -> float:
    """``(1/L) sum_i Var(|a_K,i|^2 | a0)``; times L this is a kappa sample."""
    return float(powers.var(axis=0, ddof=1 if bias_correction else 0).mean())


def _outer_statistic(draw: int, c: ChannelParams, mc: MonteCarloConfig, point: int) -> float:
    a0 = input_block(c, mc, draw, point)
    ns = NoiseSource(mc.seed, stream_id(point, draw))
    powers = conditional_samples(a0, c, mc.n_inner, ns)
    if mc.estimator == "direct":
        return direct_statistic(powers, mc.bias_correction)
    total = mc.input_power + c.noise_power
    return 2.0 * total * total - mean_conditional_variance(powers, mc.bias_correction)


def outer_statistics(c: ChannelParams, mc: MonteCarloConfig, point: int = 0,
                     workers: int = 1) -> np.ndarray:
    """Per-draw statistics in draw order."""
    task = partial(_outer_statistic, c=c, mc=mc, point=point)
    draws = range(mc.n_outer)
    if workers <= 1:
        stats = [task(r) for r in draws]
    else:
        chunk = max(1, mc.n_outer // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(task, draws, chunksize=chunk))
    return np.asarray(stats, dtype=float)


def estimate_E(c: ChannelParams, mc: MonteCarloConfig, point: int = 0,
               workers: int = 1) -> Estimate:
    """Monte Carlo estimate of E with its standard error over outer draws.

    ``point`` selects an independent family of random streams, so distinct
    sweep points never share draws.
    """
    stats = outer_statistics(c, mc, point=point, workers=workers)
    return Estimate(
        value=float(stats.mean()),
        std_error=float(stats.std(ddof=1) / math.sqrt(mc.n_outer)),
        n_outer=mc.n_outer,
        n_inner=mc.n_inner,
    )


def kappa_from_E(e: float, P: float, Pn: float, L: int) -> float:
    ceiling = 2.0 * (P + Pn) ** 2
    if e > ceiling:
        raise ValueError(
            f"E = {e:.6g} exceeds 2(P+Pn)^2 = {ceiling:.6g}; negative kappa is an estimation artifact"
        )
    return (ceiling - e) * L


def lower_bound_L1(e: float, P: float, Pn: float) -> float:
    total2 = (P + Pn) ** 2
    gap = 2.0 * total2 - e
    if not gap > 0:
        raise ValueError(f"E = {e:.6g} is not below 2(P+Pn)^2 = {2 * total2:.6g}; L1 unbounded")
    return 0.5 * math.log2(math.e / (2 * math.pi) * total2 / gap)


def l1_std_error(e: Estimate, P: float, Pn: float) -> float:
    """Delta-method standard error of L1: ``|dL1/dE| * se(E)``; approximate."""
    gap = 2.0 * (P + Pn) ** 2 - e.value
    return e.std_error / (2.0 * math.log(2.0) * gap)


def sweep_L1(c: ChannelParams, powers_dbm, mc: MonteCarloConfig,
             workers: int = 1, first_point: int = 0) -> list[SweepRow]:
    """One L1 row per power; failures are recorded on the row and the sweep goes on."""
    powers_dbm = list(powers_dbm)
    if not powers_dbm:
        raise ValueError("power list is empty")
    rows = []
    for i, p_dbm in enumerate(powers_dbm):
        row = SweepRow(p_dbm, c.segments, "L1", math.nan, math.nan, mc.n_outer, mc.n_inner, mc.seed)
        try:
            P = float(dbm_to_watts(p_dbm))
            est = estimate_E(c, replace(mc, input_power=P), point=first_point + i, workers=workers)
            row.value_bits = lower_bound_L1(est.value, P, c.noise_power)
            row.stderr_bits = l1_std_error(est, P, c.noise_power)
        except (ValueError, ArithmeticError) as exc:
            log.warning("L1 at %s dBm, K=%d failed: %s", p_dbm, c.segments, exc)
            row.error = str(exc)
        rows.append(row)
    return rows
