"""Command-line sweep driver writing bound values as CSV.

Example::

    ssfcap --bounds l1,l2,awgn,lp --power-dbm=-10:30:5 --segments 64,128 --out fig.csv

Exit status is 0 when every row is finite, 2 when some rows were flagged
(e.g. L3 requested below its validity threshold), 1 on configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import bounds
from .estimator import ESTIMATORS, MonteCarloConfig, sweep_L1
from .results import SweepRow, write_csv
from .units import build_channel, dbm_to_watts, load_params, reference_link

log = logging.getLogger("ssfcap")

BOUND_FLAGS = {
    "l1": "L1",
    "l2": "L2",
    "l3": "L3",
    "l2-asym": "L2_asym",
    "l3-asym": "L3_asym",
    "awgn": "AWGN_UB",
    "lp": "LP",
}

PROFILES = {
    "desk": (20, 200, 256),
    "full": (200, 1000, 2000),
}
PROFILE_ALIASES = {"paper": "full"}


class ConfigError(Exception):
    pass


def profile(name: str) -> tuple[MonteCarloConfig, int]:
    """Monte Carlo sizes and block length of a named profile."""
    try:
        n_outer, n_inner, L = PROFILES[PROFILE_ALIASES.get(name, name)]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None
    return MonteCarloConfig(n_outer, n_inner, seed=0, input_power=0.0), L


def parse_power_range(text: str) -> list[float]:
    """``start:stop:step`` (endpoints inclusive within half a step), or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"power range must be start:stop:step, got {text!r}")
        start, stop, step = (float(x) for x in parts)
        if step <= 0:
            raise ConfigError("power step must be positive")
        n = math.floor((stop - start) / step + 0.5)
        if n < 0:
            raise ConfigError(f"empty power range {text!r}")
        return [round(start + i * step, 10) for i in range(n + 1)]
    values = [float(x) for x in text.split(",") if x.strip()]
    if not values:
        raise ConfigError("empty power list")
    return values


def parse_bounds(text: str) -> list[str]:
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        if tok not in BOUND_FLAGS:
            raise ConfigError(f"unknown bound {tok!r}; choose from {', '.join(BOUND_FLAGS)}")
        out.append(BOUND_FLAGS[tok])
    if not out:
        raise ConfigError("no bounds requested")
    return out


def parse_segments(text: str) -> list[int]:
    try:
        ks = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"segments must be integers, got {text!r}") from None
    if not ks or any(k < 1 for k in ks):
        raise ConfigError("segments must be a non-empty list of positive integers")
    return ks


def _closed_form(name: str, P: float, c) -> float:
    pn = c.noise_power
    if name == "L2":
        return bounds.lower_bound_L2(P, c)
    if name == "L3":
        return bounds.lower_bound_L3(P, c)
    if name == "L2_asym":
        return bounds.asymptote_L2(c)
    if name == "L3_asym":
        return bounds.asymptote_L3(c)
    if name == "AWGN_UB":
        return bounds.awgn_upper(P, pn)
    if name == "LP":
        return bounds.low_power_approx(P, pn)
    raise ValueError(name)


def compute_rows(params, bound_names, powers_dbm, segments, block_len, mc, workers=1):
    rows: list[SweepRow] = []
    for ki, K in enumerate(segments):
        c = build_channel(params, K, block_len)
        l1_rows = {}
        if "L1" in bound_names:
            for r in sweep_L1(c, powers_dbm, mc, workers=workers, first_point=ki * len(powers_dbm)):
                l1_rows[r.power_dbm] = r
        for p_dbm in powers_dbm:
            P = float(dbm_to_watts(p_dbm))
            for name in bound_names:
                if name == "L1":
                    rows.append(l1_rows[p_dbm])
                    continue
                row = SweepRow(p_dbm, K, name, math.nan, 0.0, 0, 0, mc.seed)
                try:
                    row.value_bits = _closed_form(name, P, c)
                except ValueError as exc:
                    row.error = str(exc)
                    log.warning("%s at %s dBm, K=%d: %s", name, p_dbm, K, exc)
                rows.append(row)
    return rows


def _fix_negative_values(argv):
    # let "--power-dbm -10:30:5" through argparse, which would read it as a flag
    out = list(argv)
    for i, tok in enumerate(out[:-1]):
        if tok == "--power-dbm" and out[i + 1].startswith("-"):
            out[i] = f"--power-dbm={out[i + 1]}"
            out[i + 1] = None
    return [t for t in out if t is not None]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ssfcap", description="Capacity bounds of the split-step Fourier fibre channel.")
    ap.add_argument("--config", help="JSON parameter file (default: reference link parameters)")
    ap.add_argument("--bounds", default="l1,l2,awgn,lp",
                    help=f"comma list from {','.join(BOUND_FLAGS)}")
    ap.add_argument("--power-dbm", default="-10:30:5", help="start:stop:step or comma list, dBm")
    ap.add_argument("--segments", default="64", help="comma list of segment counts K")
    ap.add_argument("--samples", type=int, help="block length L (overrides profile)")
    ap.add_argument("--profile", default="desk", choices=sorted(PROFILES) + sorted(PROFILE_ALIASES))
    ap.add_argument("--outer", type=int, help="outer Monte Carlo draws (overrides profile)")
    ap.add_argument("--inner", type=int, help="inner noise draws per input (overrides profile)")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", help="CSV output path (default: stdout)")
    ap.add_argument("--bias-correction", action="store_true")
    ap.add_argument("--estimator", default=ESTIMATORS[0], choices=ESTIMATORS,
                    help="per-draw statistic for E (default: %(default)s)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = build_parser().parse_args(_fix_negative_values(argv))
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        params = load_params(args.config) if args.config else reference_link()
        names = parse_bounds(args.bounds)
        powers = parse_power_range(args.power_dbm)
        segments = parse_segments(args.segments)
        mc, L = profile(args.profile)
        if args.samples is not None:
            L = args.samples
        if not 0 <= args.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        mc = replace(mc, seed=args.seed, bias_correction=args.bias_correction, estimator=args.estimator,
                     n_outer=args.outer or mc.n_outer, n_inner=args.inner or mc.n_inner)
        build_channel(params, segments[0], L)  # validates L early
    except (ConfigError, ValueError, OSError) as exc:
        print(f"ssfcap: error: {exc}", file=sys.stderr)
        return 1

    with np.errstate(all="ignore"):
        rows = compute_rows(params, names, powers, segments, L, mc, workers=max(1, args.workers))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    failed = sum(not r.ok for r in rows)
    if failed:
        log.warning("%d of %d rows flagged", failed, len(rows))
        return 2
    return 0


def main() -> None:
    sys.exit(run())
