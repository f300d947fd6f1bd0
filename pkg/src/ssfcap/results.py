"""Tabular sweep output shared by the estimator and the CLI."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Optional

BOUND_NAMES = ("L1", "L2", "L3", "L2_asym", "L3_asym", "AWGN_UB", "LP")
CSV_HEADER = ("power_dbm", "K", "bound", "value_bits", "stderr_bits", "n_outer", "n_inner", "seed")


@dataclass
class SweepRow:
    power_dbm: float
    K: int
    bound: str
    value_bits: float
    stderr_bits: float
    n_outer: int
    n_inner: int
    seed: int
    error: Optional[str] = None

    def __post_init__(self):
        if self.bound not in BOUND_NAMES:
            raise ValueError(f"unknown bound name {self.bound!r}")

    @property
    def ok(self) -> bool:
        return self.error is None and not math.isnan(self.value_bits)


def _fmt(x: float) -> str:
    # repr round-trips doubles exactly, keeping golden files diff-stable
    return repr(float(x))


def write_csv(rows: Iterable[SweepRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_fmt(r.power_dbm), r.K, r.bound, _fmt(r.value_bits),
                    _fmt(r.stderr_bits), r.n_outer, r.n_inner, r.seed])


def to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(fh) -> list[dict]:
    return list(csv.DictReader(fh))
