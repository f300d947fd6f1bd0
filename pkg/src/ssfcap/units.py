"""Physical link parameters, unit conversion and derived simulation constants.

Internally everything is expressed in watts, seconds and kilometres, so that
``gamma * P * dz`` and ``dz * f_li(l)`` come out dimensionless.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from os import PathLike

PS = 1e-12
PS2_PER_KM = 1e-24  # ps^2/km -> s^2/km
DB_TO_NEPER = math.log(10.0) / 10.0


@dataclass(frozen=True)
class PhysicalParams:
    """Raw fibre and link constants, in the units carried by each field name."""

    fiber_length_km: float
    attenuation_db_per_km: float
    dispersion_ps2_per_km: float
    nonlinearity_per_w_km: float
    symbol_time_ps: float
    photon_energy_j: float
    spontaneous_emission: float
    filter_bandwidth_hz: float

    def __post_init__(self):
        checks = {
            "fiber_length_km": self.fiber_length_km > 0,
            "symbol_time_ps": self.symbol_time_ps > 0,
            "nonlinearity_per_w_km": self.nonlinearity_per_w_km >= 0,
            "filter_bandwidth_hz": self.filter_bandwidth_hz > 0,
            "spontaneous_emission": self.spontaneous_emission >= 1,
            "attenuation_db_per_km": self.attenuation_db_per_km >= 0,
            "photon_energy_j": self.photon_energy_j >= 0,
        }
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise ValueError(f"{f.name} must be finite, got {value!r}")
        bad = [name for name, ok in checks.items() if not ok]
        if bad:
            raise ValueError(f"invalid physical parameters: {', '.join(bad)}")

    @classmethod
    def from_dict(cls, data: dict) -> "PhysicalParams":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        missing = names - set(data)
        if unknown:
            raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
        if missing:
            raise ValueError(f"missing parameter keys: {sorted(missing)}")
        return cls(**{k: float(v) for k, v in data.items()})

    def to_dict(self) -> dict:
        return asdict(self)


def reference_link() -> PhysicalParams:
    """Single-mode fibre link used in the reference numerical example."""
    return PhysicalParams(
        fiber_length_km=850.0,
        attenuation_db_per_km=0.2,
        dispersion_ps2_per_km=-21.7,
        nonlinearity_per_w_km=1.27,
        symbol_time_ps=100.0,
        photon_energy_j=1.3e-19,
        spontaneous_emission=4.0,
        filter_bandwidth_hz=200e9,
    )


def load_params(path: str | PathLike) -> PhysicalParams:
    """Read a flat JSON parameter file."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("parameter file must hold a JSON object")
    return PhysicalParams.from_dict(data)


def save_params(p: PhysicalParams, path: str | PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(p.to_dict(), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class ChannelParams:
    """Normalized SSF simulation parameters (W, s, km).

    ``T = block_len * dt`` is derived on demand rather than stored.
    """

    gamma: float
    beta2: float
    z_total: float
    segments: int
    dz: float
    dt: float
    block_len: int
    noise_power: float
    segment_noise_var: float

    @property
    def period(self) -> float:
        return self.block_len * self.dt

    def with_segments(self, segments: int) -> "ChannelParams":
        return _derive(self.gamma, self.beta2, self.z_total, self.dt,
                       self.noise_power, segments, self.block_len)


def noise_power(p: PhysicalParams) -> float:
    """Per-sample ASE noise power ``h nu Z alpha n_sp B_n`` in watts."""
    alpha = p.attenuation_db_per_km * DB_TO_NEPER
    return (p.photon_energy_j * p.fiber_length_km * alpha
            * p.spontaneous_emission * p.filter_bandwidth_hz)


def _derive(gamma, beta2, z_total, dt, pn, segments, block_len):
    if isinstance(segments, bool) or int(segments) != segments or segments < 1:
        raise ValueError(f"segments must be a positive integer, got {segments!r}")
    if isinstance(block_len, bool) or int(block_len) != block_len or block_len < 2:
        raise ValueError(f"block_len must be an integer >= 2, got {block_len!r}")
    segments = int(segments)
    return ChannelParams(
        gamma=gamma,
        beta2=beta2,
        z_total=z_total,
        segments=segments,
        dz=z_total / segments,
        dt=dt,
        block_len=int(block_len),
        noise_power=pn,
        segment_noise_var=pn / segments,
    )


def build_channel(p: PhysicalParams, segments: int, block_len: int) -> ChannelParams:
    return _derive(
        gamma=p.nonlinearity_per_w_km,
        beta2=p.dispersion_ps2_per_km * PS2_PER_KM,
        z_total=p.fiber_length_km,
        dt=p.symbol_time_ps * PS,
        pn=noise_power(p),
        segments=segments,
        block_len=block_len,
    )


def k_validity_threshold(c: ChannelParams, c1: float) -> float:
    """Smallest K (exclusive) for which the explicit L3 bound is proven.

    Uses ``|beta2|``; the dispersion sign only rotates phases.
    """
    if c1 < 0:
        raise ValueError("c1 must be non-negative")
    first = abs(c.beta2) * c.z_total * math.pi**2 / (2.0 * math.sqrt(2.0) * c.dt**2)
    return max(first, math.sqrt(c1))


def dbm_to_watts(p_dbm):
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watts_to_dbm(p):
    if p <= 0:
        raise ValueError(f"power must be positive to express in dBm, got {p!r}")
    return 10.0 * math.log10(p / 1e-3)
