"""Split-step Fourier channel: Kerr rotation, unitary dispersion, ASE noise.

Every segment applies the nonlinear step, then the linear step, then adds
noise; there is no symmetrized splitting.  Functions accept a single block of
shape ``(L,)`` or a stack of independent blocks of shape ``(n, L)``; the last
axis is always time.
"""

from __future__ import annotations

import functools
import struct
from dataclasses import dataclass
from os import PathLike

import numpy as np

from .units import ChannelParams

_NOISE_TAG = 1
_FIELD_MAGIC = b"SSFFIELD"


@dataclass(frozen=True)
class NoiseSource:
    """Seed material for a reproducible family of noise streams.

    Segment ``k`` draws from a Philox stream keyed on ``(seed, stream_id, k)``
    so the result never depends on scheduling or worker count.
    """

    seed: int
    stream_id: int = 0

    def segment_rng(self, k: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(_NOISE_TAG, self.stream_id, k))
        return np.random.Generator(np.random.Philox(ss))


def dispersion_profile(l, c: ChannelParams):
    """Per-bin dispersion rate ``f_li(l)`` in 1/km; accepts scalars or arrays."""
    L = c.block_len
    l = np.asarray(l)
    if np.any((l < 0) | (l >= L)):
        raise IndexError("frequency index out of range")
    dist = L / 2 - np.abs(L / 2 - l)
    out = (c.beta2 / 2.0) * (2.0 * np.pi / c.period) ** 2 * dist**2
    return out if out.ndim else float(out)


@functools.lru_cache(maxsize=64)
def _dispersion_phasors(c: ChannelParams) -> np.ndarray:
    f = dispersion_profile(np.arange(c.block_len), c)
    d = np.exp(1j * c.dz * f)
    d.setflags(write=False)
    return d


def dispersion_matrix(c: ChannelParams) -> np.ndarray:
    """Dense ``F^H D F`` with the unitary DFT; intended for small L checks."""
    L = c.block_len
    idx = np.arange(L)
    F = np.exp(-2j * np.pi * np.outer(idx, idx) / L) / np.sqrt(L)
    return F.conj().T @ np.diag(_dispersion_phasors(c)) @ F


def _check_len(a: np.ndarray, c: ChannelParams) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.shape[-1] != c.block_len:
        raise ValueError(f"field length {a.shape[-1]} != block_len {c.block_len}")
    return a


def nonlinear_step(a, c: ChannelParams) -> np.ndarray:
    a = _check_len(a, c)
    if c.gamma == 0:
        return a.copy()
    return a * np.exp(1j * c.gamma * c.dz * (a.real**2 + a.imag**2))


def linear_step(a, c: ChannelParams) -> np.ndarray:
    a = _check_len(a, c)
    spec = np.fft.fft(a, axis=-1, norm="ortho")
    spec *= _dispersion_phasors(c)
    return np.fft.ifft(spec, axis=-1, norm="ortho")


def complex_normal(rng: np.random.Generator, shape: tuple, var: float) -> np.ndarray:
    """Circularly symmetric CN(0, var) samples."""
    z = rng.standard_normal(shape + (2,)).view(np.complex128)[..., 0]
    return z * np.sqrt(var / 2.0)


def add_noise(a, c: ChannelParams, ns: NoiseSource, segment: int = 0) -> np.ndarray:
    a = _check_len(a, c)
    if c.segment_noise_var == 0:
        return a.copy()
    rng = ns.segment_rng(segment)
    return a + complex_normal(rng, a.shape, c.segment_noise_var)


def propagate(a0, c: ChannelParams, ns: NoiseSource) -> np.ndarray:
    """Run all K segments and return the channel output ``a_K``."""
    a = _check_len(a0, c)
    for k in range(c.segments):
        a = add_noise(linear_step(nonlinear_step(a, c), c), c, ns, segment=k)
    return a


def write_field(path: str | PathLike, a) -> None:
    """Dump one block: 8-byte magic, uint64 L, then interleaved re/im float64 (LE)."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 1:
        raise ValueError("only single blocks can be dumped")
    with open(path, "wb") as fh:
        fh.write(_FIELD_MAGIC + struct.pack("<Q", a.size))
        fh.write(a.astype("<c16").tobytes())


def read_field(path: str | PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:8] != _FIELD_MAGIC:
            raise ValueError("not a field dump")
        (L,) = struct.unpack("<Q", header[8:])
        body = fh.read()
    if len(body) != 16 * L:
        raise ValueError(f"truncated field dump: expected {16 * L} bytes, got {len(body)}")
    return np.frombuffer(body, dtype="<c16").astype(np.complex128)
