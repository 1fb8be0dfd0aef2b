"""BPSK modulation, AWGN channel and LLR demapping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ChannelParams",
    "noise_variance",
    "modulate",
    "transmit",
    "transmit_frames",
    "demap",
    "hard_decision",
    "uncoded_ber",
]


def noise_variance(ebno_db: float, rate: float) -> float:
    """Per-dimension noise variance for unit-energy BPSK at a given Eb/N0."""
    return 1.0 / (2.0 * rate * 10.0 ** (ebno_db / 10.0))


@dataclass(frozen=True)
class ChannelParams:
    """AWGN channel operating point.

    ``sigma2`` is derived from ``ebno_db`` and the code rate and is not passed
    in. ``seed`` keys every noise stream drawn for this channel.
    """

    ebno_db: float
    rate: float
    seed: int = 0
    sigma2: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError(f"rate must lie in (0, 1], got {self.rate}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        sigma2 = noise_variance(self.ebno_db, self.rate)
        if not (math.isfinite(sigma2) and sigma2 > 0.0):
            raise ValueError(f"Eb/N0 of {self.ebno_db} dB gives unusable noise variance {sigma2}")
        object.__setattr__(self, "sigma2", sigma2)


def modulate(bits) -> np.ndarray:
    """Map bit 0 to +1.0 and bit 1 to -1.0."""
    arr = np.asarray(bits)
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError("bits must be 0 or 1")
    return 1.0 - 2.0 * arr.astype(float)


def _stream_key(stream_id) -> tuple[int, ...]:
    if isinstance(stream_id, (int, np.integer)):
        key = (int(stream_id),)
    else:
        key = tuple(int(s) for s in stream_id)
    if any(k < 0 for k in key):
        raise ValueError(f"stream ids must be non-negative, got {stream_id!r}")
    return key


def noise_rng(seed: int, stream_id) -> np.random.Generator:
    """Generator whose output depends only on ``(seed, stream_id)``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=_stream_key(stream_id))
    return np.random.Generator(np.random.PCG64(ss))


def transmit(symbols, params: ChannelParams, stream_id: int | Sequence[int]) -> np.ndarray:
    """Add white Gaussian noise of variance ``params.sigma2``.

    Sample ``i`` of the noise is a pure function of ``(params.seed, stream_id, i)``,
    so any prefix of a longer transmission sees the same noise.
    """
    s = np.asarray(symbols, dtype=float)
    if not np.all(np.isfinite(s)):
        raise ValueError("symbols must be finite")
    noise = noise_rng(params.seed, stream_id).standard_normal(s.shape)
    return s + math.sqrt(params.sigma2) * noise


def transmit_frames(
    symbols, params: ChannelParams, stream_ids: Iterable[int | Sequence[int]]
) -> np.ndarray:
    """Transmit each row of a ``(frames, N)`` array on its own noise stream."""
    s = np.asarray(symbols, dtype=float)
    ids = list(stream_ids)
    if s.ndim != 2 or len(ids) != s.shape[0]:
        raise ValueError("need one stream id per row of a 2-D symbol array")
    if s.shape[0] == 0:
        return s.copy()
    return np.stack([transmit(row, params, sid) for row, sid in zip(s, ids)])


def demap(received, params: ChannelParams) -> np.ndarray:
    """Exact BPSK/AWGN log-likelihood ratios ``2 y / sigma2``."""
    if not params.sigma2 > 0.0:
        raise ValueError("noise variance must be positive")
    y = np.asarray(received, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ValueError("received values must be finite")
    return 2.0 * y / params.sigma2


def hard_decision(values) -> np.ndarray:
    """Bit decisions from received samples or LLRs (non-negative -> 0)."""
    return (np.asarray(values) < 0).astype(np.uint8)


def uncoded_ber(ebno_db: float, rate: float = 1.0) -> float:
    """Analytic BPSK bit error probability ``Q(sqrt(2 R Eb/N0))``."""
    x = math.sqrt(2.0 * rate * 10.0 ** (ebno_db / 10.0))
    return 0.5 * math.erfc(x / math.sqrt(2.0))
