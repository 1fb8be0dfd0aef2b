"""PSNR, bit/frame error rates, compression ratio and report formatting."""

from __future__ import annotations

import math
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .semantics import LabelMap

__all__ = [
    "INFINITE",
    "psnr",
    "psnr_from_mse",
    "mse",
    "ber",
    "fer",
    "compression_ratio",
    "wilson_interval",
    "format_value",
]

INFINITE = math.inf
PEAK = 255.0


def mse(a: LabelMap, b: LabelMap) -> float:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    return float(np.mean(diff * diff))


def psnr_from_mse(value: float) -> float:
    if value < 0:
        raise ValueError("MSE cannot be negative")
    if value == 0:
        return INFINITE
    return 10.0 * math.log10(PEAK * PEAK / value)


def psnr(a: LabelMap, b: LabelMap) -> float:
    """Peak signal-to-noise ratio in dB; :data:`INFINITE` for identical maps."""
    return psnr_from_mse(mse(a, b))


def ber(sent, received) -> float:
    s = np.asarray(sent).ravel()
    r = np.asarray(received).ravel()
    if s.size != r.size:
        raise ValueError(f"length mismatch: {s.size} vs {r.size}")
    if s.size == 0:
        raise ValueError("cannot compute a bit error rate over zero bits")
    return float(np.count_nonzero(s != r)) / s.size


def fer(frame_outcomes: Sequence[bool]) -> float:
    """Fraction of frames that failed; ``True`` marks a failed frame."""
    outcomes = np.asarray(frame_outcomes, dtype=bool).ravel()
    if outcomes.size == 0:
        raise ValueError("no frames")
    return float(np.count_nonzero(outcomes)) / outcomes.size


def compression_ratio(original_bytes: int, compressed_bytes: int) -> float:
    if original_bytes < 1 or compressed_bytes < 1:
        raise ValueError("sizes must be at least one byte")
    return original_bytes / compressed_bytes


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in 0..trials")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def format_value(value) -> str:
    """CSV cell text: 6 significant digits, ``inf`` for infinite values."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return f"{value:.6g}"
