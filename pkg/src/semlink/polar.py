"""Polar code construction, encoding and successive-cancellation decoding.

Conventions shared by encoder and decoder:

* natural bit order, ``x = u F^{(x)n}`` with ``F = [[1, 0], [1, 1]]`` over GF(2)
  and no bit-reversal permutation;
* positive LLR favours bit 0;
* frozen bits carry zero.

All functions accept a trailing frame axis of length ``N`` (or ``K``) and any
number of leading batch axes where noted, so Monte Carlo runs can decode many
frames per call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "PolarCodeSpec",
    "bhattacharyya",
    "construct",
    "encode",
    "polar_transform",
    "sc_decode",
    "sc_decode_batch",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class PolarCodeSpec:
    """Parameters of a PC(N, K) polar code.

    Attributes
    ----------
    block_length : int
        Codeword length ``N``, a power of two.
    message_length : int
        Number of information bits ``K``.
    frozen_mask : numpy.ndarray
        Boolean array of length ``N``; ``True`` marks a frozen position.
    design_ebno_db : float
        Eb/N0 the frozen set was optimised for.
    """

    block_length: int
    message_length: int
    frozen_mask: np.ndarray
    design_ebno_db: float = math.nan

    def __post_init__(self):
        n, k = self.block_length, self.message_length
        if not _is_power_of_two(n):
            raise ValueError(f"block length must be a power of two, got {n}")
        if not 0 < k <= n:
            raise ValueError(f"message length must be in 1..{n}, got {k}")
        mask = np.asarray(self.frozen_mask, dtype=bool)
        if mask.shape != (n,):
            raise ValueError(f"frozen mask must have shape ({n},), got {mask.shape}")
        if int(mask.sum()) != n - k:
            raise ValueError(f"frozen mask must freeze {n - k} bits, freezes {int(mask.sum())}")
        mask = mask.copy()
        mask.setflags(write=False)
        object.__setattr__(self, "frozen_mask", mask)
        info = np.flatnonzero(~mask)
        info.setflags(write=False)
        object.__setattr__(self, "info_indices", info)

    @property
    def rate(self) -> float:
        return self.message_length / self.block_length

    @property
    def frozen_indices(self) -> np.ndarray:
        return np.flatnonzero(self.frozen_mask)

    def __repr__(self) -> str:
        return (
            f"PolarCodeSpec(N={self.block_length}, K={self.message_length}, "
            f"design_ebno_db={self.design_ebno_db})"
        )


def bhattacharyya(block_length: int, z0: float) -> np.ndarray:
    """Bhattacharyya parameters of the ``N`` synthetic channels.

    Uses the erasure-channel recursion ``Z- = 2Z - Z**2`` (degraded branch)
    and ``Z+ = Z**2`` (upgraded branch). The result is indexed in natural
    order: the most significant bit of an index selects the branch of the
    first polarisation step.

    Parameters
    ----------
    block_length : int
        ``N``, a power of two.
    z0 : float
        Bhattacharyya parameter of the physical channel, in ``[0, 1]``.
    """
    if not _is_power_of_two(block_length):
        raise ValueError(f"block length must be a power of two, got {block_length}")
    if not 0.0 <= z0 <= 1.0:
        raise ValueError(f"z0 must lie in [0, 1], got {z0}")
    z = np.array([z0], dtype=float)
    while z.size < block_length:
        z = np.stack([2 * z - z * z, z * z], axis=-1).ravel()
    return z


def construct(
    block_length: int,
    message_length: int,
    design_ebno_db: float = 2.5,
    *,
    z0: float | None = None,
) -> PolarCodeSpec:
    """Build a polar code by freezing the least reliable synthetic channels.

    The ``N - K`` indices with the largest Bhattacharyya parameter are frozen;
    among equal values the lower index is frozen first. The physical channel
    parameter is ``exp(-R * 10**(design_ebno_db / 10))`` unless ``z0`` is given.
    """
    if not _is_power_of_two(block_length):
        raise ValueError(f"block length must be a power of two, got {block_length}")
    if not 0 < message_length <= block_length:
        raise ValueError(f"message length must be in 1..{block_length}, got {message_length}")
    if z0 is None:
        rate = message_length / block_length
        z0 = math.exp(-rate * 10.0 ** (design_ebno_db / 10.0))
    z = bhattacharyya(block_length, z0)
    # primary key: descending Z, secondary: ascending index
    order = np.lexsort((np.arange(block_length), -z))
    mask = np.zeros(block_length, dtype=bool)
    mask[order[: block_length - message_length]] = True
    return PolarCodeSpec(block_length, message_length, mask, float(design_ebno_db))


@lru_cache(maxsize=32)
def cached_code(block_length: int, message_length: int, design_ebno_db: float) -> PolarCodeSpec:
    return construct(block_length, message_length, design_ebno_db)


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Multiply by the n-fold Kronecker power of ``[[1, 0], [1, 1]]`` over GF(2).

    Operates on the last axis; the transform is an involution.
    """
    x = np.array(u, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    if not _is_power_of_two(n):
        raise ValueError(f"length must be a power of two, got {n}")
    lead = x.shape[:-1]
    half = 1
    while half < n:
        view = x.reshape(*lead, n // (2 * half), 2, half)
        view[..., 0, :] ^= view[..., 1, :]
        half *= 2
    return x


def _as_bits(bits, name: str) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.dtype == bool:
        return arr.astype(np.uint8)
    if not np.issubdtype(arr.dtype, np.integer):
        raise TypeError(f"{name} must contain integers 0/1, got dtype {arr.dtype}")
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.uint8)


def encode(spec: PolarCodeSpec, message) -> np.ndarray:
    """Encode ``K`` message bits (last axis) into ``N``-bit codewords."""
    msg = _as_bits(message, "message")
    if msg.ndim == 0 or msg.shape[-1] != spec.message_length:
        raise ValueError(
            f"message length must be {spec.message_length}, got shape {msg.shape}"
        )
    u = np.zeros(msg.shape[:-1] + (spec.block_length,), dtype=np.uint8)
    u[..., spec.info_indices] = msg
    return polar_transform(u)


def _check_node_minsum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def _check_node_exact(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # 2 atanh(tanh(a/2) tanh(b/2)) in a form that does not overflow
    return (
        np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        + np.log1p(np.exp(-np.abs(a + b)))
        - np.log1p(np.exp(-np.abs(a - b)))
    )


_CHECK_NODES = {"minsum": _check_node_minsum, "exact": _check_node_exact}


def _sc_node(llr: np.ndarray, frozen: np.ndarray, f) -> tuple[np.ndarray, np.ndarray]:
    """Decode one subtree; returns (u estimates, re-encoded partial sums)."""
    n = frozen.size
    if frozen.all():
        zeros = np.zeros(llr.shape, dtype=np.uint8)
        return zeros, zeros
    if n == 1:
        bit = (llr < 0).astype(np.uint8)
        return bit, bit
    if not frozen.any():
        # Rate-1 subtree: SC reduces to a hard decision on the node LLRs.
        x = (llr < 0).astype(np.uint8)
        return polar_transform(x), x
    half = n // 2
    a, b = llr[:, :half], llr[:, half:]
    u_left, x_left = _sc_node(f(a, b), frozen[:half], f)
    g = b + (1.0 - 2.0 * x_left) * a
    u_right, x_right = _sc_node(g, frozen[half:], f)
    return (
        np.concatenate([u_left, u_right], axis=1),
        np.concatenate([x_left ^ x_right, x_right], axis=1),
    )


def _check_llrs(spec: PolarCodeSpec, llrs) -> np.ndarray:
    arr = np.asarray(llrs, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != spec.block_length:
        raise ValueError(f"expected {spec.block_length} LLRs per frame, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("LLRs must be finite")
    return arr


def sc_decode_batch(
    spec: PolarCodeSpec, llrs, *, check_node: str = "minsum", return_u: bool = False
) -> np.ndarray:
    """Successive-cancellation decode a ``(frames, N)`` array of LLRs.

    Returns the ``(frames, K)`` information bits in ascending index order, or
    the full ``(frames, N)`` u-vector estimate when ``return_u`` is set.
    """
    arr = _check_llrs(spec, llrs)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D (frames, N) array, got shape {arr.shape}")
    try:
        f = _CHECK_NODES[check_node]
    except KeyError:
        raise ValueError(f"unknown check node rule {check_node!r}") from None
    if arr.shape[0] == 0:
        width = spec.block_length if return_u else spec.message_length
        return np.zeros((0, width), dtype=np.uint8)
    u_hat, _ = _sc_node(arr, spec.frozen_mask, f)
    if return_u:
        return u_hat
    return u_hat[:, spec.info_indices]


def sc_decode(spec: PolarCodeSpec, llrs, *, check_node: str = "minsum") -> np.ndarray:
    """Decode a single frame of ``N`` LLRs into ``K`` message bits.

    Frozen positions are decided as 0 regardless of their LLR and a
    non-negative LLR decides bit 0.
    """
    arr = _check_llrs(spec, llrs)
    if arr.ndim != 1:
        raise ValueError(f"expected one frame of {spec.block_length} LLRs, got shape {arr.shape}")
    return sc_decode_batch(spec, arr[None, :], check_node=check_node)[0]
