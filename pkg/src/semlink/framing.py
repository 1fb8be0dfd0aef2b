"""Packetisation of label maps into K-bit message frames.

Pixels are taken row by row, each as 8 bits with the most significant bit
first, so packet ``j`` carries exactly the row-major pixel range
``[j * K/8, (j + 1) * K/8)``. The final packet is zero-filled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .semantics import LabelMap

__all__ = ["FramePlan", "packetize", "reassemble", "pack_bytes", "unpack_bytes", "frame_span"]


@dataclass(frozen=True)
class FramePlan:
    width: int
    height: int
    pixels_per_packet: int
    packet_count: int
    tail_padding: int

    def __post_init__(self):
        total = self.width * self.height
        if total < 1:
            raise ValueError("frame plan needs a non-empty map")
        if self.pixels_per_packet < 1:
            raise ValueError("pixels_per_packet must be positive")
        expected = -(-total // self.pixels_per_packet)
        if self.packet_count != expected:
            raise ValueError(f"packet_count should be {expected}, got {self.packet_count}")
        if self.tail_padding != expected * self.pixels_per_packet - total:
            raise ValueError("tail_padding inconsistent with geometry")

    @property
    def message_length(self) -> int:
        return 8 * self.pixels_per_packet

    @classmethod
    def for_size(cls, width: int, height: int, message_length: int) -> "FramePlan":
        if message_length < 8 or message_length % 8:
            raise ValueError(f"K must be a positive multiple of 8, got {message_length}")
        per = message_length // 8
        total = width * height
        count = -(-total // per)
        return cls(width, height, per, count, count * per - total)


def _check_k(message_length: int) -> int:
    if message_length < 8 or message_length % 8:
        raise ValueError(f"K must be a positive multiple of 8, got {message_length}")
    return message_length // 8


def pack_bytes(data: bytes, message_length: int) -> np.ndarray:
    """Split a byte string into ``(packets, K)`` bit frames, zero-padding the tail."""
    per = _check_k(message_length)
    if not data:
        raise ValueError("nothing to packetise")
    count = -(-len(data) // per)
    buf = np.zeros(count * per, dtype=np.uint8)
    buf[: len(data)] = np.frombuffer(data, dtype=np.uint8)
    return np.unpackbits(buf.reshape(count, per), axis=1)


def unpack_bytes(frames, n_bytes: int) -> bytes:
    """Inverse of :func:`pack_bytes`; padding beyond ``n_bytes`` is dropped."""
    arr = np.asarray(frames, dtype=np.uint8)
    if arr.ndim != 2 or arr.shape[1] % 8:
        raise ValueError(f"frames must be a 2-D array with a multiple of 8 columns, got {arr.shape}")
    if n_bytes > arr.shape[0] * arr.shape[1] // 8:
        raise ValueError("not enough frames for the requested byte count")
    return np.packbits(arr, axis=1).tobytes()[:n_bytes]


def packetize(label_map: LabelMap, message_length: int) -> tuple[FramePlan, np.ndarray]:
    """Cut a label map into K-bit message frames.

    Returns the plan needed for reassembly and a ``(packet_count, K)`` uint8
    array of bits.
    """
    plan = FramePlan.for_size(label_map.width, label_map.height, message_length)
    return plan, pack_bytes(label_map.tobytes(), message_length)


def reassemble(plan: FramePlan, frames) -> LabelMap:
    """Rebuild the label map from received message frames."""
    arr = np.asarray(frames)
    if arr.ndim != 2 or arr.shape[0] != plan.packet_count:
        raise ValueError(
            f"expected {plan.packet_count} frames, got {arr.shape[0] if arr.ndim else 0}"
        )
    if arr.shape[1] != plan.message_length:
        raise ValueError(f"frames must have {plan.message_length} bits, got {arr.shape[1]}")
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError("frames must contain only 0 and 1")
    data = unpack_bytes(arr, plan.width * plan.height)
    return LabelMap.from_bytes(data, plan.width, plan.height)


def frame_span(plan: FramePlan, index: int) -> tuple[int, int]:
    """Row-major pixel range ``[start, stop)`` carried by packet ``index``."""
    start = index * plan.pixels_per_packet
    return start, min(start + plan.pixels_per_packet, plan.width * plan.height)
