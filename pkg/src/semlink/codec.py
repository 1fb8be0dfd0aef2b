"""Byte-wise run-length coding of label maps.

Serialized layout::

    uint32 little-endian   original length in bytes
    (uint8 run, uint8 value) * M

Records have a fixed width, so a flipped bit can corrupt one run but never
shift the record boundaries that follow it.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .semantics import LabelMap

__all__ = ["RleStream", "compress", "decompress", "serialize", "deserialize", "MAX_RUN"]

MAX_RUN = 255
_HEADER = struct.Struct("<I")


@dataclass(frozen=True, eq=False)
class RleStream:
    """Run-length records plus the length of the data they encode.

    Streams rebuilt from a damaged channel may violate ``sum(runs) ==
    original_len`` or contain zero runs; :attr:`consistent` reports that.
    ``truncated`` marks a stream whose serialized form ended mid-record.
    """

    runs: np.ndarray
    values: np.ndarray
    original_len: int
    truncated: bool = False

    def __post_init__(self):
        runs = np.asarray(self.runs, dtype=np.uint8)
        values = np.asarray(self.values, dtype=np.uint8)
        if runs.shape != values.shape or runs.ndim != 1:
            raise ValueError("runs and values must be 1-D arrays of equal length")
        object.__setattr__(self, "runs", runs)
        object.__setattr__(self, "values", values)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.runs.tolist(), self.values.tolist()))

    @property
    def consistent(self) -> bool:
        return (
            not self.truncated
            and bool(np.all(self.runs >= 1))
            and int(self.runs.sum(dtype=np.int64)) == self.original_len
        )

    def nbytes(self) -> int:
        return _HEADER.size + 2 * self.runs.size

    def __eq__(self, other):
        if not isinstance(other, RleStream):
            return NotImplemented
        return (
            self.original_len == other.original_len
            and np.array_equal(self.runs, other.runs)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def _encode_runs(data: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    change = np.flatnonzero(np.diff(data)) + 1
    starts = np.concatenate(([0], change))
    lengths = np.diff(np.concatenate((starts, [data.size])))
    values = data[starts]
    # split runs longer than MAX_RUN into full chunks plus a remainder
    chunks = -(-lengths // MAX_RUN)
    out_values = np.repeat(values, chunks)
    out_runs = np.full(out_values.size, MAX_RUN, dtype=np.int64)
    last = np.cumsum(chunks) - 1
    out_runs[last] = lengths - (chunks - 1) * MAX_RUN
    return out_runs.astype(np.uint8), out_values


def compress(label_map: LabelMap) -> RleStream:
    """Row-major run-length encode the map pixels, capping runs at 255."""
    data = label_map.pixels.ravel()
    runs, values = _encode_runs(data)
    return RleStream(runs, values, data.size)


def serialize(stream: RleStream) -> bytes:
    records = np.empty((stream.runs.size, 2), dtype=np.uint8)
    records[:, 0] = stream.runs
    records[:, 1] = stream.values
    return _HEADER.pack(stream.original_len) + records.tobytes()


def deserialize(data: bytes) -> RleStream:
    """Parse a serialized stream without judging its consistency.

    A truncated header yields ``original_len == 0`` and a dangling odd byte
    is ignored; :func:`decompress` flags either as damage.
    """
    if len(data) < _HEADER.size:
        return RleStream(np.zeros(0), np.zeros(0), 0, truncated=True)
    (original_len,) = _HEADER.unpack_from(data)
    body = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size)
    odd = body.size % 2
    body = body[: body.size - odd].reshape(-1, 2)
    return RleStream(body[:, 0], body[:, 1], original_len, truncated=bool(odd))


def decompress(stream: RleStream, width: int, height: int) -> tuple[LabelMap, bool]:
    """Expand a stream into a ``width x height`` map.

    Returns the map and a damage flag. Intact streams decode exactly. On a
    damaged stream every complete record with a non-zero run is expanded, then
    the pixels are truncated or zero-padded to fit the declared size.
    """
    total = width * height
    if total < 1:
        raise ValueError("map dimensions must be positive")
    damaged = stream.original_len != total or stream.truncated
    runs = stream.runs
    values = stream.values
    keep = runs > 0
    if not keep.all():
        damaged = True
        runs, values = runs[keep], values[keep]
    pixels = np.repeat(values, runs)
    if pixels.size != total:
        damaged = True
        out = np.zeros(total, dtype=np.uint8)
        n = min(total, pixels.size)
        out[:n] = pixels[:n]
        pixels = out
    return LabelMap(pixels.reshape(height, width)), bool(damaged)
