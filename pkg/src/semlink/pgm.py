"""Binary (P5) PGM reading and writing for 8-bit label maps."""

from __future__ import annotations

import os
import re

import numpy as np

from .semantics import LabelMap

__all__ = ["PgmError", "read_pgm", "write_pgm", "parse_pgm", "format_pgm"]

# magic, width, height, maxval separated by whitespace and optional comments,
# then exactly one whitespace byte before the raster
_HEADER = re.compile(
    rb"\A(P\d)"
    rb"(?:\s+|#[^\n]*\n)+(\d+)"
    rb"(?:\s+|#[^\n]*\n)+(\d+)"
    rb"(?:\s+|#[^\n]*\n)+(\d+)"
    rb"\s"
)


class PgmError(ValueError):
    pass


def parse_pgm(data: bytes) -> LabelMap:
    m = _HEADER.match(data)
    if m is None:
        if not data.startswith(b"P5"):
            raise PgmError("not a binary PGM (expected magic 'P5')")
        raise PgmError("malformed PGM header")
    magic, width, height, maxval = m.groups()
    if magic != b"P5":
        raise PgmError(f"unsupported magic {magic.decode()!r}, expected 'P5'")
    width, height, maxval = int(width), int(height), int(maxval)
    if maxval != 255:
        raise PgmError(f"maxval must be 255 for 8-bit label maps, got {maxval}")
    if width < 1 or height < 1:
        raise PgmError(f"invalid dimensions {width}x{height}")
    raster = data[m.end():]
    if len(raster) < width * height:
        raise PgmError(f"truncated raster: expected {width * height} bytes, got {len(raster)}")
    pixels = np.frombuffer(raster, dtype=np.uint8, count=width * height)
    return LabelMap(pixels.reshape(height, width))


def format_pgm(label_map: LabelMap) -> bytes:
    header = f"P5\n{label_map.width} {label_map.height}\n255\n".encode("ascii")
    return header + label_map.tobytes()


def read_pgm(path: str | os.PathLike) -> LabelMap:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return parse_pgm(data)
    except PgmError as exc:
        raise PgmError(f"{os.fspath(path)}: {exc}") from None


def write_pgm(label_map: LabelMap, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(format_pgm(label_map))
