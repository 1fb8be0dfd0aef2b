"""Synthetic piecewise-constant label maps used as stand-in test images."""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

import numpy as np

from .pgm import read_pgm, write_pgm
from .semantics import COCO_STUFF_CLASSES, LabelMap

__all__ = ["piecewise_constant_map", "shipped_fixture_paths", "load_shipped_fixtures", "write_fixtures"]

FIXTURE_COUNT = 10
FIXTURE_SIZE = 256


def piecewise_constant_map(
    width: int,
    height: int,
    regions: int,
    rng: np.random.Generator,
    min_side: int = 3,
) -> LabelMap:
    """Tile the map with up to ``regions`` axis-aligned rectangles.

    Rectangles come from repeated guillotine cuts of the largest remaining
    piece, so every region is a rectangle at least ``min_side`` pixels wide
    and tall. Each region gets a distinct trained class label.
    """
    if regions < 1 or regions > COCO_STUFF_CLASSES:
        raise ValueError(f"regions must lie in 1..{COCO_STUFF_CLASSES}")
    pieces = [(0, 0, height, width)]  # (row, col, rows, cols)
    while len(pieces) < regions:
        order = sorted(range(len(pieces)), key=lambda i: -pieces[i][2] * pieces[i][3])
        for i in order:
            r, c, h, w = pieces[i]
            axes = [a for a, extent in ((0, h), (1, w)) if extent >= 2 * min_side]
            if axes:
                break
        else:
            break
        axis = axes[rng.integers(len(axes))]
        extent = h if axis == 0 else w
        cut = int(rng.integers(min_side, extent - min_side + 1))
        del pieces[i]
        if axis == 0:
            pieces += [(r, c, cut, w), (r + cut, c, h - cut, w)]
        else:
            pieces += [(r, c, h, cut), (r, c + cut, h, w - cut)]
    labels = rng.choice(COCO_STUFF_CLASSES, size=len(pieces), replace=False)
    pixels = np.zeros((height, width), dtype=np.uint8)
    for (r, c, h, w), label in zip(pieces, labels):
        pixels[r : r + h, c : c + w] = label
    return LabelMap(pixels)


def _fixture_dir() -> Path:
    return Path(str(resources.files("semlink") / "data"))


def shipped_fixture_paths() -> list[Path]:
    return sorted(_fixture_dir().glob("fixture_*.pgm"))


def load_shipped_fixtures() -> list[LabelMap]:
    return [read_pgm(p) for p in shipped_fixture_paths()]


def write_fixtures(directory: str | os.PathLike, count: int = FIXTURE_COUNT, seed: int = 2024) -> list[Path]:
    """Regenerate the shipped 256x256 fixtures (4 to 10 regions each)."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        regions = 4 + i % 7
        m = piecewise_constant_map(FIXTURE_SIZE, FIXTURE_SIZE, regions, rng)
        path = out / f"fixture_{i:02d}.pgm"
        write_pgm(m, path)
        paths.append(path)
    return paths
