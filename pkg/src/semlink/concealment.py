"""Median-filter concealment of isolated label errors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .semantics import LabelMap

__all__ = ["FilterConfig", "median_filter"]


@dataclass(frozen=True)
class FilterConfig:
    """Square median window; borders replicate the nearest edge pixel."""

    window: int = 3
    boundary: str = "replicate"

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be an odd positive integer, got {self.window}")
        if self.boundary != "replicate":
            raise ValueError(f"unsupported boundary policy {self.boundary!r}")


def median_filter(label_map: LabelMap, cfg: FilterConfig | None = None) -> LabelMap:
    """Replace each pixel by the median of its ``window x window`` neighbourhood.

    The window holds an odd number of samples, so the output is always one of
    the input values in that neighbourhood and no new labels appear.
    """
    cfg = cfg or FilterConfig()
    w = cfg.window
    if w == 1:
        return label_map
    r = w // 2
    padded = np.pad(label_map.pixels, r, mode="edge")
    windows = sliding_window_view(padded, (w, w)).reshape(*label_map.shape, w * w)
    mid = (w * w) // 2
    return LabelMap(np.partition(windows, mid, axis=-1)[..., mid])
