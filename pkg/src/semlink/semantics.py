"""Label maps, the receiver's trained label set and edge diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LabelMap",
    "TrainedLabelSet",
    "AcceptanceVerdict",
    "UNLABELED",
    "COCO_STUFF_CLASSES",
    "validate",
    "label_histogram",
    "edge_map",
    "edge_distortion",
]

COCO_STUFF_CLASSES = 182
UNLABELED = 255


@dataclass(frozen=True, eq=False)
class LabelMap:
    """A 2-D grid of 8-bit semantic class identifiers.

    ``pixels`` has shape ``(height, width)``; row-major traversal of it is the
    order used for packetisation and compression.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"label map must be a non-empty 2-D array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer):
                raise TypeError(f"label map must hold integers, got {arr.dtype}")
            if arr.min() < 0 or arr.max() > 255:
                raise ValueError("label values must lie in 0..255")
        arr = np.array(arr, dtype=np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def from_bytes(cls, data: bytes, width: int, height: int) -> "LabelMap":
        if len(data) != width * height:
            raise ValueError(f"expected {width * height} bytes, got {len(data)}")
        return cls(np.frombuffer(data, dtype=np.uint8).reshape(height, width))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    @property
    def size(self) -> int:
        return self.pixels.size

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()

    def __eq__(self, other):
        if not isinstance(other, LabelMap):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.pixels, other.pixels))

    __hash__ = None

    def __repr__(self) -> str:
        return f"LabelMap({self.width}x{self.height})"


@dataclass(frozen=True)
class TrainedLabelSet:
    """Label identifiers the receiver's generator was trained on."""

    allowed: frozenset

    def __post_init__(self):
        allowed = frozenset(int(v) for v in self.allowed)
        if any(not 0 <= v <= 255 for v in allowed):
            raise ValueError("labels must lie in 0..255")
        if len(allowed) > COCO_STUFF_CLASSES + 1:
            raise ValueError(
                f"at most {COCO_STUFF_CLASSES} classes plus the unlabeled sentinel are allowed"
            )
        object.__setattr__(self, "allowed", allowed)

    @classmethod
    def coco_stuff(cls, include_unlabeled: bool = True) -> "TrainedLabelSet":
        """Classes 0..181, plus 255 as the unlabeled sentinel."""
        labels = set(range(COCO_STUFF_CLASSES))
        if include_unlabeled:
            labels.add(UNLABELED)
        return cls(frozenset(labels))

    def lookup_table(self) -> np.ndarray:
        table = np.zeros(256, dtype=bool)
        table[sorted(self.allowed)] = True
        return table


@dataclass(frozen=True)
class AcceptanceVerdict:
    accepted: bool
    offending_labels: frozenset
    offending_pixel_count: int


def validate(label_map: LabelMap, trained: TrainedLabelSet | None = None) -> AcceptanceVerdict:
    """Accept a map iff every pixel carries a trained label."""
    if trained is None:
        trained = TrainedLabelSet.coco_stuff()
    bad = ~trained.lookup_table()[label_map.pixels]
    offending = frozenset(int(v) for v in np.unique(label_map.pixels[bad]))
    return AcceptanceVerdict(not offending, offending, int(bad.sum()))


def label_histogram(label_map: LabelMap) -> dict[int, int]:
    counts = np.bincount(label_map.pixels.ravel(), minlength=256)
    return {int(v): int(counts[v]) for v in np.flatnonzero(counts)}


def edge_map(label_map: LabelMap) -> np.ndarray:
    """Boolean mask of pixels whose right or lower neighbour has another label.

    Pixels in the last column only compare downwards and pixels in the last
    row only compare rightwards; the bottom-right pixel is never an edge.
    """
    p = label_map.pixels
    mask = np.zeros(p.shape, dtype=bool)
    mask[:, :-1] |= p[:, :-1] != p[:, 1:]
    mask[:-1, :] |= p[:-1, :] != p[1:, :]
    return mask


def edge_distortion(reference: LabelMap, received: LabelMap) -> tuple[float, float]:
    """Precision and recall of the received edge pixels against the reference.

    An empty received edge set has precision 1.0; an empty reference edge set
    has recall 1.0.
    """
    if reference.shape != received.shape:
        raise ValueError(f"shape mismatch: {reference.shape} vs {received.shape}")
    ref = edge_map(reference)
    got = edge_map(received)
    hits = int(np.count_nonzero(ref & got))
    n_got = int(np.count_nonzero(got))
    n_ref = int(np.count_nonzero(ref))
    precision = hits / n_got if n_got else 1.0
    recall = hits / n_ref if n_ref else 1.0
    return precision, recall

