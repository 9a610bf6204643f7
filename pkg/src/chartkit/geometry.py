"""Axis-aligned boxes, IoU, and greedy box matching.

Boxes live in image pixel space: origin at the top-left corner, x growing
right, y growing down, corners ordered (x_min, y_min, x_max, y_max).

The pairwise-IoU and matching kernels have two interchangeable backends: a
compiled extension (chartkit._kernels) and a numpy fallback
(chartkit._py_kernels). The compiled one is picked at import time when
available; set CHARTKIT_PURE=1 to force the fallback.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from chartkit.errors import EmptyGroundTruth, InvalidBox

if os.environ.get("CHARTKIT_PURE"):
    from chartkit import _py_kernels as _impl

    KERNEL_BACKEND = "python"
else:
    try:
        from chartkit import _kernels as _impl  # type: ignore[no-redef]

        KERNEL_BACKEND = "compiled"
    except ImportError:
        from chartkit import _py_kernels as _impl  # type: ignore[no-redef]

        KERNEL_BACKEND = "python"


@dataclass(frozen=True)
class BBox:
    """Validated axis-aligned box. Degenerate or non-finite boxes are rejected."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        for v in (self.x_min, self.y_min, self.x_max, self.y_max):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidBox(f"box corner must be a number, got {v!r}")
            if not math.isfinite(v):
                raise InvalidBox(f"box corner must be finite, got {v!r}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidBox(
                "box must have positive extent: "
                f"({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})"
            )

    @classmethod
    def from_quad(cls, quad: Sequence[float]) -> "BBox":
        if len(quad) != 4:
            raise InvalidBox(f"box needs exactly 4 coordinates, got {len(quad)}")
        return cls(quad[0], quad[1], quad[2], quad[3])

    def as_quad(self) -> list[float]:
        """Corner list in (x_min, y_min, x_max, y_max) order.

        Values keep their original type (int stays int) so serialization
        round-trips byte for byte.
        """
        return [self.x_min, self.y_min, self.x_max, self.y_max]

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes; 0.0 when disjoint or touching."""
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    if iw <= 0:
        return 0.0
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    return inter / union


def boxes_to_array(boxes: Iterable[BBox]) -> np.ndarray:
    """Pack boxes into an (N, 4) float64 array for the kernels."""
    quads = [(b.x_min, b.y_min, b.x_max, b.y_max) for b in boxes]
    if not quads:
        return np.zeros((0, 4), dtype=np.float64)
    return np.asarray(quads, dtype=np.float64)


def pairwise_iou(preds: Sequence[BBox], gts: Sequence[BBox]) -> np.ndarray:
    """(len(preds), len(gts)) IoU matrix."""
    return _impl.pairwise_iou(boxes_to_array(preds), boxes_to_array(gts))


def match_boxes(
    preds: Sequence[BBox], gts: Sequence[BBox], threshold: float
) -> list[tuple[int, int]]:
    """Greedy one-to-one matching between predictions and ground truth.

    All (pred, gt) pairs with IoU >= threshold are considered in
    (IoU descending, pred index, gt index) order; each is accepted when both
    boxes are still unmatched. Deterministic for fixed input order.
    """
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    if not preds or not gts:
        return []
    mat = _impl.pairwise_iou(boxes_to_array(preds), boxes_to_array(gts))
    return [(int(i), int(j)) for i, j in _impl.greedy_match_pairs(mat, threshold)]


def match_and_recall(
    preds: Sequence[BBox], gts: Sequence[BBox], threshold: float
) -> tuple[int, float]:
    """Matched-pair count and recall (matched / len(gts)) at an IoU threshold."""
    if len(gts) == 0:
        raise EmptyGroundTruth("recall is undefined with no ground-truth boxes")
    pairs = match_boxes(preds, gts, threshold)
    return len(pairs), len(pairs) / len(gts)
