"""Detection-quality metrics: IoU, average precision and average recall.

Boxes are closed axis-aligned rectangles in continuous coordinates.
Degenerate denominators (zero union area, no detections, no ground truth)
yield 0 instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BoundingBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        coords = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"box coordinates must be finite, got {coords}")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"box corners out of order: {coords}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def shifted(self, dx: float, dy: float) -> BoundingBox:
        return BoundingBox(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)


@dataclass(frozen=True)
class DetectionCounts:
    true_positives: int
    false_positives: int
    false_negatives: int

    def __post_init__(self):
        for name in ("true_positives", "false_positives", "false_negatives"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")


def iou(a: BoundingBox, b: BoundingBox) -> float:
    w = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    h = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = w * h if w > 0 and h > 0 else 0.0
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return min(1.0, max(0.0, inter / union))


def average_precision(c: DetectionCounts) -> float:
    """``tp / (tp + fp)``, or 0 when nothing was detected."""
    denom = c.true_positives + c.false_positives
    return c.true_positives / denom if denom else 0.0


def average_recall(c: DetectionCounts) -> float:
    """``tp / (tp + fn)``, or 0 when there is no ground truth."""
    denom = c.true_positives + c.false_negatives
    return c.true_positives / denom if denom else 0.0


def detection_success(detected: BoundingBox, truth: BoundingBox, iou_threshold: float = 0.5) -> bool:
    """True when the IoU strictly exceeds the threshold."""
    if not 0.0 <= iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must lie in [0, 1], got {iou_threshold!r}")
    return iou(detected, truth) > iou_threshold


__all__ = [
    "BoundingBox",
    "DetectionCounts",
    "average_precision",
    "average_recall",
    "detection_success",
    "iou",
]
