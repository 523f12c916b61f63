"""Axis-aligned bounding-box algebra and pairwise similarity measures.

Scalar operations work on immutable box values. The ``*_matrix`` variants are
vectorized over numpy arrays of corner-form boxes and are what the tracker and
the metrics use on whole frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

SIMILARITY_KINDS = ("iou", "giou", "diou", "biou")


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class BoundingBox:
    """Box in top-left/width/height form; extents must be strictly positive."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box extents must be positive, got w={self.w}, h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    def to_corners(self) -> "CornerBox":
        return CornerBox(self.x, self.y, self.x + self.w, self.y + self.h)


@dataclass(frozen=True)
class CornerBox:
    """Box in top-left/bottom-right corner form."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        for name in ("x1", "y1", "x2", "y2"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))
        if self.x2 <= self.x1 or self.y2 <= self.y1:
            raise ValueError(
                f"corners must satisfy x2 > x1 and y2 > y1, got {(self.x1, self.y1, self.x2, self.y2)}"
            )

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)

    def to_tlwh(self) -> BoundingBox:
        return BoundingBox(self.x1, self.y1, self.x2 - self.x1, self.y2 - self.y1)


def buffer(box: BoundingBox, b: float) -> BoundingBox:
    """Expand a box by a buffer proportional to its own extents.

    The buffered box is (x - b*w, y - b*h, w + 2*b*w, h + 2*b*h): same center,
    same aspect ratio, area scaled by (1 + 2b)^2.
    """
    b = float(b)
    if not math.isfinite(b) or b < 0:
        raise ValueError(f"buffer scale must be finite and non-negative, got {b!r}")
    return BoundingBox(
        box.x - b * box.w,
        box.y - b * box.h,
        box.w + 2 * b * box.w,
        box.h + 2 * b * box.h,
    )


def _corner_vals(box: BoundingBox) -> tuple[float, float, float, float]:
    return box.x, box.y, box.x + box.w, box.y + box.h


def _inter_union(a: BoundingBox, b: BoundingBox) -> tuple[float, float]:
    # Areas are computed from corner coordinates so that identical boxes give
    # an intersection exactly equal to each area (f(a, a) == 1 bit-exact).
    ax1, ay1, ax2, ay2 = _corner_vals(a)
    bx1, by1, bx2, by2 = _corner_vals(b)
    iw = max(0.0, min(ax2, bx2) - max(ax1, bx1))
    ih = max(0.0, min(ay2, by2) - max(ay1, by1))
    inter = iw * ih
    area_a = (ax2 - ax1) * (ay2 - ay1)
    area_b = (bx2 - bx1) * (by2 - by1)
    return inter, area_a + area_b - inter


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection area over union area; 0 for disjoint boxes."""
    inter, union = _inter_union(a, b)
    return inter / union


def biou(a: BoundingBox, b: BoundingBox, scale: float) -> float:
    """IoU after both boxes are expanded with the same buffer scale."""
    return iou(buffer(a, scale), buffer(b, scale))


def giou(a: BoundingBox, b: BoundingBox) -> float:
    """IoU penalized by the slack of the smallest enclosing box; range (-1, 1]."""
    inter, union = _inter_union(a, b)
    ax1, ay1, ax2, ay2 = _corner_vals(a)
    bx1, by1, bx2, by2 = _corner_vals(b)
    hull = (max(ax2, bx2) - min(ax1, bx1)) * (max(ay2, by2) - min(ay1, by1))
    return inter / union - (hull - union) / hull


def diou(a: BoundingBox, b: BoundingBox) -> float:
    """IoU penalized by normalized center distance; range (-1, 1]."""
    inter, union = _inter_union(a, b)
    ax1, ay1, ax2, ay2 = _corner_vals(a)
    bx1, by1, bx2, by2 = _corner_vals(b)
    dcx = (ax1 + ax2) / 2.0 - (bx1 + bx2) / 2.0
    dcy = (ay1 + ay2) / 2.0 - (by1 + by2) / 2.0
    hull_w = max(ax2, bx2) - min(ax1, bx1)
    hull_h = max(ay2, by2) - min(ay1, by1)
    return inter / union - (dcx * dcx + dcy * dcy) / (hull_w * hull_w + hull_h * hull_h)


# Vectorized forms over (N, 4) arrays of [x1, y1, x2, y2] rows.


def to_xyxy(boxes: Iterable[BoundingBox | CornerBox]) -> np.ndarray:
    """Stack boxes into an (N, 4) corner-form array."""
    rows = []
    for box in boxes:
        if isinstance(box, BoundingBox):
            rows.append((box.x, box.y, box.x + box.w, box.y + box.h))
        else:
            rows.append((box.x1, box.y1, box.x2, box.y2))
    if not rows:
        return np.zeros((0, 4), dtype=float)
    return np.asarray(rows, dtype=float)


def buffer_xyxy(boxes: np.ndarray, scale: float) -> np.ndarray:
    scale = float(scale)
    if not math.isfinite(scale) or scale < 0:
        raise ValueError(f"buffer scale must be finite and non-negative, got {scale!r}")
    boxes = np.asarray(boxes, dtype=float)
    if boxes.size == 0:
        return boxes.reshape(0, 4)
    w = boxes[:, 2] - boxes[:, 0]
    h = boxes[:, 3] - boxes[:, 1]
    out = np.empty_like(boxes)
    out[:, 0] = boxes[:, 0] - scale * w
    out[:, 1] = boxes[:, 1] - scale * h
    out[:, 2] = boxes[:, 2] + scale * w
    out[:, 3] = boxes[:, 3] + scale * h
    return out


def _pairwise_parts(a: np.ndarray, b: np.ndarray):
    ix1 = np.maximum(a[:, None, 0], b[None, :, 0])
    iy1 = np.maximum(a[:, None, 1], b[None, :, 1])
    ix2 = np.minimum(a[:, None, 2], b[None, :, 2])
    iy2 = np.minimum(a[:, None, 3], b[None, :, 3])
    inter = np.clip(ix2 - ix1, 0.0, None) * np.clip(iy2 - iy1, 0.0, None)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    return inter, union


def _empty_or_arrays(a, b):
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return a, b, np.zeros((a.shape[0], b.shape[0]), dtype=float)
    return a, b, None


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU between two sets of corner-form boxes; shape (N, M)."""
    a, b, empty = _empty_or_arrays(a, b)
    if empty is not None:
        return empty
    inter, union = _pairwise_parts(a, b)
    return inter / union


def biou_matrix(a: np.ndarray, b: np.ndarray, scale: float) -> np.ndarray:
    """Pairwise buffered IoU; both sides are expanded with the same scale."""
    a, b, empty = _empty_or_arrays(a, b)
    if empty is not None:
        return empty
    return iou_matrix(buffer_xyxy(a, scale), buffer_xyxy(b, scale))


def giou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b, empty = _empty_or_arrays(a, b)
    if empty is not None:
        return empty
    inter, union = _pairwise_parts(a, b)
    hull_w = np.maximum(a[:, None, 2], b[None, :, 2]) - np.minimum(a[:, None, 0], b[None, :, 0])
    hull_h = np.maximum(a[:, None, 3], b[None, :, 3]) - np.minimum(a[:, None, 1], b[None, :, 1])
    hull = hull_w * hull_h
    return inter / union - (hull - union) / hull


def diou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b, empty = _empty_or_arrays(a, b)
    if empty is not None:
        return empty
    inter, union = _pairwise_parts(a, b)
    acx = (a[:, 0] + a[:, 2]) / 2.0
    acy = (a[:, 1] + a[:, 3]) / 2.0
    bcx = (b[:, 0] + b[:, 2]) / 2.0
    bcy = (b[:, 1] + b[:, 3]) / 2.0
    dcx = acx[:, None] - bcx[None, :]
    dcy = acy[:, None] - bcy[None, :]
    hull_w = np.maximum(a[:, None, 2], b[None, :, 2]) - np.minimum(a[:, None, 0], b[None, :, 0])
    hull_h = np.maximum(a[:, None, 3], b[None, :, 3]) - np.minimum(a[:, None, 1], b[None, :, 1])
    return inter / union - (dcx * dcx + dcy * dcy) / (hull_w * hull_w + hull_h * hull_h)


def similarity_matrix(kind: str, a: np.ndarray, b: np.ndarray, buffer_scale: float = 0.0) -> np.ndarray:
    """Dispatch on the similarity kind; ``buffer_scale`` only applies to biou."""
    if kind == "iou":
        return iou_matrix(a, b)
    if kind == "giou":
        return giou_matrix(a, b)
    if kind == "diou":
        return diou_matrix(a, b)
    if kind == "biou":
        return biou_matrix(a, b, buffer_scale)
    raise ValueError(f"unknown similarity kind {kind!r}, expected one of {SIMILARITY_KINDS}")
