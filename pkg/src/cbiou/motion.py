"""Kalman-free motion model: average recent per-frame displacements and
extrapolate linearly in corner-form state space."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import CornerBox


@dataclass(frozen=True)
class Velocity:
    """Per-frame displacement of a corner-form state, in pixels/frame."""

    dx1: float = 0.0
    dy1: float = 0.0
    dx2: float = 0.0
    dy2: float = 0.0

    def __post_init__(self) -> None:
        for name in ("dx1", "dy1", "dx2", "dy2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"velocity component {name} must be finite")


ZERO_VELOCITY = Velocity()


class MotionHistory:
    """Sliding window of (frame, box) pairs from a track's matched detections.

    Keeps at most n_max + 1 entries, so at most n_max consecutive deltas ever
    contribute to the velocity estimate; older entries are evicted.
    """

    def __init__(self, n_max: int = 5):
        if int(n_max) != n_max or n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {n_max!r}")
        self.n_max = int(n_max)
        self._entries: list[tuple[int, CornerBox]] = []

    def append(self, frame: int, box: CornerBox) -> None:
        if self._entries and frame <= self._entries[-1][0]:
            raise ValueError(
                f"history frames must strictly increase, got {frame} after {self._entries[-1][0]}"
            )
        self._entries.append((int(frame), box))
        while len(self._entries) > self.n_max + 1:
            self._entries.pop(0)

    @property
    def entries(self) -> tuple[tuple[int, CornerBox], ...]:
        return tuple(self._entries)

    def __len__(self) -> int:
        return len(self._entries)


def average_velocity(hist: MotionHistory) -> Velocity:
    """Mean per-frame displacement over the history window.

    With fewer than two entries there is nothing to estimate and the zero
    velocity is returned. Otherwise the total displacement is divided by the
    frame span, which equals the mean of consecutive deltas when the matched
    frames are consecutive and keeps pixels/frame units across gaps.
    """
    if len(hist) < 2:
        return ZERO_VELOCITY
    (f0, b0) = hist.entries[0]
    (f1, b1) = hist.entries[-1]
    span = f1 - f0
    return Velocity(
        (b1.x1 - b0.x1) / span,
        (b1.y1 - b0.y1) / span,
        (b1.x2 - b0.x2) / span,
        (b1.y2 - b0.y2) / span,
    )


def predict(state: CornerBox, velocity: Velocity, delta: int) -> tuple[CornerBox, bool]:
    """Advance a corner-form state by ``delta`` frames of constant velocity.

    Applies the velocity once per frame (repeated addition), so advancing by
    a+b frames is bit-identical to advancing by a then by b. Returns the new
    box and a degenerate flag: if an extent collapses, it is re-centered with
    a 1-pixel minimum instead of failing.
    """
    if int(delta) != delta or delta < 1:
        raise ValueError(f"delta must be a positive integer, got {delta!r}")
    x1, y1, x2, y2 = state.x1, state.y1, state.x2, state.y2
    for _ in range(int(delta)):
        x1 += velocity.dx1
        y1 += velocity.dy1
        x2 += velocity.dx2
        y2 += velocity.dy2
    degenerate = False
    if x2 - x1 <= 0:
        cx = (x1 + x2) / 2.0
        x1, x2 = cx - 0.5, cx + 0.5
        degenerate = True
    if y2 - y1 <= 0:
        cy = (y1 + y2) / 2.0
        y1, y2 = cy - 0.5, cy + 0.5
        degenerate = True
    return CornerBox(x1, y1, x2, y2), degenerate
