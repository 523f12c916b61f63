"""Synthetic sequences with irregular motion, occlusion gaps, and detection
noise injection.

Objects follow piecewise-linear motion inside a rectangular arena: constant
velocity between seeded random heading/speed changes, reflecting off the
walls. Oracle detections are the ground-truth boxes at confidence 1.0, minus
frames suppressed by occlusion bursts. ``perturb`` removes a fraction of
detections (false negatives) and injects the same number of distractor boxes
at non-target locations (false positives).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import BoundingBox, iou
from .metrics import SequenceAnnotations
from .tracker import Detection

FP_GT_IOU_MAX = 0.2
FP_MAX_ATTEMPTS = 1000


class GenerationError(ValueError):
    """Raised when noise injection cannot place a box within the attempt budget."""

    def __init__(self, message: str, frame: int | None = None):
        super().__init__(message)
        self.frame = frame


@dataclass(frozen=True)
class OcclusionSpec:
    """Per-object detection-suppression bursts: start probability and duration range."""

    probability: float
    duration: tuple[int, int]

    def __post_init__(self) -> None:
        if not (0.0 <= self.probability <= 1.0):
            raise ValueError(f"occlusion probability must be in [0, 1], got {self.probability!r}")
        lo, hi = self.duration
        if int(lo) != lo or int(hi) != hi or lo < 1 or hi < lo:
            raise ValueError(f"occlusion duration range must satisfy 1 <= lo <= hi, got {self.duration!r}")


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters of one synthetic sequence."""

    num_objects: int
    num_frames: int
    arena: tuple[float, float]
    speed_range: tuple[float, float]
    turn_prob: float
    size_range: tuple[float, float]
    occlusion: OcclusionSpec | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_objects < 0 or int(self.num_objects) != self.num_objects:
            raise ValueError(f"num_objects must be a non-negative integer, got {self.num_objects!r}")
        if self.num_frames < 1 or int(self.num_frames) != self.num_frames:
            raise ValueError(f"num_frames must be a positive integer, got {self.num_frames!r}")
        width, height = self.arena
        if not (width > 0 and height > 0):
            raise ValueError(f"arena dimensions must be positive, got {self.arena!r}")
        for name, (lo, hi) in (("speed_range", self.speed_range), ("size_range", self.size_range)):
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi or lo < 0:
                raise ValueError(f"{name} must be a non-empty non-negative range, got {(lo, hi)!r}")
        if self.size_range[0] <= 0:
            raise ValueError(f"box sides must be positive, got {self.size_range!r}")
        if self.size_range[1] > min(self.arena):
            raise ValueError(
                f"objects of side {self.size_range[1]} do not fit in arena {self.arena}"
            )
        if not (0.0 <= self.turn_prob <= 1.0):
            raise ValueError(f"turn_prob must be in [0, 1], got {self.turn_prob!r}")


@dataclass(frozen=True)
class NoiseSpec:
    """Detection noise level: equal false-negative and false-positive ratios."""

    ratio: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.ratio < 1.0):
            raise ValueError(f"noise ratio must be in [0, 1), got {self.ratio!r}")


def _reflect(pos: float, vel: float, lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        return lo, -vel
    while True:
        if pos < lo:
            pos = 2 * lo - pos
            vel = -vel
        elif pos > hi:
            pos = 2 * hi - pos
            vel = -vel
        else:
            return pos, vel


def generate(spec: ScenarioSpec) -> tuple[SequenceAnnotations, dict[int, list[Detection]]]:
    """Simulate a scenario; returns (ground truth, oracle detections per frame).

    Deterministic for a given spec: the same seed always produces the same
    trajectories, occlusion bursts, and detections.
    """
    rng = np.random.default_rng(spec.seed)
    arena_w, arena_h = float(spec.arena[0]), float(spec.arena[1])
    gt_frames: dict[int, list[tuple[int, BoundingBox]]] = {}
    det_frames: dict[int, list[Detection]] = {f: [] for f in range(1, spec.num_frames + 1)}
    for obj_id in range(1, spec.num_objects + 1):
        w = float(rng.uniform(spec.size_range[0], spec.size_range[1]))
        h = float(rng.uniform(spec.size_range[0], spec.size_range[1]))
        cx = float(rng.uniform(w / 2, arena_w - w / 2))
        cy = float(rng.uniform(h / 2, arena_h - h / 2))
        speed = float(rng.uniform(spec.speed_range[0], spec.speed_range[1]))
        heading = float(rng.uniform(0.0, 2.0 * math.pi))
        vx, vy = speed * math.cos(heading), speed * math.sin(heading)
        burst_left = 0
        for frame in range(1, spec.num_frames + 1):
            box = BoundingBox(cx - w / 2, cy - h / 2, w, h)
            gt_frames.setdefault(frame, []).append((obj_id, box))
            suppressed = False
            if spec.occlusion is not None:
                if burst_left > 0:
                    suppressed = True
                    burst_left -= 1
                elif rng.random() < spec.occlusion.probability:
                    lo, hi = spec.occlusion.duration
                    burst_left = int(rng.integers(lo, hi + 1))
                    suppressed = True
                    burst_left -= 1
            if not suppressed:
                det_frames[frame].append(Detection(frame=frame, box=box, confidence=1.0))
            if spec.turn_prob > 0.0 and rng.random() < spec.turn_prob:
                speed = float(rng.uniform(spec.speed_range[0], spec.speed_range[1]))
                heading = float(rng.uniform(0.0, 2.0 * math.pi))
                vx, vy = speed * math.cos(heading), speed * math.sin(heading)
            cx, vx = _reflect(cx + vx, vx, w / 2, arena_w - w / 2)
            cy, vy = _reflect(cy + vy, vy, h / 2, arena_h - h / 2)
    return SequenceAnnotations(gt_frames), det_frames


def oracle_detections(gt: SequenceAnnotations) -> dict[int, list[Detection]]:
    """Ground-truth boxes reissued as detector output at confidence 1.0."""
    return {
        frame: [Detection(frame=frame, box=box, confidence=1.0) for _, box in rows]
        for frame, rows in sorted(gt.frames.items())
    }


def perturb(
    detections_by_frame: dict[int, list[Detection]],
    noise: NoiseSpec,
    gt: SequenceAnnotations,
    *,
    stratified: bool = False,
) -> dict[int, list[Detection]]:
    """Inject detection noise: remove round(ratio * N) detections uniformly
    without replacement, then add the same number of false positives.

    Each false positive takes its size from the empirical distribution of
    ground-truth boxes and is placed in the frame of a removed detection by
    rejection sampling until it overlaps every same-frame ground-truth box at
    IoU below 0.2. With ``stratified`` the removals are drawn per frame
    instead of over the pooled detection list.
    """
    frames = sorted(detections_by_frame)
    entries = [(f, i) for f in frames for i in range(len(detections_by_frame[f]))]
    total = len(entries)
    rng = np.random.default_rng(noise.seed)

    if stratified:
        removed: set[tuple[int, int]] = set()
        for f in frames:
            count = len(detections_by_frame[f])
            take = int(round(noise.ratio * count))
            if take:
                for i in rng.choice(count, size=take, replace=False):
                    removed.add((f, int(i)))
    else:
        n_remove = int(round(noise.ratio * total))
        if n_remove:
            picks = rng.choice(total, size=n_remove, replace=False)
            removed = {entries[int(k)] for k in picks}
        else:
            removed = set()

    result = {
        f: [d for i, d in enumerate(detections_by_frame[f]) if (f, i) not in removed]
        for f in frames
    }
    if not removed:
        return result

    sizes = [(box.w, box.h) for frame in sorted(gt.frames) for _, box in gt.frames[frame]]
    if not sizes:
        raise ValueError("cannot size false positives: ground truth has no boxes")
    all_boxes = [box for rows in gt.frames.values() for _, box in rows]
    env_x1 = min(b.x for b in all_boxes)
    env_y1 = min(b.y for b in all_boxes)
    env_x2 = max(b.x + b.w for b in all_boxes)
    env_y2 = max(b.y + b.h for b in all_boxes)

    for frame, _ in sorted(removed):
        gt_rows = gt.frames.get(frame, ())
        placed = None
        for _attempt in range(FP_MAX_ATTEMPTS):
            w, h = sizes[int(rng.integers(len(sizes)))]
            x = float(rng.uniform(env_x1, max(env_x1, env_x2 - w)))
            y = float(rng.uniform(env_y1, max(env_y1, env_y2 - h)))
            candidate = BoundingBox(x, y, w, h)
            if all(iou(candidate, box) < FP_GT_IOU_MAX for _, box in gt_rows):
                placed = candidate
                break
        if placed is None:
            raise GenerationError(
                f"could not place a false positive in frame {frame} "
                f"after {FP_MAX_ATTEMPTS} attempts",
                frame=frame,
            )
        result[frame].append(Detection(frame=frame, box=placed, confidence=1.0))
    return result
