"""Online cascaded buffered-IoU tracker.

Per frame: alive track states are advanced by their averaged velocity, then
matched to detections in two gated assignment rounds (small buffer first,
large buffer for the leftovers). Matched tracks adopt the detection box as
their new state; unmatched tracks coast and age out after ``max_age`` frames;
unmatched detections start new tracks. Only tracks matched in the current
frame are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import assignment, geometry, motion
from .geometry import SIMILARITY_KINDS, BoundingBox, CornerBox


@dataclass(frozen=True)
class TrackerConfig:
    """Tracker knobs; the defaults are the cascaded buffered-IoU setup.

    ``similarity_kind``, ``cascade_enabled`` and ``motion_enabled`` exist so
    ablation variants (plain IoU/GIoU/DIoU trackers, single-round buffered
    matching, no motion) run in the same framework.
    """

    b1: float = 0.3
    b2: float = 0.4
    max_age: int = 30
    n_max: int = 5
    min_sim: float = assignment.DEFAULT_MIN_SIMILARITY
    det_conf_min: float = 0.1
    similarity_kind: str = "biou"
    cascade_enabled: bool = True
    motion_enabled: bool = True

    def __post_init__(self) -> None:
        if not math.isfinite(self.b1) or self.b1 < 0:
            raise ValueError(f"b1 must be finite and >= 0, got {self.b1!r}")
        if self.cascade_enabled:
            if not math.isfinite(self.b2) or self.b2 <= self.b1:
                raise ValueError(
                    f"cascaded matching requires b1 < b2, got b1={self.b1!r}, b2={self.b2!r}"
                )
        if int(self.max_age) != self.max_age or self.max_age < 1:
            raise ValueError(f"max_age must be an integer >= 1, got {self.max_age!r}")
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise ValueError(f"n_max must be an integer >= 2, got {self.n_max!r}")
        if not math.isfinite(self.min_sim):
            raise ValueError(f"min_sim must be finite, got {self.min_sim!r}")
        if not (0.0 <= self.det_conf_min <= 1.0):
            raise ValueError(f"det_conf_min must be in [0, 1], got {self.det_conf_min!r}")
        if self.similarity_kind not in SIMILARITY_KINDS:
            raise ValueError(
                f"similarity_kind must be one of {SIMILARITY_KINDS}, got {self.similarity_kind!r}"
            )


@dataclass(frozen=True)
class Detection:
    """One detector output box for one frame."""

    frame: int
    box: BoundingBox
    confidence: float

    def __post_init__(self) -> None:
        if int(self.frame) != self.frame or self.frame < 1:
            raise ValueError(f"frame must be a positive integer, got {self.frame!r}")
        if not math.isfinite(self.confidence):
            raise ValueError(f"confidence must be finite, got {self.confidence!r}")


@dataclass
class Track:
    """A tracked identity and its mutable per-sequence state."""

    id: int
    state: CornerBox
    age: int
    history: motion.MotionHistory
    last_conf: float
    state_frame: int
    degenerate: bool = False


@dataclass(frozen=True)
class FrameOutput:
    """Records reported for one frame: (track id, box, confidence) tuples."""

    frame: int
    records: tuple[tuple[int, BoundingBox, float], ...]


def cascade_match(
    track_boxes: Sequence[CornerBox],
    det_boxes: Sequence[BoundingBox],
    config: TrackerConfig,
) -> tuple[list[tuple[int, int]], list[int], list[int]]:
    """Two matching rounds: buffer b1 over everything, then b2 over leftovers.

    Returns (matches, unmatched track indices, unmatched detection indices);
    the two rounds' matches are disjoint in both tracks and detections. With
    cascading disabled this is a single gated round with b1.
    """
    n_tracks, n_dets = len(track_boxes), len(det_boxes)
    if n_tracks == 0 or n_dets == 0:
        return [], list(range(n_tracks)), list(range(n_dets))
    t_xyxy = geometry.to_xyxy(track_boxes)
    d_xyxy = geometry.to_xyxy(det_boxes)
    sim1 = geometry.similarity_matrix(config.similarity_kind, t_xyxy, d_xyxy, config.b1)
    round1 = assignment.gated_match(sim1, config.min_sim)
    matches = list(round1.pairs)
    un_tracks = list(round1.unmatched_rows)
    un_dets = list(round1.unmatched_cols)
    if config.cascade_enabled and un_tracks and un_dets:
        sim2 = geometry.similarity_matrix(
            config.similarity_kind, t_xyxy[un_tracks], d_xyxy[un_dets], config.b2
        )
        round2 = assignment.gated_match(sim2, config.min_sim)
        matches.extend((un_tracks[i], un_dets[j]) for i, j in round2.pairs)
        un_tracks = [un_tracks[i] for i in round2.unmatched_rows]
        un_dets = [un_dets[j] for j in round2.unmatched_cols]
    matches.sort()
    return matches, un_tracks, un_dets


class CBiouTracker:
    """State machine over one sequence; feed frames in strictly increasing order.

    Instances are single-threaded; independent instances may run on different
    sequences concurrently.
    """

    def __init__(self, config: TrackerConfig | None = None):
        self.config = config if config is not None else TrackerConfig()
        self._tracks: list[Track] = []
        self._next_id = 1
        self._last_frame: int | None = None

    @property
    def tracks(self) -> tuple[Track, ...]:
        """Alive tracks, in creation order."""
        return tuple(self._tracks)

    def step(self, frame_index: int, detections: Sequence[Detection]) -> FrameOutput:
        """Advance one frame and return the records matched in it."""
        if int(frame_index) != frame_index or frame_index < 1:
            raise ValueError(f"frame index must be a positive integer, got {frame_index!r}")
        if self._last_frame is not None and frame_index <= self._last_frame:
            raise ValueError(
                f"frame index must increase, got {frame_index} after {self._last_frame}"
            )
        for det in detections:
            if det.frame != frame_index:
                raise ValueError(
                    f"detection for frame {det.frame} passed to step for frame {frame_index}"
                )
        self._last_frame = int(frame_index)
        admitted = [d for d in detections if d.confidence >= self.config.det_conf_min]

        # Advance every alive state to this frame. Tracks with fewer than two
        # matches have no velocity estimate and keep their recorded box.
        for track in self._tracks:
            delta = frame_index - track.state_frame
            if delta > 0 and self.config.motion_enabled and len(track.history) >= 2:
                velocity = motion.average_velocity(track.history)
                track.state, degenerate = motion.predict(track.state, velocity, delta)
                track.degenerate = track.degenerate or degenerate
            track.state_frame = frame_index

        matches, un_tracks, un_dets = cascade_match(
            [t.state for t in self._tracks], [d.box for d in admitted], self.config
        )

        reported: list[tuple[int, BoundingBox, float]] = []
        for ti, di in matches:
            track = self._tracks[ti]
            det = admitted[di]
            track.state = det.box.to_corners()
            track.history.append(frame_index, track.state)
            track.age = 0
            track.last_conf = det.confidence
            reported.append((track.id, det.box, det.confidence))

        unmatched_set = set(un_tracks)
        survivors = []
        for i, track in enumerate(self._tracks):
            if i in unmatched_set:
                track.age += 1
                if track.age > self.config.max_age:
                    continue
            survivors.append(track)

        for di in un_dets:
            det = admitted[di]
            track = Track(
                id=self._next_id,
                state=det.box.to_corners(),
                age=0,
                history=motion.MotionHistory(self.config.n_max),
                last_conf=det.confidence,
                state_frame=frame_index,
            )
            track.history.append(frame_index, track.state)
            self._next_id += 1
            survivors.append(track)
            reported.append((track.id, det.box, det.confidence))

        self._tracks = survivors
        reported.sort(key=lambda rec: rec[0])
        return FrameOutput(frame=int(frame_index), records=tuple(reported))


def run_sequence(
    config: TrackerConfig,
    detections_by_frame: Mapping[int, Sequence[Detection]],
    *,
    interpolate_gaps: bool = False,
) -> list[FrameOutput]:
    """Drive a tracker over a whole sequence of per-frame detection lists.

    Frame indices absent from the mapping are treated as frames with zero
    detections. With ``interpolate_gaps`` the reported boxes of each track are
    linearly interpolated across its match gaps as a post-processing step.
    """
    if not detections_by_frame:
        return []
    frames = sorted(int(f) for f in detections_by_frame)
    tracker = CBiouTracker(config)
    outputs = [
        tracker.step(f, list(detections_by_frame.get(f, ())))
        for f in range(frames[0], frames[-1] + 1)
    ]
    if interpolate_gaps:
        outputs = _interpolate_gaps(outputs)
    return outputs


def _interpolate_gaps(outputs: list[FrameOutput]) -> list[FrameOutput]:
    by_track: dict[int, list[tuple[int, BoundingBox, float]]] = {}
    for out in outputs:
        for tid, box, conf in out.records:
            by_track.setdefault(tid, []).append((out.frame, box, conf))
    extra: dict[int, list[tuple[int, BoundingBox, float]]] = {}
    for tid, entries in by_track.items():
        for (f0, b0, c0), (f1, b1, c1) in zip(entries, entries[1:]):
            for f in range(f0 + 1, f1):
                t = (f - f0) / (f1 - f0)
                box = BoundingBox(
                    b0.x + t * (b1.x - b0.x),
                    b0.y + t * (b1.y - b0.y),
                    b0.w + t * (b1.w - b0.w),
                    b0.h + t * (b1.h - b0.h),
                )
                extra.setdefault(f, []).append((tid, box, c0 + t * (c1 - c0)))
    if not extra:
        return outputs
    filled = []
    for out in outputs:
        added = extra.get(out.frame)
        if not added:
            filled.append(out)
            continue
        records = sorted(list(out.records) + added, key=lambda rec: rec[0])
        filled.append(FrameOutput(frame=out.frame, records=tuple(records)))
    return filled
