"""Cascaded buffered-IoU multi-object tracking toolkit."""

__version__ = "0.1.0"

from .assignment import MatchResult, gated_match, solve
from .geometry import BoundingBox, CornerBox, biou, buffer, diou, giou, iou
from .metrics import MetricsReport, SequenceAnnotations, evaluate, evaluate_many
from .motion import MotionHistory, Velocity, average_velocity, predict
from .synth import NoiseSpec, OcclusionSpec, ScenarioSpec, generate, oracle_detections, perturb
from .tracker import (
    CBiouTracker,
    Detection,
    FrameOutput,
    Track,
    TrackerConfig,
    cascade_match,
    run_sequence,
)

__all__ = [
    "__version__",
    "BoundingBox",
    "CornerBox",
    "buffer",
    "iou",
    "biou",
    "giou",
    "diou",
    "MatchResult",
    "solve",
    "gated_match",
    "MotionHistory",
    "Velocity",
    "average_velocity",
    "predict",
    "TrackerConfig",
    "Detection",
    "Track",
    "FrameOutput",
    "CBiouTracker",
    "cascade_match",
    "run_sequence",
    "SequenceAnnotations",
    "MetricsReport",
    "evaluate",
    "evaluate_many",
    "ScenarioSpec",
    "OcclusionSpec",
    "NoiseSpec",
    "generate",
    "oracle_detections",
    "perturb",
]
