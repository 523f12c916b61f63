"""Tracking evaluation: HOTA (with DetA/AssA), CLEAR-MOT accuracy, and IDF1.

All metrics consume two per-frame labelings (ground truth and predictions) of
(identity, box) pairs. Scores are single-sequence; to evaluate several
sequences together, pool them with ``evaluate_many`` which merges them onto
disjoint frame/identity ranges so raw counts pool rather than ratios average.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import assignment, geometry
from .geometry import BoundingBox

ALPHAS: tuple[float, ...] = tuple(i / 20 for i in range(1, 20))
DEFAULT_IOU_THRESHOLD = 0.5


class SequenceAnnotations:
    """Per-frame (identity, box) labels for one sequence.

    Within a frame each identity may appear at most once; duplicates are a
    data error.
    """

    def __init__(self, frames: Mapping[int, Iterable[tuple[int, BoundingBox]]]):
        normalized: dict[int, tuple[tuple[int, BoundingBox], ...]] = {}
        for frame, items in frames.items():
            frame = int(frame)
            seen: set[int] = set()
            rows = []
            for identity, box in items:
                identity = int(identity)
                if identity in seen:
                    raise ValueError(f"duplicate identity {identity} in frame {frame}")
                seen.add(identity)
                rows.append((identity, box))
            normalized[frame] = tuple(rows)
        self._frames = normalized

    @property
    def frames(self) -> dict[int, tuple[tuple[int, BoundingBox], ...]]:
        return self._frames

    def box_count(self) -> int:
        return sum(len(rows) for rows in self._frames.values())

    def identities(self) -> set[int]:
        return {identity for rows in self._frames.values() for identity, _ in rows}

    def __eq__(self, other) -> bool:
        if not isinstance(other, SequenceAnnotations):
            return NotImplemented
        return self._frames == other._frames

    @classmethod
    def from_frame_outputs(cls, outputs) -> "SequenceAnnotations":
        """Build annotations from tracker ``FrameOutput`` records."""
        frames = {
            out.frame: [(tid, box) for tid, box, _conf in out.records]
            for out in outputs
            if out.records
        }
        return cls(frames)


@dataclass(frozen=True)
class MetricsReport:
    """The reported metric columns plus the raw CLEAR counts behind MOTA."""

    hota: float
    deta: float
    assa: float
    mota: float
    idf1: float
    tp: int
    fn: int
    fp: int
    idsw: int
    gt_total: int
    per_alpha: tuple[tuple[float, float, float, float], ...]  # (alpha, hota, deta, assa)


def _frame_union(gt: SequenceAnnotations, pred: SequenceAnnotations) -> list[int]:
    return sorted(set(gt.frames) | set(pred.frames))


def _boxes(rows: Sequence[tuple[int, BoundingBox]]) -> np.ndarray:
    return geometry.to_xyxy([box for _, box in rows])


def clear_mota(
    gt: SequenceAnnotations,
    pred: SequenceAnnotations,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
) -> tuple[float, int, int, int, int]:
    """CLEAR accuracy: MOTA = 1 - (FN + FP + IDSW) / total GT boxes.

    Boxes are matched per frame by maximum total IoU gated at the threshold.
    An identity switch is counted whenever a ground-truth identity's matched
    prediction differs from its last known match.
    """
    gt_total = gt.box_count()
    tp = fn = fp = idsw = 0
    last_match: dict[int, int] = {}
    for frame in _frame_union(gt, pred):
        g_rows = gt.frames.get(frame, ())
        p_rows = pred.frames.get(frame, ())
        if g_rows and p_rows:
            sim = geometry.iou_matrix(_boxes(g_rows), _boxes(p_rows))
            pairs = assignment.gated_match(sim, iou_threshold).pairs
        else:
            pairs = ()
        tp += len(pairs)
        fn += len(g_rows) - len(pairs)
        fp += len(p_rows) - len(pairs)
        for i, j in pairs:
            gid = g_rows[i][0]
            pid = p_rows[j][0]
            if gid in last_match and last_match[gid] != pid:
                idsw += 1
            last_match[gid] = pid
    if gt_total:
        mota = 1.0 - (fn + fp + idsw) / gt_total
    else:
        mota = 1.0 if (fp + idsw) == 0 else float("-inf")
    return mota, tp, fn, fp, idsw


def idf1(
    gt: SequenceAnnotations,
    pred: SequenceAnnotations,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
) -> float:
    """Identity F1 under the optimal global GT-to-prediction identity mapping."""
    gt_ids = sorted(gt.identities())
    pred_ids = sorted(pred.identities())
    gt_total = gt.box_count()
    pred_total = pred.box_count()
    if not gt_ids and not pred_ids:
        return 1.0
    if not gt_ids or not pred_ids:
        return 0.0
    g_index = {g: i for i, g in enumerate(gt_ids)}
    p_index = {p: j for j, p in enumerate(pred_ids)}
    overlap = np.zeros((len(gt_ids), len(pred_ids)), dtype=float)
    for frame in _frame_union(gt, pred):
        g_rows = gt.frames.get(frame, ())
        p_rows = pred.frames.get(frame, ())
        if not g_rows or not p_rows:
            continue
        sim = geometry.iou_matrix(_boxes(g_rows), _boxes(p_rows))
        hit_g, hit_p = np.nonzero(sim >= iou_threshold)
        for i, j in zip(hit_g.tolist(), hit_p.tolist()):
            overlap[g_index[g_rows[i][0]], p_index[p_rows[j][0]]] += 1.0
    idtp = int(sum(overlap[i, j] for i, j in assignment.solve(overlap)))
    idfn = gt_total - idtp
    idfp = pred_total - idtp
    denom = 2 * idtp + idfp + idfn
    return (2 * idtp / denom) if denom else 1.0


def hota(
    gt: SequenceAnnotations,
    pred: SequenceAnnotations,
    alphas: Sequence[float] = ALPHAS,
) -> tuple[float, float, float, tuple[tuple[float, float, float, float], ...]]:
    """HOTA and its DetA/AssA decomposition, averaged over the alpha grid.

    Per alpha, frames are matched by an assignment score that first maximizes
    the number of gate-passing pairs (IoU >= alpha) and then their total IoU.
    DetA_a = TP/(TP+FN+FP); AssA_a averages, over TP instances, the alignment
    TPA/(TPA+FNA+FPA) of each matched (gt id, pred id) pair across the whole
    sequence; HOTA_a = sqrt(DetA_a * AssA_a).
    """
    frames = _frame_union(gt, pred)
    per_frame: list[tuple[tuple[int, ...], tuple[int, ...], np.ndarray]] = []
    gt_presence: Counter[int] = Counter()
    pred_presence: Counter[int] = Counter()
    for frame in frames:
        g_rows = gt.frames.get(frame, ())
        p_rows = pred.frames.get(frame, ())
        for gid, _ in g_rows:
            gt_presence[gid] += 1
        for pid, _ in p_rows:
            pred_presence[pid] += 1
        if g_rows and p_rows:
            sim = geometry.iou_matrix(_boxes(g_rows), _boxes(p_rows))
            per_frame.append(
                (tuple(g for g, _ in g_rows), tuple(p for p, _ in p_rows), sim)
            )
    gt_total = gt.box_count()
    pred_total = pred.box_count()

    per_alpha = []
    for alpha in alphas:
        pair_counts: Counter[tuple[int, int]] = Counter()
        for gids, pids, sim in per_frame:
            passing = sim >= alpha
            if not passing.any():
                continue
            score = np.where(passing, 1.0 + sim, 0.0)
            for i, j in assignment.solve(score):
                if passing[i, j]:
                    pair_counts[(gids[i], pids[j])] += 1
        tp = sum(pair_counts.values())
        fn = gt_total - tp
        fp = pred_total - tp
        denom = tp + fn + fp
        if denom == 0:
            deta_a = 1.0
            assa_a = 1.0
        else:
            deta_a = tp / denom
            if tp == 0:
                assa_a = 0.0
            else:
                weighted = 0.0
                for (gid, pid), count in pair_counts.items():
                    alignment = count / (gt_presence[gid] + pred_presence[pid] - count)
                    weighted += count * alignment
                assa_a = weighted / tp
        per_alpha.append((alpha, math.sqrt(deta_a * assa_a), deta_a, assa_a))

    n = len(per_alpha)
    hota_score = sum(row[1] for row in per_alpha) / n
    deta_score = sum(row[2] for row in per_alpha) / n
    assa_score = sum(row[3] for row in per_alpha) / n
    return hota_score, deta_score, assa_score, tuple(per_alpha)


def evaluate(gt: SequenceAnnotations, pred: SequenceAnnotations) -> MetricsReport:
    """Compute all reported metrics for one sequence."""
    mota, tp, fn, fp, idsw = clear_mota(gt, pred)
    idf1_score = idf1(gt, pred)
    hota_score, deta_score, assa_score, per_alpha = hota(gt, pred)
    return MetricsReport(
        hota=hota_score,
        deta=deta_score,
        assa=assa_score,
        mota=mota,
        idf1=idf1_score,
        tp=tp,
        fn=fn,
        fp=fp,
        idsw=idsw,
        gt_total=gt.box_count(),
        per_alpha=per_alpha,
    )


def pool_sequences(
    pairs: Sequence[tuple[SequenceAnnotations, SequenceAnnotations]],
) -> tuple[SequenceAnnotations, SequenceAnnotations]:
    """Merge (gt, pred) sequence pairs onto disjoint frame and identity ranges.

    Evaluating the merged pair pools raw counts across sequences, which is the
    standard multi-sequence aggregation (not an average of per-sequence
    ratios).
    """
    merged_gt: dict[int, list[tuple[int, BoundingBox]]] = {}
    merged_pred: dict[int, list[tuple[int, BoundingBox]]] = {}
    frame_base = 0
    gt_id_base = 0
    pred_id_base = 0
    for gt, pred in pairs:
        all_frames = set(gt.frames) | set(pred.frames)
        if not all_frames:
            continue
        lo, hi = min(all_frames), max(all_frames)
        offset = frame_base + 1 - lo
        for frame, rows in gt.frames.items():
            merged_gt[frame + offset] = [(gt_id_base + i, box) for i, box in rows]
        for frame, rows in pred.frames.items():
            merged_pred[frame + offset] = [(pred_id_base + i, box) for i, box in rows]
        frame_base += hi - lo + 1
        gt_ids = gt.identities()
        pred_ids = pred.identities()
        gt_id_base += max(gt_ids) + 1 if gt_ids else 0
        pred_id_base += max(pred_ids) + 1 if pred_ids else 0
    return SequenceAnnotations(merged_gt), SequenceAnnotations(merged_pred)


def evaluate_many(
    pairs: Sequence[tuple[SequenceAnnotations, SequenceAnnotations]],
) -> MetricsReport:
    """Evaluate several sequences with pooled raw counts."""
    gt, pred = pool_sequences(pairs)
    return evaluate(gt, pred)
