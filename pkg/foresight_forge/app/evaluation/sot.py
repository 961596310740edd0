"""
Single-object tracking metrics

Per-frame IoU and center errors are computed with numpy over the frames on
which the target is annotated; every metric is first averaged within a
sequence and then over sequences. A frame without prediction scores IoU 0
and an infinite center error.
"""
import logging
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence

import numpy as np
from pydantic import BaseModel
from pydantic import conint
from pydantic import validator

from ..models import BoundingBox
from ..models import MetricReport
from ..models import SourceSequence
from ._common import EvaluationError

logger = logging.getLogger(__name__)

__all__ = (
    "SotPrediction",
    "SotGroundTruth",
    "eval_sot",
    "SUCCESS_THRESHOLDS",
    "NORM_PRECISION_THRESHOLDS",
    "PRECISION_THRESHOLD",
)

SR_THRESHOLDS = (0.5, 0.75)
SUCCESS_THRESHOLDS = np.linspace(0, 1, 51)
NORM_PRECISION_THRESHOLDS = np.arange(51) * 0.01
# pixels
PRECISION_THRESHOLD = 20.0


class SotPrediction(BaseModel):
    """
    Predicted pixel boxes of the target, keyed by 1-based frame index
    """

    sequence_id: str
    boxes: Dict[int, BoundingBox]

    class Config:
        allow_mutation = False

    @validator("boxes")
    def frames_positive(cls, value):
        if any(frame < 1 for frame in value):
            raise ValueError("Prediction frame indices are 1-based")
        return value


class SotGroundTruth(BaseModel):
    """
    Annotated target of one sequence

    Attributes
    ----------
    sequence_id: str
    length: int
        number of frames of the sequence
    boxes: Dict[int, BoundingBox]
        target boxes; frames without a box are not evaluated
    category: str
    """

    sequence_id: str
    length: conint(ge=1)  # type: ignore
    boxes: Dict[int, BoundingBox]
    category: str = "object"

    class Config:
        allow_mutation = False

    @validator("boxes")
    def boxes_in_range(cls, value, values):
        length = values.get("length")
        if length is not None and any(
            not 1 <= frame <= length for frame in value
        ):
            raise ValueError(f"Ground-truth frames must lie in 1..{length}")
        return value

    @classmethod
    def from_sequence(cls, seq: SourceSequence) -> "SotGroundTruth":
        if len(seq.tracklets) != 1:
            raise EvaluationError(
                f"Sequence {seq.sequence_id} has {len(seq.tracklets)} "
                "tracklets, single-object evaluation needs exactly one"
            )
        target = seq.tracklets[0]
        return cls(
            sequence_id=seq.sequence_id,
            length=seq.length,
            boxes=target.boxes,
            category=target.category,
        )


def _box_array(
    boxes: Dict[int, BoundingBox], frames: Sequence[int]
) -> np.ndarray:
    array = np.full((len(frames), 4), np.nan)
    for row, frame in enumerate(frames):
        box = boxes.get(frame)
        if box is not None:
            array[row] = box.as_list()
    return array


def _overlaps(gt: np.ndarray, pred: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        lo = np.maximum(gt[:, :2], pred[:, :2])
        hi = np.minimum(gt[:, 2:], pred[:, 2:])
        iw, ih = (hi - lo).T
        inter = np.where((iw > 0) & (ih > 0), iw * ih, 0.0)
        area_gt = (gt[:, 2] - gt[:, 0]) * (gt[:, 3] - gt[:, 1])
        area_pred = (pred[:, 2] - pred[:, 0]) * (pred[:, 3] - pred[:, 1])
        ious = inter / (area_gt + area_pred - inter)
    missing = np.isnan(pred).any(axis=1)
    return np.where(missing, 0.0, ious)


def _center_errors(gt: np.ndarray, pred: np.ndarray, normalized: bool):
    delta = (pred[:, :2] + pred[:, 2:]) / 2 - (gt[:, :2] + gt[:, 2:]) / 2
    if normalized:
        with np.errstate(divide="ignore", invalid="ignore"):
            delta = delta / (gt[:, 2:] - gt[:, :2])
    errors = np.hypot(delta[:, 0], delta[:, 1])
    return np.where(np.isnan(errors), np.inf, errors)


def _sequence_metrics(
    gt: SotGroundTruth, pred: Optional[SotPrediction]
) -> Dict[str, float]:
    frames = [f for f, box in gt.boxes.items() if not box.degenerate]
    if not frames:
        raise EvaluationError(
            f"Sequence {gt.sequence_id} has no annotated target box"
        )
    gt_boxes = _box_array(gt.boxes, frames)
    pred_boxes = _box_array(pred.boxes if pred else {}, frames)

    ious = _overlaps(gt_boxes, pred_boxes)
    errors = _center_errors(gt_boxes, pred_boxes, normalized=False)
    norm_errors = _center_errors(gt_boxes, pred_boxes, normalized=True)

    metrics = {"AO": float(np.mean(ious))}
    for tau in SR_THRESHOLDS:
        metrics[f"SR@{tau}"] = float(np.mean(ious > tau))
    metrics["Success"] = float(
        np.mean([np.mean(ious > tau) for tau in SUCCESS_THRESHOLDS])
    )
    metrics["P"] = float(np.mean(errors <= PRECISION_THRESHOLD))
    metrics["P_norm"] = float(
        np.mean([np.mean(norm_errors <= t) for t in NORM_PRECISION_THRESHOLDS])
    )
    metrics["_frames"] = len(frames)
    metrics["_missing"] = int(np.isnan(pred_boxes).any(axis=1).sum())
    return metrics


def eval_sot(
    preds: Sequence[SotPrediction], gts: Sequence[SotGroundTruth]
) -> MetricReport:
    """
    Score tracking predictions against single-target ground truth

    Reports AO, SR@0.5, SR@0.75, Success (mean success rate over 51 IoU
    thresholds in [0, 1], with IoU > threshold), P (center error of at
    most 20 px) and P_norm (mean precision over 51 thresholds in [0, 0.5]
    of the center error normalized by the ground-truth width and height).
    `per_category` holds the AO of every sequence.
    """
    if not gts:
        raise EvaluationError("Empty ground truth")
    truth: Dict[str, SotGroundTruth] = {}
    for gt in gts:
        if gt.sequence_id in truth:
            raise EvaluationError(
                f"Duplicate ground-truth sequence {gt.sequence_id}"
            )
        truth[gt.sequence_id] = gt

    by_sequence: Dict[str, SotPrediction] = {}
    for pred in preds:
        gt = truth.get(pred.sequence_id)
        if gt is None:
            raise EvaluationError(
                f"Prediction for unknown sequence {pred.sequence_id}"
            )
        if pred.sequence_id in by_sequence:
            raise EvaluationError(
                f"Duplicate prediction for sequence {pred.sequence_id}"
            )
        beyond = [f for f in pred.boxes if f > gt.length]
        if beyond:
            raise EvaluationError(
                f"Prediction for {pred.sequence_id} has frames {beyond} "
                f"beyond the {gt.length} frames of the sequence"
            )
        by_sequence[pred.sequence_id] = pred

    missing = [sid for sid in truth if sid not in by_sequence]
    if missing:
        raise EvaluationError(f"No prediction entry for sequences {missing}")

    per_sequence: List[Dict[str, float]] = [
        _sequence_metrics(gt, by_sequence[sid]) for sid, gt in truth.items()
    ]
    names = [name for name in per_sequence[0] if not name.startswith("_")]
    metrics = {
        name: float(np.mean([m[name] for m in per_sequence]))
        for name in names
    }
    frames = sum(int(m["_frames"]) for m in per_sequence)
    missing_frames = sum(int(m["_missing"]) for m in per_sequence)
    warnings = []
    if missing_frames:
        warnings.append(
            f"{missing_frames} of {frames} annotated frames have no "
            "prediction and score IoU 0"
        )
        logger.warning(warnings[-1])
    return MetricReport(
        metrics=metrics,
        per_category={
            sid: m["AO"] for sid, m in zip(truth, per_sequence)
        },
        counts=dict(
            sequences=len(truth),
            frames=frames,
            missing_frames=missing_frames,
        ),
        warnings=warnings,
    )
