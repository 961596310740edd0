import logging
from pathlib import Path
from typing import Dict
from typing import List
from typing import Sequence
from typing import Tuple
from typing import Union

from pydantic import ValidationError

from ..grammar import parse_response
from ..grammar import ParseMode
from ..models import BoundingBox
from ..models import denormalize_box
from ..schemas import PredictionRow
from ._common import EvaluationError
from ._common import read_jsonl
from .sot import SotGroundTruth
from .sot import SotPrediction

logger = logging.getLogger(__name__)


def _response_boxes(
    row: PredictionRow, length: int, mode: ParseMode
) -> Tuple[Dict[int, BoundingBox], List[str]]:
    parsed = parse_response(row.response, mode=mode)
    notes = [f"{row.sequence_id}: {d}" for d in parsed.diagnostics]
    if mode == ParseMode.STRICT and not parsed.ok:
        return {}, notes
    if not parsed.tracklets:
        notes.append(f"{row.sequence_id}: no trajectory in response")
        return {}, notes
    target = parsed.tracklets[0]
    if len(parsed.tracklets) > 1:
        notes.append(
            f"{row.sequence_id}: {len(parsed.tracklets)} trajectories in "
            f"response, scoring <Id{target.id}>"
        )
    boxes = {}
    for frame, norm_box in target.boxes.items():
        if frame > length:
            notes.append(
                f"{row.sequence_id}: frame {frame} beyond the {length} "
                "frames of the sequence, ignored"
            )
            continue
        boxes[frame] = denormalize_box(norm_box, row.width, row.height)
    return boxes, notes


def score_response_file(
    path: Union[str, Path],
    gts: Sequence[SotGroundTruth],
    mode: ParseMode = ParseMode.LENIENT,
) -> Tuple[List[SotPrediction], List[str]]:
    """
    Turn a JSONL file of model responses into tracking predictions

    Each row is a `PredictionRow`. Responses are parsed with
    `parse_response`; the first trajectory is denormalized against the
    recorded image size. A response yielding no trajectory becomes an
    empty prediction, with its problems listed in the returned
    diagnostics. Malformed rows and unknown sequence ids are hard errors.
    """
    lengths = {gt.sequence_id: gt.length for gt in gts}
    predictions: List[SotPrediction] = []
    diagnostics: List[str] = []
    for lineno, raw in read_jsonl(path):
        try:
            row = PredictionRow(**raw)
        except ValidationError as e:
            raise EvaluationError(
                f"{path}:{lineno}: not a prediction row\n{e}"
            )
        if row.sequence_id not in lengths:
            raise EvaluationError(
                f"{path}:{lineno}: sequence {row.sequence_id} is not in the "
                "ground truth"
            )
        boxes, notes = _response_boxes(
            row, lengths[row.sequence_id], mode
        )
        if notes:
            logger.debug("\n".join(notes))
        diagnostics.extend(notes)
        predictions.append(
            SotPrediction(sequence_id=row.sequence_id, boxes=boxes)
        )
    if diagnostics:
        logger.warning(
            f"{path}: {len(diagnostics)} diagnostics over "
            f"{len(predictions)} responses"
        )
    return predictions, diagnostics
