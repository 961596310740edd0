"""
Pre-converted referring / reasoning JSONL

One object per line:

    {"id": "...", "expression": "...", "width": 640, "height": 480,
     "image_path": "a.jpg" | "image_paths": ["f1.jpg", ...],
     "box": [xmin, ymin, xmax, ymax] | "boxes": {"1": [...], "3": [...]},
     "category": "...", "task": "referring" | "reasoning", "rationale": "..."}

Boxes are pixel corners; `boxes` keys are 1-based frame indices. The
accounting unit is the box: a row without any box counts as one unit.
"""
import json
import logging
from pathlib import Path
from typing import List
from typing import Optional
from typing import Union

from ..models import BoundingBox
from ..models import FrameRef
from ..models import ReferringRecord
from ..models import Tracklet
from ._common import byte_offset
from ._common import checked_category
from ._common import clip_box
from ._common import IngestError
from ._common import IngestStats

logger = logging.getLogger(__name__)


def _frames(row: dict, path: Path, lineno: int) -> List[FrameRef]:
    try:
        width, height = int(row["width"]), int(row["height"])
    except (KeyError, TypeError, ValueError):
        raise IngestError(
            "Missing or invalid `width`/`height`", path=path, line=lineno
        )
    paths = row.get("image_paths") or [row.get("image_path")]
    if not all(isinstance(p, str) and p for p in paths):
        raise IngestError("Missing image path", path=path, line=lineno)
    return [
        FrameRef(
            index=index,
            source_frame_id=index,
            image_path=image_path,
            width=width,
            height=height,
        )
        for index, image_path in enumerate(paths, start=1)
    ]


def ingest_referring(
    path: Union[str, Path],
    *,
    dataset: str = "referring",
    stats: Optional[IngestStats] = None,
) -> List[ReferringRecord]:
    path = Path(path)
    stats = stats if stats is not None else IngestStats()
    stats.path = str(path)

    text = path.read_bytes().decode("utf-8")
    records = []
    position = 0
    for lineno, line in enumerate(text.splitlines(keepends=True), start=1):
        start, position = position, position + len(line)
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as e:
            raise IngestError(
                f"Malformed JSON line ({e.msg})",
                path=path,
                line=lineno,
                offset=byte_offset(text, start + e.pos),
            )

        if not isinstance(row, dict):
            raise IngestError(
                "Expected a JSON object per line", path=path, line=lineno
            )
        raw_boxes = row.get("boxes")
        if raw_boxes is None and row.get("box") is not None:
            raw_boxes = {"1": row["box"]}
        if raw_boxes is not None and not isinstance(raw_boxes, dict):
            raise IngestError(
                "Malformed `boxes` entry", path=path, line=lineno
            )
        units = len(raw_boxes) if raw_boxes else 1
        stats.attempted += units
        expression = str(row.get("expression") or "").strip()
        if not expression:
            stats.drop("empty_expression", units)
            continue
        if not raw_boxes:
            stats.drop("missing_target")
            continue

        frames = _frames(row, path, lineno)
        category = checked_category(
            str(row.get("category") or "object"), path=path, line=lineno
        )
        boxes = {}
        degenerate = 0
        try:
            for key, coords in sorted(
                raw_boxes.items(), key=lambda kv: int(kv[0])
            ):
                index = int(key)
                if not 1 <= index <= len(frames):
                    raise IngestError(
                        f"Box on frame {index} outside {len(frames)} frames",
                        path=path,
                        line=lineno,
                    )
                xmin, ymin, xmax, ymax = (float(v) for v in coords)
                box = clip_box(
                    xmin, ymin, xmax, ymax, frames[0].width, frames[0].height
                )
                if box is None:
                    degenerate += 1
                else:
                    boxes[index] = box
        except IngestError:
            raise
        except (AttributeError, TypeError, ValueError):
            raise IngestError(
                "Malformed `boxes` entry", path=path, line=lineno
            )
        if degenerate:
            stats.drop("degenerate", degenerate)
        if not boxes:
            continue

        target: Union[Tracklet, BoundingBox]
        if len(frames) == 1:
            target = boxes[1]
        else:
            target = Tracklet(
                id=1,
                category=category,
                boxes=boxes,
            )
        task = row.get("task", "referring")
        try:
            records.append(
                ReferringRecord(
                    dataset=dataset,
                    record_id=str(row.get("id", f"{dataset}-{lineno}")),
                    frames=frames,
                    expression=expression,
                    target=target,
                    task=task,
                    rationale=row.get("rationale"),
                )
            )
        except ValueError as e:
            raise IngestError(str(e), path=path, line=lineno)
        stats.emitted += len(boxes)

    stats.check()
    return records
