"""
MOTChallenge ground truth

`gt.txt` rows are `frame,id,x,y,w,h,flag,class,visibility`; the sequence
size comes from the `seqinfo.ini` sidecar (`imWidth`, `imHeight`,
`seqLength`). Rows with consider-flag 0 are dropped.
"""
import json
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict
from typing import Optional
from typing import Union

from pydantic import BaseModel
from pydantic import conint

from ..models import FrameRef
from ..models import SourceSequence
from ..models import Tracklet
from ._common import checked_category
from ._common import clip_box
from ._common import IngestError
from ._common import IngestStats

logger = logging.getLogger(__name__)

MOT_CLASSES = {
    1: "pedestrian",
    2: "person on vehicle",
    3: "car",
    4: "bicycle",
    5: "motorbike",
    6: "non motorized vehicle",
    7: "static person",
    8: "distractor",
    9: "occluder",
    10: "occluder on the ground",
    11: "occluder full",
    12: "reflection",
    13: "crowd",
}


class SeqInfo(BaseModel):
    name: str = ""
    width: conint(gt=0)  # type: ignore
    height: conint(gt=0)  # type: ignore
    length: conint(ge=1)  # type: ignore
    image_dir: str = "img1"
    image_ext: str = ".jpg"


def load_seqinfo(path: Union[str, Path]) -> SeqInfo:
    """
    Parse a `key=value` seqinfo sidecar
    """
    path = Path(path)
    entries: Dict[str, str] = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith(("[", "#", ";")) or "=" not in line:
            continue
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    try:
        return SeqInfo(
            name=entries.get("name", path.parent.name),
            width=entries["imWidth"],
            height=entries["imHeight"],
            length=entries["seqLength"],
            image_dir=entries.get("imDir", "img1"),
            image_ext=entries.get("imExt", ".jpg"),
        )
    except KeyError as e:
        raise IngestError(f"Missing seqinfo key {e}", path=path)


class TrackAttributes(BaseModel):
    category: Optional[str] = None
    appearance: Optional[str] = None
    action: Optional[str] = None


def load_attributes(path: Union[str, Path]) -> Dict[int, TrackAttributes]:
    """
    Load the optional `{track id: {appearance, action, category}}` sidecar
    """
    path = Path(path)
    try:
        attributes = {
            int(key): TrackAttributes(**value)
            for key, value in json.loads(path.read_text()).items()
        }
    except (AttributeError, TypeError, ValueError) as e:
        raise IngestError(f"Malformed attributes: {e}", path=path)
    for attrs in attributes.values():
        if attrs.category is not None:
            checked_category(attrs.category, path=path)
    return attributes


def ingest_mot_challenge(
    gt_path: Union[str, Path],
    seqinfo: Union[SeqInfo, str, Path],
    *,
    dataset: str = "mot",
    attributes: Optional[Dict[int, TrackAttributes]] = None,
    stats: Optional[IngestStats] = None,
) -> SourceSequence:
    gt_path = Path(gt_path)
    if not isinstance(seqinfo, SeqInfo):
        seqinfo = load_seqinfo(seqinfo)
    attributes = attributes or {}
    stats = stats if stats is not None else IngestStats()
    stats.path = str(gt_path)

    rows = []
    for lineno, line in enumerate(gt_path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) < 6:
            raise IngestError(
                f"Expected at least 6 fields, got {len(fields)}",
                path=gt_path,
                line=lineno,
            )
        try:
            frame, track_id = int(fields[0]), int(float(fields[1]))
            x, y, w, h = (float(v) for v in fields[2:6])
            flag = int(float(fields[6])) if len(fields) > 6 else 1
            cls_id = int(float(fields[7])) if len(fields) > 7 else 1
        except ValueError:
            raise IngestError(
                f"Non-numeric field in {line!r}", path=gt_path, line=lineno
            )
        rows.append((lineno, frame, track_id, x, y, w, h, flag, cls_id))

    first = min((row[1] for row in rows), default=1)
    offset = min(first, 1)
    seen = set()
    boxes = defaultdict(dict)
    classes: Dict[int, int] = {}
    for lineno, frame, track_id, x, y, w, h, flag, cls_id in rows:
        stats.attempted += 1
        if (frame, track_id) in seen:
            raise IngestError(
                f"Duplicate row for frame {frame}, id {track_id}",
                path=gt_path,
                line=lineno,
            )
        seen.add((frame, track_id))
        index = frame - offset + 1
        if not 1 <= index <= seqinfo.length:
            raise IngestError(
                f"Frame {frame} outside sequence of length {seqinfo.length}",
                path=gt_path,
                line=lineno,
            )
        if track_id < 1:
            raise IngestError(
                f"Track id must be positive, got {track_id}",
                path=gt_path,
                line=lineno,
            )
        if flag == 0:
            stats.drop("ignored")
            continue
        if w < 0 or h < 0:
            raise IngestError(
                f"Negative box size {w}x{h}", path=gt_path, line=lineno
            )
        box = clip_box(x, y, x + w, y + h, seqinfo.width, seqinfo.height)
        if box is None:
            stats.drop("degenerate")
            continue
        boxes[track_id][index] = box
        classes.setdefault(track_id, cls_id)
        stats.emitted += 1

    tracklets = []
    for track_id in sorted(boxes):
        attrs = attributes.get(track_id, TrackAttributes())
        category = attrs.category or MOT_CLASSES.get(
            classes[track_id], f"class {classes[track_id]}"
        )
        checked_category(category, path=gt_path)
        tracklets.append(
            Tracklet(
                id=track_id,
                category=category,
                appearance=attrs.appearance,
                action=attrs.action,
                boxes=dict(sorted(boxes[track_id].items())),
            )
        )

    prefix = f"{seqinfo.name}/" if seqinfo.name else ""
    frames = [
        FrameRef(
            index=index,
            source_frame_id=index + offset - 1,
            image_path=(
                f"{prefix}{seqinfo.image_dir}/{index + offset - 1:06d}"
                f"{seqinfo.image_ext}"
            ),
            width=seqinfo.width,
            height=seqinfo.height,
        )
        for index in range(1, seqinfo.length + 1)
    ]

    stats.check()
    return SourceSequence(
        dataset=dataset,
        sequence_id=seqinfo.name or gt_path.parent.parent.name,
        frames=frames,
        tracklets=tracklets,
    )
