"""
Single-object tracking sequences (LaSOT / GOT-10k layout)

`groundtruth.txt` holds one `x,y,w,h` row per frame (commas, tabs or blanks
as separators); zero-area rows mark frames where the target is absent or
fully occluded.
"""
import logging
import math
import re
from pathlib import Path
from typing import Optional
from typing import Union

from PIL import Image

from ..models import FrameRef
from ..models import SourceSequence
from ..models import Tracklet
from ._common import checked_category
from ._common import clip_box
from ._common import IngestError
from ._common import IngestStats

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".jpg", ".jpeg", ".png", ".bmp")

_SEPARATORS = re.compile(r"[,\s]+")
_NUMBERED_DIR = re.compile(r"^(?P<category>.+?)-\d+$")


def category_from_dirname(name: str) -> Optional[str]:
    """
    `airplane-13` -> `airplane`
    """
    match = _NUMBERED_DIR.match(name)
    if match is None:
        return None
    return match.group("category").replace("_", " ")


def ingest_sot_sequence(
    groundtruth_path: Union[str, Path],
    image_dir: Union[str, Path],
    *,
    dataset: str = "sot",
    category: Optional[str] = None,
    width: Optional[int] = None,
    height: Optional[int] = None,
    stats: Optional[IngestStats] = None,
) -> SourceSequence:
    groundtruth_path = Path(groundtruth_path)
    image_dir = Path(image_dir)
    stats = stats if stats is not None else IngestStats()
    stats.path = str(groundtruth_path)

    if not image_dir.is_dir():
        raise IngestError("Image directory not found", path=image_dir)
    images = sorted(
        p for p in image_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )
    lines = [
        line
        for line in groundtruth_path.read_text().splitlines()
        if line.strip()
    ]
    if len(lines) != len(images):
        raise IngestError(
            f"{len(lines)} ground-truth rows for {len(images)} frames in "
            f"{image_dir}",
            path=groundtruth_path,
        )
    if not images:
        raise IngestError("Empty sequence", path=groundtruth_path)

    if width is None or height is None:
        with Image.open(images[0]) as first:
            width, height = first.size

    sequence_dir = groundtruth_path.parent
    if category is None:
        category = category_from_dirname(sequence_dir.name) or "object"
    checked_category(category, path=groundtruth_path)
    appearance = None
    nlp_path = sequence_dir / "nlp.txt"
    if nlp_path.exists():
        appearance = nlp_path.read_text().strip() or None

    boxes = {}
    for lineno, line in enumerate(lines, start=1):
        stats.attempted += 1
        fields = _SEPARATORS.split(line.strip())
        if len(fields) != 4:
            raise IngestError(
                f"Expected 4 fields, got {len(fields)}",
                path=groundtruth_path,
                line=lineno,
            )
        try:
            x, y, w, h = (float(v) for v in fields)
        except ValueError:
            raise IngestError(
                f"Non-numeric field in {line!r}",
                path=groundtruth_path,
                line=lineno,
            )
        if any(math.isnan(v) for v in (x, y, w, h)) or w == 0 or h == 0:
            stats.drop("absent")
            continue
        if w < 0 or h < 0:
            raise IngestError(
                f"Negative box size {w}x{h}",
                path=groundtruth_path,
                line=lineno,
            )
        box = clip_box(x, y, x + w, y + h, width, height)
        if box is None:
            stats.drop("degenerate")
            continue
        boxes[lineno] = box
        stats.emitted += 1

    tracklets = []
    if boxes:
        tracklets.append(
            Tracklet(
                id=1, category=category, appearance=appearance, boxes=boxes
            )
        )
    else:
        logger.warning(f"{groundtruth_path}: target absent from every frame")

    stats.check()
    return SourceSequence(
        dataset=dataset,
        sequence_id=sequence_dir.name,
        frames=[
            FrameRef(
                index=index,
                source_frame_id=index,
                image_path=f"{sequence_dir.name}/{image.name}",
                width=width,
                height=height,
            )
            for index, image in enumerate(images, start=1)
        ],
        tracklets=tracklets,
    )
