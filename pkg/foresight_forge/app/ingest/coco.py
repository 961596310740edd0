"""
COCO-style detection annotations

One single-frame SourceSequence per image; every annotation becomes a
one-box Tracklet. Boxes are stored as `[x, y, w, h]` in the document and
converted to corners here.
"""
import json
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict
from typing import List
from typing import Optional
from typing import Union

from ..models import FrameRef
from ..models import SourceSequence
from ..models import Tracklet
from ._common import byte_offset
from ._common import checked_category
from ._common import clip_box
from ._common import IngestError
from ._common import IngestStats

logger = logging.getLogger(__name__)


def ingest_coco_detection(
    path: Union[str, Path],
    *,
    dataset: str = "coco",
    stats: Optional[IngestStats] = None,
) -> List[SourceSequence]:
    path = Path(path)
    stats = stats if stats is not None else IngestStats()
    stats.path = str(path)

    text = path.read_bytes().decode("utf-8")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise IngestError(
            f"Malformed JSON document ({e.msg})",
            path=path,
            line=e.lineno,
            offset=byte_offset(text, e.pos),
        )
    if not isinstance(document, dict) or not all(
        isinstance(document.get(key), list)
        for key in ("images", "annotations", "categories")
    ):
        raise IngestError(
            "Expected `images`, `annotations` and `categories` arrays",
            path=path,
            offset=0,
        )

    try:
        categories: Dict[int, str] = {
            int(cat["id"]): str(cat["name"]) for cat in document["categories"]
        }
        images = {int(img["id"]): img for img in document["images"]}
        annotations = sorted(
            document["annotations"], key=lambda ann: int(ann.get("id", 0))
        )
    except (AttributeError, KeyError, TypeError, ValueError) as e:
        raise IngestError(f"Malformed document entry: {e}", path=path)
    for name in categories.values():
        checked_category(name, path=path)

    per_image = defaultdict(list)
    for ann in annotations:
        stats.attempted += 1
        try:
            image_id = int(ann["image_id"])
            category_id = int(ann["category_id"])
        except (KeyError, TypeError, ValueError) as e:
            raise IngestError(
                f"Annotation {ann.get('id')} has a missing or invalid "
                f"image or category id ({e!r})",
                path=path,
            )
        if image_id not in images:
            raise IngestError(
                f"Annotation {ann.get('id')} references unknown image "
                f"{image_id}",
                path=path,
            )
        if category_id not in categories:
            raise IngestError(
                f"Annotation {ann.get('id')} references unknown category "
                f"{category_id}",
                path=path,
            )
        per_image[image_id].append(ann)

    sequences = []
    for image_id in sorted(images):
        image = images[image_id]
        width, height = image.get("width"), image.get("height")
        if not width or not height:
            stats.drop("missing_dims", len(per_image[image_id]))
            logger.warning(
                f"{path}: image {image_id} has no dimensions, skipped"
            )
            continue

        tracklets = []
        for ann in per_image[image_id]:
            if ann.get("iscrowd", 0):
                stats.drop("crowd")
                continue
            try:
                x, y, w, h = (float(v) for v in ann["bbox"])
            except (KeyError, TypeError, ValueError):
                raise IngestError(
                    f"Annotation {ann.get('id')} has a malformed bbox",
                    path=path,
                )
            box = clip_box(x, y, x + w, y + h, width, height)
            if box is None:
                stats.drop("degenerate")
                continue
            tracklets.append(
                Tracklet(
                    id=len(tracklets) + 1,
                    category=categories[int(ann["category_id"])],
                    boxes={1: box},
                )
            )
            stats.emitted += 1

        sequences.append(
            SourceSequence(
                dataset=dataset,
                sequence_id=str(image_id),
                frames=[
                    FrameRef(
                        index=1,
                        source_frame_id=image_id,
                        image_path=str(image.get("file_name", image_id)),
                        width=width,
                        height=height,
                    )
                ],
                tracklets=tracklets,
            )
        )

    stats.check()
    return sequences
