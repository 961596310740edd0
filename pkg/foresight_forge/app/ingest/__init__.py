"""
Adapters from external annotation formats to the canonical model
"""
from typing import List
from typing import Optional
from typing import Union

from ...config import SourceConfig
from ...config import SourceFormat
from ..models import ReferringRecord
from ..models import SourceSequence
from ._common import IngestError  # noqa: F401
from ._common import IngestStats  # noqa: F401
from .captions import ingest_caption_pairs
from .coco import ingest_coco_detection
from .mot import ingest_mot_challenge
from .mot import load_attributes
from .mot import load_seqinfo  # noqa: F401
from .referring import ingest_referring
from .sot import ingest_sot_sequence


def ingest_source(
    source: SourceConfig, stats: Optional[IngestStats] = None
) -> Union[List[SourceSequence], List[ReferringRecord]]:
    """
    Run the adapter matching `source.format`

    Sequence formats return a list of SourceSequence (a single element for
    MOT and SOT sources), the referring format a list of ReferringRecord.
    """
    stats = stats if stats is not None else IngestStats()
    if source.format == SourceFormat.COCO:
        return ingest_coco_detection(
            source.path, dataset=source.dataset, stats=stats
        )
    if source.format == SourceFormat.MOT:
        seqinfo = source.seqinfo or source.path.parent.parent / "seqinfo.ini"
        attributes = (
            load_attributes(source.attributes) if source.attributes else None
        )
        return [
            ingest_mot_challenge(
                source.path,
                seqinfo,
                dataset=source.dataset,
                attributes=attributes,
                stats=stats,
            )
        ]
    if source.format == SourceFormat.SOT:
        image_dir = source.image_dir
        if image_dir is None:
            image_dir = source.path.parent / "img"
            if not image_dir.is_dir():
                image_dir = source.path.parent
        return [
            ingest_sot_sequence(
                source.path,
                image_dir,
                dataset=source.dataset,
                category=source.category,
                width=source.width,
                height=source.height,
                stats=stats,
            )
        ]
    if source.format == SourceFormat.REFERRING:
        return ingest_referring(
            source.path, dataset=source.dataset, stats=stats
        )
    if source.format == SourceFormat.CAPTION:
        return ingest_caption_pairs(
            source.path, dataset=source.dataset, stats=stats
        )
    raise ValueError(f"Unknown source format {source.format}")
