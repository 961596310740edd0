"""
Image-text pairs

JSONL rows `{"image_path", "width", "height", "caption"}`; each becomes a
single-frame SourceSequence carrying `captions = {1: caption}`.
"""
import json
from pathlib import Path
from typing import List
from typing import Optional
from typing import Union

from ..models import FrameRef
from ..models import SourceSequence
from ._common import byte_offset
from ._common import IngestError
from ._common import IngestStats


def ingest_caption_pairs(
    path: Union[str, Path],
    *,
    dataset: str = "caption",
    stats: Optional[IngestStats] = None,
) -> List[SourceSequence]:
    path = Path(path)
    stats = stats if stats is not None else IngestStats()
    stats.path = str(path)

    text = path.read_bytes().decode("utf-8")
    sequences = []
    position = 0
    for lineno, line in enumerate(text.splitlines(keepends=True), start=1):
        start, position = position, position + len(line)
        if not line.strip():
            continue
        stats.attempted += 1
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
        caption = str(row.get("caption") or "").strip()
        if not caption:
            stats.drop("empty_caption")
            continue
        try:
            frame = FrameRef(
                index=1,
                source_frame_id=lineno,
                image_path=row["image_path"],
                width=row["width"],
                height=row["height"],
            )
        except (KeyError, ValueError) as e:
            raise IngestError(
                f"Invalid image metadata: {e}", path=path, line=lineno
            )
        sequences.append(
            SourceSequence(
                dataset=dataset,
                sequence_id=str(row.get("id", lineno)),
                frames=[frame],
                captions={1: caption},
            )
        )
        stats.emitted += 1

    stats.check()
    return sequences
