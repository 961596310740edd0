"""
Answer-side serialization

    det_answer   cat1:[x,y,x,y],[x,y,x,y];cat2:[x,y,x,y]
    traj_answer  [category]<Id1>Frame 1:[x,y,x,y];Frame 2:[x,y,x,y]</Id1>...
    markers      Frame 1:<image> Frame 2:<image>
"""
from collections import OrderedDict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

from ..models import ClipSample
from ..models import FrameRef
from ..models import normalize_box
from ..models import NormBox
from ..models import Tracklet
from .types import GrammarError
from .types import TrajectoryText

IMAGE_TOKEN = "<image>"

RESERVED_CHARACTERS = frozenset(";:,[]<>\n")


def check_category(category: str) -> str:
    if not category or not category.strip():
        raise GrammarError("Category must be a nonempty string")
    if category != category.strip():
        raise GrammarError(f"Category {category!r} has surrounding blanks")
    clash = RESERVED_CHARACTERS.intersection(category)
    if clash:
        raise GrammarError(
            f"Category {category!r} contains reserved characters "
            f"{sorted(clash)}"
        )
    return category


def serialize_detection(objects: Sequence[Tuple[str, NormBox]]) -> str:
    if not objects:
        raise GrammarError("Cannot serialize an empty detection answer")
    groups: "OrderedDict[str, List[NormBox]]" = OrderedDict()
    for category, box in objects:
        groups.setdefault(check_category(category), []).append(box)
    return ";".join(
        category
        + ":"
        + ",".join(
            box.literal()
            for box in sorted(boxes, key=lambda b: (b.ymin, b.xmin))
        )
        for category, boxes in groups.items()
    )


def frame_entry(index: int, box: NormBox) -> str:
    return f"Frame {index}:{box.literal()}"


def encode_trajectory(
    tracklets: Sequence[Tracklet],
    frames: Sequence[FrameRef],
    category: Optional[str] = None,
) -> TrajectoryText:
    """
    Serialize tracklets as consecutive `<Idi>...</Idi>` blocks

    Ids are renumbered `1..n` by first appearance (input order breaks ties);
    each block lists only the frames where its subject has a box, boxes
    being normalized against the dimensions of their own frame.
    """
    if not tracklets:
        raise GrammarError("Cannot serialize an empty trajectory answer")
    order = sorted(
        range(len(tracklets)), key=lambda i: (tracklets[i].first_frame, i)
    )
    id_map = {}
    blocks = []
    for new_id, position in enumerate(order, start=1):
        tracklet = tracklets[position]
        id_map[tracklet.id] = new_id
        entries = []
        for index, box in tracklet.boxes.items():
            if not 1 <= index <= len(frames):
                raise GrammarError(
                    f"Tracklet {tracklet.id} has a box on frame {index}, "
                    f"outside the {len(frames)} clip frames"
                )
            frame = frames[index - 1]
            entries.append(
                frame_entry(
                    index, normalize_box(box, frame.width, frame.height)
                )
            )
        blocks.append(f"<Id{new_id}>" + ";".join(entries) + f"</Id{new_id}>")

    prefix = check_category(category) if category is not None else ""
    return TrajectoryText(
        text=prefix + "".join(blocks),
        frame_count=len(frames),
        ids=list(range(1, len(tracklets) + 1)),
        id_map=id_map,
    )


def serialize_trajectory(
    tracklets: Sequence[Tracklet],
    frames: Sequence[FrameRef],
    category: Optional[str] = None,
) -> str:
    return encode_trajectory(tracklets, frames, category).text


def render_frame_markers(clip: Union[ClipSample, Sequence[FrameRef]]) -> str:
    frames = clip.frames if isinstance(clip, ClipSample) else list(clip)
    if not frames:
        raise GrammarError("Cannot render markers for an empty clip")
    return " ".join(
        f"Frame {position}:{IMAGE_TOKEN}"
        for position in range(1, len(frames) + 1)
    )
