from typing import Dict
from typing import Iterable
from typing import List
from typing import Optional
from typing import Union

from pydantic import BaseModel
from pydantic import conint
from pydantic import Field
from pydantic import root_validator
from pydantic import validator

from .geometry import BoundingBox

__all__ = (
    "FrameRef",
    "Tracklet",
    "ClipSample",
    "SourceSequence",
    "ReferringRecord",
)


class FrameRef(BaseModel):
    """
    One frame of a clip or sequence

    Attributes
    ----------
    index: int
        1-based position within the clip (or sequence)
    source_frame_id: int
        frame number in the original source sequence
    image_path: str
        opaque locator of the image; never opened by the pipeline
    width, height: int
        image size in pixels
    """

    index: conint(ge=1)  # type: ignore
    source_frame_id: int
    image_path: str
    width: conint(gt=0)  # type: ignore
    height: conint(gt=0)  # type: ignore

    class Config:
        allow_mutation = False

    def reindexed(self, index: int) -> "FrameRef":
        return self.copy(update=dict(index=index))


class Tracklet(BaseModel):
    """
    One subject across the frames of a clip

    `boxes` maps frame indices to pixel boxes, in strictly increasing frame
    order.
    """

    id: conint(ge=1)  # type: ignore
    category: str
    appearance: Optional[str] = None
    action: Optional[str] = None
    boxes: Dict[int, BoundingBox]

    class Config:
        allow_mutation = False

    @validator("category")
    def category_not_empty(cls, value):
        if not value.strip():
            raise ValueError("Tracklet category must be nonempty")
        return value

    @validator("appearance", "action")
    def blank_to_none(cls, value):
        if value is not None and not value.strip():
            return None
        return value

    @validator("boxes")
    def boxes_ordered(cls, value):
        if not value:
            raise ValueError("Tracklet must have at least one box")
        frames = list(value.keys())
        if any(a >= b for a, b in zip(frames, frames[1:])):
            raise ValueError(
                f"Tracklet frame indices must be strictly increasing: {frames}"
            )
        if frames[0] < 1:
            raise ValueError("Tracklet frame indices are 1-based")
        return value

    @property
    def first_frame(self) -> int:
        return next(iter(self.boxes))

    def restricted(
        self, frame_map: Dict[int, int]
    ) -> Optional["Tracklet"]:
        """
        Keep only the boxes whose frame appears in `frame_map`, re-keyed to
        the mapped index; None when nothing survives
        """
        boxes = {
            frame_map[frame]: box
            for frame, box in self.boxes.items()
            if frame in frame_map
        }
        if not boxes:
            return None
        boxes = dict(sorted(boxes.items()))
        return self.copy(update=dict(boxes=boxes))


class _FramedBase(BaseModel):
    frames: List[FrameRef]
    tracklets: List[Tracklet] = Field(default_factory=list)

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def check_frames(cls, values):
        frames = values["frames"]
        if not frames:
            raise ValueError("At least one frame is required")
        indices = [frame.index for frame in frames]
        if indices != list(range(1, len(frames) + 1)):
            raise ValueError(
                f"Frame indices must be contiguous from 1, got {indices}"
            )
        ids = [t.id for t in values["tracklets"]]
        if len(set(ids)) != len(ids):
            raise ValueError(f"Tracklet ids must be unique, got {ids}")
        for tracklet in values["tracklets"]:
            last = next(reversed(tracklet.boxes))
            if last > len(frames):
                raise ValueError(
                    f"Tracklet {tracklet.id} has a box on frame {last}, "
                    f"beyond the {len(frames)} available frames"
                )
        return values

    def frame(self, index: int) -> FrameRef:
        return self.frames[index - 1]

    @property
    def categories(self) -> List[str]:
        """
        Distinct tracklet categories in first-appearance order
        """
        return list(dict.fromkeys(t.category for t in self.tracklets))


class ClipSample(_FramedBase):
    """
    A short window of frames drawn from a source sequence

    `gap` is the source-frame interval between consecutive frames; it is 0
    for single-frame clips.
    """

    source_dataset: str
    sequence_id: str = ""
    gap: conint(ge=0)  # type: ignore

    def with_tracklets(self, tracklets: Iterable[Tracklet]) -> "ClipSample":
        return self.copy(update=dict(tracklets=list(tracklets)))


class SourceSequence(_FramedBase):
    """
    A full annotated source sequence, or a single image

    `captions` maps frame indices to caption strings for image-text pairs.
    """

    dataset: str
    sequence_id: str
    captions: Optional[Dict[int, str]] = None

    @property
    def length(self) -> int:
        return len(self.frames)

    @property
    def box_count(self) -> int:
        return sum(len(t.boxes) for t in self.tracklets)


class ReferringRecord(BaseModel):
    """
    A referring expression and the region or trajectory it describes

    Attributes
    ----------
    frames: List[FrameRef]
        one frame for image referring, several for video referring
    expression: str
        the referring sentence (or the question, for reasoning rows)
    target: Tracklet or BoundingBox
        a bare box is only allowed for single-frame records
    task: str
        "referring" or "reasoning"
    rationale: str, optional
        answer text of reasoning rows; `{box}` marks where the target box goes
    """

    dataset: str
    record_id: str
    frames: List[FrameRef]
    expression: str
    target: Union[Tracklet, BoundingBox]
    task: str = "referring"
    rationale: Optional[str] = None

    class Config:
        allow_mutation = False

    @validator("expression")
    def expression_not_empty(cls, value):
        if not value.strip():
            raise ValueError("Referring expression must be nonempty")
        return value

    @validator("task")
    def known_task(cls, value):
        if value not in ("referring", "reasoning"):
            raise ValueError(f"Unknown referring task `{value}`")
        return value

    @root_validator(skip_on_failure=True)
    def check_target(cls, values):
        frames = values["frames"]
        if not frames:
            raise ValueError("Referring record needs at least one frame")
        target = values["target"]
        if isinstance(target, BoundingBox) and len(frames) != 1:
            raise ValueError("A bare box target needs exactly one frame")
        if isinstance(target, Tracklet):
            last = next(reversed(target.boxes))
            if last > len(frames):
                raise ValueError(
                    f"Target box on frame {last} beyond {len(frames)} frames"
                )
        if values["task"] == "reasoning" and not values.get("rationale"):
            raise ValueError("Reasoning rows need a rationale")
        return values

    @property
    def target_tracklet(self) -> Tracklet:
        if isinstance(self.target, Tracklet):
            return self.target
        return Tracklet(id=1, category="object", boxes={1: self.target})
