from enum import Enum
from typing import List
from typing import Optional

from pydantic import BaseModel
from pydantic import root_validator
from pydantic import validator

from .clip import FrameRef
from .geometry import NormBox

__all__ = (
    "TaskType",
    "ObservationKind",
    "Observation",
    "ConversationRecord",
)


class TaskType(str, Enum):
    CAPTION = "caption"
    DETECTION = "detection"
    TRACKING = "tracking"
    REFERRING = "referring"
    REASONING = "reasoning"
    FIT = "fit"


class ObservationKind(str, Enum):
    LOCATION = "location"
    APPEARANCE = "appearance"
    ACTION = "action"


class Observation(BaseModel):
    """
    First-frame observation used to query a subject

    For `location` observations `text` is a normalized box literal, otherwise
    it is free text.
    """

    kind: ObservationKind
    text: str
    subject_id: int

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def check_text(cls, values):
        if values["kind"] == ObservationKind.LOCATION:
            NormBox.from_literal(values["text"])
        elif not values["text"].strip():
            raise ValueError(f"Empty {values['kind'].value} observation")
        return values

    @property
    def box(self) -> Optional[NormBox]:
        if self.kind == ObservationKind.LOCATION:
            return NormBox.from_literal(self.text)
        return None


class ConversationRecord(BaseModel):
    """
    One question/answer pair over a list of frames

    Attributes
    ----------
    task: TaskType
    frames: List[FrameRef]
    question, answer: str
    observation: Observation, optional
        the first-frame query, for tracking and FIT records
    future_text: str, optional
        reasoning appended after the trajectory in FIT answers
    is_negative: bool
        the query names something absent and the answer is the refusal
        template of the record's task template
    seed_trace: int
        seed of the generator used for this record
    source: str
        dataset tag and sequence id the record was built from
    template: str
        name of the task template used for the question
    """

    task: TaskType
    frames: List[FrameRef]
    question: str
    answer: str
    observation: Optional[Observation] = None
    future_text: Optional[str] = None
    is_negative: bool = False
    seed_trace: int = 0
    source: str = ""
    template: str = ""

    class Config:
        allow_mutation = False

    @validator("question", "answer")
    def not_empty(cls, value):
        if not value.strip():
            raise ValueError("Question and answer must be nonempty")
        return value

    @root_validator(skip_on_failure=True)
    def check_task(cls, values):
        if not values["frames"]:
            raise ValueError("A record references at least one frame")
        if values["task"] == TaskType.FIT and not (
            values.get("future_text") or ""
        ).strip():
            raise ValueError("FIT records need a nonempty future_text")
        return values

    @property
    def image_paths(self) -> List[str]:
        return [frame.image_path for frame in self.frames]
