from enum import Enum
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

from pydantic import BaseModel
from pydantic import Field

from ..models import NormBox

__all__ = (
    "GrammarError",
    "ParseMode",
    "Severity",
    "Diagnostic",
    "TrajectoryText",
    "ParsedTracklet",
    "ParsedTrajectories",
)


class GrammarError(ValueError):
    pass


class ParseMode(str, Enum):
    STRICT = "strict"
    LENIENT = "lenient"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


class Diagnostic(BaseModel):
    """
    A parse problem located by a byte span `[start, end)` of the UTF-8
    encoded input
    """

    severity: Severity
    start: int
    end: int
    message: str

    class Config:
        allow_mutation = False

    def __str__(self) -> str:
        span = f"[{self.start}:{self.end}]"
        return f"{self.severity.value} {span} {self.message}"


class TrajectoryText(BaseModel):
    """
    Serialized trajectory answer

    Attributes
    ----------
    text: str
    frame_count: int
        number of frames of the clip the trajectory refers to
    ids: List[int]
        ids present in the text, always `1..n`
    id_map: Dict[int, int]
        original tracklet id -> id written in the text
    """

    text: str
    frame_count: int
    ids: List[int]
    id_map: Dict[int, int]

    class Config:
        allow_mutation = False


class ParsedTracklet(BaseModel):
    id: int
    category: Optional[str] = None
    boxes: Dict[int, NormBox]


class ParsedTrajectories(BaseModel):
    tracklets: List[ParsedTracklet] = Field(default_factory=list)
    detections: List[Tuple[str, NormBox]] = Field(default_factory=list)
    diagnostics: List[Diagnostic] = Field(default_factory=list)

    @property
    def errors(self) -> List[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == Severity.ERROR]

    @property
    def warnings(self) -> List[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == Severity.WARNING]

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def empty(self) -> bool:
        return not self.tracklets and not self.detections

    def tracklet(self, id: int) -> Optional[ParsedTracklet]:
        return next((t for t in self.tracklets if t.id == id), None)

    def raise_for_errors(self) -> None:
        if self.errors:
            raise GrammarError("; ".join(str(d) for d in self.errors))
