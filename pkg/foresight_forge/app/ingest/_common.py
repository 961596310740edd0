import logging
from collections import Counter
from pathlib import Path
from typing import Dict
from typing import Optional
from typing import Union

from pydantic import BaseModel
from pydantic import Field

from ..grammar import check_category
from ..grammar import GrammarError
from ..models import BoundingBox

logger = logging.getLogger(__name__)


class IngestError(ValueError):
    """
    Hard error while reading an annotation file

    Attributes
    ----------
    path: str
    line: int, optional
        1-based line number of the offending row
    offset: int, optional
        byte offset of the offending position
    """

    def __init__(
        self,
        message: str,
        *,
        path: Union[str, Path],
        line: Optional[int] = None,
        offset: Optional[int] = None,
    ):
        self.path = str(path)
        self.line = line
        self.offset = offset
        where = self.path
        if line is not None:
            where += f":{line}"
        if offset is not None:
            where += f" (byte {offset})"
        super().__init__(f"{where}: {message}")


class IngestStats(BaseModel):
    """
    Per-file accounting of input units (annotations, rows, lines)

    Every unit is either emitted or dropped for a named reason; `check`
    asserts the conservation equation.
    """

    path: str = ""
    attempted: int = 0
    emitted: int = 0
    dropped: Dict[str, int] = Field(default_factory=dict)

    def drop(self, reason: str, count: int = 1) -> None:
        self.dropped[reason] = self.dropped.get(reason, 0) + count

    @property
    def total_dropped(self) -> int:
        return sum(self.dropped.values())

    def check(self) -> None:
        if self.emitted + self.total_dropped != self.attempted:
            raise IngestError(
                f"Box accounting mismatch: emitted {self.emitted} + dropped "
                f"{self.dropped} != attempted {self.attempted}",
                path=self.path,
            )
        if self.dropped:
            logger.warning(
                f"{self.path}: dropped {self.total_dropped} of "
                f"{self.attempted} units {dict(Counter(self.dropped))}"
            )

    def merge(self, other: "IngestStats") -> None:
        self.attempted += other.attempted
        self.emitted += other.emitted
        for reason, count in other.dropped.items():
            self.drop(reason, count)


def clip_box(
    xmin: float,
    ymin: float,
    xmax: float,
    ymax: float,
    width: float,
    height: float,
) -> Optional[BoundingBox]:
    """
    Clip corner coordinates to the image; None when nothing with positive
    area remains
    """
    xmin, xmax = max(xmin, 0.0), min(xmax, float(width))
    ymin, ymax = max(ymin, 0.0), min(ymax, float(height))
    if xmin >= xmax or ymin >= ymax:
        return None
    return BoundingBox(xmin=xmin, ymin=ymin, xmax=xmax, ymax=ymax)


def byte_offset(text: str, char_pos: int) -> int:
    return len(text[:char_pos].encode())


def checked_category(
    name: str,
    *,
    path: Union[str, Path],
    line: Optional[int] = None,
) -> str:
    """
    Reject category names the answer grammar cannot carry
    """
    try:
        return check_category(name)
    except GrammarError as e:
        raise IngestError(str(e), path=path, line=line)
