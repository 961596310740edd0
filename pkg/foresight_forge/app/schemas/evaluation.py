from typing import Dict

from pydantic import BaseModel
from pydantic import conint
from pydantic import Field

from ..models import MetricReport

__all__ = ("PredictionRow", "EvaluationReport")


class PredictionRow(BaseModel):
    """
    One model response over a tracking sequence

    `response` is raw model text holding a trajectory on the 0-1000 grid of
    an image of `width` x `height` pixels.
    """

    sequence_id: str
    width: conint(gt=0)  # type: ignore
    height: conint(gt=0)  # type: ignore
    response: str

    class Config:
        extra = "forbid"


class EvaluationReport(BaseModel):
    """
    Content of `report.json`

    Attributes
    ----------
    kind: str
        `sot`, `choice` or `pope`
    tool_version: str
    input_digests: Dict[str, str]
        file name -> SHA-256 of every input file
    report: MetricReport
        metrics over all inputs
    per_split: Dict[str, MetricReport]
        POPE metrics per split
    """

    kind: str
    tool_version: str
    input_digests: Dict[str, str] = Field(default_factory=dict)
    report: MetricReport
    per_split: Dict[str, MetricReport] = Field(default_factory=dict)
