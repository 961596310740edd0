from typing import Dict
from typing import List

from pydantic import BaseModel
from pydantic import Field
from pydantic import validator

__all__ = ("MetricReport",)


class MetricReport(BaseModel):
    """
    Named metric values in [0, 1], with per-category breakdown and counts

    Presentation scaling (x100) is left to the command line.
    """

    metrics: Dict[str, float] = Field(default_factory=dict)
    per_category: Dict[str, float] = Field(default_factory=dict)
    counts: Dict[str, int] = Field(default_factory=dict)
    warnings: List[str] = Field(default_factory=list)

    @validator("metrics", "per_category")
    def rates_in_unit_interval(cls, value):
        for name, rate in value.items():
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"Metric `{name}` = {rate} outside [0, 1]")
        return value

    @validator("counts")
    def counts_nonnegative(cls, value):
        for name, count in value.items():
            if count < 0:
                raise ValueError(f"Count `{name}` = {count} is negative")
        return value
