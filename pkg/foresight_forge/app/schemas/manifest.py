from datetime import datetime
from typing import Dict
from typing import List
from typing import Optional

from pydantic import BaseModel
from pydantic import Field
from pydantic import root_validator

from ..models.models_utils import get_timestamp
from .store import StoreShard

__all__ = ("StageCounters", "StageReport", "RunManifest")


class StageCounters(BaseModel):
    """
    Record accounting of one stage: emitted + dropped = attempted
    """

    attempted: int = 0
    emitted: int = 0
    dropped: Dict[str, int] = Field(default_factory=dict)

    @root_validator(skip_on_failure=True)
    def consistent(cls, values):
        total = values["emitted"] + sum(values["dropped"].values())
        if total != values["attempted"]:
            raise ValueError(
                f"Inconsistent counters: emitted {values['emitted']} + "
                f"dropped {values['dropped']} != attempted "
                f"{values['attempted']}"
            )
        return values


class StageReport(BaseModel):
    """
    Attributes
    ----------
    name: str
    counters: StageCounters
    seconds: float
        wall-clock duration
    per_task: Dict[str, int]
        emitted records per task
    filtered: Dict[str, int]
        subjects removed from otherwise emitted units, per reason
    """

    name: str
    counters: StageCounters
    seconds: float
    per_task: Dict[str, int] = Field(default_factory=dict)
    filtered: Dict[str, int] = Field(default_factory=dict)


class RunManifest(BaseModel):
    """
    Provenance of one command run

    Attributes
    ----------
    tool_version: str
    config_digest: str
        SHA-256 of the canonical run configuration
    seed: int, optional
    input_digests: Dict[str, str]
        SHA-256 of every input file, keyed by path
    stages: List[StageReport]
    shards: List[StoreShard]
        output shards, in order
    warnings: List[str]
    """

    tool_version: str
    config_digest: str
    seed: Optional[int] = None
    created: datetime = Field(default_factory=get_timestamp)
    input_digests: Dict[str, str] = Field(default_factory=dict)
    stages: List[StageReport] = Field(default_factory=list)
    shards: List[StoreShard] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)
