from enum import Enum

from pydantic import BaseModel
from pydantic import conint

__all__ = ("ShardKind", "StoreShard")


class ShardKind(str, Enum):
    SEQUENCE = "sequence"
    REFERRING = "referring"
    CONVERSATION = "conversation"


class StoreShard(BaseModel):
    """
    One shard of the canonical store, as listed in the ingest manifest

    Attributes
    ----------
    path: str
        shard file name, relative to the store directory
    dataset: str = ""
        dataset tag of the source the shard was built from, empty for
        corpus shards
    kind: ShardKind
        `sequence` shards hold SourceSequence rows, `referring` shards hold
        ReferringRecord rows, `conversation` shards hold corpus lines
    records: int
        number of rows
    digest: str
        SHA-256 of the shard bytes
    """

    path: str
    dataset: str = ""
    kind: ShardKind
    records: conint(ge=0)  # type: ignore
    digest: str
