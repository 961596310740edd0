from typing import Any
from typing import Dict
from typing import List

from pydantic import BaseModel
from pydantic import Field
from pydantic import validator

from ..models import ConversationRecord
from ..models import TaskType

__all__ = ("ConversationTurn", "ConversationRow")


class ConversationTurn(BaseModel):
    from_: str = Field(alias="from")
    value: str

    class Config:
        allow_population_by_field_name = True

    @validator("from_")
    def known_role(cls, value):
        if value not in ("human", "assistant"):
            raise ValueError(f"Unknown conversation role `{value}`")
        return value


class ConversationRow(BaseModel):
    """
    Wire shape of one conversation line

    `{id, task, images, conversations: [{from, value}], meta}`; everything
    of the ConversationRecord that is not a question, answer or image path
    travels in `meta`.
    """

    id: str
    task: TaskType
    images: List[str]
    conversations: List[ConversationTurn]
    meta: Dict[str, Any] = Field(default_factory=dict)

    @validator("conversations")
    def one_round(cls, value):
        roles = [turn.from_ for turn in value]
        if roles != ["human", "assistant"]:
            raise ValueError(
                f"Expected one human/assistant round, got roles {roles}"
            )
        return value

    @classmethod
    def from_record(
        cls, record_id: str, record: ConversationRecord
    ) -> "ConversationRow":
        meta = record.dict(
            include={
                "frames",
                "observation",
                "future_text",
                "is_negative",
                "seed_trace",
                "source",
                "template",
            }
        )
        return cls(
            id=record_id,
            task=record.task,
            images=record.image_paths,
            conversations=[
                ConversationTurn(from_="human", value=record.question),
                ConversationTurn(from_="assistant", value=record.answer),
            ],
            meta=meta,
        )

    def to_record(self) -> ConversationRecord:
        return ConversationRecord(
            task=self.task,
            question=self.conversations[0].value,
            answer=self.conversations[1].value,
            **self.meta,
        )

    def to_line(self) -> str:
        return self.json(by_alias=True, separators=(",", ":"))
