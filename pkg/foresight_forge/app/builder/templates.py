"""
Task-prompt catalog

The packaged catalog lives in `data/templates.json`; a different document
with the same shape can be configured through `builder.template_catalog`.
"""
import json
import random
from pathlib import Path
from string import Formatter
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple
from typing import Union

from pydantic import BaseModel
from pydantic import root_validator
from pydantic import validator

from ..models import TaskType

DEFAULT_CATALOG = Path(__file__).parent / "data" / "templates.json"

MIN_PATTERNS = 5
SLOTS = frozenset({"markers", "query", "format_hint"})

__all__ = ("TaskTemplate", "TemplateCatalog", "load_catalog")


def _slots(pattern: str) -> List[str]:
    return [name for _, name, _, _ in Formatter().parse(pattern) if name]


class TaskTemplate(BaseModel):
    """
    Question wording and answer conventions of one task

    Attributes
    ----------
    name: str
        catalog key, e.g. `tracking` or `referring_video`
    task: TaskType
    question_patterns: List[str]
        `str.format` patterns over the `{markers}`, `{query}` and
        `{format_hint}` slots
    format_hint: str
        the sentence stating the expected answer format
    negative_answer: str
        fixed answer of negative samples
    """

    name: str
    task: TaskType
    question_patterns: List[str]
    format_hint: str = ""
    negative_answer: str

    class Config:
        allow_mutation = False

    @validator("question_patterns")
    def enough_patterns(cls, value):
        if len(value) < MIN_PATTERNS:
            raise ValueError(
                f"At least {MIN_PATTERNS} question patterns are required, "
                f"got {len(value)}"
            )
        for pattern in value:
            unknown = set(_slots(pattern)) - SLOTS
            if unknown:
                raise ValueError(
                    f"Unknown slots {sorted(unknown)} in {pattern!r}"
                )
            if "markers" not in _slots(pattern):
                raise ValueError(f"Pattern {pattern!r} lacks {{markers}}")
        return value

    @validator("negative_answer")
    def negative_not_empty(cls, value):
        if not value.strip():
            raise ValueError("negative_answer must be nonempty")
        return value

    @root_validator(skip_on_failure=True)
    def hint_slot(cls, values):
        if values["task"] in (TaskType.DETECTION, TaskType.TRACKING):
            if not values["format_hint"].strip():
                raise ValueError(f"{values['name']}: format_hint is required")
            for pattern in values["question_patterns"]:
                if "format_hint" not in _slots(pattern):
                    raise ValueError(
                        f"{values['name']}: pattern {pattern!r} lacks "
                        "{format_hint}"
                    )
        return values

    def render(
        self, rng: random.Random, markers: str, query: str = ""
    ) -> Tuple[str, int]:
        """
        Fill a randomly drawn pattern; returns the question and the index
        of the pattern used
        """
        index = rng.randrange(len(self.question_patterns))
        question = self.question_patterns[index].format(
            markers=markers, query=query, format_hint=self.format_hint
        )
        return " ".join(question.split()), index


class TemplateCatalog(BaseModel):
    templates: List[TaskTemplate]

    @validator("templates")
    def unique_names(cls, value):
        names = [t.name for t in value]
        if len(set(names)) != len(names):
            raise ValueError(f"Template names must be unique: {names}")
        return value

    @property
    def by_name(self) -> Dict[str, TaskTemplate]:
        return {t.name: t for t in self.templates}

    def get(self, name: str) -> TaskTemplate:
        try:
            return self.by_name[name]
        except KeyError:
            raise KeyError(f"No template named `{name}` in the catalog")

    def negative_answers(self) -> Dict[str, str]:
        return {t.name: t.negative_answer for t in self.templates}


def load_catalog(path: Optional[Union[str, Path]] = None) -> TemplateCatalog:
    path = Path(path) if path is not None else DEFAULT_CATALOG
    return TemplateCatalog(**json.loads(path.read_text()))
