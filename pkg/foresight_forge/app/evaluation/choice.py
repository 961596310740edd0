"""
Multiple-choice future-reasoning benchmark

Accuracy is plain per-question accuracy; no circular re-ordering of the
options is performed.
"""
import logging
import re
from enum import Enum
from pathlib import Path
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Union

from pydantic import BaseModel
from pydantic import ValidationError
from pydantic import validator

from ..models import MetricReport
from ._common import EvaluationError
from ._common import read_jsonl

logger = logging.getLogger(__name__)

__all__ = (
    "ChoiceCategory",
    "ChoiceRecord",
    "extract_choice",
    "eval_choice_benchmark",
    "load_choice_records",
)

_LEADING = re.compile(r"^\(?([A-Z])(?:\)|\.|:|$)", re.IGNORECASE)
# a lowercase letter after "answer" only counts when it stands alone
_ANSWER_IS = re.compile(
    r"\banswer(?:\s+is)?\s*:?\s*\(?"
    r"(?:(?-i:([A-Z]))\b|([a-z])(?=[).,:;!?]|\s*$))",
    re.IGNORECASE,
)


class ChoiceCategory(str, Enum):
    """
    Question categories: object localization, physical property
    reasoning, function reasoning, identity reasoning, future prediction
    """

    OL = "OL"
    PPR = "PPR"
    FR = "FR"
    IR = "IR"
    FP = "FP"


def _letter(value: Optional[str]) -> Optional[str]:
    if value is None:
        return None
    value = value.strip().upper()
    if len(value) != 1 or not "A" <= value <= "Z":
        raise ValueError(f"Choice must be a single letter, got {value!r}")
    return value


class ChoiceRecord(BaseModel):
    """
    `predicted` is None when the response matched no option
    """

    question_id: str
    category: ChoiceCategory
    predicted: Optional[str] = None
    gold: str

    class Config:
        allow_mutation = False

    @validator("predicted", "gold")
    def single_letter(cls, value):
        return _letter(value)

    @property
    def correct(self) -> bool:
        return self.predicted is not None and self.predicted == self.gold


def _option_letters(
    options: Optional[Union[Dict[str, str], Sequence[str]]]
) -> Dict[str, str]:
    if not options:
        return {}
    if isinstance(options, dict):
        return {k.strip().upper(): v for k, v in options.items()}
    return {chr(ord("A") + i): text for i, text in enumerate(options)}


def extract_choice(
    response: str,
    options: Optional[Union[Dict[str, str], Sequence[str]]] = None,
) -> Optional[str]:
    """
    Map a free-text response to a choice letter

    Accepted forms are a leading letter (`B`, `(b)`, `B.`, `b:`), an
    `Answer: B` / `the answer is b` phrase, and the exact text of one of
    `options` (a letter -> text mapping, or a list lettered from A). When
    `options` is given, letters outside it do not match. Returns None when
    nothing matches.
    """
    letters = _option_letters(options)
    text = response.strip()

    def _known(letter: str) -> bool:
        return not letters or letter in letters

    for pattern in (_LEADING, _ANSWER_IS):
        match = pattern.search(text)
        if match is None:
            continue
        letter = next(g for g in match.groups() if g).upper()
        if _known(letter):
            return letter

    cleaned = text.rstrip(".").strip().casefold()
    for letter, option in letters.items():
        if cleaned and cleaned == option.strip().rstrip(".").casefold():
            return letter
    return None


def eval_choice_benchmark(records: Sequence[ChoiceRecord]) -> MetricReport:
    """
    Per-category accuracy and their unweighted mean `Avg`

    Categories without records are left out of `Avg` and reported in
    `warnings`.
    """
    if not records:
        raise EvaluationError("No choice records to evaluate")
    seen = set()
    for record in records:
        if record.question_id in seen:
            raise EvaluationError(
                f"Duplicate question_id {record.question_id}"
            )
        seen.add(record.question_id)

    per_category: Dict[str, float] = {}
    counts: Dict[str, int] = dict(
        records=len(records),
        correct=sum(r.correct for r in records),
        unmatched=sum(r.predicted is None for r in records),
    )
    warnings: List[str] = []
    for category in ChoiceCategory:
        group = [r for r in records if r.category == category]
        counts[category.value] = len(group)
        if not group:
            warnings.append(
                f"Category {category.value} has no records and is excluded "
                "from Avg"
            )
            logger.warning(warnings[-1])
            continue
        per_category[category.value] = sum(r.correct for r in group) / len(
            group
        )
    metrics = {
        "Avg": sum(per_category.values()) / len(per_category),
        "accuracy": counts["correct"] / len(records),
    }
    return MetricReport(
        metrics=metrics,
        per_category=per_category,
        counts=counts,
        warnings=warnings,
    )


def load_choice_records(path: Union[str, Path]) -> List[ChoiceRecord]:
    """
    Read choice records from JSONL

    A row carries either `predicted` (a letter) or a raw `response`, with
    optional `options`, which goes through `extract_choice`.
    """
    records = []
    for lineno, row in read_jsonl(path):
        row = dict(row)
        if "response" in row:
            response = row.pop("response")
            options = row.pop("options", None)
            if "predicted" in row:
                raise EvaluationError(
                    f"{path}:{lineno}: both `predicted` and `response` given"
                )
            row["predicted"] = extract_choice(str(response), options)
        try:
            records.append(ChoiceRecord(**row))
        except (ValidationError, TypeError) as e:
            raise EvaluationError(f"{path}:{lineno}: not a choice record\n{e}")
    return records
