"""
Yes/no object-presence polling
"""
import logging
import re
from enum import Enum
from pathlib import Path
from typing import Dict
from typing import List
from typing import Sequence
from typing import Union

from pydantic import BaseModel
from pydantic import ValidationError

from ..models import MetricReport
from ._common import EvaluationError
from ._common import read_jsonl

logger = logging.getLogger(__name__)

__all__ = (
    "YesNo",
    "PopeSplit",
    "PopeRecord",
    "normalize_yes_no",
    "score_pope",
    "eval_pope",
    "load_pope_records",
)

_NEGATIONS = frozenset({"no", "not", "none", "nothing", "nobody"})
_WORD = re.compile(r"[a-z']+")


class YesNo(str, Enum):
    YES = "yes"
    NO = "no"


class PopeSplit(str, Enum):
    RANDOM = "random"
    POPULAR = "popular"
    ADVERSARIAL = "adversarial"


class PopeRecord(BaseModel):
    question_id: str
    predicted: YesNo
    gold: YesNo
    split: PopeSplit

    class Config:
        allow_mutation = False


def normalize_yes_no(text: str) -> YesNo:
    """
    Map a free-form answer to yes or no

    Only the first sentence counts. A leading yes/no decides; otherwise any
    negation word (`no`, `not`, `none`, `...n't`) means no, and everything
    else, the empty answer included, means yes.
    """
    sentence = text.strip().split(".")[0].lower()
    words = _WORD.findall(sentence)
    if words and words[0] in ("yes", "no"):
        return YesNo(words[0])
    if any(w in _NEGATIONS or w.endswith("n't") for w in words):
        return YesNo.NO
    return YesNo.YES


def score_pope(records: Sequence[PopeRecord]) -> MetricReport:
    """
    Accuracy, precision, recall, F1 and yes rate with yes as the positive
    class; F1 is 0 when precision and recall are both 0
    """
    if not records:
        raise EvaluationError("No POPE records to evaluate")
    tp = sum(r.predicted == YesNo.YES and r.gold == YesNo.YES for r in records)
    fp = sum(r.predicted == YesNo.YES and r.gold == YesNo.NO for r in records)
    tn = sum(r.predicted == YesNo.NO and r.gold == YesNo.NO for r in records)
    fn = len(records) - tp - fp - tn
    n = len(records)

    warnings = []
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        f1 = 0.0
        warnings.append(
            f"F1 set to 0: no true positives ({tp + fp} predicted yes, "
            f"{tp + fn} gold yes)"
        )
        logger.warning(warnings[-1])
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricReport(
        metrics=dict(
            accuracy=(tp + tn) / n,
            precision=precision,
            recall=recall,
            F1=f1,
            yes_rate=(tp + fp) / n,
        ),
        counts=dict(records=n, tp=tp, fp=fp, tn=tn, fn=fn),
        warnings=warnings,
    )


def eval_pope(records: Sequence[PopeRecord]) -> Dict[str, MetricReport]:
    """
    `score_pope` of every split present in `records`, in split order
    """
    if not records:
        raise EvaluationError("No POPE records to evaluate")
    seen = set()
    for record in records:
        if record.question_id in seen:
            raise EvaluationError(
                f"Duplicate question_id {record.question_id}"
            )
        seen.add(record.question_id)
    reports = {}
    for split in PopeSplit:
        group = [r for r in records if r.split == split]
        if group:
            reports[split.value] = score_pope(group)
    return reports


def load_pope_records(path: Union[str, Path]) -> List[PopeRecord]:
    """
    Read POPE records from JSONL; a raw `response` field is mapped through
    `normalize_yes_no` in place of `predicted`
    """
    records = []
    for lineno, row in read_jsonl(path):
        row = dict(row)
        if "response" in row:
            if "predicted" in row:
                raise EvaluationError(
                    f"{path}:{lineno}: both `predicted` and `response` given"
                )
            row["predicted"] = normalize_yes_no(str(row.pop("response")))
        elif isinstance(row.get("predicted"), str):
            row["predicted"] = row["predicted"].strip().lower()
        try:
            records.append(PopeRecord(**row))
        except (ValidationError, TypeError) as e:
            raise EvaluationError(f"{path}:{lineno}: not a POPE record\n{e}")
    return records
