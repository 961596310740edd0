import json
import re
from pathlib import Path
from typing import Any
from typing import Dict
from typing import Iterator
from typing import List
from typing import Optional
from typing import Tuple

from pydantic import ValidationError

from ..app.builder import load_catalog
from ..app.builder import NEGATIVE_TASKS
from ..app.builder import TemplateCatalog
from ..app.grammar import GrammarError
from ..app.grammar import parse_norm_box
from ..app.grammar import parse_response
from ..app.grammar import ParseMode
from ..app.grammar import render_frame_markers
from ..app.grammar import split_trajectory_prefix
from ..app.models import ConversationRecord
from ..app.models import TaskType
from ..app.runner import StageInputError
from ..app.runner import StageValidationError
from ..app.schemas import ConversationRow
from ..config import ForgeConfig
from ._common import stage_logger

REPORT = "validation.json"
# Errors listed in the exception message; the report holds all of them.
_SHOWN = 10

_BOX_LIKE = re.compile(r"\[\s*-?[\d.]+(?:\s*,\s*-?[\d.]+){3}\s*\]")


def corpus_lines(corpus: Path) -> Iterator[Tuple[str, int, str]]:
    """
    Yield `(shard name, line number, line)` over a corpus directory (its
    `*.jsonl` shards in name order) or a single JSONL file
    """
    if corpus.is_dir():
        shards = sorted(corpus.glob("*.jsonl"))
    elif corpus.is_file():
        shards = [corpus]
    else:
        raise StageInputError(f"No corpus at {corpus}")
    for shard in shards:
        for lineno, line in enumerate(
            shard.read_text().splitlines(), start=1
        ):
            if line.strip():
                yield shard.name, lineno, line


def _trajectory_problems(
    text: str, frame_count: int, mode: ParseMode
) -> List[str]:
    parsed = parse_response(text, mode=mode)
    problems = [str(d) for d in parsed.errors]
    if not parsed.tracklets:
        problems.append("answer holds no trajectory")
    for tracklet in parsed.tracklets:
        beyond = [f for f in tracklet.boxes if f > frame_count]
        if beyond:
            problems.append(
                f"<Id{tracklet.id}> has frames {beyond} beyond the "
                f"{frame_count} frames of the record"
            )
    return problems


def check_record(
    record: ConversationRecord,
    catalog: TemplateCatalog,
    mode: ParseMode = ParseMode.STRICT,
) -> List[str]:
    """
    Problems of one record beyond its schema

    Checks the frame markers of the question, the answer grammar of the
    task, negative answers against their template, and that no trajectory
    or detection answer is quoted in the question. Reasoning answers are
    free text: every bracketed list of four numbers must be a box literal
    and no `{box}` placeholder may be left.
    """
    problems = []
    if render_frame_markers(record.frames) not in record.question:
        problems.append("question lacks the frame markers of its frames")

    name = record.template.split("#")[0]
    if name and name not in catalog.by_name:
        problems.append(f"unknown template `{name}`")
        return problems

    if record.is_negative:
        if record.task not in NEGATIVE_TASKS:
            problems.append(f"negative {record.task.value} record")
        elif name and record.answer != catalog.get(name).negative_answer:
            problems.append("negative answer differs from its template")
        return problems

    n = len(record.frames)
    structured, _ = split_trajectory_prefix(record.answer)
    if record.task == TaskType.DETECTION:
        structured = record.answer
    if structured and structured in record.question:
        problems.append("answer leaks into the question")
    if record.task == TaskType.DETECTION:
        parsed = parse_response(record.answer, mode=mode)
        problems.extend(str(d) for d in parsed.errors)
        if not parsed.detections or parsed.tracklets:
            problems.append("answer is not a detection answer")
    elif record.task == TaskType.TRACKING:
        problems.extend(_trajectory_problems(record.answer, n, mode))
    elif record.task == TaskType.FIT:
        prefix, rest = split_trajectory_prefix(record.answer)
        problems.extend(_trajectory_problems(prefix, n, mode))
        whole = parse_response(record.answer, mode=ParseMode.LENIENT)
        problems.extend(str(d) for d in whole.errors)
        if rest != (record.future_text or "").strip():
            problems.append("text after the trajectory differs from future")
        if "<Id" in rest:
            problems.append("future text contains Id tokens")
    elif record.task == TaskType.REFERRING:
        if n == 1:
            try:
                parse_norm_box(record.answer, mode=mode)
            except GrammarError as e:
                problems.append(str(e))
        else:
            problems.extend(_trajectory_problems(record.answer, n, mode))
    elif record.task == TaskType.REASONING:
        if "{box}" in record.answer:
            problems.append("rationale keeps a `{box}` placeholder")
        for literal in _BOX_LIKE.findall(record.answer):
            try:
                parse_norm_box(literal, mode=mode)
            except GrammarError as e:
                problems.append(str(e))
    return problems


def cmd_validate(
    *,
    corpus: Path,
    config: Optional[ForgeConfig] = None,
    mode: ParseMode = ParseMode.STRICT,
    out: Optional[Path] = None,
) -> Dict[str, Any]:
    """
    Re-check every line of a corpus

    Each line must be a valid conversation row whose record passes
    `check_record`. The list of problems is written to `validation.json`
    in `out` (the corpus directory by default).

    Raises
    ------
    StageValidationError:
        the corpus is empty or some record has problems
    """
    corpus = Path(corpus)
    out = Path(out) if out is not None else (
        corpus if corpus.is_dir() else corpus.parent
    )
    catalog_path = config.builder.template_catalog if config else None
    digest = config.digest() if config else ""

    with stage_logger("validate", out, digest) as logger:
        try:
            catalog = load_catalog(catalog_path)
        except (OSError, ValueError) as e:
            raise StageInputError(f"Cannot load the template catalog: {e}")
        errors: List[Dict[str, Any]] = []
        total = 0
        for index, (shard, lineno, line) in enumerate(corpus_lines(corpus)):
            total += 1
            where = dict(index=index, shard=shard, line=lineno)
            try:
                record = ConversationRow.parse_raw(line).to_record()
            except (ValidationError, ValueError) as e:
                message = " ".join(str(e).split())
                errors.append(dict(where, problems=[message]))
                continue
            problems = check_record(record, catalog, mode)
            if problems:
                errors.append(dict(where, problems=problems))
        for error in errors:
            logger.error(
                f"record {error['index']} ({error['shard']}:"
                f"{error['line']}): {'; '.join(error['problems'])}"
            )
        report = dict(corpus=str(corpus), records=total, errors=errors)
        (out / REPORT).write_text(json.dumps(report, indent=2) + "\n")
        logger.info(f"{total} records, {len(errors)} with problems")

        if not total:
            raise StageValidationError(f"empty corpus at {corpus}")
        if errors:
            shown = ", ".join(str(e["index"]) for e in errors[:_SHOWN])
            more = "" if len(errors) <= _SHOWN else ", ..."
            raise StageValidationError(
                f"{len(errors)} of {total} records have problems "
                f"(record index {shown}{more}); see {out / REPORT}"
            )
    return dict(corpus=str(corpus), records=total, errors=0)
