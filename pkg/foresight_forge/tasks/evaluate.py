import json
from enum import Enum
from pathlib import Path
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence

from pydantic import ValidationError

from .. import __VERSION__
from ..app.evaluation import eval_choice_benchmark
from ..app.evaluation import eval_pope
from ..app.evaluation import eval_sot
from ..app.evaluation import EvaluationError
from ..app.evaluation import load_choice_records
from ..app.evaluation import load_pope_records
from ..app.evaluation import score_pope
from ..app.evaluation import score_response_file
from ..app.evaluation import SotGroundTruth
from ..app.grammar import ParseMode
from ..app.models import MetricReport
from ..app.models import SourceSequence
from ..app.runner import StageInputError
from ..app.schemas import EvaluationReport
from ..config import ForgeConfig
from ..utils import digest_file
from ._common import stage_logger

REPORT = "report.json"


class EvalKind(str, Enum):
    SOT = "sot"
    CHOICE = "choice"
    POPE = "pope"


def _ground_truth_files(paths: Sequence[Path]) -> List[Path]:
    files: List[Path] = []
    for path in paths:
        if path.is_dir():
            files.extend(sorted(path.glob("*.jsonl")))
        elif path.is_file():
            files.append(path)
        else:
            raise StageInputError(f"No ground truth at {path}")
    return files


def load_ground_truth(paths: Sequence[Path]) -> List[SotGroundTruth]:
    """
    Single-target ground truth from canonical store shards (files, or
    store directories)
    """
    gts = []
    for path in _ground_truth_files(paths):
        for lineno, line in enumerate(path.read_text().splitlines(), 1):
            if not line.strip():
                continue
            try:
                seq = SourceSequence.parse_raw(line)
            except ValidationError as e:
                raise StageInputError(
                    f"{path}:{lineno}: not a store sequence\n{e}"
                )
            try:
                gts.append(SotGroundTruth.from_sequence(seq))
            except EvaluationError as e:
                raise StageInputError(f"{path}:{lineno}: {e}")
    return gts


def headline(report: MetricReport) -> List[str]:
    """
    Metric lines scaled by 100 with one decimal, as tables usually show
    them
    """
    lines = [
        f"{name}: {value * 100:.1f}" for name, value in report.metrics.items()
    ]
    lines.extend(f"warning: {w}" for w in report.warnings)
    return lines


def cmd_eval(
    *,
    kind: EvalKind,
    pred: Path,
    gt: Optional[Sequence[Path]] = None,
    config: Optional[ForgeConfig] = None,
    mode: ParseMode = ParseMode.LENIENT,
    out: Optional[Path] = None,
) -> Dict[str, Any]:
    """
    Score a prediction file and write `report.json`

    Arguments
    ---------
    kind (EvalKind):
        `sot` for JSONL responses over tracking sequences, `choice` and
        `pope` for JSONL records of the matching type
    pred (Path):
        prediction file
    gt (list of Path):
        SOT ground truth (store shards or store directories); defaults to
        `eval.ground_truth` of the configuration
    mode (ParseMode):
        parse mode of SOT responses
    out (Path):
        report directory, the directory of `pred` by default

    Return
    ------
    summary (Dict):
        report path, headline lines and the report itself
    """
    kind = EvalKind(kind)
    pred = Path(pred)
    out = Path(out) if out is not None else pred.parent
    digest = config.digest() if config else ""
    inputs = [pred]
    per_split: Dict[str, MetricReport] = {}

    with stage_logger("eval", out, digest) as logger:
        try:
            if kind == EvalKind.SOT:
                gt_paths = list(gt or [])
                if not gt_paths and config is not None:
                    gt_paths = list(config.eval.ground_truth)
                if not gt_paths:
                    raise StageInputError(
                        "SOT evaluation needs ground truth (--gt or "
                        "eval.ground_truth)"
                    )
                inputs.extend(_ground_truth_files(gt_paths))
                gts = load_ground_truth(gt_paths)
                preds, diagnostics = score_response_file(pred, gts, mode)
                for line in diagnostics:
                    logger.warning(line)
                report = eval_sot(preds, gts)
                if diagnostics:
                    report.warnings.append(
                        f"{len(diagnostics)} response diagnostics, see "
                        f"{out / 'eval.log'}"
                    )
            elif kind == EvalKind.CHOICE:
                report = eval_choice_benchmark(load_choice_records(pred))
            else:
                records = load_pope_records(pred)
                report = score_pope(records)
                per_split = eval_pope(records)
        except EvaluationError as e:
            logger.error(str(e))
            raise StageInputError(f"{kind.value} evaluation: {e}")

        document = EvaluationReport(
            kind=kind.value,
            tool_version=__VERSION__,
            input_digests={str(p): digest_file(p) for p in inputs},
            report=report,
            per_split=per_split,
        )
        path = out / REPORT
        path.write_text(document.json(indent=2) + "\n")
        lines = headline(report)
        for split, split_report in per_split.items():
            lines.extend(
                f"{split} {line}" for line in headline(split_report)
            )
        for line in lines:
            logger.info(line)

    return dict(
        report=str(path), headline=lines, metrics=json.loads(report.json())
    )
