"""
Corpus construction

The store is expanded into work units in store order, and unit `i` gets
`record_index = i`. Every random draw of a unit is seeded from
`(seed, record_index)`, units are mapped in order by the runner, and lines
are written in unit order: the corpus is the same for any worker count.
"""
import logging
import time
from collections import Counter
from contextlib import closing
from enum import Enum
from functools import partial
from pathlib import Path
from typing import Any
from typing import Dict
from typing import List
from typing import NamedTuple
from typing import Optional
from typing import Union

from .. import __VERSION__
from ..app.builder import build_caption_record
from ..app.builder import build_fit_record
from ..app.builder import build_fpt_record
from ..app.builder import build_reasoning_record
from ..app.builder import build_referring_record
from ..app.builder import compose_future
from ..app.builder import inject_negative
from ..app.builder import load_catalog
from ..app.builder import make_textgen_client
from ..app.builder import NEGATIVE_TASKS
from ..app.builder import NotQueryableError
from ..app.builder import SkipRecord
from ..app.builder import TemplateCatalog
from ..app.builder import TextGenClient
from ..app.builder import TextGenError
from ..app.grammar import GrammarError
from ..app.models import ClipSample
from ..app.models import ConversationRecord
from ..app.models import ReferringRecord
from ..app.models import SourceSequence
from ..app.models import TaskType
from ..app.runner import map_units
from ..app.runner import ShardWriter
from ..app.runner import StageEmptyResult
from ..app.runner import StageInputError
from ..app.sampler import cap_categories
from ..app.sampler import filter_small
from ..app.sampler import InfeasibleSequenceError
from ..app.sampler import sample_clip
from ..app.sampler import single_frame_clip
from ..app.schemas import ConversationRow
from ..app.schemas import RunManifest
from ..app.schemas import StageCounters
from ..app.schemas import StageReport
from ..config import BuilderConfig
from ..config import ForgeConfig
from ..utils import digest_file
from ..utils import record_rng
from ._common import load_store
from ._common import MANIFEST
from ._common import stage_logger
from ._common import write_manifest
from .ingest import default_store

logger = logging.getLogger(__name__)


class UnitKind(str, Enum):
    CAPTION = "caption"
    IMAGE = "image"
    VIDEO = "video"
    REFERRING = "referring"
    REASONING = "reasoning"


class WorkUnit(NamedTuple):
    record_index: int
    kind: UnitKind
    payload: Union[SourceSequence, ReferringRecord]
    # frame of a caption unit
    frame_index: int = 1


class UnitResult(NamedTuple):
    record_index: int
    task: Optional[str]
    line: Optional[str]
    reason: Optional[str]
    filtered: Dict[str, int]


class BuildContext(NamedTuple):
    config: ForgeConfig
    seed: int
    catalog: TemplateCatalog
    client: TextGenClient


def has_actions(seq: SourceSequence) -> bool:
    return any(t.action for t in seq.tracklets)


def plan_units(
    sequences: List[SourceSequence],
    referring: List[ReferringRecord],
    clips_per_sequence: int,
) -> List[WorkUnit]:
    """
    One unit per captioned frame, per single image, per referring row and
    `clips_per_sequence` units per multi-frame sequence
    """
    units: List[WorkUnit] = []

    def _add(kind, payload, frame_index=1):
        units.append(WorkUnit(len(units), kind, payload, frame_index))

    for seq in sequences:
        if seq.captions:
            for frame_index in seq.captions:
                _add(UnitKind.CAPTION, seq, frame_index)
        elif seq.length == 1:
            _add(UnitKind.IMAGE, seq)
        else:
            for _ in range(clips_per_sequence):
                _add(UnitKind.VIDEO, seq)
    for ref in referring:
        if ref.task == "reasoning":
            _add(UnitKind.REASONING, ref)
        else:
            _add(UnitKind.REFERRING, ref)
    return units


def eligible_tasks(unit: WorkUnit) -> List[TaskType]:
    if unit.kind == UnitKind.CAPTION:
        return [TaskType.CAPTION]
    if unit.kind == UnitKind.IMAGE:
        return [TaskType.DETECTION]
    if unit.kind == UnitKind.REFERRING:
        return [TaskType.REFERRING]
    if unit.kind == UnitKind.REASONING:
        return [TaskType.REASONING]
    tasks = [TaskType.DETECTION, TaskType.TRACKING]
    if has_actions(unit.payload):  # type: ignore
        tasks.append(TaskType.FIT)
    return tasks


def choose_task(
    unit: WorkUnit, builder: BuilderConfig, seed: int
) -> TaskType:
    """
    Weighted draw among the tasks the unit can feed; raises SkipRecord
    when all of them have zero weight
    """
    tasks = [t for t in eligible_tasks(unit) if builder.weight(t) > 0]
    if not tasks:
        raise SkipRecord("task_disabled")
    if len(tasks) == 1:
        return tasks[0]
    rng = record_rng(seed, unit.record_index, "task")
    return rng.choices(tasks, weights=[builder.weight(t) for t in tasks])[0]


def _prepare_clip(
    clip: ClipSample,
    ctx: BuildContext,
    index: int,
    filtered: Dict[str, int],
    *,
    cap: bool = False,
) -> ClipSample:
    """
    Drop small objects, then cap the category count when `cap` is set
    (detection clips only)
    """
    clip = filter_small(clip, ctx.config.sampler, filtered)
    if cap:
        clip = cap_categories(clip, ctx.config.sampler, index)
    if not clip.tracklets:
        raise SkipRecord("empty_clip")
    return clip


def _negative_or(
    clip: ClipSample, template_name: str, ctx: BuildContext, index: int
) -> Optional[ConversationRecord]:
    template = ctx.catalog.get(template_name)
    if template.task not in NEGATIVE_TASKS:
        return None
    return inject_negative(
        clip,
        template,
        ctx.seed,
        index,
        ratio=ctx.config.builder.negative_ratio,
        distractors=ctx.config.builder.distractors,
    )


def _clip_record(
    clip: ClipSample, task: TaskType, ctx: BuildContext, index: int
) -> ConversationRecord:
    negative = _negative_or(clip, task.value, ctx, index)
    if negative is not None:
        return negative
    return build_fpt_record(
        clip,
        ctx.catalog.get(task.value),
        ctx.seed,
        index,
        category_prefix=ctx.config.builder.category_prefix,
    )


def _fit_record(
    clip: ClipSample, ctx: BuildContext, index: int
) -> ConversationRecord:
    basis = [(t, t.action) for t in clip.tracklets if t.action]
    basis = [(t, a) for t, a in basis if 1 in t.boxes]
    if not basis:
        raise SkipRecord("no_action")
    future = compose_future(basis, ctx.client, clip.frames)  # type: ignore
    return build_fit_record(
        clip, future, ctx.catalog.get("fit"), ctx.seed, index
    )


def _referring_clip(ref: ReferringRecord) -> ClipSample:
    return ClipSample(
        frames=ref.frames,
        tracklets=[ref.target_tracklet],
        source_dataset=ref.dataset,
        sequence_id=ref.record_id,
        gap=0 if len(ref.frames) == 1 else 1,
    )


def _unit_record(
    unit: WorkUnit,
    task: TaskType,
    ctx: BuildContext,
    filtered: Dict[str, int],
) -> ConversationRecord:
    index = unit.record_index
    if unit.kind == UnitKind.CAPTION:
        seq: SourceSequence = unit.payload  # type: ignore
        return build_caption_record(
            seq.frame(unit.frame_index),
            seq.captions[unit.frame_index],  # type: ignore
            ctx.catalog.get("caption"),
            ctx.seed,
            index,
            source=f"{seq.dataset}/{seq.sequence_id}",
        )
    if unit.kind in (UnitKind.REFERRING, UnitKind.REASONING):
        ref: ReferringRecord = unit.payload  # type: ignore
        if task == TaskType.REASONING:
            return build_reasoning_record(
                ref, ctx.catalog.get("reasoning"), ctx.seed, index
            )
        name = "referring_image" if len(ref.frames) == 1 else "referring_video"
        negative = _negative_or(_referring_clip(ref), name, ctx, index)
        if negative is not None:
            return negative
        return build_referring_record(
            ref, ctx.catalog.get(name), ctx.seed, index
        )

    seq = unit.payload  # type: ignore
    if task == TaskType.DETECTION:
        if seq.length == 1:
            frame_index = 1
        else:
            rng = record_rng(ctx.seed, index, "frame")
            frame_index = rng.randint(1, seq.length)
        clip = _prepare_clip(
            single_frame_clip(seq, frame_index),
            ctx,
            index,
            filtered,
            cap=True,
        )
        return _clip_record(clip, task, ctx, index)

    clip = _prepare_clip(
        sample_clip(seq, ctx.config.sampler, index), ctx, index, filtered
    )
    if task == TaskType.FIT:
        return _fit_record(clip, ctx, index)
    return _clip_record(clip, task, ctx, index)


def build_unit(unit: WorkUnit, ctx: BuildContext) -> UnitResult:
    """
    Turn one work unit into a corpus line, or into a skip reason
    """
    filtered: Dict[str, int] = {}
    task: Optional[TaskType] = None

    def _skipped(reason: str) -> UnitResult:
        name = task.value if task else None
        return UnitResult(unit.record_index, name, None, reason, filtered)

    try:
        task = choose_task(unit, ctx.config.builder, ctx.seed)
        record = _unit_record(unit, task, ctx, filtered)
    except SkipRecord as e:
        return _skipped(e.reason)
    except InfeasibleSequenceError as e:
        logger.debug(str(e))
        return _skipped("infeasible")
    except NotQueryableError as e:
        logger.debug(str(e))
        return _skipped("not_queryable")
    except TextGenError as e:
        logger.warning(f"unit {unit.record_index}: {e}")
        return _skipped("textgen_failed")
    except GrammarError as e:
        logger.warning(f"unit {unit.record_index}: {e}")
        return _skipped("unserializable")
    line = ConversationRow.from_record(
        f"{unit.record_index:08d}", record
    ).to_line()
    return UnitResult(
        unit.record_index, record.task.value, line, None, filtered
    )


def cmd_build(
    *,
    config: ForgeConfig,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    store: Optional[Path] = None,
    out: Optional[Path] = None,
) -> Dict[str, Any]:
    """
    Build the conversation corpus from a canonical store

    Arguments
    ---------
    config (ForgeConfig):
        run configuration
    seed (int):
        run seed, overriding `sampler.seed`
    workers (int):
        number of executor workers, `FORGE_RUNNER_WORKERS` by default
    store (Path):
        canonical store directory, `<output.directory>/store` by default
    out (Path):
        corpus directory, `<output.directory>/corpus` by default

    Return
    ------
    summary (Dict):
        corpus directory, shard names and per-task record counts
    """
    if seed is not None:
        config = config.copy(
            update=dict(sampler=config.sampler.copy(update=dict(seed=seed)))
        )
    seed = config.sampler.seed
    store = Path(store) if store is not None else default_store(config)
    out = Path(out) if out is not None else config.output.directory / "corpus"
    digest = config.digest()

    with stage_logger("build", out, digest) as run_logger:
        start = time.perf_counter()
        try:
            catalog = load_catalog(config.builder.template_catalog)
        except (OSError, ValueError) as e:
            raise StageInputError(f"Cannot load the template catalog: {e}")
        sequences, referring = load_store(store)
        run_logger.info(
            f"seed {seed}: {len(sequences)} sequences and {len(referring)} "
            f"referring rows from {store}"
        )

        warnings: List[str] = []
        if config.builder.weight(TaskType.FIT) > 0 and not any(
            has_actions(seq) for seq in sequences
        ):
            warnings.append(
                "fit records requested but no source carries action "
                "annotations; no fit record will be built"
            )
            run_logger.warning(warnings[-1])

        try:
            client = make_textgen_client(config.builder.textgen)
        except ValueError as e:
            raise StageInputError(str(e))
        ctx = BuildContext(
            config=config, seed=seed, catalog=catalog, client=client
        )
        units = plan_units(
            sequences, referring, config.sampler.clips_per_sequence
        )

        dropped: Counter = Counter()
        filtered: Counter = Counter()
        per_task: Counter = Counter()
        with closing(client), ShardWriter(
            out, shard_size=config.output.shard_size
        ) as writer:
            for result in map_units(
                partial(build_unit, ctx=ctx), units, workers=workers
            ):
                filtered.update(result.filtered)
                if result.line is None:
                    dropped[result.reason] += 1
                    continue
                writer.write(result.line)
                per_task[result.task] += 1

        emitted = sum(per_task.values())
        manifest = RunManifest(
            tool_version=__VERSION__,
            config_digest=digest,
            seed=seed,
            input_digests={
                str(p.relative_to(store)): digest_file(p)
                for p in sorted(store.glob("*.jsonl"))
            },
            stages=[
                StageReport(
                    name="build",
                    counters=StageCounters(
                        attempted=len(units),
                        emitted=emitted,
                        dropped=dict(sorted(dropped.items())),
                    ),
                    seconds=time.perf_counter() - start,
                    per_task=dict(sorted(per_task.items())),
                    filtered=dict(sorted(filtered.items())),
                )
            ],
            shards=writer.shards,
            warnings=warnings,
        )
        write_manifest(out, manifest)
        run_logger.info(
            f"{emitted} records from {len(units)} units, dropped "
            f"{dict(dropped)}, per task {dict(per_task)}"
        )
        if not emitted:
            raise StageEmptyResult(
                f"Empty corpus: none of the {len(units)} work units produced "
                f"a record (dropped: {dict(dropped)})"
            )

    return dict(
        corpus=str(out),
        manifest=str(out / MANIFEST),
        shards=[s.path for s in manifest.shards],
        records=emitted,
        per_task=dict(per_task),
        warnings=warnings,
    )
