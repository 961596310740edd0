"""
Clip sampling and per-clip filtering

Every random draw goes through a generator seeded from `(cfg.seed,
record_index)`; nothing here depends on call order.
"""
import logging
from typing import List
from typing import MutableMapping
from typing import Optional

from pydantic import BaseModel
from pydantic import conint
from pydantic import Field
from pydantic import root_validator
from pydantic import validator

from ..utils import record_rng
from .models import ClipSample
from .models import SourceSequence

logger = logging.getLogger(__name__)

__all__ = (
    "SamplerConfig",
    "InfeasibleSequenceError",
    "sample_clip",
    "filter_small",
    "cap_categories",
    "single_frame_clip",
)


class InfeasibleSequenceError(ValueError):
    pass


class SamplerConfig(BaseModel):
    """
    Attributes
    ----------
    frame_counts: List[int]
        candidate number of frames per clip
    gaps: List[int]
        candidate source-frame interval between consecutive clip frames
    min_size_divisor: int
        boxes narrower than `width / divisor` (or shorter than
        `height / divisor`) disqualify their tracklet
    max_categories: int
        category cap for detection clips
    seed: int
        run seed (64 bit)
    max_frames: int
        upper bound for any clip length
    clips_per_sequence: int
        number of clips drawn from each multi-frame source sequence
    """

    frame_counts: List[conint(ge=1)] = Field(  # type: ignore
        default_factory=lambda: [3, 4, 5]
    )
    gaps: List[conint(ge=1)] = Field(  # type: ignore
        default_factory=lambda: [3, 4, 5]
    )
    min_size_divisor: conint(ge=1) = 32  # type: ignore
    max_categories: conint(ge=1) = 15  # type: ignore
    seed: conint(ge=0, lt=2**64) = 0  # type: ignore
    max_frames: conint(ge=1) = 5  # type: ignore
    clips_per_sequence: conint(ge=1) = 1  # type: ignore

    @validator("frame_counts", "gaps")
    def nonempty_set(cls, value):
        if not value:
            raise ValueError("frame_counts and gaps must be nonempty")
        return sorted(set(value))

    @root_validator(skip_on_failure=True)
    def counts_within_max(cls, values):
        if max(values["frame_counts"]) > values["max_frames"]:
            raise ValueError(
                f"frame_counts {values['frame_counts']} exceed max_frames "
                f"{values['max_frames']}"
            )
        return values


def _span(k: int, g: int) -> int:
    return 1 + (k - 1) * g


def sample_clip(
    seq: SourceSequence, cfg: SamplerConfig, record_index: int
) -> ClipSample:
    """
    Draw a clip of `k` frames spaced by `g` source frames

    `k` and `g` are drawn uniformly; when the sequence is too short for the
    draw, smaller values are tried, larger gaps first.
    """
    n = seq.length
    rng = record_rng(cfg.seed, record_index, "clip")
    k_drawn = rng.choice(cfg.frame_counts)
    g_drawn = rng.choice(cfg.gaps)

    chosen = None
    for g in sorted((g for g in cfg.gaps if g <= g_drawn), reverse=True):
        for k in sorted(
            (k for k in cfg.frame_counts if k <= k_drawn), reverse=True
        ):
            if _span(k, g) <= n:
                chosen = (k, g)
                break
        if chosen:
            break
    if chosen is None:
        raise InfeasibleSequenceError(
            f"Sequence {seq.dataset}/{seq.sequence_id} has {n} frames, "
            f"at least {_span(cfg.frame_counts[0], cfg.gaps[0])} needed"
        )
    k, g = chosen
    if (k, g) != (k_drawn, g_drawn):
        logger.debug(
            f"{seq.sequence_id}: draw k={k_drawn}, g={g_drawn} infeasible "
            f"over {n} frames, using k={k}, g={g}"
        )

    start = rng.randint(1, n - _span(k, g) + 1)
    source_indices = [start + i * g for i in range(k)]
    frame_map = {src: pos for pos, src in enumerate(source_indices, start=1)}
    tracklets = [
        restricted
        for restricted in (t.restricted(frame_map) for t in seq.tracklets)
        if restricted is not None
    ]
    return ClipSample(
        frames=[
            seq.frame(src).reindexed(pos) for src, pos in frame_map.items()
        ],
        tracklets=tracklets,
        source_dataset=seq.dataset,
        sequence_id=seq.sequence_id,
        gap=g,
    )


def single_frame_clip(seq: SourceSequence, frame_index: int = 1) -> ClipSample:
    tracklets = [
        restricted
        for restricted in (
            t.restricted({frame_index: 1}) for t in seq.tracklets
        )
        if restricted is not None
    ]
    return ClipSample(
        frames=[seq.frame(frame_index).reindexed(1)],
        tracklets=tracklets,
        source_dataset=seq.dataset,
        sequence_id=seq.sequence_id,
        gap=0,
    )


def filter_small(
    clip: ClipSample,
    cfg: SamplerConfig,
    counters: Optional[MutableMapping[str, int]] = None,
) -> ClipSample:
    """
    Remove every tracklet with at least one box below `1/divisor` of the
    image width or height

    A box exactly at the threshold is kept. Removals are added to
    `counters["too_small"]` when a counter mapping is given.
    """
    kept = []
    for tracklet in clip.tracklets:
        too_small = False
        for index, box in tracklet.boxes.items():
            frame = clip.frame(index)
            if (
                box.width < frame.width / cfg.min_size_divisor
                or box.height < frame.height / cfg.min_size_divisor
            ):
                too_small = True
                break
        if too_small:
            logger.debug(
                f"{clip.sequence_id}: tracklet {tracklet.id} "
                f"({tracklet.category}) removed, box below "
                f"1/{cfg.min_size_divisor} of the image"
            )
            continue
        kept.append(tracklet)

    removed = len(clip.tracklets) - len(kept)
    if counters is not None and removed:
        counters["too_small"] = counters.get("too_small", 0) + removed
    if not removed:
        return clip
    return clip.with_tracklets(kept)


def cap_categories(
    clip: ClipSample, cfg: SamplerConfig, record_index: int
) -> ClipSample:
    categories = sorted(clip.categories)
    if len(categories) <= cfg.max_categories:
        return clip
    rng = record_rng(cfg.seed, record_index, "categories")
    selected = set(rng.sample(categories, cfg.max_categories))
    return clip.with_tracklets(
        t for t in clip.tracklets if t.category in selected
    )
