"""
Construction of conversation records

Every builder draws its randomness from `record_rng(seed, record_index,
<salt>)` and records the derived seed in `seed_trace`.
"""
import logging
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

from pydantic import BaseModel
from pydantic import validator

from ...utils import derive_seed
from ...utils import record_rng
from ..grammar import encode_trajectory
from ..grammar import render_frame_markers
from ..grammar import serialize_detection
from ..grammar import serialize_trajectory
from ..models import ClipSample
from ..models import ConversationRecord
from ..models import FrameRef
from ..models import normalize_box
from ..models import Observation
from ..models import ReferringRecord
from ..models import TaskType
from ..models import Tracklet
from .errors import NotQueryableError
from .errors import SkipRecord
from .observation import resolve_query
from .observation import select_observation
from .templates import TaskTemplate
from .textgen import prompt_hash
from .textgen import TextGenClient
from .textgen import TextGenError

logger = logging.getLogger(__name__)

NEGATIVE_TASKS = (TaskType.DETECTION, TaskType.TRACKING, TaskType.REFERRING)


class FutureObservation(BaseModel):
    """
    Deduced forthcoming event, with the `(subject id, action)` pairs it was
    composed from
    """

    text: str
    basis: List[Tuple[int, str]]

    class Config:
        allow_mutation = False

    @validator("text")
    def text_not_empty(cls, value):
        if not value.strip():
            raise ValueError("Future observation text must be nonempty")
        return value

    @validator("basis")
    def basis_not_empty(cls, value):
        if not value:
            raise ValueError("Future observation basis must be nonempty")
        return value


def _source(clip: ClipSample) -> str:
    return f"{clip.source_dataset}/{clip.sequence_id}"


def _template_ref(template: TaskTemplate, index: int) -> str:
    return f"{template.name}#{index}"


def _query_subject(
    clip: ClipSample, candidates: Sequence[Tracklet], rng
) -> Tuple[Tracklet, Observation, str]:
    queryable = [t for t in candidates if 1 in t.boxes]
    if not queryable:
        raise NotQueryableError(
            f"{_source(clip)}: no subject appears on the first frame"
        )
    subject = rng.choice(queryable)
    first = clip.frame(1)
    observation = select_observation(subject, first, rng)
    chosen, query = resolve_query(observation, subject, candidates, first)
    if chosen.id != subject.id:
        observation = observation.copy(update=dict(subject_id=chosen.id))
    return chosen, observation, query


def build_fpt_record(
    clip: ClipSample,
    template: TaskTemplate,
    seed: int,
    record_index: int,
    *,
    category_prefix: bool = True,
) -> ConversationRecord:
    """
    Detection or tracking record over a sampled clip

    Detection clips have a single frame and are answered in the
    `cat:[box],[box];cat:[box]` form; tracking clips query one first-frame
    subject and are answered with its whole trajectory.
    """
    rng = record_rng(seed, record_index, "fpt")
    markers = render_frame_markers(clip)
    if not clip.tracklets:
        raise SkipRecord("empty_clip", f"{_source(clip)}: no tracklet left")

    observation = None
    if template.task == TaskType.DETECTION:
        if len(clip.frames) != 1:
            raise ValueError(
                f"Detection records need a single frame, got "
                f"{len(clip.frames)}"
            )
        frame = clip.frame(1)
        objects = [
            (t.category, normalize_box(t.boxes[1], frame.width, frame.height))
            for t in clip.tracklets
        ]
        query = ", ".join(clip.categories)
        answer = serialize_detection(objects)
    elif template.task == TaskType.TRACKING:
        if len(clip.frames) < 2:
            raise ValueError("Tracking records need at least two frames")
        try:
            subject, observation, query = _query_subject(
                clip, clip.tracklets, rng
            )
        except NotQueryableError as e:
            raise SkipRecord("not_queryable", str(e))
        answer = serialize_trajectory(
            [subject],
            clip.frames,
            category=subject.category if category_prefix else None,
        )
    else:
        raise ValueError(f"Template task {template.task} is not an FPT task")

    question, index = template.render(rng, markers, query)
    return ConversationRecord(
        task=template.task,
        frames=clip.frames,
        question=question,
        answer=answer,
        observation=observation,
        seed_trace=derive_seed(seed, record_index, "fpt"),
        source=_source(clip),
        template=_template_ref(template, index),
    )


def inject_negative(
    clip: ClipSample,
    template: TaskTemplate,
    seed: int,
    record_index: int,
    *,
    ratio: float,
    distractors: Sequence[str],
) -> Optional[ConversationRecord]:
    """
    With probability `ratio`, build a record querying an absent category

    Returns None when the seeded draw does not ask for a negative sample.
    The distractor is drawn from `distractors` minus the categories present
    in the clip; the answer is `template.negative_answer`.
    """
    if template.task not in NEGATIVE_TASKS:
        raise ValueError(f"No negative samples for {template.task.value}")
    rng = record_rng(seed, record_index, "negative")
    if ratio <= 0 or rng.random() >= ratio:
        return None

    present = {c.lower() for c in clip.categories}
    candidates = sorted(
        {d for d in distractors if d.strip() and d.lower() not in present}
    )
    if not candidates:
        raise SkipRecord(
            "distractors_exhausted",
            f"{_source(clip)}: every distractor is present in the clip",
        )
    distractor = rng.choice(candidates)
    if template.task == TaskType.DETECTION:
        query = distractor
    else:
        query = f"the {distractor}"
    question, index = template.render(
        rng, render_frame_markers(clip), query
    )
    return ConversationRecord(
        task=template.task,
        frames=clip.frames,
        question=question,
        answer=template.negative_answer,
        is_negative=True,
        seed_trace=derive_seed(seed, record_index, "negative"),
        source=_source(clip),
        template=_template_ref(template, index),
    )


def _future_prompt(
    basis: Sequence[Tuple[Tracklet, str]], frames: Sequence[FrameRef]
) -> str:
    encoded = encode_trajectory([t for t, _ in basis], frames)
    lines = [
        f"The following trajectories describe {len(basis)} subject(s) over "
        f"{len(frames)} video frames; boxes are [xmin,ymin,xmax,ymax] on a "
        "0-1000 grid.",
        encoded.text,
        "Actions observed:",
    ]
    for tracklet, action in basis:
        label = f"the {tracklet.category} (Id {encoded.id_map[tracklet.id]})"
        lines.append(f"- {label}: {action}")
    lines.append(
        "Using only this information and common-sense priors, formulate a "
        "question about what is likely to happen next and answer it. Reply "
        "with the answer only, in one or two sentences, without Id tokens."
    )
    return "\n".join(lines)


def compose_future(
    basis: Sequence[Tuple[Tracklet, str]],
    client: TextGenClient,
    frames: Sequence[FrameRef],
) -> FutureObservation:
    """
    Ask `client` for the likely future of the subjects in `basis`

    `basis` pairs each subject with its action description; the prompt
    carries their trajectories over `frames`.
    """
    if not basis:
        raise ValueError("compose_future needs at least one subject")
    for tracklet, action in basis:
        if not action or not action.strip():
            raise ValueError(f"Subject {tracklet.id} has no action text")
    prompt = _future_prompt(basis, frames)
    text = client.generate(prompt)
    if not text or not text.strip():
        raise TextGenError(
            "Empty completion",
            prompt_hash=prompt_hash(prompt),
            retriable=False,
        )
    return FutureObservation(
        text=text.strip(),
        basis=[(tracklet.id, action) for tracklet, action in basis],
    )


def build_fit_record(
    clip: ClipSample,
    future: FutureObservation,
    template: TaskTemplate,
    seed: int,
    record_index: int,
) -> ConversationRecord:
    """
    Trajectory chain-of-thought record: the answer lists the trajectories
    of the basis subjects first and appends the future text after them
    """
    if len(clip.frames) < 2:
        raise ValueError("FIT records need at least two frames")
    if not future.text.strip():
        raise ValueError("FIT records need a nonempty future text")
    basis_ids = [subject_id for subject_id, _ in future.basis]
    subjects = [t for t in clip.tracklets if t.id in basis_ids]
    if not subjects:
        raise NotQueryableError(f"{_source(clip)}: basis subjects not found")

    rng = record_rng(seed, record_index, "fit")
    _, observation, query = _query_subject(clip, subjects, rng)
    trajectory = serialize_trajectory(subjects, clip.frames)
    question, index = template.render(rng, render_frame_markers(clip), query)
    return ConversationRecord(
        task=TaskType.FIT,
        frames=clip.frames,
        question=question,
        answer=f"{trajectory} {future.text}",
        observation=observation,
        future_text=future.text,
        seed_trace=derive_seed(seed, record_index, "fit"),
        source=_source(clip),
        template=_template_ref(template, index),
    )


def build_caption_record(
    image: FrameRef,
    caption: str,
    template: TaskTemplate,
    seed: int,
    record_index: int,
    *,
    source: str = "",
) -> ConversationRecord:
    if not caption or not caption.strip():
        raise SkipRecord("empty_caption")
    rng = record_rng(seed, record_index, "caption")
    question, index = template.render(rng, render_frame_markers([image]))
    return ConversationRecord(
        task=TaskType.CAPTION,
        frames=[image.reindexed(1)],
        question=question,
        answer=caption,
        seed_trace=derive_seed(seed, record_index, "caption"),
        source=source,
        template=_template_ref(template, index),
    )


def build_referring_record(
    ref: ReferringRecord,
    template: TaskTemplate,
    seed: int,
    record_index: int,
) -> ConversationRecord:
    """
    Image referring is answered with the target box literal, video
    referring with the target trajectory
    """
    rng = record_rng(seed, record_index, "referring")
    target = ref.target_tracklet
    if len(ref.frames) == 1:
        frame = ref.frames[0]
        answer = normalize_box(
            target.boxes[1], frame.width, frame.height
        ).literal()
    else:
        answer = serialize_trajectory([target], ref.frames)
    question, index = template.render(
        rng, render_frame_markers(ref.frames), ref.expression
    )
    return ConversationRecord(
        task=TaskType.REFERRING,
        frames=ref.frames,
        question=question,
        answer=answer,
        seed_trace=derive_seed(seed, record_index, "referring"),
        source=f"{ref.dataset}/{ref.record_id}",
        template=_template_ref(template, index),
    )


def build_reasoning_record(
    ref: ReferringRecord,
    template: TaskTemplate,
    seed: int,
    record_index: int,
) -> ConversationRecord:
    """
    Pre-converted visual reasoning row; `{box}` in the rationale becomes
    the normalized box of the target on its first frame
    """
    if not ref.rationale:
        raise SkipRecord("missing_rationale")
    rng = record_rng(seed, record_index, "reasoning")
    target = ref.target_tracklet
    frame = ref.frames[target.first_frame - 1]
    literal = normalize_box(
        target.boxes[target.first_frame], frame.width, frame.height
    ).literal()
    question, index = template.render(
        rng, render_frame_markers(ref.frames), ref.expression
    )
    return ConversationRecord(
        task=TaskType.REASONING,
        frames=ref.frames,
        question=question,
        answer=ref.rationale.replace("{box}", literal),
        seed_trace=derive_seed(seed, record_index, "reasoning"),
        source=f"{ref.dataset}/{ref.record_id}",
        template=_template_ref(template, index),
    )
