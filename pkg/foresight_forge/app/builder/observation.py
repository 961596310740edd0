import random
from typing import List
from typing import Sequence
from typing import Tuple

from ..models import FrameRef
from ..models import normalize_box
from ..models import Observation
from ..models import ObservationKind
from ..models import Tracklet
from .errors import NotQueryableError


def available_kinds(subject: Tracklet) -> List[ObservationKind]:
    kinds = [ObservationKind.LOCATION]
    if subject.appearance:
        kinds.append(ObservationKind.APPEARANCE)
    if subject.action:
        kinds.append(ObservationKind.ACTION)
    return kinds


def select_observation(
    subject: Tracklet, first_frame: FrameRef, rng: random.Random
) -> Observation:
    """
    Draw the first-frame observation used to query `subject`

    The kind is uniform over the kinds the subject is annotated with;
    location is always available.
    """
    if 1 not in subject.boxes:
        raise NotQueryableError(
            f"Subject {subject.id} first appears on frame "
            f"{subject.first_frame}, not on frame 1"
        )
    kind = rng.choice(available_kinds(subject))
    if kind == ObservationKind.LOCATION:
        text = normalize_box(
            subject.boxes[1], first_frame.width, first_frame.height
        ).literal()
    elif kind == ObservationKind.APPEARANCE:
        text = subject.appearance  # type: ignore
    else:
        text = subject.action  # type: ignore
    return Observation(kind=kind, text=text, subject_id=subject.id)


def resolve_query(
    observation: Observation,
    subject: Tracklet,
    candidates: Sequence[Tracklet],
    first_frame: FrameRef,
) -> Tuple[Tracklet, str]:
    """
    Turn an observation into the query phrase of a question

    When several first-frame subjects of the same category share the
    appearance or action text, the lowest id among them is queried and the
    phrase gets its first-frame location appended.
    """
    category = subject.category
    if observation.kind == ObservationKind.LOCATION:
        return subject, f"the {category} at {observation.text}"

    attr = observation.kind.value
    matching = sorted(
        (
            t
            for t in candidates
            if 1 in t.boxes
            and t.category == category
            and getattr(t, attr) == observation.text
        ),
        key=lambda t: t.id,
    )
    if observation.kind == ObservationKind.APPEARANCE:
        phrase = f"the {category} described as {observation.text}"
    else:
        phrase = f"the {category} that is {observation.text}"
    if len(matching) <= 1:
        return subject, phrase
    chosen = matching[0]
    box = normalize_box(chosen.boxes[1], first_frame.width, first_frame.height)
    return chosen, f"{phrase} located at {box.literal()}"
