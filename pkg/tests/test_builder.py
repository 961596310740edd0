import math
import random

import pytest
from devtools import debug
from pydantic import ValidationError

from foresight_forge.app.builder import build_caption_record
from foresight_forge.app.builder import build_fit_record
from foresight_forge.app.builder import build_fpt_record
from foresight_forge.app.builder import build_reasoning_record
from foresight_forge.app.builder import build_referring_record
from foresight_forge.app.builder import compose_future
from foresight_forge.app.builder import FutureObservation
from foresight_forge.app.builder import inject_negative
from foresight_forge.app.builder import load_catalog
from foresight_forge.app.builder import NotQueryableError
from foresight_forge.app.builder import resolve_query
from foresight_forge.app.builder import select_observation
from foresight_forge.app.builder import SkipRecord
from foresight_forge.app.builder import TaskTemplate
from foresight_forge.app.builder import TemplateTextGenClient
from foresight_forge.app.builder import TextGenError
from foresight_forge.app.grammar import parse_response
from foresight_forge.app.grammar import ParseMode
from foresight_forge.app.grammar import render_frame_markers
from foresight_forge.app.grammar import serialize_trajectory
from foresight_forge.app.models import Observation
from foresight_forge.app.models import ObservationKind
from foresight_forge.app.models import ReferringRecord
from foresight_forge.app.models import TaskType

from .fixtures_data import make_box
from .fixtures_data import make_clip
from .fixtures_data import make_frames
from .fixtures_data import make_tracklet
from .fixtures_data import moving_tracklet

SEED = 2024


def test_packaged_catalog(catalog):
    names = set(catalog.by_name)
    assert {
        "caption",
        "detection",
        "tracking",
        "referring_image",
        "referring_video",
        "reasoning",
        "fit",
    } <= names
    for template in catalog.templates:
        assert len(template.question_patterns) >= 5
        assert template.negative_answer.strip()
    assert "category:[xmin,ymin,xmax,ymax]" in (
        catalog.get("detection").format_hint
    )
    with pytest.raises(KeyError):
        catalog.get("segmentation")


def test_template_validation(tmp_path):
    patterns = ["{markers} Track {query}. {format_hint}"] * 5
    TaskTemplate(
        name="tracking",
        task=TaskType.TRACKING,
        question_patterns=patterns,
        format_hint="Use <Idi>Frame t:[xmin,ymin,xmax,ymax]</Idi>.",
        negative_answer="No.",
    )
    with pytest.raises(ValidationError, match="format_hint"):
        TaskTemplate(
            name="tracking",
            task=TaskType.TRACKING,
            question_patterns=["{markers} Track {query}."] * 5,
            format_hint="Use the grammar.",
            negative_answer="No.",
        )
    with pytest.raises(ValidationError, match="markers"):
        TaskTemplate(
            name="caption",
            task=TaskType.CAPTION,
            question_patterns=["Describe the image."] * 5,
            negative_answer="No.",
        )
    with pytest.raises(ValidationError, match="At least 5"):
        TaskTemplate(
            name="caption",
            task=TaskType.CAPTION,
            question_patterns=["{markers} Describe."] * 4,
            negative_answer="No.",
        )

    broken = tmp_path / "catalog.json"
    broken.write_text('{"templates": [{"name": "x"}]}')
    with pytest.raises(ValidationError):
        load_catalog(broken)


def test_select_observation():
    first = make_frames(1)[0]
    plain = moving_tracklet(1, 3)
    kinds = {
        select_observation(plain, first, random.Random(i)).kind
        for i in range(20)
    }
    assert kinds == {ObservationKind.LOCATION}
    obs = select_observation(plain, first, random.Random(0))
    assert obs.text == "[16,208,78,458]"

    rich = moving_tracklet(
        2, 3, appearance="a man in red", action="running to the left"
    )
    drawn = [
        select_observation(rich, first, random.Random(i)) for i in range(30)
    ]
    assert {o.kind for o in drawn} == set(ObservationKind)
    assert drawn[4] == select_observation(rich, first, random.Random(4))

    late = make_tracklet(3, {2: (0, 0, 50, 50)})
    with pytest.raises(NotQueryableError):
        select_observation(late, first, random.Random(0))


def test_resolve_query_disambiguates():
    """
    GIVEN two first-frame persons sharing the same appearance text
    WHEN resolving an appearance observation of the second one
    THEN the lowest id is queried and its location is appended
    """
    first = make_frames(1)[0]
    a = make_tracklet(4, {1: (64, 48, 128, 96)}, appearance="in red")
    b = make_tracklet(9, {1: (320, 240, 384, 288)}, appearance="in red")
    obs = Observation(
        kind=ObservationKind.APPEARANCE, text="in red", subject_id=9
    )
    chosen, query = resolve_query(obs, b, [a, b], first)
    debug(query)
    assert chosen.id == 4
    assert query == (
        "the person described as in red located at [100,100,200,200]"
    )

    lone, query = resolve_query(obs, b, [b], first)
    assert lone.id == 9
    assert query == "the person described as in red"


def test_tracking_record(catalog):
    """
    GIVEN a three-frame clip with one unannotated subject
    WHEN building a tracking record
    THEN the question embeds the first-frame box and the answer is the
         whole trajectory
    """
    tracklet = make_tracklet(
        5,
        {
            1: (64, 48, 128, 96),
            2: (96, 48, 160, 96),
            3: (128, 48, 192, 96),
        },
    )
    clip = make_clip(3, [tracklet])
    template = catalog.get("tracking")
    record = build_fpt_record(clip, template, SEED, 0)
    debug(record)
    assert record.task == TaskType.TRACKING
    assert record.question.startswith(render_frame_markers(clip))
    assert "[100,100,200,200]" in record.question
    assert template.format_hint in record.question
    assert record.answer == serialize_trajectory(
        [tracklet], clip.frames, category="person"
    )
    assert record.observation.kind == ObservationKind.LOCATION
    assert record.observation.subject_id == 5
    assert parse_response(record.answer, ParseMode.STRICT).ok
    assert record.answer not in record.question
    assert record.template.startswith("tracking#")

    assert build_fpt_record(clip, template, SEED, 0) == record
    bare = build_fpt_record(
        clip, template, SEED, 0, category_prefix=False
    )
    assert bare.answer.startswith("<Id1>")


def test_detection_record(catalog):
    clip = make_clip(
        1,
        [
            make_tracklet(1, {1: (64, 48, 128, 96)}),
            make_tracklet(2, {1: (320, 240, 384, 288)}, category="dog"),
            make_tracklet(3, {1: (0, 0, 64, 48)}),
        ],
    )
    record = build_fpt_record(clip, catalog.get("detection"), SEED, 3)
    debug(record.question)
    assert record.answer == (
        "person:[0,0,100,100],[100,100,200,200];dog:[500,500,600,600]"
    )
    parsed = parse_response(record.answer, ParseMode.STRICT)
    assert parsed.ok and len(parsed.detections) == 3
    assert "person, dog" in record.question

    with pytest.raises(SkipRecord) as e:
        build_fpt_record(make_clip(1), catalog.get("detection"), SEED, 3)
    assert e.value.reason == "empty_clip"
    with pytest.raises(ValueError):
        build_fpt_record(
            make_clip(2, [moving_tracklet(1, 2)]),
            catalog.get("detection"),
            SEED,
            3,
        )


def test_tracking_not_queryable(catalog):
    clip = make_clip(3, [make_tracklet(1, {2: (0, 0, 50, 50)})])
    with pytest.raises(SkipRecord) as e:
        build_fpt_record(clip, catalog.get("tracking"), SEED, 0)
    assert e.value.reason == "not_queryable"


def test_inject_negative(catalog):
    clip = make_clip(1, [make_tracklet(1, {1: (64, 48, 128, 96)})])
    template = catalog.get("detection")
    record = inject_negative(
        clip, template, SEED, 0, ratio=1.0, distractors=["person", "dog"]
    )
    debug(record)
    assert record.is_negative
    assert "dog" in record.question
    assert record.answer == template.negative_answer
    assert record == inject_negative(
        clip, template, SEED, 0, ratio=1.0, distractors=["person", "dog"]
    )

    assert all(
        inject_negative(
            clip, template, SEED, i, ratio=0.0, distractors=["dog"]
        )
        is None
        for i in range(50)
    )
    with pytest.raises(SkipRecord) as e:
        inject_negative(
            clip, template, SEED, 0, ratio=1.0, distractors=["Person"]
        )
    assert e.value.reason == "distractors_exhausted"
    with pytest.raises(ValueError):
        inject_negative(
            clip,
            catalog.get("caption"),
            SEED,
            0,
            ratio=1.0,
            distractors=["dog"],
        )


def test_negative_frequency(catalog):
    """
    GIVEN a negative ratio of 0.1
    WHEN drawing negatives for 10000 record indices
    THEN the count stays within 3 standard deviations of the binomial mean
    """
    clip = make_clip(3, [moving_tracklet(1, 3)])
    template = catalog.get("tracking")
    n, ratio = 10_000, 0.1
    count = sum(
        inject_negative(
            clip, template, SEED, i, ratio=ratio, distractors=["dog", "cat"]
        )
        is not None
        for i in range(n)
    )
    debug(count)
    sigma = math.sqrt(n * ratio * (1 - ratio))
    assert abs(count - n * ratio) <= 3 * sigma


def test_compose_future():
    client = TemplateTextGenClient()
    frames = make_frames(3)
    runner = moving_tracklet(1, 3)
    future = compose_future(
        [(runner, "running toward the goal")], client, frames
    )
    debug(future)
    assert "running toward the goal" in future.text
    assert future.basis == [(1, "running toward the goal")]
    assert future == compose_future(
        [(runner, "running toward the goal")], client, frames
    )

    keeper = moving_tracklet(2, 3, start=(300, 100))
    both = compose_future(
        [(runner, "dribbling forward"), (keeper, "diving to the right")],
        client,
        frames,
    )
    assert "dribbling forward" in both.text
    assert "diving to the right" in both.text
    assert [subject_id for subject_id, _ in both.basis] == [1, 2]

    with pytest.raises(ValueError):
        compose_future([], client, frames)
    with pytest.raises(ValueError):
        compose_future([(runner, " ")], client, frames)


def test_compose_future_empty_output():
    class Silent:
        capability = "external"

        def generate(self, prompt: str) -> str:
            return "  "

    with pytest.raises(TextGenError) as e:
        compose_future(
            [(moving_tracklet(1, 2), "jumping")], Silent(), make_frames(2)
        )
    assert not e.value.retriable
    assert e.value.prompt_hash


def test_fit_record(catalog):
    """
    GIVEN two acting subjects and their composed future
    WHEN building the FIT record
    THEN the answer holds the trajectories first and the future text last
    """
    frames = make_frames(3)
    player = moving_tracklet(1, 3, action="dribbling forward")
    defender = moving_tracklet(
        2, 3, start=(300, 100), step=(-5, 0), action="running to the left"
    )
    clip = make_clip(3, [player, defender])
    future = compose_future(
        [(player, player.action), (defender, defender.action)],
        TemplateTextGenClient(),
        frames,
    )
    record = build_fit_record(clip, future, catalog.get("fit"), SEED, 11)
    debug(record.answer)
    assert record.task == TaskType.FIT
    assert record.future_text == future.text
    assert record.answer.endswith(future.text)
    assert record.answer.rindex("</Id2>") < record.answer.index(future.text)
    assert record.answer.startswith(
        serialize_trajectory([player, defender], frames)
    )
    assert parse_response(record.answer, ParseMode.LENIENT).ok
    assert record.observation.subject_id in (1, 2)

    with pytest.raises(ValidationError):
        FutureObservation(text=" ", basis=[(1, "x")])
    with pytest.raises(ValueError):
        build_fit_record(
            make_clip(1, [make_tracklet(1, {1: (0, 0, 50, 50)})]),
            future,
            catalog.get("fit"),
            SEED,
            0,
        )


def test_caption_record(catalog):
    image = make_frames(1)[0]
    template = catalog.get("caption")
    record = build_caption_record(image, "a red car", template, SEED, 0)
    assert record.answer == "a red car"
    assert record.question.startswith("Frame 1:<image>")
    assert record == build_caption_record(
        image, "a red car", template, SEED, 0
    )
    with pytest.raises(SkipRecord):
        build_caption_record(image, "  ", template, SEED, 0)


def test_referring_records(catalog):
    frames = make_frames(1)
    image_ref = ReferringRecord(
        dataset="refcoco",
        record_id="r1",
        frames=frames,
        expression="the dog on the left",
        target=make_box(64, 48, 128, 96),
    )
    record = build_referring_record(
        image_ref, catalog.get("referring_image"), SEED, 0
    )
    assert record.answer == "[100,100,200,200]"
    assert "the dog on the left" in record.question
    assert record.source == "refcoco/r1"

    video_ref = ReferringRecord(
        dataset="refvos",
        record_id="v1",
        frames=make_frames(3),
        expression="the car moving right",
        target=moving_tracklet(1, 3, category="car"),
    )
    record = build_referring_record(
        video_ref, catalog.get("referring_video"), SEED, 1
    )
    assert record.answer.startswith("<Id1>Frame 1:")
    assert parse_response(record.answer, ParseMode.STRICT).ok

    reasoning_ref = ReferringRecord(
        dataset="vcr",
        record_id="q1",
        frames=frames,
        expression="What is the man holding?",
        target=make_box(64, 48, 128, 96),
        task="reasoning",
        rationale="The man at {box} holds an umbrella.",
    )
    record = build_reasoning_record(
        reasoning_ref, catalog.get("reasoning"), SEED, 2
    )
    assert record.task == TaskType.REASONING
    assert record.answer == "The man at [100,100,200,200] holds an umbrella."
