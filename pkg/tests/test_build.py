import pytest
from devtools import debug

from foresight_forge.app.builder import TemplateTextGenClient
from foresight_forge.app.grammar import parse_response
from foresight_forge.app.grammar import ParseMode
from foresight_forge.app.models import TaskType
from foresight_forge.app.sampler import cap_categories
from foresight_forge.app.sampler import SamplerConfig
from foresight_forge.app.schemas import ConversationRow
from foresight_forge.config import BuilderConfig
from foresight_forge.config import ForgeConfig
from foresight_forge.tasks import cmd_build
from foresight_forge.tasks import cmd_ingest
from foresight_forge.tasks.build import build_unit
from foresight_forge.tasks.build import BuildContext
from foresight_forge.tasks.build import UnitKind
from foresight_forge.tasks.build import WorkUnit

from .fixtures_data import make_sequence
from .fixtures_data import make_tracklet
from .fixtures_data import moving_tracklet


def _context(catalog, task: TaskType, client=None) -> BuildContext:
    config = ForgeConfig(
        sampler=SamplerConfig(frame_counts=[2], gaps=[1], max_categories=1),
        builder=BuilderConfig(negative_ratio=0.0, task_weights={task: 1.0}),
    )
    return BuildContext(
        config=config,
        seed=0,
        catalog=catalog,
        client=client or TemplateTextGenClient(),
    )


def _image(*categories: str):
    return make_sequence(
        1,
        [
            make_tracklet(i, {1: (100 * i, 50, 100 * i + 60, 130)}, category=c)
            for i, c in enumerate(categories, start=1)
        ],
    )


@pytest.fixture
def cap_spy(mocker):
    return mocker.patch(
        "foresight_forge.tasks.build.cap_categories", wraps=cap_categories
    )


def test_category_cap_on_detection(catalog, cap_spy):
    """
    GIVEN an image with three categories and a cap of one category
    WHEN building its detection record
    THEN the answer lists a single category
    """
    ctx = _context(catalog, TaskType.DETECTION)
    unit = WorkUnit(0, UnitKind.IMAGE, _image("person", "dog", "car"))
    result = build_unit(unit, ctx)
    debug(result)
    assert result.task == "detection"
    record = ConversationRow.parse_raw(result.line).to_record()
    parsed = parse_response(record.answer, ParseMode.STRICT)
    assert len({category for category, _ in parsed.detections}) == 1
    assert cap_spy.call_count == 1


def test_category_cap_skips_tracking(catalog, cap_spy):
    """
    GIVEN a video with three categories and a cap of one category
    WHEN building a tracking record from it
    THEN the cap is not applied to the clip
    """
    seq = make_sequence(
        4,
        [
            moving_tracklet(1, 4, category="person"),
            moving_tracklet(2, 4, start=(300, 100), category="dog"),
            moving_tracklet(3, 4, start=(100, 300), category="car"),
        ],
    )
    ctx = _context(catalog, TaskType.TRACKING)
    result = build_unit(WorkUnit(0, UnitKind.VIDEO, seq), ctx)
    debug(result)
    assert result.task == "tracking"
    assert result.line is not None
    cap_spy.assert_not_called()


def test_unserializable_category_is_skipped(catalog):
    """
    GIVEN an image whose category holds a reserved character
    WHEN building its detection record
    THEN the unit is skipped with a named reason instead of failing the
         whole build
    """
    ctx = _context(catalog, TaskType.DETECTION)
    unit = WorkUnit(3, UnitKind.IMAGE, _image("hot dog, grilled"))
    result = build_unit(unit, ctx)
    assert result.line is None
    assert result.reason == "unserializable"
    assert result.record_index == 3


def test_build_closes_textgen_client(forge_config, mocker):
    cmd_ingest(config=forge_config)
    client = TemplateTextGenClient()
    close = mocker.spy(client, "close")
    mocker.patch(
        "foresight_forge.tasks.build.make_textgen_client", return_value=client
    )
    cmd_build(config=forge_config)
    close.assert_called_once()
