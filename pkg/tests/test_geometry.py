import pytest
from devtools import debug
from hypothesis import given
from hypothesis import strategies as st

from foresight_forge.app.models import BoundingBox
from foresight_forge.app.models import denormalize_box
from foresight_forge.app.models import GeometryError
from foresight_forge.app.models import iou
from foresight_forge.app.models import normalize_box
from foresight_forge.app.models import NormBox
from foresight_forge.app.models import OutOfBoundsError

from .fixtures_data import make_box


def test_bounding_box_validation():
    with pytest.raises(ValueError):
        make_box(10, 0, 5, 5)
    with pytest.raises(ValueError):
        make_box(-1, 0, 5, 5)
    with pytest.raises(ValueError):
        make_box(0, 0, float("nan"), 5)
    with pytest.raises(ValueError):
        make_box(0, 0, 0, 5)

    flat = BoundingBox(xmin=3, ymin=3, xmax=3, ymax=8, degenerate=True)
    assert flat.degenerate
    # the flag follows the actual area
    full = BoundingBox(xmin=0, ymin=0, xmax=2, ymax=2, degenerate=True)
    assert not full.degenerate

    box = BoundingBox.from_xywh(10, 20, 30, 40)
    assert box.as_list() == [10, 20, 40, 60]
    assert box.center == (25, 40)


def test_iou():
    a = make_box(0, 0, 10, 10)
    assert iou(a, a) == 1.0
    assert iou(make_box(0, 0, 1, 1), make_box(5, 5, 6, 6)) == 0.0
    assert iou(a, make_box(5, 5, 15, 15)) == pytest.approx(25 / 175)
    # touching edges
    assert iou(a, make_box(10, 0, 20, 10)) == 0.0

    flat = BoundingBox(xmin=0, ymin=0, xmax=0, ymax=5, degenerate=True)
    with pytest.raises(GeometryError):
        iou(a, flat)


def test_normalize_box():
    assert normalize_box(make_box(0, 0, 640, 480), 640, 480).as_list() == [
        0,
        0,
        1000,
        1000,
    ]
    nb = normalize_box(make_box(320, 180, 640, 360), 1280, 720)
    assert nb.literal() == "[250,250,500,500]"

    tiny = normalize_box(make_box(0, 0, 0.4, 0.4), 1000, 1000)
    debug(tiny)
    assert tiny.as_list() == [0, 0, 0, 0]
    assert tiny.degenerate

    # half away from zero: 0.5 -> 1
    assert normalize_box(make_box(1, 1, 3, 3), 2000, 2000).xmin == 1

    # one pixel of overhang is clamped, more is an error
    clamped = normalize_box(make_box(10, 10, 640.8, 480), 640, 480)
    assert clamped.xmax == 1000
    with pytest.raises(OutOfBoundsError):
        normalize_box(make_box(10, 10, 700, 480), 640, 480)
    with pytest.raises(OutOfBoundsError):
        normalize_box(make_box(700, 10, 710, 20), 640, 480)
    with pytest.raises(GeometryError):
        normalize_box(make_box(0, 0, 1, 1), 0, 480)


def test_denormalize_box():
    nb = NormBox(xmin=0, ymin=0, xmax=1000, ymax=1000)
    assert denormalize_box(nb, 640, 480).as_list() == [0, 0, 640, 480]
    nb = NormBox.from_literal("[250,250,500,500]")
    assert denormalize_box(nb, 1280, 720).as_list() == [320, 180, 640, 360]
    point = denormalize_box(NormBox.from_literal("[500,500,500,500]"), 10, 10)
    assert point.degenerate


def test_norm_box_literal():
    nb = NormBox.from_literal("[1,2,3,4]")
    assert str(nb) == "[1,2,3,4]"
    for text in ("[1, 2,3,4]", "[1,2,3]", "[1,2,3,1001]", "(1,2,3,4)"):
        with pytest.raises(ValueError):
            NormBox.from_literal(text)
    with pytest.raises(ValueError):
        NormBox(xmin=5, ymin=0, xmax=4, ymax=10)


dims = st.integers(min_value=1, max_value=4000)


@st.composite
def boxes_in_image(draw):
    width, height = draw(dims), draw(dims)
    x0 = draw(st.floats(0, width, allow_nan=False))
    x1 = draw(st.floats(0, width, allow_nan=False))
    y0 = draw(st.floats(0, height, allow_nan=False))
    y1 = draw(st.floats(0, height, allow_nan=False))
    xmin, xmax = sorted((x0, x1))
    ymin, ymax = sorted((y0, y1))
    box = BoundingBox(
        xmin=xmin, ymin=ymin, xmax=xmax, ymax=ymax, degenerate=True
    )
    return box, width, height


@given(boxes_in_image())
def test_normalize_within_half_a_step(sample):
    """
    GIVEN any box inside a W x H image
    WHEN normalizing and denormalizing it
    THEN every coordinate moves by at most half a grid step
    """
    box, width, height = sample
    nb = normalize_box(box, width, height)
    back = denormalize_box(nb, width, height)
    tol_x = width / 2000 + 1e-9 * width
    tol_y = height / 2000 + 1e-9 * height
    assert abs(back.xmin - box.xmin) <= tol_x
    assert abs(back.xmax - box.xmax) <= tol_x
    assert abs(back.ymin - box.ymin) <= tol_y
    assert abs(back.ymax - box.ymax) <= tol_y


@given(
    st.lists(st.integers(0, 1000), min_size=4, max_size=4),
    dims,
    dims,
)
def test_grid_boxes_survive_a_round_trip(values, width, height):
    xmin, xmax = sorted(values[:2])
    ymin, ymax = sorted(values[2:])
    nb = NormBox(xmin=xmin, ymin=ymin, xmax=xmax, ymax=ymax)
    back = normalize_box(denormalize_box(nb, width, height), width, height)
    assert back == nb


@given(boxes_in_image(), boxes_in_image())
def test_iou_symmetric_and_bounded(first, second):
    a, b = first[0], second[0]
    if a.degenerate or b.degenerate:
        return
    value = iou(a, b)
    assert 0.0 <= value <= 1.0
    assert value == pytest.approx(iou(b, a))
