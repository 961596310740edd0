"""
Axis-aligned boxes in pixel space and on the normalized 0-1000 grid

Boxes are stored in pixel space everywhere in the canonical model; the
normalized grid only appears when boxes are written into, or read back from,
conversation text.
"""
import math
import re
from typing import List
from typing import Tuple

from pydantic import BaseModel
from pydantic import conint
from pydantic import root_validator

NORM_RANGE = 1000

# Coordinates overhanging the image by at most this many pixels are clamped.
CLAMP_TOLERANCE = 1.0

_LITERAL = re.compile(r"\[(\d+),(\d+),(\d+),(\d+)\]")

__all__ = (
    "NORM_RANGE",
    "BoundingBox",
    "NormBox",
    "GeometryError",
    "OutOfBoundsError",
    "iou",
    "normalize_box",
    "denormalize_box",
)


class GeometryError(ValueError):
    pass


class OutOfBoundsError(GeometryError):
    pass


class BoundingBox(BaseModel):
    """
    Pixel-space box, origin at the top-left corner of the image

    Attributes
    ----------
    xmin, ymin, xmax, ymax: float
        corner coordinates in pixels
    degenerate: bool
        zero-area boxes are only accepted when this flag is set; on
        construction the flag is reset to the actual zero-area status
    """

    xmin: float
    ymin: float
    xmax: float
    ymax: float
    degenerate: bool = False

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def check_corners(cls, values):
        xmin, ymin = values["xmin"], values["ymin"]
        xmax, ymax = values["xmax"], values["ymax"]
        coords = (xmin, ymin, xmax, ymax)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"Box coordinates must be finite, got {coords}")
        if any(c < 0 for c in coords):
            raise ValueError(f"Box coordinates must be >= 0, got {coords}")
        if xmin > xmax or ymin > ymax:
            raise ValueError(f"Box corners are swapped: {coords}")
        zero_area = xmin == xmax or ymin == ymax
        if zero_area and not values["degenerate"]:
            raise ValueError(f"Zero-area box {coords} not flagged degenerate")
        values["degenerate"] = zero_area
        return values

    @classmethod
    def from_xywh(
        cls, x: float, y: float, w: float, h: float
    ) -> "BoundingBox":
        return cls(xmin=x, ymin=y, xmax=x + w, ymax=y + h)

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> Tuple[float, float]:
        return ((self.xmin + self.xmax) / 2, (self.ymin + self.ymax) / 2)

    def as_list(self) -> List[float]:
        return [self.xmin, self.ymin, self.xmax, self.ymax]


class NormBox(BaseModel):
    """
    Box on the integer grid [0, 1000] used inside conversation text
    """

    xmin: conint(ge=0, le=NORM_RANGE)  # type: ignore
    ymin: conint(ge=0, le=NORM_RANGE)  # type: ignore
    xmax: conint(ge=0, le=NORM_RANGE)  # type: ignore
    ymax: conint(ge=0, le=NORM_RANGE)  # type: ignore

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def check_order(cls, values):
        if values["xmin"] > values["xmax"] or values["ymin"] > values["ymax"]:
            raise ValueError(
                "Normalized box corners are swapped: "
                f"{[values[k] for k in ('xmin', 'ymin', 'xmax', 'ymax')]}"
            )
        return values

    @property
    def degenerate(self) -> bool:
        return self.xmin == self.xmax or self.ymin == self.ymax

    def as_list(self) -> List[int]:
        return [self.xmin, self.ymin, self.xmax, self.ymax]

    def literal(self) -> str:
        return f"[{self.xmin},{self.ymin},{self.xmax},{self.ymax}]"

    def __str__(self) -> str:
        return self.literal()

    @classmethod
    def from_literal(cls, text: str) -> "NormBox":
        """
        Parse the exact `[xmin,ymin,xmax,ymax]` literal written by `literal`
        """
        match = _LITERAL.fullmatch(text)
        if match is None:
            raise GeometryError(f"Not a normalized box literal: {text!r}")
        xmin, ymin, xmax, ymax = (int(g) for g in match.groups())
        return cls(xmin=xmin, ymin=ymin, xmax=xmax, ymax=ymax)


def _check_dims(width: float, height: float) -> None:
    if not (width > 0 and height > 0):
        raise GeometryError(
            f"Image dimensions must be positive, got {width}x{height}"
        )


def _round_half_away(value: float) -> int:
    return int(math.copysign(math.floor(abs(value) + 0.5), value))


def iou(a: BoundingBox, b: BoundingBox) -> float:
    if a.degenerate or b.degenerate:
        raise GeometryError("IoU is undefined for zero-area boxes")
    iw = min(a.xmax, b.xmax) - max(a.xmin, b.xmin)
    ih = min(a.ymax, b.ymax) - max(a.ymin, b.ymin)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def normalize_box(b: BoundingBox, width: float, height: float) -> NormBox:
    """
    Map a pixel box onto the [0, 1000] grid of an image of the given size

    Coordinates overhanging the image by at most one pixel are clamped;
    anything further out is an error. Zero-area results are returned as is
    and can be recognized through `NormBox.degenerate`.
    """
    _check_dims(width, height)
    if b.xmin > width or b.ymin > height:
        raise OutOfBoundsError(
            f"Box {b.as_list()} lies outside the {width}x{height} image"
        )
    if b.xmax > width + CLAMP_TOLERANCE or b.ymax > height + CLAMP_TOLERANCE:
        raise OutOfBoundsError(
            f"Box {b.as_list()} exceeds the {width}x{height} image by more "
            f"than {CLAMP_TOLERANCE} pixel"
        )

    def _scale(value: float, size: float) -> int:
        value = min(max(value, 0.0), size)
        return min(
            max(_round_half_away(value * NORM_RANGE / size), 0), NORM_RANGE
        )

    return NormBox(
        xmin=_scale(b.xmin, width),
        ymin=_scale(b.ymin, height),
        xmax=_scale(b.xmax, width),
        ymax=_scale(b.ymax, height),
    )


def denormalize_box(nb: NormBox, width: float, height: float) -> BoundingBox:
    _check_dims(width, height)
    return BoundingBox(
        xmin=nb.xmin * width / NORM_RANGE,
        ymin=nb.ymin * height / NORM_RANGE,
        xmax=nb.xmax * width / NORM_RANGE,
        ymax=nb.ymax * height / NORM_RANGE,
        degenerate=nb.degenerate,
    )
