"""Shared domain types and geometry helpers.

Everything here is immutable after construction. Coordinates are real-valued
pixels with the origin at the top-left corner, x to the right and y down.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

from PIL import Image


@dataclass(frozen=True)
class PixelPoint:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))

    def within(self, width: int, height: int) -> bool:
        return 0 <= self.x < width and 0 <= self.y < height

    def as_list(self) -> list[float]:
        return [self.x, self.y]


@dataclass(frozen=True)
class BoundingBox:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        values = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"non-finite bbox {values}")
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValueError(f"inverted bbox {values}")
        for name, v in zip(("x1", "y1", "x2", "y2"), values):
            object.__setattr__(self, name, float(v))

    @property
    def center(self) -> PixelPoint:
        return PixelPoint((self.x1 + self.x2) / 2, (self.y1 + self.y2) / 2)

    def contains(self, p: PixelPoint) -> bool:
        return self.x1 <= p.x <= self.x2 and self.y1 <= p.y <= self.y2

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]


@dataclass(frozen=True, eq=False)
class SceneImage:
    """An 8-bit RGB raster with an identity.

    The wrapped PIL image is never handed out for mutation; every operation
    that draws on a scene works on a copy.
    """

    id: str
    image: Image.Image = field(repr=False)
    source_path: Optional[Path] = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("SceneImage id must be non-empty")
        if self.image.mode != "RGB":
            object.__setattr__(self, "image", self.image.convert("RGB"))
        w, h = self.image.size
        if w < 1 or h < 1:
            raise ValueError(f"degenerate image size {w}x{h}")

    @classmethod
    def load(cls, path: str | Path, image_id: Optional[str] = None) -> "SceneImage":
        path = Path(path)
        with Image.open(path) as im:
            rgb = im.convert("RGB")
            rgb.load()
        return cls(image_id or path.stem, rgb, path)

    @property
    def width(self) -> int:
        return self.image.size[0]

    @property
    def height(self) -> int:
        return self.image.size[1]

    @property
    def size(self) -> tuple[int, int]:
        return self.image.size

    def copy_pixels(self) -> Image.Image:
        return self.image.copy()

    def tobytes(self) -> bytes:
        return self.image.tobytes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SceneImage):
            return NotImplemented
        return (
            self.id == other.id
            and self.size == other.size
            and self.image.tobytes() == other.image.tobytes()
        )

    def __hash__(self) -> int:
        return hash((self.id, self.size))


@dataclass(frozen=True)
class LabeledKeypoint:
    label: str
    point: PixelPoint
    bbox: Optional[BoundingBox] = None
    fire_probability: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("keypoint label must be non-empty")
        if self.bbox is not None and not self.bbox.contains(self.point):
            raise ValueError(f"point {self.point} outside bbox {self.bbox}")
        p = self.fire_probability
        if p is not None:
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"fire_probability {p} not in [0, 1]")
            object.__setattr__(self, "fire_probability", float(p))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"label": self.label, "point": self.point.as_list()}
        if self.bbox is not None:
            out["bbox"] = self.bbox.as_list()
        if self.fire_probability is not None:
            out["fire_probability"] = self.fire_probability
        return out


@dataclass(frozen=True)
class MissionQuery:
    text: str
    sample_id: str = "adhoc"

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("mission query text must be non-empty")


@dataclass(frozen=True)
class MissionPlan:
    ordered_waypoints: tuple[LabeledKeypoint, ...]
    rationale: str = ""


DEFAULT_QUERY = "I've heard there are fires in our area."


def euclidean_distance(a: PixelPoint, b: PixelPoint) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def point_segment_distance(p: PixelPoint, a: PixelPoint, b: PixelPoint) -> float:
    dx, dy = b.x - a.x, b.y - a.y
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return euclidean_distance(p, a)
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / seg2
    t = min(1.0, max(0.0, t))
    return math.hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy))


def polyline_distance(p: PixelPoint, vertices: Sequence[PixelPoint]) -> float:
    if len(vertices) == 1:
        return euclidean_distance(p, vertices[0])
    return min(point_segment_distance(p, a, b) for a, b in zip(vertices, vertices[1:]))


def jsonable(value: Any) -> Any:
    """Convert domain objects into plain JSON-compatible trees."""
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, LabeledKeypoint):
        return value.to_dict()
    if isinstance(value, (PixelPoint, BoundingBox)):
        return value.as_list()
    if isinstance(value, SceneImage):
        return {"image_id": value.id, "width": value.width, "height": value.height}
    if isinstance(value, (bytes, bytearray)):
        return {"bytes": len(value)}
    if hasattr(value, "to_dict"):
        return jsonable(value.to_dict())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return repr(value)
