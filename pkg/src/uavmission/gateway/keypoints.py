"""Map grounding-model output onto :class:`LabeledKeypoint` objects.

Accepted element shapes::

    {"label": ..., "point": [x, y]}
    {"label": ..., "point_2d": [x, y]}
    {"label": ..., "bbox_2d": [x1, y1, x2, y2]}      # point = bbox center

each optionally carrying ``probability`` or ``fire_probability``. Points and
boxes are clamped into the image; anything else is dropped.
"""

from __future__ import annotations

import logging
import math
from typing import Any, Optional

from uavmission.core import BoundingBox, LabeledKeypoint, PixelPoint, SceneImage
from uavmission.errors import EmptyResult

log = logging.getLogger(__name__)


def _number(v: Any) -> Optional[float]:
    if isinstance(v, bool):
        return None
    if isinstance(v, (int, float)):
        f = float(v)
    elif isinstance(v, str):
        try:
            f = float(v.strip())
        except ValueError:
            return None
    else:
        return None
    return f if math.isfinite(f) else None


def _numbers(v: Any, n: int) -> Optional[list[float]]:
    if not isinstance(v, (list, tuple)) or len(v) != n:
        return None
    out = [_number(x) for x in v]
    if any(x is None for x in out):
        return None
    return out  # type: ignore[return-value]


def _clamp(v: float, hi: float) -> float:
    return min(max(v, 0.0), hi)


def _probability(elem: dict[str, Any]) -> Optional[float]:
    for key in ("fire_probability", "probability"):
        if key in elem:
            p = _number(elem[key])
            if p is None:
                return None
            if 1.0 < p <= 100.0:
                p /= 100.0  # percentages
            return p if 0.0 <= p <= 1.0 else None
    return None


def keypoint_from_element(elem: Any, width: int, height: int) -> Optional[LabeledKeypoint]:
    if not isinstance(elem, dict):
        return None
    label = elem.get("label")
    if not isinstance(label, str) or not label.strip():
        return None
    xmax, ymax = width - 1, height - 1

    bbox: Optional[BoundingBox] = None
    raw_box = _numbers(elem.get("bbox_2d", elem.get("bbox")), 4)
    if raw_box is not None:
        x1, y1, x2, y2 = raw_box
        x1, x2 = sorted((_clamp(x1, xmax), _clamp(x2, xmax)))
        y1, y2 = sorted((_clamp(y1, ymax), _clamp(y2, ymax)))
        bbox = BoundingBox(x1, y1, x2, y2)

    raw_point = _numbers(elem.get("point", elem.get("point_2d")), 2)
    if raw_point is not None:
        x, y = _clamp(raw_point[0], xmax), _clamp(raw_point[1], ymax)
        if bbox is not None:
            x, y = min(max(x, bbox.x1), bbox.x2), min(max(y, bbox.y1), bbox.y2)
        point = PixelPoint(x, y)
    elif bbox is not None:
        point = bbox.center
    else:
        return None

    return LabeledKeypoint(label.strip(), point, bbox, _probability(elem))


def parse_keypoints(
    value: Any, image: SceneImage, *, with_dropped: bool = False
) -> list[LabeledKeypoint] | tuple[list[LabeledKeypoint], int]:
    """Turn a parsed grounding answer into keypoints bound to ``image``.

    A single object is accepted as a one-element list. Raises EmptyResult
    when nothing usable remains, so the caller can re-query.
    """
    if isinstance(value, dict):
        # some models wrap the list: {"objects": [...]} / {"points": [...]}
        lists = [v for v in value.values() if isinstance(v, list)]
        value = lists[0] if "label" not in value and len(lists) == 1 else [value]
    if not isinstance(value, list):
        raise EmptyResult(f"expected a list of objects, got {type(value).__name__}")
    keypoints = []
    for elem in value:
        kp = keypoint_from_element(elem, image.width, image.height)
        if kp is not None:
            keypoints.append(kp)
    dropped = len(value) - len(keypoints)
    if dropped:
        log.debug("dropped %d unparseable grounding element(s) for %s", dropped, image.id)
    if not keypoints:
        raise EmptyResult(f"no usable object among {len(value)} element(s)")
    return (keypoints, dropped) if with_dropped else keypoints
