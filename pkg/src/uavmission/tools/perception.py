"""Vision-language tools: scene captioning, pixel pointing, fire detection.

Every prompt opens with a bracketed tag such as ``[pixelpoint image=s07]`` or
``[detect scene=s07 frame=0003]``. Live models ignore it; scripted scenarios
key their canned answers on it.
"""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional

from uavmission.core import LabeledKeypoint, PixelPoint, SceneImage
from uavmission.errors import EmptyResult, GatewayError, Unparseable
from uavmission.gateway.backends import Gateway
from uavmission.gateway.keypoints import parse_keypoints
from uavmission.gateway.messages import ImagePart, ModelMessage, TextPart
from uavmission.gateway.repair import extract_structured
from uavmission.sim import FrameRecord

log = logging.getLogger(__name__)

DESCRIBE_MAX_TOKENS = 2048


def _vision_message(text: str, image: SceneImage) -> ModelMessage:
    return ModelMessage("user", (TextPart(text), ImagePart(image)))


def describe_prompt(image: SceneImage) -> str:
    return (
        f"[describe image={image.id}] You are looking at a satellite image "
        f"({image.width}x{image.height} px). Describe it in as much detail as you can: "
        "land use, buildings and industrial sites, vegetation, roads, water bodies, vehicles, "
        "and any sign of fire, smoke or burn scars, with rough positions in the frame."
    )


def describe_satellite_image(image: SceneImage, gateway: Gateway) -> str:
    reply = gateway.ask([_vision_message(describe_prompt(image), image)], max_tokens=DESCRIBE_MAX_TOKENS)
    text = reply.text.strip()
    if not text:
        raise EmptyResult(f"empty description for {image.id}")
    return text


def pixelpoint_prompt(image: SceneImage, objects: str) -> str:
    return (
        f"[pixelpoint image={image.id}] Point to every instance of: {objects}.\n"
        f"The image is {image.width}x{image.height} pixels with the origin at the top-left. "
        "For each object give its pixel coordinates and the probability (0 to 1) that it is "
        "on fire. Answer with JSON only, e.g. "
        '[{"label": "warehouse", "point": [x, y], "probability": 0.7}]'
    )


def pixelpoint_objects(image: SceneImage, objects: str, gateway: Gateway) -> list[LabeledKeypoint]:
    if not objects or not objects.strip():
        raise ValueError("objects query must be non-empty")
    reply = gateway.ask([_vision_message(pixelpoint_prompt(image, objects), image)])
    try:
        value = extract_structured(reply.text).value
    except Unparseable as exc:
        raise EmptyResult(f"no coordinates in grounding answer ({exc})") from exc
    return parse_keypoints(value, image)


# ---------------------------------------------------------------------------
# Fire detection on simulated frames
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DetectionResult:
    frame_id: str
    fire_detected: bool
    confidence: float
    label: str
    location: Optional[PixelPoint] = None
    note: str = ""

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} not in [0, 1]")
        if not self.fire_detected and self.location is not None:
            raise ValueError("a negative detection cannot carry a location")

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "frame_id": self.frame_id,
            "fire_detected": self.fire_detected,
            "confidence": self.confidence,
            "label": self.label,
            "location": self.location.as_list() if self.location else None,
        }
        if self.note:
            d["note"] = self.note
        return d


def detect_prompt(frame: FrameRecord) -> str:
    scene_id = frame.crop.id.split("#", 1)[0]
    return (
        f"[detect scene={scene_id} frame={frame.frame_id}] This is a UAV camera frame "
        f"({frame.crop.width}x{frame.crop.height} px) flying toward '{frame.label}'. "
        "Is there fire or active smoke in view? Answer with JSON only: "
        '{"fire": true or false, "confidence": 0 to 1, "point": [x, y]} '
        "where point is the fire location in this frame's pixels."
    )


_YES = re.compile(r"^\W*(yes|fire detected|true)\b", re.IGNORECASE)


def _as_bool(v: Any) -> bool:
    if isinstance(v, str):
        return v.strip().lower() in ("true", "yes", "1", "fire")
    return bool(v)


def _clamp01(v: Any, default: float) -> float:
    try:
        f = float(v)
    except (TypeError, ValueError):
        return default
    if f != f:  # NaN
        return default
    if 1.0 < f <= 100.0:
        f /= 100.0
    return min(max(f, 0.0), 1.0)


def parse_detection(text: str, frame: FrameRecord) -> DetectionResult:
    """Interpret one detection answer; in-frame points become scene points."""
    try:
        value = extract_structured(text).value
    except Unparseable:
        value = None
    if isinstance(value, list) and value and isinstance(value[0], dict):
        value = value[0]
    if not isinstance(value, dict):
        fire = bool(_YES.search(text))
        return DetectionResult(
            frame.frame_id,
            fire,
            0.5 if fire else 0.0,
            frame.label,
            frame.center if fire else None,
            note="free-text answer",
        )
    fire = _as_bool(value.get("fire", value.get("fire_detected", False)))
    confidence = _clamp01(value.get("confidence"), 1.0 if fire else 0.0)
    location = None
    if fire:
        raw = value.get("point", value.get("point_2d"))
        if isinstance(raw, (list, tuple)) and len(raw) == 2:
            try:
                x = min(max(float(raw[0]), 0.0), frame.crop.width - 1.0)
                y = min(max(float(raw[1]), 0.0), frame.crop.height - 1.0)
                location = frame.crop_to_scene(PixelPoint(x, y))
            except (TypeError, ValueError):
                location = None
        if location is None:
            location = frame.center
    return DetectionResult(frame.frame_id, fire, confidence, frame.label, location)


def detect_frame(frame: FrameRecord, gateway: Gateway) -> DetectionResult:
    try:
        reply = gateway.ask([_vision_message(detect_prompt(frame), frame.crop)])
    except GatewayError as exc:
        log.warning("detection failed on frame %s: %s", frame.frame_id, exc)
        return DetectionResult(frame.frame_id, False, 0.0, frame.label, None, note=f"error: {exc}")
    return parse_detection(reply.text, frame)


def detect_and_display(
    frames: Mapping[str, FrameRecord],
    gateway: Gateway,
    *,
    parallelism: int = 1,
    on_result: Optional[Callable[[DetectionResult], None]] = None,
) -> list[DetectionResult]:
    """Ask the vision model about every frame, in frame-id order."""
    if not frames:
        raise ValueError("detect_and_display needs at least one frame")
    ordered = [frames[k] for k in sorted(frames)]
    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results_iter = pool.map(lambda f: detect_frame(f, gateway), ordered)
            results = []
            for res in results_iter:
                if on_result is not None:
                    on_result(res)
                results.append(res)
        return results
    results = []
    for frame in ordered:
        res = detect_frame(frame, gateway)
        if on_result is not None:
            on_result(res)
        results.append(res)
    return results
