"""Lightweight 2D flight simulation over a scene image.

The UAV moves along straight segments between labeled waypoints. At every
interpolated position a square window around the UAV is cropped, resized,
stamped with the segment label and collected; the frames are also packed into
an animated GIF.
"""

from __future__ import annotations

import functools
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, NamedTuple, Optional, Sequence

from PIL import Image, ImageDraw, ImageFont

from uavmission.core import LabeledKeypoint, PixelPoint, SceneImage, euclidean_distance
from uavmission.errors import EmptyPath

DEFAULT_STEP_LENGTH = 25.0


@dataclass(frozen=True)
class SimConfig:
    steps_per_segment: Optional[int] = None
    step_length: Optional[float] = None
    crop_size: int = 128
    output_size: int = 256
    frame_rate: float = 5.0

    def __post_init__(self) -> None:
        if self.steps_per_segment is None and self.step_length is None:
            object.__setattr__(self, "step_length", DEFAULT_STEP_LENGTH)
        elif self.steps_per_segment is not None and self.step_length is not None:
            raise ValueError("set exactly one of steps_per_segment / step_length")
        if self.steps_per_segment is not None and self.steps_per_segment < 1:
            raise ValueError("steps_per_segment must be positive")
        if self.step_length is not None and not self.step_length > 0:
            raise ValueError("step_length must be positive")
        if self.crop_size < 1 or self.output_size < 1 or not self.frame_rate > 0:
            raise ValueError("crop_size, output_size and frame_rate must be positive")


def segment_steps(a: PixelPoint, b: PixelPoint, config: SimConfig) -> int:
    if config.steps_per_segment is not None:
        return config.steps_per_segment
    return max(1, math.ceil(euclidean_distance(a, b) / config.step_length))


def interpolate_path(
    waypoints: Sequence[LabeledKeypoint], config: SimConfig
) -> list[tuple[PixelPoint, str]]:
    """Linear interpolation along the waypoint polyline.

    The first waypoint is emitted once; each segment then contributes ``n``
    positions at t = k/n, k = 1..n, labeled with the segment's destination.
    """
    if not waypoints:
        raise EmptyPath("cannot fly an empty path")
    first = waypoints[0]
    out = [(first.point, first.label)]
    for src, dst in zip(waypoints, waypoints[1:]):
        a, b = src.point, dst.point
        n = segment_steps(a, b, config)
        for k in range(1, n + 1):
            t = k / n
            # (1-t)a + tb is exact at both ends
            out.append((PixelPoint((1 - t) * a.x + t * b.x, (1 - t) * a.y + t * b.y), dst.label))
    return out


def _round_half_up(v: float) -> int:
    return math.floor(v + 0.5)


def crop_window(width: int, height: int, center: PixelPoint, crop_size: int) -> tuple[int, int, int, int]:
    """(x0, y0, w, h) of the crop window, shifted inward at the borders."""
    w, h = min(crop_size, width), min(crop_size, height)
    x0 = _round_half_up(center.x) - w // 2
    y0 = _round_half_up(center.y) - h // 2
    x0 = min(max(x0, 0), width - w)
    y0 = min(max(y0, 0), height - h)
    return x0, y0, w, h


def crop_view(scene: SceneImage, center: PixelPoint, config: SimConfig) -> SceneImage:
    if not center.within(scene.width, scene.height):
        raise ValueError(f"center {center} outside scene {scene.width}x{scene.height}")
    x0, y0, w, h = crop_window(scene.width, scene.height, center, config.crop_size)
    crop = scene.image.crop((x0, y0, x0 + w, y0 + h))
    size = (config.output_size, config.output_size)
    if crop.size != size:
        crop = crop.resize(size, Image.Resampling.BILINEAR)
    return SceneImage(f"{scene.id}@{x0},{y0}", crop)


@functools.lru_cache(maxsize=1)
def default_font() -> ImageFont.ImageFont | ImageFont.FreeTypeFont:
    return ImageFont.load_default()


def annotate_frame(crop: SceneImage, label: str, tag: Optional[str] = None) -> SceneImage:
    """Stamp ``label`` in a dark strip at the top-left corner of a copy.

    ``tag`` (e.g. the frame id) is prefixed to the text so consecutive frames
    never render identically.
    """
    if not label:
        raise ValueError("annotation label must be non-empty")
    img = crop.copy_pixels()
    draw = ImageDraw.Draw(img)
    text = f"{tag} {label}" if tag else label
    draw.rectangle(annotation_strip(crop, label, tag), fill=(0, 0, 0))
    draw.text((3, 2), text, fill=(255, 255, 255), font=default_font())
    return SceneImage(crop.id, img)


def annotation_strip(crop: SceneImage, label: str, tag: Optional[str] = None) -> tuple[int, int, int, int]:
    """Inclusive pixel box that :func:`annotate_frame` paints over."""
    probe = ImageDraw.Draw(Image.new("RGB", (1, 1)))
    text = f"{tag} {label}" if tag else label
    _, _, right, bottom = probe.textbbox((3, 2), text, font=default_font())
    return 0, 0, min(right + 3, crop.width) - 1, min(bottom + 2, crop.height) - 1


@dataclass(frozen=True)
class FrameRecord:
    frame_id: str
    crop: SceneImage
    center: PixelPoint
    label: str
    window: tuple[int, int, int, int]

    def crop_to_scene(self, p: PixelPoint) -> PixelPoint:
        x0, y0, w, h = self.window
        return PixelPoint(x0 + p.x * w / self.crop.width, y0 + p.y * h / self.crop.height)

    def scene_to_crop(self, p: PixelPoint) -> PixelPoint:
        x0, y0, w, h = self.window
        return PixelPoint((p.x - x0) * self.crop.width / w, (p.y - y0) * self.crop.height / h)

    def to_dict(self) -> dict[str, Any]:
        return {
            "frame_id": self.frame_id,
            "center": self.center.as_list(),
            "label": self.label,
            "window": list(self.window),
            "crop_id": self.crop.id,
        }


class SimulationResult(NamedTuple):
    frames: dict[str, FrameRecord]
    animation: bytes

    def summary(self) -> str:
        labels = []
        for rec in self.frames.values():
            if not labels or labels[-1] != rec.label:
                labels.append(rec.label)
        return (
            f"<simulation: {len(self.frames)} frames, gif {len(self.animation)} bytes, "
            f"route {' -> '.join(labels)}>"
        )


def encode_gif(images: Sequence[Image.Image], frame_rate: float) -> bytes:
    buf = io.BytesIO()
    duration = max(1, round(1000 / frame_rate))
    images[0].save(
        buf,
        format="GIF",
        save_all=True,
        append_images=list(images[1:]),
        duration=duration,
        loop=0,
    )
    return buf.getvalue()


def uav_simulation(
    scene: SceneImage, labeled_points: Sequence[LabeledKeypoint], config: Optional[SimConfig] = None
) -> SimulationResult:
    config = config or SimConfig()
    positions = interpolate_path(labeled_points, config)
    width = max(4, len(str(len(positions) - 1)))
    frames: dict[str, FrameRecord] = {}
    for i, (center, label) in enumerate(positions):
        frame_id = f"{i:0{width}d}"
        window = crop_window(scene.width, scene.height, center, config.crop_size)
        view = crop_view(scene, center, config)
        view = annotate_frame(SceneImage(f"{scene.id}#{frame_id}", view.image), label, tag=frame_id)
        frames[frame_id] = FrameRecord(frame_id, view, center, label, window)
    gif = encode_gif([rec.crop.image for rec in frames.values()], config.frame_rate)
    return SimulationResult(frames, gif)


def export_frames(result: SimulationResult, out_dir: str | Path) -> Path:
    """Write ``<frame_id>.png`` files plus ``frames.json``; returns the index path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for frame_id, rec in result.frames.items():
        rec.crop.image.save(out / f"{frame_id}.png")
    index = out / "frames.json"
    index.write_text(
        json.dumps({"frames": [rec.to_dict() for rec in result.frames.values()]}, indent=2) + "\n",
        encoding="utf-8",
    )
    return index
