"""Keypoint overlays for satellite scenes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from PIL import Image, ImageDraw

from uavmission.core import LabeledKeypoint, SceneImage
from uavmission.sim import default_font


@dataclass(frozen=True)
class RenderStyle:
    marker_radius: int = 4
    marker_color: tuple[int, int, int] = (255, 32, 32)
    box_color: tuple[int, int, int] = (255, 220, 0)
    box_width: int = 2
    text_color: tuple[int, int, int] = (255, 255, 255)
    text_background: tuple[int, int, int] = (0, 0, 0)


def _label_box(
    draw: ImageDraw.ImageDraw, kp: LabeledKeypoint, style: RenderStyle
) -> tuple[tuple[int, int], tuple[int, int, int, int]]:
    x, y = round(kp.point.x), round(kp.point.y)
    origin = (x + style.marker_radius + 3, y - style.marker_radius - 12)
    left, top, right, bottom = draw.textbbox(origin, kp.label, font=default_font())
    return origin, (left - 1, top - 1, right + 1, bottom + 1)


def keypoint_footprint(kp: LabeledKeypoint, style: RenderStyle = RenderStyle()) -> tuple[int, int, int, int]:
    """Inclusive box enclosing everything drawn for ``kp`` (before clipping)."""
    draw = ImageDraw.Draw(Image.new("RGB", (1, 1)))
    x, y, r = round(kp.point.x), round(kp.point.y), style.marker_radius
    boxes = [(x - r, y - r, x + r, y + r), _label_box(draw, kp, style)[1]]
    if kp.bbox is not None:
        b = kp.bbox
        boxes.append((round(b.x1), round(b.y1), round(b.x2), round(b.y2)))
    return (
        min(b[0] for b in boxes),
        min(b[1] for b in boxes),
        max(b[2] for b in boxes),
        max(b[3] for b in boxes),
    )


def visualize_keypoints(
    image: SceneImage, keypoints: Sequence[LabeledKeypoint], style: RenderStyle = RenderStyle()
) -> SceneImage:
    """Copy of ``image`` with markers, bbox outlines and labels drawn on."""
    out = image.copy_pixels()
    draw = ImageDraw.Draw(out)
    font = default_font()
    for kp in keypoints:
        if kp.bbox is not None:
            b = kp.bbox
            draw.rectangle(
                (round(b.x1), round(b.y1), round(b.x2), round(b.y2)),
                outline=style.box_color,
                width=style.box_width,
            )
    for kp in keypoints:
        x, y, r = round(kp.point.x), round(kp.point.y), style.marker_radius
        draw.ellipse((x - r, y - r, x + r, y + r), fill=style.marker_color, outline=(0, 0, 0))
        origin, box = _label_box(draw, kp, style)
        draw.rectangle(box, fill=style.text_background)
        draw.text(origin, kp.label, fill=style.text_color, font=font)
    return SceneImage(f"{image.id}+keypoints", out, image.source_path)
