"""Tool registries for the airspace manager and the UAV agent.

Handlers are lenient about argument shapes because the arguments come from a
language model: an image may arrive as a ``SceneImage`` or as an id string,
keypoints as objects or as plain dicts, frames as a simulation result or as
its frame map.
"""

from __future__ import annotations

from typing import Any, Callable, Mapping, Optional

from uavmission.agents.registry import ToolArg, ToolRegistry, ToolSpec, final_answer_tool
from uavmission.core import LabeledKeypoint, MissionPlan, SceneImage
from uavmission.gateway.backends import Gateway
from uavmission.gateway.keypoints import parse_keypoints
from uavmission.sim import FrameRecord, SimConfig, SimulationResult, uav_simulation
from uavmission.tools.imagestore import ImageStore
from uavmission.tools.perception import (
    DetectionResult,
    describe_satellite_image,
    detect_and_display,
    pixelpoint_objects,
)
from uavmission.tools.render import visualize_keypoints

AMA_TOOLS = (
    "read_image",
    "describe_satellite_image",
    "pixelpoint_objects",
    "visualize_keypoints",
    "final_answer",
)
UAV_TOOLS = (
    "read_image_for_simulation",
    "uav_simulation",
    "detect_and_display",
    "final_answer",
)


def final_answer(value: Any) -> Any:
    return value


def _as_index(i: Any) -> int:
    if isinstance(i, bool):
        raise TypeError("image index must be an integer")
    if isinstance(i, float) and i.is_integer():
        return int(i)
    if isinstance(i, str) and i.strip().lstrip("-").isdigit():
        return int(i)
    if not isinstance(i, int):
        raise TypeError(f"image index must be an integer, got {i!r}")
    return i


def _as_image(value: Any, store: ImageStore) -> SceneImage:
    if isinstance(value, SceneImage):
        return value
    if isinstance(value, str):
        idx = store.index_of(value)
        if idx is not None:
            return store.get(idx)
    if isinstance(value, int) and not isinstance(value, bool):
        return store.get(value)
    raise TypeError(f"expected an image (call read_image first), got {value!r}")


def as_keypoints(value: Any, image: SceneImage) -> list[LabeledKeypoint]:
    if isinstance(value, MissionPlan):
        return list(value.ordered_waypoints)
    if isinstance(value, (list, tuple)):
        if all(isinstance(v, LabeledKeypoint) for v in value):
            return list(value)
        return list(parse_keypoints(list(value), image))
    if isinstance(value, dict):
        return list(parse_keypoints(value, image))
    raise TypeError(f"expected a list of keypoints, got {type(value).__name__}")


def ama_registry(store: ImageStore, gateway: Gateway) -> ToolRegistry:
    def read(i: Any) -> SceneImage:
        return store.get(_as_index(i))

    def describe(image: Any) -> str:
        return describe_satellite_image(_as_image(image, store), gateway)

    def point(image: Any, objects: str) -> list[LabeledKeypoint]:
        return pixelpoint_objects(_as_image(image, store), str(objects), gateway)

    def visualize(image: Any, keypoints: Any) -> SceneImage:
        img = _as_image(image, store)
        return visualize_keypoints(img, as_keypoints(keypoints, img))

    return ToolRegistry(
        [
            ToolSpec(
                "read_image",
                "Return the satellite image with the given index for airspace analysis.",
                (ToolArg("i", "integer"),),
                read,
                phase="observe",
            ),
            ToolSpec(
                "describe_satellite_image",
                "Long-form scene description of a satellite image from the vision model.",
                (ToolArg("image", "image"),),
                describe,
                phase="describe",
            ),
            ToolSpec(
                "pixelpoint_objects",
                "Pixel coordinates (with fire probability) of the named objects; repairs malformed JSON.",
                (ToolArg("image", "image"), ToolArg("objects", "string")),
                point,
                phase="decide",
            ),
            ToolSpec(
                "visualize_keypoints",
                "Render labeled keypoints and their bounding boxes onto the image.",
                (ToolArg("image", "image"), ToolArg("keypoints", "list")),
                visualize,
            ),
            final_answer_tool(),
        ]
    )


def uav_registry(
    store: ImageStore,
    gateway: Gateway,
    sim_config: Optional[SimConfig] = None,
    *,
    parallelism: int = 1,
    on_detection: Optional[Callable[[DetectionResult], None]] = None,
) -> ToolRegistry:
    sim_config = sim_config or SimConfig()

    def read(i: Any) -> SceneImage:
        return store.get(_as_index(i))

    def simulate(image: Any, labeled_points: Any) -> SimulationResult:
        img = _as_image(image, store)
        return uav_simulation(img, as_keypoints(labeled_points, img), sim_config)

    def detect(frames_dict: Any) -> list[DetectionResult]:
        frames: Mapping[str, FrameRecord]
        if isinstance(frames_dict, SimulationResult):
            frames = frames_dict.frames
        elif isinstance(frames_dict, Mapping):
            frames = frames_dict
        else:
            raise TypeError("expected the output of uav_simulation")
        return detect_and_display(frames, gateway, parallelism=parallelism, on_result=on_detection)

    return ToolRegistry(
        [
            ToolSpec(
                "read_image_for_simulation",
                "Return the image with the given index for flight simulation.",
                (ToolArg("i", "integer"),),
                read,
                phase="observe",
            ),
            ToolSpec(
                "uav_simulation",
                "Fly the ordered waypoints over the image and capture camera frames.",
                (ToolArg("image", "image"), ToolArg("labeled_points", "list")),
                simulate,
                phase="observe",
            ),
            ToolSpec(
                "detect_and_display",
                "Check every captured frame for fire and report scene locations.",
                (ToolArg("frames_dict", "frames"),),
                detect,
                phase="describe",
            ),
            final_answer_tool(),
        ]
    )
