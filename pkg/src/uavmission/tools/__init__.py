"""Mission tools for both agents."""

from uavmission.tools.catalog import AMA_TOOLS, UAV_TOOLS, ama_registry, final_answer, uav_registry
from uavmission.tools.imagestore import ImageStore, read_image, read_image_for_simulation
from uavmission.tools.perception import (
    DetectionResult,
    describe_satellite_image,
    detect_and_display,
    parse_detection,
    pixelpoint_objects,
)
from uavmission.tools.planning import order_waypoints
from uavmission.tools.render import RenderStyle, visualize_keypoints

__all__ = [
    "AMA_TOOLS",
    "UAV_TOOLS",
    "DetectionResult",
    "ImageStore",
    "RenderStyle",
    "ama_registry",
    "describe_satellite_image",
    "detect_and_display",
    "final_answer",
    "order_waypoints",
    "parse_detection",
    "pixelpoint_objects",
    "read_image",
    "read_image_for_simulation",
    "uav_registry",
    "visualize_keypoints",
]
