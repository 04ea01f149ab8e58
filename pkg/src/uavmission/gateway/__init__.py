"""Model access: HTTP and scripted backends plus structured-output parsing."""

from uavmission.gateway.backends import (
    Backend,
    Gateway,
    HttpBackend,
    ScriptedBackend,
    ScriptedScenario,
    ScriptEntry,
    build_payload,
    complete,
)
from uavmission.gateway.keypoints import parse_keypoints
from uavmission.gateway.messages import (
    ImagePart,
    ModelMessage,
    ModelRequest,
    ModelResponse,
    TextPart,
)
from uavmission.gateway.repair import Extraction, extract_structured

__all__ = [
    "Backend",
    "Extraction",
    "Gateway",
    "HttpBackend",
    "ImagePart",
    "ModelMessage",
    "ModelRequest",
    "ModelResponse",
    "ScriptEntry",
    "ScriptedBackend",
    "ScriptedScenario",
    "TextPart",
    "build_payload",
    "complete",
    "extract_structured",
    "parse_keypoints",
]
