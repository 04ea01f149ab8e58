"""Request/response types shared by every model backend."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from uavmission.core import SceneImage

ROLES = ("system", "user", "assistant", "tool")


@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class ImagePart:
    image: SceneImage

    @property
    def image_id(self) -> str:
        return self.image.id


Part = Union[TextPart, ImagePart]


@dataclass(frozen=True)
class ModelMessage:
    role: str
    parts: tuple[Part, ...]

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if not self.parts:
            raise ValueError("a message needs at least one part")
        if self.role != "user" and any(isinstance(p, ImagePart) for p in self.parts):
            raise ValueError("image parts are only allowed in user messages")

    @classmethod
    def text(cls, role: str, text: str) -> "ModelMessage":
        return cls(role, (TextPart(text),))

    @property
    def text_content(self) -> str:
        return "\n".join(p.text for p in self.parts if isinstance(p, TextPart))

    @property
    def images(self) -> list[SceneImage]:
        return [p.image for p in self.parts if isinstance(p, ImagePart)]


@dataclass(frozen=True)
class ModelRequest:
    messages: tuple[ModelMessage, ...]
    temperature: float = 0.5
    max_tokens: int = 1024
    model_name: str = "scripted"
    request_id: str = ""
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("request must contain at least one message")
        if not (0.0 <= self.temperature <= 2.0):
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    @property
    def last_user_text(self) -> str:
        for msg in reversed(self.messages):
            if msg.role == "user":
                return msg.text_content
        return ""


@dataclass(frozen=True)
class ModelResponse:
    text: str
    latency: float
    backend_id: str
    request_id: str = ""

    def __post_init__(self) -> None:
        if self.latency < 0:
            raise ValueError("latency must be non-negative")
