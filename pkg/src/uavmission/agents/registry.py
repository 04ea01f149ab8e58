"""Tool specifications and the per-agent tool registry."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Optional

from uavmission.errors import DuplicateTool

PHASES = ("observe", "describe", "reason", "decide", "act")


@dataclass(frozen=True)
class ToolArg:
    name: str
    type: str
    required: bool = True


@dataclass(frozen=True)
class ToolSpec:
    """A callable tool plus the metadata the prompt advertises.

    ``phase`` tags the ReAct phase the tool belongs to (observe, describe or
    decide); every execution is additionally logged as an ``act`` step.
    """

    name: str
    description: str
    args: tuple[ToolArg, ...]
    handler: Callable[..., Any] = field(repr=False, compare=False)
    phase: Optional[str] = None
    terminal: bool = False

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("tool name must be non-empty")
        names = [a.name for a in self.args]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate argument names in {self.name}: {names}")
        if self.phase is not None and self.phase not in PHASES:
            raise ValueError(f"unknown phase {self.phase!r}")

    def signature(self) -> str:
        params = ", ".join(f"{a.name}: {a.type}" + ("" if a.required else " = optional") for a in self.args)
        return f"{self.name}({params})"

    def missing_args(self, args: dict[str, Any]) -> list[str]:
        return [a.name for a in self.args if a.required and a.name not in args]


class ToolRegistry:
    def __init__(self, specs: Optional[list[ToolSpec]] = None):
        self._tools: dict[str, ToolSpec] = {}
        for spec in specs or []:
            self.register(spec)

    def register(self, spec: ToolSpec) -> "ToolRegistry":
        if spec.name in self._tools:
            raise DuplicateTool(f"tool {spec.name!r} already registered")
        self._tools[spec.name] = spec
        return self

    def unregister(self, name: str) -> None:
        self._tools.pop(name, None)

    def get(self, name: str) -> Optional[ToolSpec]:
        return self._tools.get(name)

    def names(self) -> list[str]:
        return list(self._tools)

    def __contains__(self, name: object) -> bool:
        return name in self._tools

    def __iter__(self) -> Iterator[ToolSpec]:
        return iter(self._tools.values())

    def __len__(self) -> int:
        return len(self._tools)


def register_tool(registry: ToolRegistry, spec: ToolSpec) -> ToolRegistry:
    return registry.register(spec)


def final_answer_tool() -> ToolSpec:
    return ToolSpec(
        "final_answer",
        "Deliver the final result and end the run.",
        (ToolArg("answer", "any"),),
        handler=lambda answer: answer,
        terminal=True,
    )
