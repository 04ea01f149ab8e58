"""The ReAct executor.

Each turn the model sees the mission query, the tool catalog and the running
history, and answers with one JSON action::

    {"thought": "...", "tool": "pixelpoint_objects",
     "args": {"image": "$read_image", "objects": "fire, smoke"}}

String arguments of the form ``$name`` resolve to earlier results: every tool
result is bound under the tool's own name (and under ``output`` if the action
gives one), and callers may pre-bind variables such as ``$image_index``.
Actions are data, never executed code.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Optional

from uavmission.core import MissionQuery, SceneImage, jsonable
from uavmission.errors import (
    EmptyResult,
    RunTerminated,
    StepBudgetExhausted,
    ToolFailure,
    Unparseable,
)
from uavmission.gateway.backends import Gateway
from uavmission.gateway.messages import ModelMessage
from uavmission.gateway.repair import extract_structured
from uavmission.agents.registry import PHASES, ToolRegistry, ToolSpec

log = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 8
_OBSERVATION_LIMIT = 1200


@dataclass(frozen=True)
class ReactStep:
    phase: str
    content: str
    step_index: int
    tool_call: Optional[tuple[str, dict[str, Any]]] = None
    tool_result: Optional[str] = None

    def __post_init__(self) -> None:
        if self.phase not in PHASES:
            raise ValueError(f"unknown phase {self.phase!r}")
        if self.phase == "act" and self.tool_call is None:
            raise ValueError("act steps must carry a tool call")

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"index": self.step_index, "phase": self.phase, "content": self.content}
        if self.tool_call is not None:
            d["tool"] = self.tool_call[0]
            d["args"] = jsonable(self.tool_call[1])
        if self.tool_result is not None:
            d["result"] = self.tool_result
        return d


@dataclass(frozen=True)
class ReactLimits:
    max_steps: int = DEFAULT_MAX_STEPS
    temperature: float = 0.5
    max_tokens: int = 1024
    tool_retry_cap: int = 1

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


class ReactResult(NamedTuple):
    answer: Any
    trace: list[ReactStep]


def summarize(value: Any, limit: int = _OBSERVATION_LIMIT) -> str:
    """Deterministic, bounded text rendering of a tool result."""
    if hasattr(value, "summary") and callable(value.summary):
        text = value.summary()
    elif isinstance(value, str):
        text = value
    elif isinstance(value, SceneImage):
        text = f"<image {value.id} {value.width}x{value.height}>"
    else:
        text = json.dumps(jsonable(value), sort_keys=True)
    return text if len(text) <= limit else text[: limit - 3] + "..."


def _parse_action(text: str) -> tuple[Optional[str], dict[str, Any], str]:
    """Return (tool name, raw args, thought) from a model reply."""
    try:
        value = extract_structured(text).value
    except Unparseable:
        return None, {}, text.strip()
    if isinstance(value, list) and value and isinstance(value[0], dict):
        value = value[0]
    if not isinstance(value, dict):
        return None, {}, text.strip()
    name = value.get("tool") or value.get("name") or value.get("action")
    args = value.get("args", value.get("arguments", value.get("action_input", {})))
    if isinstance(args, str):
        try:
            args = json.loads(args)
        except ValueError:
            args = {"answer": args} if name == "final_answer" else {}
    if not isinstance(args, dict):
        args = {"answer": args} if name == "final_answer" else {}
    thought = value.get("thought") or value.get("reasoning") or ""
    if isinstance(value.get("output"), str):
        args = dict(args)
        args["__output__"] = value["output"]
    return (name if isinstance(name, str) else None), args, str(thought)


class _UnknownVariable(KeyError):
    pass


def _resolve(value: Any, variables: dict[str, Any]) -> Any:
    if isinstance(value, str) and value.startswith("$") and len(value) > 1:
        key = value[1:]
        if key not in variables:
            raise _UnknownVariable(key)
        return variables[key]
    if isinstance(value, list):
        return [_resolve(v, variables) for v in value]
    if isinstance(value, dict):
        return {k: _resolve(v, variables) for k, v in value.items()}
    return value


@dataclass
class ReactAgent:
    agent_id: str
    registry: ToolRegistry
    gateway: Gateway
    limits: ReactLimits = field(default_factory=ReactLimits)
    role: str = "a mission agent"
    variables: dict[str, Any] = field(default_factory=dict)
    on_step: Optional[Callable[["ReactAgent"], None]] = None
    trace: list[ReactStep] = field(default_factory=list, init=False)
    finished: bool = field(default=False, init=False)
    answer: Any = field(default=None, init=False)

    def __post_init__(self) -> None:
        if "final_answer" not in self.registry:
            raise ValueError("registry must contain a final_answer tool")

    # -- prompt ---------------------------------------------------------

    def system_prompt(self) -> str:
        tools = "\n".join(f"- {t.signature()}: {t.description}" for t in self.registry)
        return (
            f"You are {self.agent_id}, {self.role}.\n"
            "Work in a loop: observe the scene, describe it, reason about the mission, "
            "decide on targets, then act by calling exactly one tool per turn.\n"
            f"Tools:\n{tools}\n"
            "Reply with a single JSON object and nothing else:\n"
            '{"thought": "<short reasoning>", "tool": "<tool name>", "args": {...}}\n'
            'Use "$name" as an argument value to pass an earlier result; each tool result '
            "is stored under the tool's name. Call final_answer when the mission is done."
        )

    def _marker(self, turn: int) -> str:
        return f"[agent={self.agent_id} step={turn}]"

    def _first_prompt(self, query: MissionQuery) -> str:
        lines = [f"{self._marker(1)} Mission: {query.text}"]
        if self.variables:
            lines.append("Available variables:")
            lines.extend(f"  ${k} = {summarize(v, 200)}" for k, v in sorted(self.variables.items()))
        return "\n".join(lines)

    # -- tool execution -------------------------------------------------

    def call_tool(self, name: str, args: dict[str, Any]) -> Any:
        if self.finished:
            raise RunTerminated(f"{self.agent_id} already delivered its final answer; {name!r} rejected")
        spec = self.registry.get(name)
        if spec is None:
            raise KeyError(name)
        return spec.handler(**args)

    def _append(self, phase: str, content: str, **kw: Any) -> ReactStep:
        step = ReactStep(phase, content, len(self.trace), **kw)
        self.trace.append(step)
        return step

    def _execute(self, spec: ToolSpec, raw_args: dict[str, Any], failures: Counter) -> str:
        output_name = raw_args.pop("__output__", None)
        call = (spec.name, dict(raw_args))
        if spec.phase is not None:
            self._append(spec.phase, f"{spec.phase} via {spec.name}")
        missing = spec.missing_args(raw_args)
        unknown = [k for k in raw_args if k not in {a.name for a in spec.args}]
        try:
            if missing or unknown:
                raise TypeError(f"bad arguments for {spec.signature()}: missing={missing} unexpected={unknown}")
            args = _resolve(raw_args, self.variables)
            result = self.call_tool(spec.name, args)
        except _UnknownVariable as exc:
            obs = f"Error: unknown variable ${exc.args[0]}; known: {sorted(self.variables)}"
            self._count_failure(spec, failures, exc, obs, call)
            return obs
        except EmptyResult as exc:
            self.variables[spec.name] = []
            obs = f"EmptyResult: {exc}. Nothing usable was found; refine the request and try again."
            self._append("act", f"call {spec.name}", tool_call=call, tool_result=obs)
            return obs
        except RunTerminated:
            raise
        except Exception as exc:  # tool errors become observations
            obs = f"Error: {type(exc).__name__}: {exc}"
            self._count_failure(spec, failures, exc, obs, call)
            return obs
        self.variables[spec.name] = result
        if output_name:
            self.variables[output_name] = result
        obs = summarize(result)
        self._append("act", f"call {spec.name}", tool_call=call, tool_result=obs)
        if spec.terminal:
            self.finished = True
            self.answer = result
        return obs

    def _count_failure(self, spec: ToolSpec, failures: Counter, exc: BaseException, obs: str, call) -> None:
        self._append("act", f"call {spec.name}", tool_call=call, tool_result=obs)
        failures[spec.name] += 1
        log.info("%s: tool %s failed (%d): %s", self.agent_id, spec.name, failures[spec.name], exc)
        if failures[spec.name] > self.limits.tool_retry_cap:
            raise ToolFailure(spec.name, exc, list(self.trace)) from exc

    # -- loop -----------------------------------------------------------

    def run(self, query: MissionQuery) -> ReactResult:
        messages = [
            ModelMessage.text("system", self.system_prompt()),
            ModelMessage.text("user", self._first_prompt(query)),
        ]
        failures: Counter = Counter()
        for turn in range(1, self.limits.max_steps + 1):
            if turn > 1:
                messages.append(ModelMessage.text("user", f"{self._marker(turn)} Choose the next action."))
            reply = self.gateway.ask(
                messages, temperature=self.limits.temperature, max_tokens=self.limits.max_tokens
            ).text
            messages.append(ModelMessage.text("assistant", reply or "(empty)"))
            name, raw_args, thought = _parse_action(reply)
            self._append("reason", thought or reply.strip() or "(empty reply)")

            if name is None:
                obs = "Error: no action found. Reply with one JSON object naming a tool."
            elif name not in self.registry:
                obs = f"Error: unknown tool {name!r}. Available: {', '.join(self.registry.names())}"
            else:
                obs = self._execute(self.registry.get(name), raw_args, failures)
            if self.on_step is not None:
                self.on_step(self)
            if self.finished:
                return ReactResult(self.answer, list(self.trace))
            messages.append(ModelMessage.text("tool", obs))
        raise StepBudgetExhausted(self.agent_id, self.limits.max_steps, list(self.trace))


def run_react(
    agent_id: str,
    query: MissionQuery,
    registry: ToolRegistry,
    gateway: Gateway,
    limits: Optional[ReactLimits] = None,
    *,
    variables: Optional[dict[str, Any]] = None,
    role: str = "a mission agent",
    on_step: Optional[Callable[[ReactAgent], None]] = None,
) -> ReactResult:
    """Run one agent to completion and return ``(answer, trace)``.

    ``variables`` is updated in place with every tool result, so callers can
    pick up intermediate artifacts after the run.
    """
    agent = ReactAgent(
        agent_id,
        registry,
        gateway,
        limits or ReactLimits(),
        role=role,
        variables=variables if variables is not None else {},
        on_step=on_step,
    )
    return agent.run(query)


def act_steps(trace: list[ReactStep]) -> list[ReactStep]:
    return [s for s in trace if s.phase == "act"]
