"""Agent runtime: tool registry, ReAct executor and message bus."""

from uavmission.agents.bus import (
    AgentMessage,
    AgentState,
    MessageBus,
    Receipt,
    StateReporter,
    report_state,
    send_message,
)
from uavmission.agents.react import (
    ReactAgent,
    ReactLimits,
    ReactResult,
    ReactStep,
    act_steps,
    run_react,
    summarize,
)
from uavmission.agents.registry import ToolArg, ToolRegistry, ToolSpec, final_answer_tool, register_tool

__all__ = [
    "AgentMessage",
    "AgentState",
    "MessageBus",
    "ReactAgent",
    "ReactLimits",
    "ReactResult",
    "ReactStep",
    "Receipt",
    "StateReporter",
    "ToolArg",
    "ToolRegistry",
    "ToolSpec",
    "act_steps",
    "final_answer_tool",
    "register_tool",
    "report_state",
    "run_react",
    "send_message",
    "summarize",
]
