"""Exception hierarchy used across the package."""

from __future__ import annotations

from typing import Any, Optional


class MissionError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(MissionError):
    pass


# model gateway


class GatewayError(MissionError):
    def __init__(self, message: str, request_id: Optional[str] = None):
        super().__init__(f"[{request_id}] {message}" if request_id else message)
        self.request_id = request_id


class EndpointUnreachable(GatewayError):
    pass


class AuthRejected(GatewayError):
    pass


class ScenarioExhausted(GatewayError):
    pass


class Unparseable(MissionError):
    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (best attempt at offset {offset})")
        self.offset = offset


class EmptyResult(MissionError):
    """No usable element came back from a grounding query.

    The ReAct runtime turns this into an observation so the agent can
    re-query instead of crashing.
    """


# agent runtime


class DuplicateTool(MissionError):
    pass


class UnknownRecipient(MissionError):
    pass


class StepBudgetExhausted(MissionError):
    def __init__(self, agent_id: str, max_steps: int, trace: list[Any]):
        super().__init__(f"agent {agent_id!r} did not finish within {max_steps} steps")
        self.agent_id = agent_id
        self.max_steps = max_steps
        self.trace = trace


class ToolFailure(MissionError):
    def __init__(self, tool: str, cause: BaseException, trace: Optional[list[Any]] = None):
        super().__init__(f"tool {tool!r} failed: {cause}")
        self.tool = tool
        self.cause = cause
        self.trace = trace or []


class RunTerminated(MissionError):
    """A tool was invoked after final_answer closed the run."""


# mission tools / simulation


class IndexOutOfRange(MissionError, IndexError):
    pass


class EmptyPath(MissionError, ValueError):
    pass
