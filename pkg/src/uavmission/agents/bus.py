"""In-process message passing between agents.

Each registered agent owns a FIFO mailbox. Delivery order is preserved per
sender/recipient pair and the bus is safe for concurrent senders and
receivers.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from uavmission.core import BoundingBox, LabeledKeypoint, PixelPoint, jsonable
from uavmission.errors import UnknownRecipient

MESSAGE_KINDS = ("state_report", "task_assignment", "observation", "final_answer")


@dataclass(frozen=True)
class AgentMessage:
    from_agent: str
    to_agent: str
    kind: str
    payload: Any
    timestamp: float

    def __post_init__(self) -> None:
        if self.from_agent == self.to_agent:
            raise ValueError("an agent cannot message itself")
        if self.kind not in MESSAGE_KINDS:
            raise ValueError(f"unknown message kind {self.kind!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "from": self.from_agent,
            "to": self.to_agent,
            "kind": self.kind,
            "payload": jsonable(self.payload),
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class AgentState:
    agent_id: str
    position: Optional[PixelPoint] = None
    last_image_id: Optional[str] = None
    annotations: tuple[LabeledKeypoint, ...] = ()

    def __post_init__(self) -> None:
        if not self.agent_id:
            raise ValueError("agent_id must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "agent_id": self.agent_id,
            "position": self.position.as_list() if self.position else None,
            "last_image_id": self.last_image_id,
            "annotations": [kp.to_dict() for kp in self.annotations],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "AgentState":
        anns = []
        for a in d.get("annotations", []):
            bbox = BoundingBox(*a["bbox"]) if a.get("bbox") else None
            anns.append(LabeledKeypoint(a["label"], PixelPoint(*a["point"]), bbox, a.get("fire_probability")))
        pos = d.get("position")
        return cls(d["agent_id"], PixelPoint(*pos) if pos else None, d.get("last_image_id"), tuple(anns))


@dataclass(frozen=True)
class Receipt:
    seq: int
    to_agent: str


class MessageBus:
    def __init__(self) -> None:
        self._mailboxes: dict[str, deque[AgentMessage]] = {}
        self._last_ts: dict[str, float] = {}
        self._log: list[AgentMessage] = []
        self._cond = threading.Condition()

    def register(self, agent_id: str) -> None:
        with self._cond:
            self._mailboxes.setdefault(agent_id, deque())

    def unregister(self, agent_id: str) -> None:
        with self._cond:
            self._mailboxes.pop(agent_id, None)

    @property
    def agents(self) -> list[str]:
        with self._cond:
            return list(self._mailboxes)

    def send(self, message: AgentMessage) -> Receipt:
        with self._cond:
            box = self._mailboxes.get(message.to_agent)
            if box is None:
                raise UnknownRecipient(f"no agent {message.to_agent!r} on the bus")
            last = self._last_ts.get(message.from_agent)
            if last is not None and message.timestamp < last:
                raise ValueError(
                    f"timestamp went backwards for {message.from_agent}: {message.timestamp} < {last}"
                )
            self._last_ts[message.from_agent] = message.timestamp
            box.append(message)
            self._log.append(message)
            seq = len(self._log)
            self._cond.notify_all()
        return Receipt(seq, message.to_agent)

    def receive(self, agent_id: str, timeout: Optional[float] = None) -> Optional[AgentMessage]:
        """Pop the oldest message for ``agent_id``.

        ``timeout=None`` returns immediately; a positive timeout blocks until a
        message arrives or the time runs out.
        """
        with self._cond:
            if agent_id not in self._mailboxes:
                raise UnknownRecipient(f"no agent {agent_id!r} on the bus")
            if timeout:
                self._cond.wait_for(lambda: bool(self._mailboxes.get(agent_id)), timeout)
            box = self._mailboxes.get(agent_id)
            return box.popleft() if box else None

    def drain(self, agent_id: str) -> list[AgentMessage]:
        with self._cond:
            box = self._mailboxes.get(agent_id)
            if box is None:
                raise UnknownRecipient(f"no agent {agent_id!r} on the bus")
            out = list(box)
            box.clear()
            return out

    def pending(self, agent_id: str) -> int:
        with self._cond:
            return len(self._mailboxes.get(agent_id, ()))

    def history(self) -> list[AgentMessage]:
        with self._cond:
            return list(self._log)


def send_message(bus: MessageBus, message: AgentMessage) -> Receipt:
    return bus.send(message)


@dataclass
class StateReporter:
    """Emits ``state_report`` messages at least once per ``period``.

    Drive it either by calling :meth:`pump` with the current run time (for
    simulated clocks) or with :meth:`start`/:meth:`stop` on a real thread.
    """

    bus: MessageBus
    to_agent: str
    state: Callable[[], AgentState]
    period: float = 1.0
    clock: Optional[Callable[[], float]] = None
    _next_due: float = field(default=0.0, init=False)
    _running: bool = field(default=True, init=False)
    _thread: Optional[threading.Thread] = field(default=None, init=False, repr=False)
    _stop: threading.Event = field(default_factory=threading.Event, init=False, repr=False)
    emitted: int = field(default=0, init=False)

    def __post_init__(self) -> None:
        if self.period <= 0:
            raise ValueError("report period must be positive")

    def _emit(self, now: float) -> None:
        st = self.state()
        self.bus.send(AgentMessage(st.agent_id, self.to_agent, "state_report", st.to_dict(), now))
        self.emitted += 1

    def pump(self, now: float) -> int:
        """Emit every report that has come due up to ``now``."""
        sent = 0
        while self._running and now >= self._next_due:
            self._emit(now)
            self._next_due += self.period
            sent += 1
        return sent

    def start(self) -> None:
        if self.clock is None:
            raise ValueError("threaded reporting needs a clock")
        clock = self.clock

        def loop() -> None:
            while not self._stop.is_set():
                self.pump(clock())
                self._stop.wait(self.period / 4)

        self._thread = threading.Thread(target=loop, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._running = False
        self._stop.set()
        if self._thread is not None:
            self._thread.join()


def report_state(
    bus: MessageBus,
    state: Callable[[], AgentState],
    period: float = 1.0,
    *,
    to_agent: str,
    clock: Optional[Callable[[], float]] = None,
) -> StateReporter:
    return StateReporter(bus, to_agent, state, period, clock)
