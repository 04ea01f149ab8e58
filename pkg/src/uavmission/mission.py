"""End-to-end mission: airspace manager plans, UAV agent flies and detects.

1. The airspace manager (AMA) runs its ReAct loop over the satellite image and
   answers with grounded keypoints.
2. The keypoints are ordered highest-fire-probability first and sent to the
   UAV agent as a ``task_assignment`` message.
3. The UAV agent simulates the flight, runs per-frame detection and reports
   back with ``state_report``, ``observation`` and ``final_answer`` messages.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from uavmission.agents.bus import AgentMessage, AgentState, MessageBus, StateReporter
from uavmission.agents.react import ReactLimits, ReactStep, run_react
from uavmission.core import LabeledKeypoint, MissionPlan, MissionQuery, PixelPoint, jsonable
from uavmission.errors import MissionError, StepBudgetExhausted, ToolFailure
from uavmission.gateway.backends import Gateway
from uavmission.sim import SimConfig, SimulationResult
from uavmission.tools.catalog import ama_registry, as_keypoints, uav_registry
from uavmission.tools.imagestore import ImageStore
from uavmission.tools.perception import DetectionResult
from uavmission.tools.planning import order_waypoints

log = logging.getLogger(__name__)

AMA_ID = "ama"
UAV_ID = "uav"
AMA_ROLE = (
    "the airspace manager agent: interpret the mission, analyse the satellite image, "
    "ground the relevant targets to pixel coordinates with a fire probability each, "
    "and answer with the list of grounded keypoints"
)
UAV_ROLE = (
    "the UAV agent: fly the assigned waypoints over the image in the simulator, "
    "check the captured frames for fire and answer with the detections"
)


@dataclass(frozen=True)
class MissionConfig:
    max_steps: int = 8
    temperature: float = 0.5
    sim: SimConfig = field(default_factory=SimConfig)
    detect_parallelism: int = 1
    report_period: float = 1.0
    start: Optional[PixelPoint] = None  # default: scene center


@dataclass
class MissionOutcome:
    query: MissionQuery
    image_id: str
    status: str = "running"
    error: str = ""
    ama_answer: Any = None
    uav_answer: Any = None
    ama_trace: list[ReactStep] = field(default_factory=list)
    uav_trace: list[ReactStep] = field(default_factory=list)
    keypoints: list[LabeledKeypoint] = field(default_factory=list)
    plan: Optional[MissionPlan] = None
    simulation: Optional[SimulationResult] = None
    detections: list[DetectionResult] = field(default_factory=list)
    messages: list[AgentMessage] = field(default_factory=list)
    t_query: float = 0.0
    t_detect: Optional[float] = None
    t_end: float = 0.0

    @property
    def elapsed(self) -> float:
        return self.t_end - self.t_query

    @property
    def reported_fires(self) -> list[PixelPoint]:
        return [d.location for d in self.detections if d.fire_detected and d.location is not None]

    def trace_document(self) -> dict[str, Any]:
        return {
            "query": {"text": self.query.text, "sample_id": self.query.sample_id},
            "image_id": self.image_id,
            "status": self.status,
            "error": self.error,
            "agents": {
                AMA_ID: {"answer": jsonable(self.ama_answer), "steps": [s.to_dict() for s in self.ama_trace]},
                UAV_ID: {"answer": jsonable(self.uav_answer), "steps": [s.to_dict() for s in self.uav_trace]},
            },
            "plan": {
                "waypoints": [kp.to_dict() for kp in self.plan.ordered_waypoints] if self.plan else [],
                "rationale": self.plan.rationale if self.plan else "",
            },
            "frames": len(self.simulation.frames) if self.simulation else 0,
            "detections": [d.to_dict() for d in self.detections],
            "messages": [m.to_dict() for m in self.messages],
            "timings": {
                "t_query": self.t_query,
                "t_detect": self.t_detect,
                "t_end": self.t_end,
                "elapsed": self.elapsed,
            },
        }


def _keypoints_from_answer(answer: Any, variables: dict[str, Any], store: ImageStore, index: int) -> list[LabeledKeypoint]:
    image = store.get(index)
    try:
        kps = as_keypoints(answer, image)
    except (TypeError, MissionError):
        kps = []
    if not kps:
        # answered in prose: fall back to the last grounding result
        fallback = variables.get("pixelpoint_objects") or []
        kps = [kp for kp in fallback if isinstance(kp, LabeledKeypoint)]
    return kps


def _fail(outcome: MissionOutcome, exc: MissionError) -> None:
    if isinstance(exc, StepBudgetExhausted):
        outcome.status = "budget_exhausted"
    elif isinstance(exc, ToolFailure):
        outcome.status = "tool_failure"
    else:
        outcome.status = "error"
    outcome.error = f"{type(exc).__name__}: {exc}"


def run_mission(
    store: ImageStore,
    index: int,
    query: MissionQuery,
    gateway: Gateway,
    config: MissionConfig = MissionConfig(),
    *,
    vision_gateway: Optional[Gateway] = None,
    counts_as_detection: Optional[Callable[[DetectionResult], bool]] = None,
) -> MissionOutcome:
    """Run one AMA -> UAV mission on image ``index`` of ``store``.

    ``t_detect`` is stamped on the first positive detection accepted by
    ``counts_as_detection`` (default: any positive). Errors never escape;
    they end the mission with a non-``completed`` status.
    """
    clock = gateway.clock
    vision = vision_gateway or gateway
    scene = store.get(index)
    outcome = MissionOutcome(query, scene.id, t_query=clock.now())
    limits = ReactLimits(max_steps=config.max_steps, temperature=config.temperature)

    bus = MessageBus()
    bus.register(AMA_ID)
    bus.register(UAV_ID)
    uav_state = {"state": AgentState(UAV_ID)}
    reporter = StateReporter(bus, AMA_ID, lambda: uav_state["state"], config.report_period)
    uav_vars: dict[str, Any] = {}

    def on_detection(res: DetectionResult) -> None:
        sim = uav_vars.get("uav_simulation")
        if isinstance(sim, SimulationResult) and res.frame_id in sim.frames:
            frame = sim.frames[res.frame_id]
            uav_state["state"] = AgentState(UAV_ID, frame.center, frame.crop.id, uav_state["state"].annotations)
        accept = counts_as_detection or (lambda r: True)
        if res.fire_detected and outcome.t_detect is None and accept(res):
            outcome.t_detect = clock.now()
        reporter.pump(clock.now())

    ama_vars: dict[str, Any] = {"image_index": index}
    try:
        try:
            outcome.ama_answer, outcome.ama_trace = run_react(
                AMA_ID, query, ama_registry(store, vision), gateway, limits, variables=ama_vars, role=AMA_ROLE
            )
        except MissionError as exc:
            outcome.ama_trace = list(getattr(exc, "trace", []))
            raise

        outcome.keypoints = _keypoints_from_answer(outcome.ama_answer, ama_vars, store, index)
        start = config.start or PixelPoint((scene.width - 1) / 2, (scene.height - 1) / 2)
        outcome.plan = order_waypoints(outcome.keypoints, start)
        if not outcome.plan.ordered_waypoints:
            outcome.status = "completed"
            return outcome

        uav_state["state"] = AgentState(UAV_ID, start, None, outcome.plan.ordered_waypoints)
        bus.send(
            AgentMessage(
                AMA_ID,
                UAV_ID,
                "task_assignment",
                {"image_index": index, "plan": outcome.plan},
                clock.now(),
            )
        )
        task = bus.receive(UAV_ID)
        assert task is not None and task.kind == "task_assignment"
        plan: MissionPlan = task.payload["plan"]
        uav_vars.update({"image_index": task.payload["image_index"], "plan": list(plan.ordered_waypoints)})
        reporter.pump(clock.now())

        uav_query = MissionQuery(
            f"Fly the {len(plan.ordered_waypoints)} assigned waypoint(s) over image "
            f"{task.payload['image_index']} (highest fire probability first) and report any fire.",
            query.sample_id,
        )
        registry = uav_registry(
            store, vision, config.sim, parallelism=config.detect_parallelism, on_detection=on_detection
        )
        try:
            outcome.uav_answer, outcome.uav_trace = run_react(
                UAV_ID,
                uav_query,
                registry,
                gateway,
                limits,
                variables=uav_vars,
                role=UAV_ROLE,
                on_step=lambda _agent: reporter.pump(clock.now()),
            )
        except MissionError as exc:
            outcome.uav_trace = list(getattr(exc, "trace", []))
            raise
        finally:
            sim = uav_vars.get("uav_simulation")
            outcome.simulation = sim if isinstance(sim, SimulationResult) else None
            dets = uav_vars.get("detect_and_display") or []
            outcome.detections = [d for d in dets if isinstance(d, DetectionResult)]

        fires = [d for d in outcome.detections if d.fire_detected]
        bus.send(AgentMessage(UAV_ID, AMA_ID, "observation", {"fires": fires}, clock.now()))
        bus.send(AgentMessage(UAV_ID, AMA_ID, "final_answer", outcome.uav_answer, clock.now()))
        outcome.status = "completed"
    except MissionError as exc:
        _fail(outcome, exc)
        log.info("mission on %s ended: %s", scene.id, outcome.error)
    finally:
        reporter.stop()
        outcome.t_end = clock.now()
        outcome.messages = bus.history()
    return outcome
