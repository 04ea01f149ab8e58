"""Command line entry point: ``uavmission {mission,benchmark,grounding,simulate}``.

Exit codes: 0 success, 1 configuration or input error, 2 step budget
exhausted. Tables go to stdout, everything machine-readable goes to files
under ``--out-dir``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from uavmission.core import DEFAULT_QUERY, MissionQuery, SceneImage, jsonable
from uavmission.errors import ConfigurationError, EmptyResult, MissionError
from uavmission.evalbench.benchmark import BenchmarkManifest, PipelineConfig, temperature_sweep
from uavmission.evalbench.metrics import grounding_metrics, rank_by_distance
from uavmission.evalbench.reports import (
    grounding_table,
    load_grounding_records,
    temperature_table,
    write_grounding_csv,
    write_records_csv,
    write_summary_json,
)
from uavmission.gateway.backends import Gateway, HttpBackend, ScriptedBackend
from uavmission.gateway.keypoints import parse_keypoints
from uavmission.mission import MissionConfig, run_mission
from uavmission.sim import SimConfig, export_frames, uav_simulation
from uavmission.tools.imagestore import ImageStore
from uavmission.tools.render import visualize_keypoints

log = logging.getLogger("uavmission")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BUDGET = 2

DEFAULT_HTTP_MODEL = "Qwen/Qwen2.5-VL-32B-Instruct"


MODEL_COMMANDS = ("mission", "benchmark")


@dataclass(frozen=True)
class RunConfig:
    backend: Optional[str]  # None for commands that never call a model
    api_base: Optional[str]
    credential_env: str
    scenario_path: Optional[Path]
    model_name: str
    temperature: float
    max_steps: int
    sim: SimConfig
    match_radius: float
    out_dir: Path
    parallelism: int

    def __post_init__(self) -> None:
        if self.backend == "http" and not self.api_base:
            raise ConfigurationError("--backend http requires --api-base")
        if self.backend == "scripted" and not self.scenario_path:
            raise ConfigurationError("--backend scripted requires --scenario")
        if self.parallelism < 1:
            raise ConfigurationError("--parallelism must be positive")
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigurationError("--temperature must lie in [0, 2]")
        if self.max_steps < 1:
            raise ConfigurationError("--max-steps must be at least 1")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        backend = None
        if args.command in MODEL_COMMANDS:
            backend = args.backend or ("scripted" if args.scenario else "http")
        try:
            sim = SimConfig(
                steps_per_segment=args.steps_per_segment,
                step_length=None if args.steps_per_segment else args.step_length,
                crop_size=args.crop_size,
                output_size=args.output_size,
                frame_rate=args.fps,
            )
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc
        return cls(
            backend=backend,
            api_base=args.api_base,
            credential_env=args.credential_env,
            scenario_path=Path(args.scenario) if args.scenario else None,
            model_name=args.model or ("scripted" if backend == "scripted" else DEFAULT_HTTP_MODEL),
            temperature=args.temperature,
            max_steps=args.max_steps,
            sim=sim,
            match_radius=args.match_radius,
            out_dir=Path(args.out_dir),
            parallelism=args.parallelism,
        )

    def mission_config(self) -> MissionConfig:
        return MissionConfig(max_steps=self.max_steps, temperature=self.temperature, sim=self.sim)

    def gateway(self) -> Gateway:
        if self.backend is None:
            raise ConfigurationError("no model backend configured")
        if self.backend == "scripted":
            try:
                backend = ScriptedBackend.from_file(self.scenario_path)
            except (OSError, ValueError, KeyError, TypeError) as exc:
                raise ConfigurationError(f"cannot load scenario {self.scenario_path}: {exc}") from exc
        else:
            backend = HttpBackend(self.api_base, self.credential_env)
        return Gateway.for_backend(backend, model_name=self.model_name, temperature=self.temperature)


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model backend")
    g.add_argument("--backend", choices=("http", "scripted"), help="default: scripted when --scenario is given")
    g.add_argument("--api-base", help="OpenAI-compatible base URL, e.g. https://host/v1")
    g.add_argument("--credential-env", default="OPENAI_API_KEY", help="environment variable holding the API key")
    g.add_argument("--scenario", help="scripted backend scenario JSON")
    g.add_argument("--model", help="model name sent to the endpoint")
    g.add_argument("--temperature", type=float, default=0.5)
    g.add_argument("--max-steps", type=int, default=8)
    s = p.add_argument_group("simulation")
    s.add_argument("--step-length", type=float, default=25.0, help="pixels between interpolated positions")
    s.add_argument("--steps-per-segment", type=int, help="fixed positions per segment (overrides --step-length)")
    s.add_argument("--crop-size", type=int, default=128)
    s.add_argument("--output-size", type=int, default=256)
    s.add_argument("--fps", type=float, default=5.0)
    e = p.add_argument_group("evaluation")
    e.add_argument("--match-radius", type=float, default=50.0)
    e.add_argument("--parallelism", type=int, default=4)
    p.add_argument("--out-dir", default="out")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="uavmission", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("mission", parents=[common], help="run the two-agent mission on one image")
    m.add_argument("image")
    m.add_argument("--query", default=DEFAULT_QUERY)

    b = sub.add_parser("benchmark", parents=[common], help="run a benchmark manifest")
    b.add_argument("manifest")
    b.add_argument("--temperatures", help="comma-separated sweep, e.g. 0.5,0.7")

    gr = sub.add_parser("grounding", parents=[common], help="per-category grounding metrics")
    gr.add_argument("records")

    si = sub.add_parser("simulate", parents=[common], help="fly waypoints over an image")
    si.add_argument("--image", required=True)
    si.add_argument("--waypoints", required=True, help='JSON list of {"label", "point": [x, y]}')
    si.add_argument("--export-frames", action="store_true", help="also write per-frame PNGs + index")
    return parser


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_mission(args: argparse.Namespace, cfg: RunConfig) -> int:
    image_path = Path(args.image)
    if not image_path.is_file():
        raise ConfigurationError(f"image not found: {image_path}")
    try:
        scene = SceneImage.load(image_path)
    except OSError as exc:
        raise ConfigurationError(f"cannot read image {image_path}: {exc}") from exc
    store = ImageStore.from_images([scene])
    gateway = cfg.gateway()
    outcome = run_mission(store, 0, MissionQuery(args.query, scene.id), gateway, cfg.mission_config())

    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "trace.json", outcome.trace_document())
    visualize_keypoints(scene, outcome.keypoints).image.save(out / "keypoints.png")
    _write_json(out / "detections.json", {"detections": jsonable(outcome.detections)})
    if outcome.simulation is not None:
        (out / "flight.gif").write_bytes(outcome.simulation.animation)

    fires = outcome.reported_fires
    print(f"mission {scene.id}: {outcome.status}; {len(outcome.keypoints)} target(s), "
          f"{len(outcome.simulation.frames) if outcome.simulation else 0} frame(s), {len(fires)} fire detection(s)")
    for p in fires:
        print(f"  fire at ({p.x:.1f}, {p.y:.1f})")
    if outcome.status == "completed":
        return EXIT_OK
    print(outcome.error, file=sys.stderr)
    return EXIT_BUDGET if outcome.status == "budget_exhausted" else EXIT_CONFIG


def _parse_temperatures(text: Optional[str], default: float) -> list[float]:
    if not text:
        return [default]
    try:
        temps = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"bad --temperatures {text!r}") from exc
    if not temps or any(not 0.0 <= t <= 2.0 for t in temps):
        raise ConfigurationError(f"bad --temperatures {text!r}")
    return temps


def cmd_benchmark(args: argparse.Namespace, cfg: RunConfig) -> int:
    manifest = BenchmarkManifest.load(args.manifest)
    temps = _parse_temperatures(args.temperatures, cfg.temperature)
    pipeline = PipelineConfig(
        temperature=cfg.temperature,
        match_radius=cfg.match_radius,
        mission=cfg.mission_config(),
        parallelism=cfg.parallelism,
    )
    runs = temperature_sweep(manifest, temps, cfg.gateway(), pipeline)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    write_summary_json(out / "summary.json", manifest.query, [r.summary for r in runs])
    write_records_csv(out / "records.csv", [rec for r in runs for rec in r.records])
    print(temperature_table([r.summary for r in runs]))
    for r in runs:
        s = r.summary
        ttd = "-" if s.ttd is None else f"{s.ttd:.2f} s"
        failed = ", ".join(s.failed_ids) or "none"
        print(f"T={s.temperature:g}: success {s.successes}/{s.total} ({s.success_rate:.2f}), TTD {ttd}, failed: {failed}")
    return EXIT_OK


def cmd_grounding(args: argparse.Namespace, cfg: RunConfig) -> int:
    records = load_grounding_records(args.records)
    try:
        rows = rank_by_distance(grounding_metrics(records))
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    write_grounding_csv(cfg.out_dir / "grounding.csv", rows)
    print(grounding_table(rows))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, cfg: RunConfig) -> int:
    try:
        scene = SceneImage.load(args.image)
        doc = json.loads(Path(args.waypoints).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from exc
    if isinstance(doc, dict) and "waypoints" in doc:
        doc = doc["waypoints"]
    try:
        waypoints = parse_keypoints(doc, scene)
    except EmptyResult as exc:
        raise ConfigurationError(f"no usable waypoints: {exc}") from exc
    result = uav_simulation(scene, waypoints, cfg.sim)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    (cfg.out_dir / "flight.gif").write_bytes(result.animation)
    if args.export_frames:
        export_frames(result, cfg.out_dir / "frames")
    print(f"simulated {len(result.frames)} frame(s) over {len(waypoints)} waypoint(s) -> {cfg.out_dir / 'flight.gif'}")
    return EXIT_OK


COMMANDS = {
    "mission": cmd_mission,
    "benchmark": cmd_benchmark,
    "grounding": cmd_grounding,
    "simulate": cmd_simulate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = RunConfig.from_args(args)
        return COMMANDS[args.command](args, cfg)
    except MissionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
