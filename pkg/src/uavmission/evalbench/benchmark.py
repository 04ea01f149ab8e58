"""Benchmark ingestion and end-to-end scripted or live benchmark runs."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, NamedTuple, Optional, Sequence

from uavmission.core import DEFAULT_QUERY, BoundingBox, MissionQuery, PixelPoint
from uavmission.errors import ConfigurationError
from uavmission.evalbench.metrics import (
    BenchmarkSample,
    RunRecord,
    classify_outcome,
    compute_ttd,
    matches_truth,
    mean_elapsed,
    success_rate,
)
from uavmission.gateway.backends import Gateway
from uavmission.mission import MissionConfig, MissionOutcome, run_mission
from uavmission.tools.imagestore import ImageStore

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchmarkManifest:
    """Parsed benchmark manifest.

    ``{"query": str, "samples": [{"id", "image", "category",
    "fires": [{"point": [x, y], "bbox": [x1, y1, x2, y2]?}]}]}``; image paths
    are relative to the manifest file.
    """

    query: str
    samples: tuple[BenchmarkSample, ...]
    image_paths: tuple[Path, ...]

    @classmethod
    def load(cls, path: str | Path) -> "BenchmarkManifest":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read manifest {path}: {exc}") from exc
        return cls.from_dict(doc, path.parent)

    @classmethod
    def from_dict(cls, doc: dict[str, Any], root: Path = Path(".")) -> "BenchmarkManifest":
        try:
            raw_samples = doc["samples"]
            samples, paths = [], []
            for raw in raw_samples:
                fires = []
                for f in raw.get("fires", []):
                    bbox = BoundingBox(*f["bbox"]) if f.get("bbox") else None
                    fires.append((PixelPoint(*f["point"]), bbox))
                image = root / raw["image"]
                samples.append(BenchmarkSample(str(raw["id"]), image.stem, raw.get("category", "none"), tuple(fires)))
                paths.append(image)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid manifest: {exc}") from exc
        if not samples:
            raise ConfigurationError("manifest lists no samples")
        ids = [s.sample_id for s in samples]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("sample ids must be unique")
        return cls(str(doc.get("query") or DEFAULT_QUERY), tuple(samples), tuple(paths))

    def image_store(self) -> ImageStore:
        return ImageStore([(s.sample_id, p) for s, p in zip(self.samples, self.image_paths)])


@dataclass(frozen=True)
class PipelineConfig:
    temperature: float = 0.5
    match_radius: float = 50.0
    mission: MissionConfig = field(default_factory=MissionConfig)
    parallelism: int = 4
    query: Optional[str] = None


@dataclass(frozen=True)
class BenchmarkSummary:
    temperature: float
    total: int
    successes: int
    success_rate: float
    ttd: Optional[float]
    mean_elapsed: Optional[float]
    failed_ids: tuple[str, ...]
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "temperature": self.temperature,
            "total": self.total,
            "successes": self.successes,
            "success_rate": self.success_rate,
            "ttd": self.ttd,
            "mean_elapsed": self.mean_elapsed,
            "failed_ids": list(self.failed_ids),
            "notes": list(self.notes),
        }


class BenchmarkRun(NamedTuple):
    records: list[RunRecord]
    summary: BenchmarkSummary
    outcomes: dict[str, MissionOutcome]


def summarize_records(records: Sequence[RunRecord], temperature: float, notes: Sequence[str] = ()) -> BenchmarkSummary:
    successes, total, rate = success_rate(records)
    return BenchmarkSummary(
        temperature=temperature,
        total=total,
        successes=successes,
        success_rate=round(rate, 2),
        ttd=compute_ttd(records),
        mean_elapsed=mean_elapsed(records),
        failed_ids=tuple(r.sample_id for r in records if not r.success),
        notes=tuple(notes),
    )


def _run_sample(
    sample: BenchmarkSample,
    index: int,
    store: ImageStore,
    query: str,
    gateway: Gateway,
    config: PipelineConfig,
) -> tuple[RunRecord, MissionOutcome]:
    truth = sample.ground_truth_fires
    gw = gateway.fork(temperature=config.temperature)
    mission_cfg = replace(config.mission, temperature=config.temperature)

    def hits_truth(det) -> bool:
        return det.location is not None and any(matches_truth(det.location, t, config.match_radius) for t in truth)

    outcome = run_mission(
        store, index, MissionQuery(query, sample.sample_id), gw, mission_cfg, counts_as_detection=hits_truth
    )
    reported = tuple(outcome.reported_fires)
    if outcome.status != "completed":
        verdict, note = "false_negative", outcome.error or outcome.status
    else:
        verdict, note = classify_outcome(reported, truth, config.match_radius), ""
    t_detect = outcome.t_detect if verdict == "true_positive" else None
    record = RunRecord(
        sample.sample_id,
        outcome.t_query,
        t_detect,
        reported,
        verdict,
        max(0.0, outcome.elapsed),
        config.temperature,
        note,
    )
    return record, outcome


def run_benchmark(manifest: BenchmarkManifest, gateway: Gateway, config: PipelineConfig = PipelineConfig()) -> BenchmarkRun:
    """Run the full mission on every sample and classify the results.

    Samples run with bounded parallelism; each gets its own backend session
    and clock, and results are aggregated in sample-id order.
    """
    store = manifest.image_store()
    query = config.query or manifest.query
    jobs = list(enumerate(manifest.samples))
    if config.parallelism > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            results = list(pool.map(lambda j: _run_sample(j[1], j[0], store, query, gateway, config), jobs))
    else:
        results = [_run_sample(s, i, store, query, gateway, config) for i, s in jobs]
    results.sort(key=lambda r: r[0].sample_id)
    records = [r for r, _ in results]
    outcomes = {r.sample_id: o for r, o in results}
    notes = [f"{r.sample_id}: {r.note}" for r in records if r.note]
    return BenchmarkRun(records, summarize_records(records, config.temperature, notes), outcomes)


def temperature_sweep(
    manifest: BenchmarkManifest,
    temperatures: Sequence[float],
    gateway: Gateway,
    config: PipelineConfig = PipelineConfig(),
) -> list[BenchmarkRun]:
    if not temperatures:
        raise ValueError("temperature sweep needs at least one temperature")
    return [run_benchmark(manifest, gateway, replace(config, temperature=t)) for t in temperatures]
