"""Outcome classification, time-to-detection, success rate, grounding metrics."""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from uavmission.core import BoundingBox, PixelPoint, euclidean_distance

OUTCOMES = ("true_positive", "true_negative", "false_positive", "false_negative")
CATEGORIES = ("urban", "industrial", "wildland", "composite", "vehicle", "none")

FireTruth = tuple[PixelPoint, Optional[BoundingBox]]


@dataclass(frozen=True)
class BenchmarkSample:
    sample_id: str
    image_id: str
    category: str
    ground_truth_fires: tuple[FireTruth, ...] = ()

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}; expected one of {CATEGORIES}")
        if self.category == "none" and self.ground_truth_fires:
            raise ValueError(f"sample {self.sample_id}: category 'none' cannot list fires")


@dataclass(frozen=True)
class RunRecord:
    sample_id: str
    t_query: float
    t_detect: Optional[float]
    reported_fires: tuple[PixelPoint, ...]
    outcome: str
    elapsed: float
    temperature: float
    note: str = ""

    def __post_init__(self) -> None:
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {self.outcome!r}")
        if self.t_detect is not None and self.t_detect < self.t_query:
            raise ValueError("t_detect precedes t_query")
        if self.elapsed < 0:
            raise ValueError("elapsed must be non-negative")

    @property
    def success(self) -> bool:
        return self.outcome in ("true_positive", "true_negative")


@dataclass(frozen=True)
class GroundingRecord:
    image_id: str
    category: str
    predictions: tuple[PixelPoint, ...] = ()
    ground_truth: tuple[PixelPoint, ...] = ()

    def __post_init__(self) -> None:
        if not self.category:
            raise ValueError("grounding record needs a category")


@dataclass(frozen=True)
class CategoryMetrics:
    category: str
    mean_distance: Optional[float]
    mean_coverage: float
    records: int = 0
    predictions: int = 0


def matches_truth(report: PixelPoint, truth: FireTruth, match_radius: float) -> bool:
    point, bbox = truth
    if bbox is not None and bbox.contains(report):
        return True
    return euclidean_distance(report, point) <= match_radius


def classify_outcome(
    reports: Sequence[PixelPoint], truth: Sequence[FireTruth], match_radius: float = 50.0
) -> str:
    """TP if some report hits some true fire; FP for reports that hit nothing.

    With both present but no hit the sample counts as a false positive: the
    system claimed a fire that is not there.
    """
    if not match_radius > 0:
        raise ValueError("match_radius must be positive")
    if not truth:
        return "false_positive" if reports else "true_negative"
    if any(matches_truth(r, t, match_radius) for r in reports for t in truth):
        return "true_positive"
    return "false_positive" if reports else "false_negative"


def compute_ttd(records: Iterable[RunRecord]) -> Optional[float]:
    """Mean of t_detect - t_query over true-positive records, or None."""
    deltas = [
        r.t_detect - r.t_query
        for r in records
        if r.outcome == "true_positive" and r.t_detect is not None
    ]
    if not deltas:
        return None
    return math.fsum(deltas) / len(deltas)


def success_rate(records: Sequence[RunRecord]) -> tuple[int, int, float]:
    total = len(records)
    if total < 1:
        raise ValueError("success rate needs at least one record")
    successes = sum(1 for r in records if r.success)
    return successes, total, successes / total


def mean_elapsed(records: Sequence[RunRecord]) -> Optional[float]:
    if not records:
        return None
    return math.fsum(r.elapsed for r in records) / len(records)


def grounding_metrics(records: Iterable[GroundingRecord]) -> dict[str, CategoryMetrics]:
    """Per-category mean nearest-truth distance and mean predictions per record.

    Categories appear in first-seen order.
    """
    distances: "OrderedDict[str, list[float]]" = OrderedDict()
    counts: "OrderedDict[str, list[int]]" = OrderedDict()
    for rec in records:
        distances.setdefault(rec.category, [])
        counts.setdefault(rec.category, []).append(len(rec.predictions))
        if rec.predictions and not rec.ground_truth:
            raise ValueError(f"record {rec.image_id}: predictions without ground truth")
        for p in rec.predictions:
            distances[rec.category].append(min(euclidean_distance(p, t) for t in rec.ground_truth))
    out = {}
    for cat, ds in distances.items():
        cs = counts[cat]
        out[cat] = CategoryMetrics(
            cat,
            math.fsum(ds) / len(ds) if ds else None,
            sum(cs) / len(cs),
            records=len(cs),
            predictions=len(ds),
        )
    return out


def rank_by_distance(metrics: dict[str, CategoryMetrics]) -> list[CategoryMetrics]:
    """Descending mean distance; categories without predictions go last."""
    return sorted(
        metrics.values(),
        key=lambda m: (m.mean_distance is None, -(m.mean_distance or 0.0), m.category),
    )
