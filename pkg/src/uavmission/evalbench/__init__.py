"""Benchmark runs and evaluation metrics."""

from uavmission.evalbench.benchmark import (
    BenchmarkManifest,
    BenchmarkRun,
    BenchmarkSummary,
    PipelineConfig,
    run_benchmark,
    summarize_records,
    temperature_sweep,
)
from uavmission.evalbench.metrics import (
    BenchmarkSample,
    CategoryMetrics,
    GroundingRecord,
    RunRecord,
    classify_outcome,
    compute_ttd,
    grounding_metrics,
    mean_elapsed,
    rank_by_distance,
    success_rate,
)

__all__ = [
    "BenchmarkManifest",
    "BenchmarkRun",
    "BenchmarkSample",
    "BenchmarkSummary",
    "CategoryMetrics",
    "GroundingRecord",
    "PipelineConfig",
    "RunRecord",
    "classify_outcome",
    "compute_ttd",
    "grounding_metrics",
    "mean_elapsed",
    "rank_by_distance",
    "run_benchmark",
    "success_rate",
    "summarize_records",
    "temperature_sweep",
]
