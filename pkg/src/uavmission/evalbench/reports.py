"""Report files and stdout tables."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Sequence

from uavmission.core import PixelPoint
from uavmission.errors import ConfigurationError
from uavmission.evalbench.metrics import CategoryMetrics, GroundingRecord, RunRecord

RECORD_COLUMNS = ("sample_id", "temperature", "outcome", "t_query", "t_detect", "elapsed", "reported_fires", "note")
GROUNDING_COLUMNS = ("category", "mean_distance", "mean_coverage")


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_summary_json(path: str | Path, query: str, summaries: Sequence[Any]) -> Path:
    path = Path(path)
    doc = {"query": query, "runs": [s.to_dict() for s in summaries]}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_records_csv(path: str | Path, records: Sequence[RunRecord]) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in records:
            fires = json.dumps([p.as_list() for p in r.reported_fires])
            w.writerow(
                [r.sample_id, _fmt(r.temperature), r.outcome, _fmt(r.t_query), _fmt(r.t_detect), _fmt(r.elapsed), fires, r.note]
            )
    return path


def grounding_csv_text(rows: Sequence[CategoryMetrics]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GROUNDING_COLUMNS)
    for m in rows:
        w.writerow([m.category, _fmt(m.mean_distance), _fmt(m.mean_coverage)])
    return buf.getvalue()


def write_grounding_csv(path: str | Path, rows: Sequence[CategoryMetrics]) -> Path:
    path = Path(path)
    path.write_text(grounding_csv_text(rows), encoding="utf-8")
    return path


def load_grounding_records(path: str | Path) -> list[GroundingRecord]:
    """Read ``{"records": [{"image", "category", "predictions", "truth"}]}``."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return [
            GroundingRecord(
                str(r["image"]),
                str(r["category"]),
                tuple(PixelPoint(*p) for p in r.get("predictions", [])),
                tuple(PixelPoint(*p) for p in r.get("truth", [])),
            )
            for r in doc["records"]
        ]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigurationError(f"invalid grounding records {path}: {exc}") from exc


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    line = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
    out = [line, "| " + " | ".join(h.center(w) for h, w in zip(header, widths)) + " |", line]
    for r in rows:
        out.append("| " + " | ".join(c.center(w) for c, w in zip(r, widths)) + " |")
    out.append(line)
    return "\n".join(out)


def temperature_table(summaries: Sequence[Any]) -> str:
    """Sampling temperature vs. mean elapsed time vs. successful samples."""
    rows = [
        [
            f"{s.temperature:g}",
            "-" if s.mean_elapsed is None else f"{s.mean_elapsed:.2f}",
            str(s.successes),
        ]
        for s in summaries
    ]
    return _table(["Sampling Temperature (T)", "Avg. Elapsed Time (s)", "Successful samples"], rows)


def grounding_table(rows: Sequence[CategoryMetrics]) -> str:
    body = [
        [m.category, "-" if m.mean_distance is None else f"{m.mean_distance:.2f}", f"{m.mean_coverage:.2f}"]
        for m in rows
    ]
    return _table(["Category", "Mean Distance", "Mean Coverage"], body)
