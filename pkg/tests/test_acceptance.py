"""Acceptance suite: one test per criterion, each with an independent oracle.

The terminal summary prints a PASS/FAIL line per criterion (see conftest.py).
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import random
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from uavmission.agents.react import ReactLimits, run_react
from uavmission.core import LabeledKeypoint, MissionQuery, PixelPoint
from uavmission.errors import StepBudgetExhausted
from uavmission.evalbench.benchmark import BenchmarkManifest, PipelineConfig, summarize_records, temperature_sweep
from uavmission.evalbench.metrics import (
    GroundingRecord,
    RunRecord,
    compute_ttd,
    grounding_metrics,
    rank_by_distance,
)
from uavmission.evalbench.reports import (
    GROUNDING_COLUMNS,
    grounding_csv_text,
    temperature_table,
    write_records_csv,
    write_summary_json,
)
from uavmission.gateway.backends import Gateway, ScriptedBackend, ScriptedScenario
from uavmission.gateway.repair import extract_structured
from uavmission.sim import SimConfig, interpolate_path, uav_simulation
from uavmission.tools.catalog import ama_registry
from uavmission.tools.imagestore import ImageStore
from uavmission.tools.planning import order_waypoints

from helpers import BENCH_SUCCESSES, mission_entries, synthetic_scene, write_benchmark, write_scenario, write_scene
from repair_corpus import MALFORMED, VALID


# -- independent oracles --------------------------------------------------


def oracle_dist(a, b) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2)


def oracle_segment_dist(p, a, b) -> float:
    ax, ay = a
    bx, by = b
    vx, vy = bx - ax, by - ay
    L2 = vx * vx + vy * vy
    if L2 == 0:
        return oracle_dist(p, a)
    t = max(0.0, min(1.0, ((p[0] - ax) * vx + (p[1] - ay) * vy) / L2))
    return oracle_dist(p, (ax + t * vx, ay + t * vy))


# -- 1 --------------------------------------------------------------------


@pytest.mark.criterion(1, "desk-scale acceptance rests on property suites plus format-exact report shapes")
def test_c01_report_shapes_are_format_exact(tmp_path):
    records = [
        RunRecord("a", 0.0, 2.0, (PixelPoint(1, 2),), "true_positive", 3.0, 0.5),
        RunRecord("b", 0.0, None, (), "true_negative", 4.0, 0.5),
    ]
    summary = summarize_records(records, 0.5)
    write_summary_json(tmp_path / "summary.json", "q", [summary])
    doc = json.loads((tmp_path / "summary.json").read_text())
    assert set(doc) == {"query", "runs"}
    assert set(doc["runs"][0]) == {
        "temperature", "total", "successes", "success_rate", "ttd", "mean_elapsed", "failed_ids", "notes"
    }
    write_records_csv(tmp_path / "records.csv", records)
    header = (tmp_path / "records.csv").read_text().splitlines()[0].split(",")
    assert header == ["sample_id", "temperature", "outcome", "t_query", "t_detect", "elapsed", "reported_fires", "note"]
    rows = rank_by_distance(grounding_metrics([GroundingRecord("i", "urban", (PixelPoint(0, 0),), (PixelPoint(0, 1),))]))
    assert grounding_csv_text(rows).splitlines()[0] == "category,mean_distance,mean_coverage"
    table = temperature_table([summary]).splitlines()
    assert [c.strip() for c in table[1].strip("|").split("|")] == [
        "Sampling Temperature (T)", "Avg. Elapsed Time (s)", "Successful samples"
    ]


# -- 2 --------------------------------------------------------------------


TTD_RECORDS = [
    RunRecord("r01", 0.0, 4.0, (PixelPoint(1, 1),), "true_positive", 10.0, 0.5),
    RunRecord("r02", 10.0, 15.5, (PixelPoint(2, 2),), "true_positive", 12.0, 0.5),
    RunRecord("r03", 3.0, None, (), "true_negative", 8.0, 0.5),
    RunRecord("r04", 1.0, None, (PixelPoint(9, 9),), "false_positive", 9.0, 0.5),
    RunRecord("r05", 2.0, 9.0, (PixelPoint(9, 9),), "false_positive", 9.0, 0.5),  # stamped but not eligible
    RunRecord("r06", 0.0, None, (), "false_negative", 30.0, 0.5),
    RunRecord("r07", 7.25, 10.0, (PixelPoint(3, 3),), "true_positive", 11.0, 0.5),
    RunRecord("r08", 0.1, 0.3, (PixelPoint(4, 4),), "true_positive", 1.0, 0.5),
    RunRecord("r09", 5.0, None, (PixelPoint(5, 5),), "true_positive", 6.0, 0.5),  # TP without a stamp
    RunRecord("r10", 4.0, None, (), "true_negative", 7.0, 0.5),
]


def brute_force_ttd(records):
    total, count = Fraction(0), 0
    for r in records:
        if r.outcome == "true_positive" and r.t_detect is not None:
            total += Fraction(r.t_detect) - Fraction(r.t_query)
            count += 1
    return float(total / count)


@pytest.mark.criterion(2, "TTD equals brute-force mean over eligible deltas; permutation invariant")
def test_c02_ttd_oracle():
    started = time.perf_counter()
    assert {r.outcome for r in TTD_RECORDS} == {"true_positive", "true_negative", "false_positive", "false_negative"}
    expected = brute_force_ttd(TTD_RECORDS)
    assert abs(expected - (4.0 + 5.5 + 2.75 + 0.2) / 4) < 1e-12
    assert abs(compute_ttd(TTD_RECORDS) - expected) <= 1e-9
    rng = random.Random(2)
    shuffled = list(TTD_RECORDS)
    for _ in range(100):
        rng.shuffle(shuffled)
        assert abs(compute_ttd(shuffled) - expected) <= 1e-9
    assert time.perf_counter() - started < 1.0


# -- 3 --------------------------------------------------------------------


@pytest.mark.criterion(3, "temperature sweep {0.5, 0.7}: two-row table, deterministic, designed success count")
def test_c03_temperature_sweep(tmp_path):
    started = time.perf_counter()
    manifest_path, scenario_path = write_benchmark(tmp_path)
    manifest = BenchmarkManifest.load(manifest_path)
    assert len(manifest.samples) == 5

    def sweep():
        gw = Gateway.for_backend(ScriptedBackend.from_file(scenario_path))
        return temperature_sweep(manifest, [0.5, 0.7], gw, PipelineConfig())

    first, second = sweep(), sweep()
    table = temperature_table([r.summary for r in first])
    lines = [line for line in table.splitlines() if line.startswith("|")]
    assert len(lines) == 3
    header = [c.strip() for c in lines[0].strip("|").split("|")]
    assert header == ["Sampling Temperature (T)", "Avg. Elapsed Time (s)", "Successful samples"]
    assert [c.strip() for c in lines[1].strip("|").split("|")][0] == "0.5"
    assert [c.strip() for c in lines[2].strip("|").split("|")][0] == "0.7"
    assert [r.summary for r in first] == [r.summary for r in second]
    assert table == temperature_table([r.summary for r in second])
    for run in first:
        assert run.summary.successes == BENCH_SUCCESSES
        assert run.summary.total == 5
    assert time.perf_counter() - started < 30.0


# -- 4 --------------------------------------------------------------------


@pytest.mark.criterion(4, "success rate 28/30 -> 0.93 and 26/30 -> 0.87")
def test_c04_success_rate_rounding():
    started = time.perf_counter()
    for ok, want in ((28, 0.93), (26, 0.87)):
        records = [
            RunRecord(f"s{i:02d}", 0.0, None, (), "true_negative" if i < ok else "false_negative", 1.0, 0.5)
            for i in range(30)
        ]
        summary = summarize_records(records, 0.5)
        assert summary.successes == ok and summary.total == 30
        assert summary.success_rate == want
    assert time.perf_counter() - started < 1.0


# -- 5 --------------------------------------------------------------------


@pytest.mark.criterion(5, "1000 random paths: centers within 0.5 px of polyline, exact endpoints, closed-form count")
def test_c05_interpolation_suite():
    started = time.perf_counter()
    rng = random.Random(5)
    for _ in range(1000):
        size = rng.randint(1, 2048)
        n = rng.randint(1, 10)
        pts = [(rng.uniform(0, size - 1), rng.uniform(0, size - 1)) for _ in range(n)]
        if rng.random() < 0.5:
            config = SimConfig(steps_per_segment=rng.randint(1, 40))
            counts = [config.steps_per_segment] * (n - 1)
        else:
            config = SimConfig(step_length=rng.uniform(5, 250))
            counts = [max(1, math.ceil(oracle_dist(a, b) / config.step_length)) for a, b in zip(pts, pts[1:])]
        waypoints = [LabeledKeypoint(f"w{i}", PixelPoint(*p)) for i, p in enumerate(pts)]
        path = interpolate_path(waypoints, config)
        assert len(path) == 1 + sum(counts)
        # every segment ends exactly on its waypoint
        idx = 0
        assert (path[0][0].x, path[0][0].y) == pts[0]
        for k, c in enumerate(counts):
            idx += c
            assert (path[idx][0].x, path[idx][0].y) == pts[k + 1]
        for center, _ in path:
            c = (center.x, center.y)
            d = oracle_dist(c, pts[0]) if n == 1 else min(oracle_segment_dist(c, a, b) for a, b in zip(pts, pts[1:]))
            assert d <= 0.5
    # frame centers of the full simulation are the interpolated positions
    scene = synthetic_scene(600, 400, seed=9)
    wps = [LabeledKeypoint("a", PixelPoint(10, 10)), LabeledKeypoint("b", PixelPoint(590, 390))]
    sim = uav_simulation(scene, wps, SimConfig(step_length=60))
    assert [f.center for f in sim.frames.values()] == [p for p, _ in interpolate_path(wps, SimConfig(step_length=60))]
    assert time.perf_counter() - started < 10.0


# -- 6 --------------------------------------------------------------------


@pytest.mark.criterion(6, "uav_simulation is bit-identical across runs")
def test_c06_simulation_determinism():
    def run():
        scene = synthetic_scene(700, 500, seed=6, image_id="det")
        wps = [
            LabeledKeypoint("tank", PixelPoint(600, 80)),
            LabeledKeypoint("roof", PixelPoint(50.5, 400.25)),
            LabeledKeypoint("field", PixelPoint(350, 250)),
        ]
        return uav_simulation(scene, wps, SimConfig(step_length=45, crop_size=96, output_size=160))

    a, b = run(), run()
    assert a.animation == b.animation
    assert list(a.frames) == list(b.frames)
    for fid in a.frames:
        assert a.frames[fid].to_dict() == b.frames[fid].to_dict()
        assert a.frames[fid].crop.tobytes() == b.frames[fid].crop.tobytes()


# -- 7 --------------------------------------------------------------------


@pytest.mark.criterion(7, "JSON-repair corpus: malformed fixtures parse to expected trees; valid ones unflagged")
def test_c07_repair_corpus():
    assert len(MALFORMED) >= 20
    for text, expected in MALFORMED:
        got = extract_structured(text)
        assert got.value == expected, text
        assert got.repaired, text
    for text, expected in VALID:
        got = extract_structured(text)
        assert got.value == expected, text
        assert not got.repaired, text


# -- 8 --------------------------------------------------------------------


def greedy_consistent(order, prev, index_of):
    """True when every pick is the nearest remaining point (ties: lowest input index)."""
    remaining = list(order)
    for chosen in order:
        best = min(remaining, key=lambda kp: (oracle_dist(prev, (kp.point.x, kp.point.y)), index_of[id(kp)]))
        if best is not chosen:
            return False
        remaining.remove(chosen)
        prev = (chosen.point.x, chosen.point.y)
    return True


@pytest.mark.criterion(8, "order_waypoints matches an exhaustive permutation oracle on 500 random sets")
def test_c08_ordering_oracle():
    started = time.perf_counter()
    rng = random.Random(8)
    for _ in range(500):
        n = rng.randint(0, 8)
        probs = [rng.choice([None, 0.1, 0.5, 0.5, 0.9]) for _ in range(n)]
        # a coarse grid makes distance ties common
        kps = [
            LabeledKeypoint(f"k{i}", PixelPoint(rng.randint(0, 6) * 10, rng.randint(0, 6) * 10), None, p)
            for i, p in enumerate(probs)
        ]
        start = (rng.randint(0, 60), rng.randint(0, 60))
        plan = order_waypoints(kps, PixelPoint(*start)).ordered_waypoints
        assert sorted(map(id, plan)) == sorted(map(id, kps))
        key = [kp.fire_probability or 0.0 for kp in plan]
        assert key == sorted(key, reverse=True)
        index_of = {id(kp): i for i, kp in enumerate(kps)}
        prev = start
        pos = 0
        for prob in sorted(set(key), reverse=True):
            group = [kp for kp in kps if (kp.fire_probability or 0.0) == prob]
            valid = [list(p) for p in itertools.permutations(group) if greedy_consistent(p, prev, index_of)]
            assert len(valid) == 1
            assert list(plan[pos:pos + len(group)]) == valid[0]
            pos += len(group)
            prev = (plan[pos - 1].point.x, plan[pos - 1].point.y)
    assert time.perf_counter() - started < 10.0


# -- 9 --------------------------------------------------------------------


@pytest.mark.criterion(9, "grounding metrics match brute-force nearest neighbor; CSV columns exact")
def test_c09_grounding_oracle():
    rng = random.Random(9)
    categories = ["urban", "industrial", "wildland", "composite", "vehicle", "none"]
    records = []
    for i in range(60):
        cat = rng.choice(categories)
        truth = tuple(PixelPoint(rng.uniform(0, 1000), rng.uniform(0, 1000)) for _ in range(rng.randint(1, 10)))
        preds = tuple(PixelPoint(rng.uniform(0, 1000), rng.uniform(0, 1000)) for _ in range(rng.randint(0, 10)))
        records.append(GroundingRecord(f"img{i}", cat, preds, truth))

    metrics = grounding_metrics(records)
    for cat in {r.category for r in records}:
        dists, counts = [], []
        for r in records:
            if r.category != cat:
                continue
            counts.append(len(r.predictions))
            for p in r.predictions:
                best = None
                for t in r.ground_truth:
                    d = oracle_dist((p.x, p.y), (t.x, t.y))
                    best = d if best is None or d < best else best
                dists.append(best)
        m = metrics[cat]
        if dists:
            assert abs(m.mean_distance - sum(dists) / len(dists)) <= 1e-9
        else:
            assert m.mean_distance is None
        assert m.mean_coverage == sum(counts) / len(counts)

    text = grounding_csv_text(rank_by_distance(metrics))
    reader = csv.DictReader(io.StringIO(text))
    assert tuple(reader.fieldnames) == GROUNDING_COLUMNS == ("category", "mean_distance", "mean_coverage")
    rows = list(reader)
    assert len(rows) == len(metrics)
    values = [float(r["mean_distance"]) for r in rows if r["mean_distance"]]
    assert values == sorted(values, reverse=True)


# -- 10 -------------------------------------------------------------------


@pytest.mark.criterion(10, "scripted CLI mission: exit 0, four artifacts, scene coordinate from crop offset")
def test_c10_end_to_end_cli(tmp_path):
    image = write_scene(tmp_path / "farm.png", 640, 480, seed=10)
    targets = {
        "farm": [
            {"label": "grain silo", "point": [300, 200], "probability": 0.9},
            {"label": "hay barn", "point": [100, 400], "probability": 0.2},
        ]
    }
    crop_point = (100, 60)
    scenario = write_scenario(tmp_path / "scenario.json", mission_entries(targets, {"farm frame=0000": crop_point}))
    out = tmp_path / "out"
    proc = subprocess.run(
        [sys.executable, "-m", "uavmission", "mission", str(image), "--scenario", str(scenario), "--out-dir", str(out)],
        capture_output=True,
        text=True,
        cwd=tmp_path,
    )
    assert proc.returncode == 0, proc.stderr
    for name in ("trace.json", "keypoints.png", "flight.gif", "detections.json"):
        assert (out / name).is_file() and (out / name).stat().st_size > 0, name
    assert sorted(p.name for p in tmp_path.iterdir()) == ["farm.png", "out", "scenario.json"]

    trace = json.loads((out / "trace.json").read_text())
    tools = [s["tool"] for s in trace["agents"]["ama"]["steps"] if s["phase"] == "act"]
    tools += [s["tool"] for s in trace["agents"]["uav"]["steps"] if s["phase"] == "act"]
    assert tools == [
        "read_image", "describe_satellite_image", "pixelpoint_objects", "final_answer",
        "read_image_for_simulation", "uav_simulation", "detect_and_display", "final_answer",
    ]
    assert [w["label"] for w in trace["plan"]["waypoints"]] == ["grain silo", "hay barn"]

    fires = [d for d in json.loads((out / "detections.json").read_text())["detections"] if d["fire_detected"]]
    assert len(fires) == 1 and fires[0]["frame_id"] == "0000"
    # frame 0000 is centered on the first waypoint (300, 200); a 128 px window shown at 256 px
    center, crop, shown = (300, 200), 128, 256
    want = [center[i] + (crop_point[i] - shown / 2) * crop / shown for i in range(2)]
    got = fires[0]["location"]
    assert abs(got[0] - want[0]) <= 0.5 and abs(got[1] - want[1]) <= 0.5


# -- 11 -------------------------------------------------------------------


@pytest.mark.criterion(11, "never-terminating scenario with max_steps=8 -> StepBudgetExhausted after 8 act steps")
def test_c11_react_budget():
    store = ImageStore.from_images([synthetic_scene(64, 64, image_id="loop")])
    never_done = json.dumps({"thought": "look again", "tool": "read_image", "args": {"i": 0}})
    gw = Gateway.for_backend(ScriptedBackend(ScriptedScenario.from_dict({"entries": [{"match": "[agent=", "response": never_done}]})))
    with pytest.raises(StepBudgetExhausted) as info:
        run_react("ama", MissionQuery("I've heard there are fires in our area."), ama_registry(store, gw), gw, ReactLimits(max_steps=8))
    acts = [s for s in info.value.trace if s.phase == "act"]
    assert len(acts) == 8
    assert all(s.tool_call[0] == "read_image" for s in acts)
