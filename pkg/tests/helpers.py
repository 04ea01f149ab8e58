"""Shared fixtures: synthetic scenes and scripted mission scenarios."""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Any, Iterable, Optional

from PIL import Image, ImageDraw

from uavmission.core import SceneImage

AMA_ACTIONS = [
    {"thought": "Load the satellite image.", "tool": "read_image", "args": {"i": "$image_index"}},
    {"thought": "Get an overview of the scene.", "tool": "describe_satellite_image", "args": {"image": "$read_image"}},
    {
        "thought": "Ground buildings, vegetation and any fire.",
        "tool": "pixelpoint_objects",
        "args": {"image": "$read_image", "objects": "buildings, vegetation, fire, smoke"},
    },
    {"thought": "Targets grounded.", "tool": "final_answer", "args": {"answer": "$pixelpoint_objects"}},
]

UAV_ACTIONS = [
    {"thought": "Load the image for the flight.", "tool": "read_image_for_simulation", "args": {"i": "$image_index"}},
    {
        "thought": "Fly the plan.",
        "tool": "uav_simulation",
        "args": {"image": "$read_image_for_simulation", "labeled_points": "$plan"},
    },
    {"thought": "Check the frames.", "tool": "detect_and_display", "args": {"frames_dict": "$uav_simulation"}},
    {"thought": "Report.", "tool": "final_answer", "args": {"answer": "$detect_and_display"}},
]

NO_FIRE = json.dumps({"fire": False, "confidence": 0.05})


def synthetic_scene(width: int = 512, height: int = 512, seed: int = 0, image_id: str = "scene") -> SceneImage:
    rng = random.Random(seed)
    img = Image.new("RGB", (width, height), (60, 110, 50))
    draw = ImageDraw.Draw(img)
    for _ in range(24):
        x, y = rng.randrange(width), rng.randrange(height)
        w, h = rng.randint(8, 60), rng.randint(8, 60)
        draw.rectangle((x, y, x + w, y + h), fill=(rng.randrange(256), rng.randrange(256), rng.randrange(256)))
    return SceneImage(image_id, img)


def write_scene(path: Path, width: int = 512, height: int = 512, seed: int = 0) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    synthetic_scene(width, height, seed).image.save(path)
    return path


def agent_entries(agent: str, actions: list[dict[str, Any]], latency: float = 0.0) -> list[dict[str, Any]]:
    return [
        {"match": f"[agent={agent} step={i}]", "response": json.dumps(a), "latency": latency}
        for i, a in enumerate(actions, start=1)
    ]


def mission_entries(
    targets: dict[str, list[dict[str, Any]]],
    fires: Optional[dict[str, Any]] = None,
    *,
    latency: float = 0.5,
    description: str = "Suburban blocks with a warehouse, a field and a road.",
) -> list[dict[str, Any]]:
    """Entries for a full AMA -> UAV mission over one or more scenes.

    ``targets`` maps an image id to its pixel-pointing answer. ``fires`` maps
    ``"<image id> frame=<frame id>"`` (or a bare image id) to the in-frame
    point the detector reports; every other frame answers "no fire".
    """
    entries = agent_entries("ama", AMA_ACTIONS, latency) + agent_entries("uav", UAV_ACTIONS, latency)
    entries.append({"match": "[describe image=", "response": description, "latency": latency})
    for image_id, kps in targets.items():
        entries.append({"match": f"[pixelpoint image={image_id}]", "response": json.dumps(kps), "latency": latency})
    for key, point in (fires or {}).items():
        detect = json.dumps({"fire": True, "confidence": 0.9, "point": list(point)})
        entries.append({"match": f"[detect scene={key}", "response": detect, "latency": latency})
    entries.append({"match": "[detect ", "response": NO_FIRE, "latency": latency})
    return entries


def write_scenario(path: Path, entries: Iterable[dict[str, Any]]) -> Path:
    path.write_text(json.dumps({"entries": list(entries)}, indent=2), encoding="utf-8")
    return path


# Five samples, one per outcome kind plus a second true positive:
#   b1, b2 true positive; b3 true negative; b4 false negative; b5 false positive.
BENCH_SAMPLES = [
    ("b1", "wildland", [(300, 200)], [{"label": "dry brush", "point": [300, 200], "probability": 0.9},
                                      {"label": "barn", "point": [100, 400], "probability": 0.2}], True),
    ("b2", "urban", [(150, 350)], [{"label": "apartment block", "point": [150, 350], "probability": 0.6}], True),
    ("b3", "none", [], [{"label": "parking lot", "point": [256, 256], "probability": 0.1}], False),
    ("b4", "industrial", [(400, 100)], [{"label": "tank farm", "point": [60, 60], "probability": 0.4}], False),
    ("b5", "vehicle", [], [{"label": "truck", "point": [420, 420], "probability": 0.3}], True),
]
BENCH_SUCCESSES = 3


def write_benchmark(root: Path, latency: float = 0.5) -> tuple[Path, Path]:
    """Write scenes, manifest.json and scenario.json under ``root``."""
    samples, targets, fires = [], {}, {}
    for i, (sid, category, truth, kps, fire) in enumerate(BENCH_SAMPLES):
        write_scene(root / "img" / f"{sid}.png", seed=10 + i)
        samples.append(
            {"id": sid, "image": f"img/{sid}.png", "category": category, "fires": [{"point": list(p)} for p in truth]}
        )
        targets[sid] = kps
        if fire:
            # the first frame sits on the first waypoint; the crop center maps back onto it
            fires[f"{sid} frame=0000"] = [128, 128]
    manifest = root / "manifest.json"
    manifest.write_text(json.dumps({"query": "I've heard there are fires in our area.", "samples": samples}, indent=2))
    scenario = write_scenario(root / "scenario.json", mission_entries(targets, fires, latency=latency))
    return manifest, scenario
