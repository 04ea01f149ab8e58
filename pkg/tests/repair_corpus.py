"""Hand-built model outputs and the trees they should parse to."""

from __future__ import annotations

# (text, expected tree)
MALFORMED = [
    # markdown fences
    ('```json\n[{"label": "pond", "point": [10, 20]}]\n```', [{"label": "pond", "point": [10, 20]}]),
    ('```\n{"fire": true}\n```', {"fire": True}),
    ('Sure!\n```JSON\n{"a": 1}\n```\nAnything else?', {"a": 1}),
    # trailing commas
    ('[{"label": "road", "point": [1, 2],}]', [{"label": "road", "point": [1, 2]}]),
    ('[1, 2, 3,]', [1, 2, 3]),
    ('{"a": [1, 2,], "b": {"c": 3,},}', {"a": [1, 2], "b": {"c": 3}}),
    # single quotes
    ("[{'label': 'barn', 'point': [5, 9]}]", [{"label": "barn", "point": [5, 9]}]),
    ("{'fire': true, 'confidence': 0.8}", {"fire": True, "confidence": 0.8}),
    ("{'label': 'farmer\\'s barn'}", {"label": "farmer's barn"}),
    ("{'note': 'say \"hi\"'}", {"note": 'say "hi"'}),
    # fences, single quotes and a trailing comma together
    (
        "Here are the objects:\n```json\n[{'label': 'barn', 'point': [5, 9],}]\n```",
        [{"label": "barn", "point": [5, 9]}],
    ),
    # truncated / unbalanced
    ('[{"label":"road","point":[1,2]', [{"label": "road", "point": [1, 2]}]),
    ('[{"label": "a", "point": [1, 2]}, {"label": "b", "point": [3, 4]', [
        {"label": "a", "point": [1, 2]},
        {"label": "b", "point": [3, 4]},
    ]),
    ('{"fire": true, "point": [12, 30', {"fire": True, "point": [12, 30]}),
    ('[{"label": "tank farm', [{"label": "tank farm"}]),
    ('{"a": {"b": [1, {"c": 2', {"a": {"b": [1, {"c": 2}]}}),
    ('{"a": 1, "b":', {"a": 1, "b": None}),
    ('[{"label": "x", "point": [1, 2]},', [{"label": "x", "point": [1, 2]}]),
    # embedded prose
    ('Detected: {"fire": true, "confidence": 0.7', {"fire": True, "confidence": 0.7}),
    ("I think {'fire': false, 'confidence': 0.1,} overall.", {"fire": False, "confidence": 0.1}),
    ('Result: {"label": "pier", "bbox_2d": [1, 2, 3, 4],} -- done', {"label": "pier", "bbox_2d": [1, 2, 3, 4]}),
    ("Answer [1, 2,] and also {broken", [1, 2]),
    # unicode content survives
    ("{'label': 'Lagerhalle süd'}", {"label": "Lagerhalle süd"}),
    # brackets inside strings do not count
    ('{"label": "a [weird] {name}", "point": [7, 8]', {"label": "a [weird] {name}", "point": [7, 8]}),
]

VALID = [
    ('[{"label":"pond","point":[10,20]}]', [{"label": "pond", "point": [10, 20]}]),
    ('{"fire": false}', {"fire": False}),
    ("[]", []),
    ("  {\"a\": [1, 2, {\"b\": null}]}  ", {"a": [1, 2, {"b": None}]}),
    ('"just a string"', "just a string"),
    ("42", 42),
    ("true", True),
    # valid JSON inside prose is located, not repaired
    ('The answer is {"label": "dock", "point": [3, 4]}.', {"label": "dock", "point": [3, 4]}),
    ('The detections are [{"label": "smoke", "point": [40, 41]}] as requested.', [
        {"label": "smoke", "point": [40, 41]}
    ]),
]
