"""Route ordering: highest fire probability first."""

from __future__ import annotations

from typing import Sequence

from uavmission.core import LabeledKeypoint, MissionPlan, PixelPoint, euclidean_distance


def fire_priority(kp: LabeledKeypoint) -> float:
    return kp.fire_probability if kp.fire_probability is not None else 0.0


def order_waypoints(keypoints: Sequence[LabeledKeypoint], start: PixelPoint) -> MissionPlan:
    """Visit keypoints by descending fire probability.

    Missing probabilities count as 0. Within a group of equal probability the
    route is built greedily, always taking the point nearest to the one
    visited last (``start`` before anything is visited); exact distance ties
    keep input order.
    """
    indexed = list(enumerate(keypoints))
    ordered: list[LabeledKeypoint] = []
    current = start
    for prob in sorted({fire_priority(kp) for kp in keypoints}, reverse=True):
        group = [(i, kp) for i, kp in indexed if fire_priority(kp) == prob]
        while group:
            j = min(range(len(group)), key=lambda j: (euclidean_distance(current, group[j][1].point), group[j][0]))
            _, kp = group.pop(j)
            ordered.append(kp)
            current = kp.point
    rationale = (
        f"{len(ordered)} waypoint(s) ordered by fire probability, high to low; "
        "nearest-first within equal probability"
    )
    return MissionPlan(tuple(ordered), rationale)
