"""Run clocks.

Live backends are timed with the monotonic wall clock. Scripted backends use a
simulated clock that only advances by the latency each scripted response
declares, so repeated runs produce identical timings.
"""

from __future__ import annotations

import threading
import time


class WallClock:
    simulated = False

    def __init__(self) -> None:
        self._origin = time.monotonic()

    def now(self) -> float:
        return time.monotonic() - self._origin

    def advance(self, seconds: float) -> None:
        # real time passes by itself
        pass


class SimulatedClock:
    simulated = True

    def __init__(self, start: float = 0.0) -> None:
        self._t = float(start)
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._t

    def advance(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("clock cannot run backwards")
        with self._lock:
            self._t += seconds


Clock = WallClock | SimulatedClock
