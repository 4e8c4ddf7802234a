"""Time sources and the periodic timer primitive.

All time is integer nanoseconds. ``VirtualClock`` only moves when told to
(by tests or by the discrete-event driver); ``WallClock`` follows the host's
monotonic clock, optionally rescaled so that a run with shortened sleeps
still reports times in model units.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Protocol

Instant = int
Duration = int

NS = 1
US = 1_000
MS = 1_000_000
SECOND = 1_000_000_000


class UnsupportedClockOperation(RuntimeError):
    """Raised when a wall clock is asked to do something only a virtual clock can."""


class Clock(Protocol):
    def now(self) -> Instant: ...


class VirtualClock:
    """Simulated time, starting at 0 ns."""

    def __init__(self, start: Instant = 0) -> None:
        if start < 0:
            raise ValueError("start must be non-negative")
        self._now = int(start)

    def now(self) -> Instant:
        return self._now

    def advance(self, dt: Duration) -> Instant:
        if dt < 0:
            raise ValueError(f"cannot advance by negative duration {dt}")
        self._now += int(dt)
        return self._now

    def advance_to(self, t: Instant) -> Instant:
        """Jump forward to ``t``; used by the event loop. Never moves backwards."""
        if t < self._now:
            raise ValueError(f"time would go backwards: {t} < {self._now}")
        self._now = int(t)
        return self._now


class WallClock:
    """Host monotonic time since construction.

    ``time_scale`` is real seconds per model second: with ``time_scale=0.01``
    a 41 ms modeled callback sleeps 0.41 ms of real time and ``now()`` still
    reports 41 ms having passed.
    """

    def __init__(self, time_scale: float = 1.0) -> None:
        if time_scale <= 0:
            raise ValueError("time_scale must be positive")
        self.time_scale = float(time_scale)
        self._epoch = time.monotonic_ns()
        self._last = 0
        self._lock = threading.Lock()

    def now(self) -> Instant:
        elapsed = int((time.monotonic_ns() - self._epoch) / self.time_scale)
        with self._lock:
            # monotonic_ns is already non-decreasing; the guard covers float rounding.
            if elapsed < self._last:
                elapsed = self._last
            self._last = elapsed
        return elapsed

    def real_seconds(self, dt: Duration) -> float:
        return dt * self.time_scale / SECOND

    def sleep(self, dt: Duration) -> None:
        if dt > 0:
            time.sleep(self.real_seconds(dt))

    def advance(self, dt: Duration) -> Instant:
        raise UnsupportedClockOperation("advance() is only available on a virtual clock")


@dataclass
class Timer:
    """Fixed-rate periodic timer.

    ``next_deadline`` moves forward by exactly one period per acknowledged
    firing, so a late dispatcher catches up one firing at a time instead of
    skipping or drifting.
    """

    id: int
    period: Duration
    next_deadline: Instant
    fired: int = 0

    def __post_init__(self) -> None:
        if self.period <= 0:
            raise ValueError("timer period must be positive")

    @classmethod
    def starting_at(cls, id: int, period: Duration, start: Instant = 0) -> Timer:
        return cls(id=id, period=period, next_deadline=start + period)

    def is_ready(self, now: Instant) -> bool:
        return now >= self.next_deadline

    def acknowledge(self) -> Instant:
        """Consume one firing; returns the deadline that fired."""
        deadline = self.next_deadline
        self.next_deadline += self.period
        self.fired += 1
        return deadline


def timer_is_ready(timer: Timer, now: Instant) -> bool:
    return timer.is_ready(now)


def ms(value: float) -> Duration:
    """Milliseconds to integer nanoseconds, rounded to the nearest ns."""
    return int(round(value * MS))
