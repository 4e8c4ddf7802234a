"""Drivers that run actor generators in virtual or real time.

Workers, clients and the reconfiguration port are written as generators
that yield the commands below. ``SimDriver`` executes them on one event
loop over a ``VirtualClock``; ``ThreadDriver`` gives every actor its own
thread and turns the commands into real sleeps and blocking waits. The
actor code is identical in both cases.

Simultaneous events are ordered by (time, priority, actor id, insertion
order). Clients use priority 0 and workers priority 1, so message delivery
at an instant settles before any worker makes a dispatch decision at that
instant, and workers with lower ids decide first.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import sys
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Any, Generator

from .bus import Endpoint, MessageBus
from .clock import Duration, Instant, VirtualClock, WallClock

log = logging.getLogger(__name__)

CLIENT_PRIORITY = 0
WORKER_PRIORITY = 1


@dataclass(frozen=True)
class Sleep:
    """Pass ``dt`` of model time (busy executing, reconfiguring, in transit)."""

    dt: Duration


@dataclass(frozen=True)
class Idle:
    """Wait up to ``dt`` for new work. The threaded driver may wake early on bus activity."""

    dt: Duration


@dataclass(frozen=True)
class Acquire:
    resource: FifoResource


@dataclass(frozen=True)
class Release:
    resource: FifoResource


@dataclass(frozen=True)
class WaitFor:
    """Block until the endpoint has something pending."""

    endpoint: Endpoint


Command = Sleep | Idle | Acquire | Release | WaitFor
Actor = Generator[Command, Any, Any]


class FifoResource:
    """Exclusive resource granted strictly in request order.

    ``holds`` records (acquired, released) instants so tests can check that
    grants never overlap.
    """

    def __init__(self, name: str = "resource") -> None:
        self.name = name
        self.holder: object | None = None
        self._queue: deque = deque()
        self._cond = threading.Condition()
        self._acquired_at: Instant | None = None
        self.holds: list[tuple[Instant, Instant]] = []

    # event-loop path
    def try_acquire(self, who: object, now: Instant) -> bool:
        if self.holder is None and not self._queue:
            self.holder = who
            self._acquired_at = now
            return True
        self._queue.append(who)
        return False

    def release_to_next(self, now: Instant) -> object | None:
        self._close_hold(now)
        if self._queue:
            self.holder = self._queue.popleft()
            self._acquired_at = now
            return self.holder
        self.holder = None
        return None

    # threaded path
    def acquire_blocking(self, who: object, clock, stop: threading.Event) -> bool:
        with self._cond:
            self._queue.append(who)
            while not (self.holder is None and self._queue[0] is who):
                if stop.is_set():
                    self._queue.remove(who)
                    self._cond.notify_all()
                    return False
                self._cond.wait(0.05)
            self._queue.popleft()
            self.holder = who
            self._acquired_at = clock.now()
            return True

    def release_blocking(self, clock) -> None:
        with self._cond:
            self._close_hold(clock.now())
            self.holder = None
            self._cond.notify_all()

    def _close_hold(self, now: Instant) -> None:
        if self._acquired_at is not None:
            self.holds.append((self._acquired_at, now))
        self._acquired_at = None


class _Proc:
    __slots__ = ("gen", "actor", "priority", "name", "done", "result")

    def __init__(self, gen: Actor, actor: int, priority: int, name: str) -> None:
        self.gen = gen
        self.actor = actor
        self.priority = priority
        self.name = name
        self.done = False
        self.result = None


class SimDriver:
    """Deterministic discrete-event loop over a virtual clock."""

    backend = "sim"

    def __init__(self, clock: VirtualClock | None = None) -> None:
        self.clock = clock if clock is not None else VirtualClock()
        self._heap: list = []
        self._seq = itertools.count()
        self._waiting: dict[Endpoint, list[_Proc]] = {}
        self._watched: set[int] = set()
        self._stopped = False
        self.events = 0
        self.shutdown: threading.Event | None = None

    def attach_bus(self, bus: MessageBus) -> None:
        pass

    def spawn(self, gen: Actor, *, actor: int, priority: int = WORKER_PRIORITY, name: str = "", at: Instant | None = None) -> _Proc:
        proc = _Proc(gen, actor, priority, name)
        self._schedule(proc, self.clock.now() if at is None else at)
        return proc

    def stop(self) -> None:
        self._stopped = True

    @property
    def stopping(self) -> bool:
        return self._stopped

    def _schedule(self, proc: _Proc, t: Instant, value: Any = None) -> None:
        heapq.heappush(self._heap, (t, proc.priority, proc.actor, next(self._seq), proc, value))

    def _on_enqueue(self, endpoint: Endpoint) -> None:
        waiters = self._waiting.pop(endpoint, None)
        if waiters:
            now = self.clock.now()
            for proc in waiters:
                self._schedule(proc, now)

    def _step(self, proc: _Proc, value: Any) -> None:
        now = self.clock.now()
        while True:
            try:
                cmd = proc.gen.send(value)
            except StopIteration as stop:
                proc.done = True
                proc.result = stop.value
                return
            value = None
            if isinstance(cmd, (Sleep, Idle)):
                self._schedule(proc, now + cmd.dt)
                return
            if isinstance(cmd, Acquire):
                if cmd.resource.try_acquire(proc, now):
                    continue
                return
            if isinstance(cmd, Release):
                nxt = cmd.resource.release_to_next(now)
                if nxt is not None:
                    self._schedule(nxt, now)
                continue
            if isinstance(cmd, WaitFor):
                if cmd.endpoint.has_pending():
                    continue
                if id(cmd.endpoint) not in self._watched:
                    self._watched.add(id(cmd.endpoint))
                    cmd.endpoint.add_listener(self._on_enqueue)
                self._waiting.setdefault(cmd.endpoint, []).append(proc)
                return
            raise TypeError(f"actor {proc.name!r} yielded unknown command {cmd!r}")

    def run(self, until: Instant | None = None) -> Instant:
        """Process events in order; stops after ``until`` or when stopped. Returns final time."""
        while self._heap and not self._stopped:
            if self.shutdown is not None and self.shutdown.is_set():
                break
            t = self._heap[0][0]
            if until is not None and t > until:
                break
            _, _, _, _, proc, value = heapq.heappop(self._heap)
            self.clock.advance_to(t)
            self.events += 1
            self._step(proc, value)
        if until is not None and not self._stopped and self.clock.now() < until:
            if self.shutdown is None or not self.shutdown.is_set():
                self.clock.advance_to(until)
        return self.clock.now()


class ThreadDriver:
    """One OS thread per actor; modeled durations become scaled real sleeps."""

    backend = "threads"

    # Interpreter thread switch interval while running; short scaled sleeps need prompt hand-offs.
    SWITCH_INTERVAL = 1e-4

    def __init__(self, time_scale: float = 1.0, clock: WallClock | None = None) -> None:
        self.clock = clock if clock is not None else WallClock(time_scale)
        self._procs: list[_Proc] = []
        self._threads: list[threading.Thread] = []
        self._stop = threading.Event()
        self._activity = threading.Condition()
        self._waiters: dict[int, list[threading.Event]] = {}
        self._waiters_lock = threading.Lock()
        self._watched: set[int] = set()
        self.shutdown: threading.Event | None = None
        self.errors: list[BaseException] = []

    def attach_bus(self, bus: MessageBus) -> None:
        bus.add_listener(lambda _ep: self.poke())

    def poke(self) -> None:
        with self._activity:
            self._activity.notify_all()

    def _on_enqueue(self, endpoint: Endpoint) -> None:
        with self._waiters_lock:
            events = self._waiters.pop(id(endpoint), ())
        for ev in events:
            ev.set()

    def _wait_for(self, ep: Endpoint, wake: threading.Event) -> None:
        with self._waiters_lock:
            if id(ep) not in self._watched:
                self._watched.add(id(ep))
                ep.add_listener(self._on_enqueue)
        while not ep.has_pending() and not self._stop.is_set():
            wake.clear()
            with self._waiters_lock:
                self._waiters.setdefault(id(ep), []).append(wake)
            # re-check after registering so an enqueue in between is not missed
            if ep.has_pending():
                break
            wake.wait(0.05)

    def _sleep(self, dt: Duration) -> None:
        secs = self.clock.real_seconds(dt)
        if secs < 0.01:
            time.sleep(secs)  # cheaper than an Event wait; shutdown latency stays small
        else:
            self._stop.wait(secs)

    def spawn(self, gen: Actor, *, actor: int, priority: int = WORKER_PRIORITY, name: str = "", at: Instant | None = None) -> _Proc:
        proc = _Proc(gen, actor, priority, name)
        self._procs.append(proc)
        return proc

    def stop(self) -> None:
        self._stop.set()
        self.poke()
        with self._waiters_lock:
            events = [ev for evs in self._waiters.values() for ev in evs]
            self._waiters.clear()
        for ev in events:
            ev.set()

    @property
    def stopping(self) -> bool:
        return self._stop.is_set()

    def _drive(self, proc: _Proc) -> None:
        value = None
        gen = proc.gen
        wake = threading.Event()
        try:
            while not self._stop.is_set():
                try:
                    cmd = gen.send(value)
                except StopIteration as stop:
                    proc.result = stop.value
                    break
                value = None
                if isinstance(cmd, Sleep):
                    if cmd.dt > 0:
                        self._sleep(cmd.dt)
                elif isinstance(cmd, Idle):
                    with self._activity:
                        self._activity.wait(self.clock.real_seconds(cmd.dt))
                elif isinstance(cmd, Acquire):
                    if not cmd.resource.acquire_blocking(proc, self.clock, self._stop):
                        break
                elif isinstance(cmd, Release):
                    cmd.resource.release_blocking(self.clock)
                elif isinstance(cmd, WaitFor):
                    self._wait_for(cmd.endpoint, wake)
                else:
                    raise TypeError(f"actor {proc.name!r} yielded unknown command {cmd!r}")
        except BaseException as exc:  # surfaced to the caller of run()
            log.exception("actor %s failed", proc.name)
            self.errors.append(exc)
            self._stop.set()
            self.poke()
        finally:
            proc.done = True
            gen.close()

    def run(self, until: Instant | None = None) -> Instant:
        old_interval = sys.getswitchinterval()
        sys.setswitchinterval(min(old_interval, self.SWITCH_INTERVAL))
        try:
            return self._run(until)
        finally:
            sys.setswitchinterval(old_interval)

    def _run(self, until: Instant | None) -> Instant:
        for proc in self._procs:
            t = threading.Thread(target=self._drive, args=(proc,), name=proc.name or f"actor-{proc.actor}", daemon=True)
            self._threads.append(t)
        for t in self._threads:
            t.start()
        while not self._stop.is_set():
            if self.shutdown is not None and self.shutdown.is_set():
                break
            if until is not None:
                remaining = until - self.clock.now()
                if remaining <= 0:
                    break
                self._stop.wait(min(self.clock.real_seconds(remaining), 0.05))
            else:
                self._stop.wait(0.05)
            if all(p.done for p in self._procs):
                break
        self.stop()
        for t in self._threads:
            t.join(timeout=5.0)
        if self.errors:
            raise self.errors[0]
        return self.clock.now()
