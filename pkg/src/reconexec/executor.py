"""The standard two-loop executor and the hybrid software/hardware executor.

Both executors own a ``CallbackLists`` and a set of worker actors that run on
a driver from ``runtime``: ``SimDriver`` for deterministic virtual-time runs
or ``ThreadDriver`` for real concurrent threads.
"""

from __future__ import annotations

import logging
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .bus import Message, MessageBus, ServiceClient, ServiceServer, Subscription
from .clock import Duration, Instant, MS, Timer
from .fabric import FOUR_SLOT_LAYOUT, Fabric, ReconfigModel, REPORTED_MODEL, SlotDescriptor
from .registry import (
    SOFTWARE,
    CallbackKind,
    CallbackLists,
    ClaimedWork,
    InvalidMask,
    OffsetVector,
    ResourceMask,
    TimerFiring,
    WorkerResource,
    slot_indices,
)
from .runtime import Idle, SimDriver, Sleep, ThreadDriver

log = logging.getLogger(__name__)

DEFAULT_WAIT_TIME = 1 * MS


class InvalidConfig(ValueError):
    pass


@dataclass(frozen=True)
class ExecutorConfig:
    num_sw_workers: int = 1
    num_hw_workers: int = 0
    wait_time: Duration = DEFAULT_WAIT_TIME
    bitstream_path: str = ""

    def __post_init__(self) -> None:
        if self.num_sw_workers < 0 or self.num_hw_workers < 0:
            raise InvalidConfig("worker counts must be non-negative")
        if self.num_sw_workers + self.num_hw_workers < 1:
            raise InvalidConfig("executor needs at least one worker")
        if self.wait_time < 0:
            raise InvalidConfig("wait_time must be non-negative")


@dataclass(frozen=True)
class ExecutionRecord:
    callback: int
    worker: str
    claim_time: Instant
    start_time: Instant
    end_time: Instant
    reconfig_spent: Duration = 0
    name: str = ""
    iteration: int = -1


@dataclass
class StopCondition:
    """Any one of the set limits ends the spin."""

    max_time: Instant | None = None
    max_executions: int | None = None
    shutdown: threading.Event | None = None

    def __post_init__(self) -> None:
        if self.max_time is None and self.max_executions is None and self.shutdown is None:
            raise ValueError("stop condition sets no limit; spin would never return")


@dataclass
class Worker:
    index: int
    resource: WorkerResource
    offsets: OffsetVector | None = None
    records: list[ExecutionRecord] = field(default_factory=list)

    @property
    def label(self) -> str:
        if self.resource == SOFTWARE:
            return f"sw{self.index}"
        return f"hw{self.resource}"

    @property
    def is_hardware(self) -> bool:
        return self.resource != SOFTWARE


class Invocation:
    """What a callback body sees: its event plus ways to publish results."""

    def __init__(self, executor: _ExecutorBase, work: ClaimedWork, worker: Worker) -> None:
        self.executor = executor
        self.entry = work.entry
        self.event = work.event
        self.worker = worker

    @property
    def bus(self) -> MessageBus:
        return self.executor.bus

    @property
    def now(self) -> Instant:
        return self.executor.clock.now()

    @property
    def message(self) -> Message | None:
        if isinstance(self.event, TimerFiring):
            return None
        if self.entry.kind is CallbackKind.SERVICE_SERVER:
            return self.event[0]
        return self.event

    @property
    def payload(self) -> Any:
        msg = self.message
        return None if msg is None else msg.payload

    def publish(self, topic: str, payload: Any) -> int:
        return self.bus.publish(topic, payload)

    def respond(self, payload: Any) -> None:
        if self.entry.kind is not CallbackKind.SERVICE_SERVER:
            raise TypeError("only service server callbacks can respond")
        self.bus.send_response(self.event[1], payload)


DecisionHook = Callable[[Worker, Instant, "ClaimedWork | None"], None]


def make_driver(backend: str = "sim", time_scale: float = 1.0):
    if backend == "sim":
        return SimDriver()
    if backend in ("threads", "threaded"):
        return ThreadDriver(time_scale)
    raise InvalidConfig(f"unknown backend {backend!r}")


class _ExecutorBase:
    def __init__(self, config: ExecutorConfig, bus: MessageBus | None, driver) -> None:
        self.config = config
        self.driver = driver if driver is not None else SimDriver()
        self.clock = self.driver.clock
        if bus is None:
            bus = MessageBus(self.clock)
        elif bus.clock is not self.clock:
            raise InvalidConfig("bus and driver must share one clock")
        self.bus = bus
        self.driver.attach_bus(bus)
        self.lists = CallbackLists()
        if isinstance(self.driver, ThreadDriver):
            self.lists.add_release_listener(lambda _e: self.driver.poke())
        self.workers: list[Worker] = []
        self.on_decision: DecisionHook | None = None
        self._executions = 0
        self._count_lock = threading.Lock()
        self._stop: StopCondition | None = None
        self._spun = False

    def _resolve_source(self, kind: CallbackKind, source: Any):
        if kind is CallbackKind.TIMER:
            if isinstance(source, Timer):
                return source
            if isinstance(source, int):
                return Timer.starting_at(-1, source, self.clock.now())
            raise TypeError("timer callbacks take a Timer or a period in ns")
        if isinstance(source, (Subscription, ServiceServer, ServiceClient)):
            return source
        if isinstance(source, str):
            if kind is CallbackKind.SUBSCRIBER:
                return self.bus.subscribe(source)
            if kind is CallbackKind.SERVICE_SERVER:
                return self.bus.create_server(source)
            return self.bus.create_client(source)
        raise TypeError(f"cannot use {source!r} as a {kind.value} event source")

    def _register(self, kind, mask, source, **kw) -> int:
        if self._spun:
            raise RuntimeError("callbacks cannot be added while spinning")
        src = self._resolve_source(kind, source)
        cid = self.lists.register(kind, mask, src, **kw)
        if isinstance(src, Timer):
            src.id = cid
        return cid

    def _execute(self, worker: Worker, work: ClaimedWork, iteration: int = -1):
        entry = work.entry
        reconfig = 0
        if worker.is_hardware:
            bitstream = entry.mask.slots[worker.resource]
            reconfig = yield from self.fabric.ensure_loaded(worker.resource, bitstream)
            self.fabric.states[worker.resource].executing = True
        start = self.clock.now()
        yield Sleep(entry.exec_time(worker.resource))
        inv = Invocation(self, work, worker)
        if entry.body is not None:
            entry.body(inv)
        end = self.clock.now()
        if worker.is_hardware:
            self.fabric.states[worker.resource].executing = False
        worker.records.append(
            ExecutionRecord(entry.id, worker.label, work.claim_time, start, end, reconfig, entry.name, iteration)
        )
        self.lists.release(work)
        self._count_execution()

    def _count_execution(self) -> None:
        with self._count_lock:
            self._executions += 1
            limit = self._stop.max_executions if self._stop else None
            if limit is not None and self._executions >= limit:
                self.driver.stop()

    def _decide(self, worker: Worker, now: Instant, work: ClaimedWork | None) -> None:
        if self.on_decision is not None:
            self.on_decision(worker, now, work)

    @property
    def records(self) -> list[ExecutionRecord]:
        merged = [r for w in self.workers for r in w.records]
        order = {w.label: i for i, w in enumerate(self.workers)}
        merged.sort(key=lambda r: (r.claim_time, order[r.worker], r.end_time))
        return merged

    def spawn_workers(self) -> None:
        raise NotImplementedError

    def spin(self, stop: StopCondition) -> list[ExecutionRecord]:
        """Run all workers until ``stop``; returns the merged execution records."""
        if self._spun:
            raise RuntimeError("executor already spun")
        self._spun = True
        self._stop = stop
        self.driver.shutdown = stop.shutdown
        self.spawn_workers()
        self.driver.run(until=stop.max_time)
        return self.records


class StandardExecutor(_ExecutorBase):
    """Snapshot-based executor with one or more identical software workers.

    Outer loop: take a readySet snapshot of non-timer callbacks. Inner loop:
    run a ready timer if there is one, otherwise the next readySet entry
    (subscribers, then servers, then clients). With the readySet drained and
    no timer ready, wait ``wait_time`` and snapshot again. With several
    workers the readySet is shared.
    """

    def __init__(self, config: ExecutorConfig, bus: MessageBus | None = None, driver=None) -> None:
        if config.num_hw_workers:
            raise InvalidConfig("the standard executor has no hardware workers")
        super().__init__(config, bus, driver)
        self._ready: deque[int] = deque()
        self._ready_lock = threading.Lock()
        self.snapshots: list[tuple[Instant, tuple[int, ...]]] = []

    def add_callback(self, node_name: str, kind: CallbackKind, event_source: Any, work_fn: Callable,
                     exec_time: Duration = 0) -> int:
        mask = ResourceMask(software=work_fn)
        return self._register(kind, mask, event_source, name=node_name, body=work_fn, sw_time=exec_time)

    def _snapshot(self, now: Instant) -> None:
        ready = self.lists.collect_ready(now)
        ids = tuple(ready.subscribers + ready.servers + ready.clients)
        self._ready.extend(ids)
        self.snapshots.append((now, ids))

    def _next(self, now: Instant) -> tuple[ClaimedWork | None, int]:
        work = self.lists.claim_timer(SOFTWARE, now)
        if work is not None:
            return work, -1
        with self._ready_lock:
            while self._ready:
                cid = self._ready.popleft()
                work = self.lists.claim(cid, SOFTWARE, now)
                if work is not None:
                    return work, len(self.snapshots) - 1
        return None, -1

    def _worker(self, worker: Worker):
        with self._ready_lock:
            if not self.snapshots:
                self._snapshot(self.clock.now())
        while True:
            now = self.clock.now()
            work, iteration = self._next(now)
            self._decide(worker, now, work)
            if work is None:
                yield Idle(self.config.wait_time)
                with self._ready_lock:
                    if not self._ready:
                        self._snapshot(self.clock.now())
                continue
            yield from self._execute(worker, work, iteration)
            yield Sleep(0)

    def spawn_workers(self) -> None:
        for i in range(self.config.num_sw_workers):
            w = Worker(i, SOFTWARE)
            self.workers.append(w)
            self.driver.spawn(self._worker(w), actor=i, name=w.label)


class ReconExecutor(_ExecutorBase):
    """Main thread owns the lists; m software and n hardware workers poll them.

    Each worker repeatedly claims via ``CallbackLists.next_ready`` with its
    own ``OffsetVector``. A hardware worker for slot x makes sure the
    callback's bitstream for x is loaded (reconfiguring through the shared
    port if not) and then blocks until the callback finishes.
    """

    def __init__(self, config: ExecutorConfig, bus: MessageBus | None = None, driver=None,
                 slots: Sequence[SlotDescriptor] | None = None, model: ReconfigModel = REPORTED_MODEL) -> None:
        super().__init__(config, bus, driver)
        n = config.num_hw_workers
        if slots is None:
            slots = [FOUR_SLOT_LAYOUT[i] if i < len(FOUR_SLOT_LAYOUT) else SlotDescriptor(i, FOUR_SLOT_LAYOUT[0].bitstream_size_bytes)
                     for i in range(n)]
        if len(slots) != n:
            raise InvalidConfig(f"{n} hardware workers need {n} slots, got {len(slots)}")
        self.fabric = Fabric(list(slots), model, self.clock)

    def add_hw_callback(self, node_name: str, mask_bits: int, kind: CallbackKind, event_source: Any,
                        msg_spec: Any = None, *, body: Callable | None = None, exec_time: Duration = 0) -> int:
        """Register a hardware-only callback eligible for the slots set in ``mask_bits`` (bit i = slot i)."""
        if mask_bits <= 0:
            raise InvalidMask(f"mask {mask_bits:#b} selects no slot")
        bad = [s for s in slot_indices(mask_bits) if s >= self.fabric.num_slots]
        if bad:
            raise InvalidMask(f"mask {mask_bits:#b} references slot(s) {bad}; only {self.fabric.num_slots} exist")
        mask = ResourceMask.from_bits(mask_bits)
        cid = self._register(kind, mask, event_source, name=node_name, body=body, hw_time=exec_time)
        label = node_name.strip("/").replace("/", "_") or f"cb{cid}"
        for s in mask.slots:
            mask.slots[s] = self.fabric.make_bitstream(cid, s, label)
        return cid

    def add_sw_callback(self, node_name: str, kind: CallbackKind, event_source: Any, work_fn: Callable,
                        *, exec_time: Duration = 0) -> int:
        mask = ResourceMask(software=work_fn)
        return self._register(kind, mask, event_source, name=node_name, body=work_fn, sw_time=exec_time)

    def _worker(self, worker: Worker):
        while True:
            now = self.clock.now()
            work = self.lists.next_ready(worker.resource, worker.offsets, now)
            self._decide(worker, now, work)
            if work is None:
                yield Idle(self.config.wait_time)
                continue
            yield from self._execute(worker, work)
            yield Sleep(0)

    def spawn_workers(self) -> None:
        for i in range(self.config.num_sw_workers):
            self.workers.append(Worker(i, SOFTWARE))
        for s in range(self.config.num_hw_workers):
            self.workers.append(Worker(self.config.num_sw_workers + s, s))
        for w in self.workers:
            w.offsets = OffsetVector(self.lists)
            self.driver.spawn(self._worker(w), actor=w.index, name=w.label)


def recon_executor_init(config: ExecutorConfig, *, backend: str = "sim", time_scale: float = 1.0,
                        slots: Sequence[SlotDescriptor] | None = None,
                        model: ReconfigModel = REPORTED_MODEL) -> ReconExecutor:
    return ReconExecutor(config, None, make_driver(backend, time_scale), slots=slots, model=model)
