"""Callback lists, resource masks, per-worker offsets and the claim algorithm.

``CallbackLists.next_ready`` is the dispatch decision every hybrid
worker makes: ready timers first in registration order, then the
subscriber, server and client lists, each searched round-robin from the
worker's last served position.

Round-robin detail: a list search runs from ``Position + 1`` to the end of
the list. If it reaches the end without a claim, the position wraps and the
next list gets its turn; only when every list came up empty is a second
pass made from the wrapped positions. A permanently busy subscriber list
therefore cannot starve servers and clients, and no ready callback is left
waiting when the worker would otherwise go idle.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Union

from .bus import Endpoint, ReadySet, ServiceClient, ServiceServer, Subscription
from .clock import Duration, Instant, Timer

SOFTWARE = "sw"
"""Worker resource tag for software workers; hardware workers use their slot index."""

WorkerResource = Union[str, int]


class CallbackKind(enum.Enum):
    TIMER = "timer"
    SUBSCRIBER = "subscriber"
    SERVICE_SERVER = "server"
    SERVICE_CLIENT = "client"

    @classmethod
    def parse(cls, text: str) -> CallbackKind:
        aliases = {
            "timer": cls.TIMER,
            "sub": cls.SUBSCRIBER,
            "subscriber": cls.SUBSCRIBER,
            "subscription": cls.SUBSCRIBER,
            "server": cls.SERVICE_SERVER,
            "service": cls.SERVICE_SERVER,
            "service_server": cls.SERVICE_SERVER,
            "client": cls.SERVICE_CLIENT,
            "service_client": cls.SERVICE_CLIENT,
        }
        try:
            return aliases[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown callback kind {text!r}") from None


LIST_ORDER = (CallbackKind.SUBSCRIBER, CallbackKind.SERVICE_SERVER, CallbackKind.SERVICE_CLIENT)

_SOURCE_TYPES = {
    CallbackKind.TIMER: Timer,
    CallbackKind.SUBSCRIBER: Subscription,
    CallbackKind.SERVICE_SERVER: ServiceServer,
    CallbackKind.SERVICE_CLIENT: ServiceClient,
}


class InvalidMask(ValueError):
    pass


class ReleaseError(RuntimeError):
    """Raised on releasing a claim that is not outstanding."""


@dataclass(frozen=True)
class Bitstream:
    id: str
    callback: int
    target_slot: int
    size_bytes: int


@dataclass
class ResourceMask:
    """Where a callback may run.

    ``software`` is the function a software worker invokes; ``slots`` maps each
    eligible slot to the bitstream that implements the callback there (None
    until the executor binds one).
    """

    software: Callable | None = None
    slots: dict[int, Bitstream | None] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.software is None and not self.slots:
            raise InvalidMask("resource mask enables neither software nor any slot")
        if self.software is not None and self.slots:
            raise InvalidMask("a callback is either software-only or hardware-only")

    @classmethod
    def from_bits(cls, bits: int) -> ResourceMask:
        """Hardware mask from an integer where bit i enables slot i."""
        if bits <= 0:
            raise InvalidMask(f"mask {bits:#b} enables no slot")
        return cls(slots={i: None for i in slot_indices(bits)})

    @property
    def is_hardware(self) -> bool:
        return bool(self.slots)

    @property
    def bits(self) -> int:
        return sum(1 << s for s in self.slots)

    def matches(self, resource: WorkerResource) -> bool:
        if resource == SOFTWARE:
            return self.software is not None
        return resource in self.slots


def slot_indices(bits: int) -> list[int]:
    return [i for i in range(bits.bit_length()) if bits >> i & 1]


@dataclass(frozen=True)
class TimerFiring:
    deadline: Instant
    fired_at: Instant


@dataclass(eq=False)
class CallbackEntry:
    id: int
    kind: CallbackKind
    mask: ResourceMask
    source: Any
    index: int
    name: str = ""
    body: Callable | None = None
    sw_time: Duration = 0
    hw_time: Duration = 0
    busy: bool = False
    executions: int = 0

    def has_event(self, now: Instant) -> bool:
        if self.kind is CallbackKind.TIMER:
            return self.source.is_ready(now)
        return self.source.has_pending()

    def exec_time(self, resource: WorkerResource) -> Duration:
        return self.sw_time if resource == SOFTWARE else self.hw_time


@dataclass(eq=False)
class ClaimedWork:
    entry: CallbackEntry
    event: Any
    claim_time: Instant
    resource: WorkerResource
    released: bool = False


class OffsetVector:
    """Per-worker round-robin positions; never shared between workers."""

    def __init__(self, lists: CallbackLists) -> None:
        self.positions = {kind: len(lists.of(kind)) for kind in LIST_ORDER}

    def __getitem__(self, kind: CallbackKind) -> int:
        return self.positions[kind]


class CallbackLists:
    """The four callback lists plus a lock serializing search-and-claim."""

    def __init__(self) -> None:
        self._lists: dict[CallbackKind, list[CallbackEntry]] = {k: [] for k in CallbackKind}
        self._by_id: dict[int, CallbackEntry] = {}
        self._next_id = 0
        self._lock = threading.RLock()
        self._release_listeners: list[Callable[[CallbackEntry], None]] = []

    @property
    def timers(self) -> list[CallbackEntry]:
        return self._lists[CallbackKind.TIMER]

    @property
    def subscribers(self) -> list[CallbackEntry]:
        return self._lists[CallbackKind.SUBSCRIBER]

    @property
    def servers(self) -> list[CallbackEntry]:
        return self._lists[CallbackKind.SERVICE_SERVER]

    @property
    def clients(self) -> list[CallbackEntry]:
        return self._lists[CallbackKind.SERVICE_CLIENT]

    def of(self, kind: CallbackKind) -> list[CallbackEntry]:
        return self._lists[kind]

    def __iter__(self) -> Iterator[CallbackEntry]:
        return iter(sorted(self._by_id.values(), key=lambda e: e.id))

    def __len__(self) -> int:
        return len(self._by_id)

    def get(self, callback_id: int) -> CallbackEntry:
        return self._by_id[callback_id]

    def add_release_listener(self, fn: Callable[[CallbackEntry], None]) -> None:
        self._release_listeners.append(fn)

    def register(self, kind: CallbackKind, mask: ResourceMask | None, source: Any, *, name: str = "",
                 body: Callable | None = None, sw_time: Duration = 0, hw_time: Duration = 0) -> int:
        if mask is None:
            raise InvalidMask("a callback needs a resource mask")
        if not isinstance(source, _SOURCE_TYPES[kind]):
            raise TypeError(f"{kind.value} callback needs a {_SOURCE_TYPES[kind].__name__} source, got {type(source).__name__}")
        with self._lock:
            lst = self._lists[kind]
            entry = CallbackEntry(
                id=self._next_id, kind=kind, mask=mask, source=source, index=len(lst),
                name=name, body=body, sw_time=sw_time, hw_time=hw_time,
            )
            self._next_id += 1
            lst.append(entry)
            self._by_id[entry.id] = entry
            return entry.id

    # -- claiming -------------------------------------------------------------

    def _try_claim(self, entry: CallbackEntry, resource: WorkerResource, now: Instant) -> ClaimedWork | None:
        if entry.busy or not entry.mask.matches(resource):
            return None
        if entry.kind is CallbackKind.TIMER:
            if not entry.source.is_ready(now):
                return None
            event = TimerFiring(entry.source.acknowledge(), now)
        else:
            event = entry.source.take()
            if event is None:
                return None
        entry.busy = True
        return ClaimedWork(entry, event, now, resource)

    def claim_timer(self, resource: WorkerResource, now: Instant) -> ClaimedWork | None:
        with self._lock:
            for entry in self.timers:
                work = self._try_claim(entry, resource, now)
                if work is not None:
                    return work
        return None

    def claim(self, callback_id: int, resource: WorkerResource, now: Instant) -> ClaimedWork | None:
        """Claim one specific callback if it is idle and has an event."""
        with self._lock:
            return self._try_claim(self._by_id[callback_id], resource, now)

    def next_ready(self, resource: WorkerResource, offsets: OffsetVector, now: Instant) -> ClaimedWork | None:
        with self._lock:
            work = self.claim_timer(resource, now)
            if work is not None:
                return work
            for _ in range(2):
                for kind in LIST_ORDER:
                    lst = self._lists[kind]
                    n = len(lst)
                    start = (offsets.positions[kind] + 1) % (n + 1)
                    for idx in range(start, n):
                        work = self._try_claim(lst[idx], resource, now)
                        if work is not None:
                            offsets.positions[kind] = idx
                            return work
                    offsets.positions[kind] = n
            return None

    def release(self, work: ClaimedWork) -> None:
        with self._lock:
            if work.released or not work.entry.busy:
                raise ReleaseError(f"callback {work.entry.id} released twice")
            work.released = True
            work.entry.busy = False
            work.entry.executions += 1
        for fn in self._release_listeners:
            fn(work.entry)

    # -- inspection -----------------------------------------------------------

    def collect_ready(self, now: Instant | None = None, *, include_busy: bool = False) -> ReadySet:
        """Callback ids with pending events, per non-timer list, in registration order."""
        with self._lock:
            def ready(lst: list[CallbackEntry]) -> list[int]:
                return [e.id for e in lst if (include_busy or not e.busy) and e.source.has_pending()]

            return ReadySet(ready(self.subscribers), ready(self.servers), ready(self.clients))

    def ready_timer_exists(self, resource: WorkerResource, now: Instant) -> bool:
        with self._lock:
            return any(not e.busy and e.mask.matches(resource) and e.source.is_ready(now) for e in self.timers)

    def claimable_exists(self, resource: WorkerResource, now: Instant) -> bool:
        with self._lock:
            return any(not e.busy and e.mask.matches(resource) and e.has_event(now) for e in self._by_id.values())


def endpoint_of(entry: CallbackEntry) -> Endpoint | None:
    return None if entry.kind is CallbackKind.TIMER else entry.source
