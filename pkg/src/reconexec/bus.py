"""In-process publish/subscribe and request/response substrate.

One re-entrant lock per bus guards every queue, which makes ``take`` and
``send_response`` linearizable under the threaded backend. Listeners are
called after the lock is released so they may call back into the bus.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable

from .clock import Clock, Instant, VirtualClock

DEFAULT_DEPTH = 10

Listener = Callable[["Endpoint"], None]


class NoSuchService(LookupError):
    pass


class ReplyHandleError(RuntimeError):
    """A reply handle was used twice or does not belong to a live request."""


def check_topic(name: str) -> str:
    if not name or not name.startswith("/"):
        raise ValueError(f"topic names must be non-empty and start with '/': {name!r}")
    return name


@dataclass(frozen=True)
class Message:
    payload: Any
    publish_time: Instant
    seq: int
    source: str = ""


@dataclass
class ReadySet:
    subscribers: list = field(default_factory=list)
    servers: list = field(default_factory=list)
    clients: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.subscribers or self.servers or self.clients)

    def __len__(self) -> int:
        return len(self.subscribers) + len(self.servers) + len(self.clients)


class Endpoint:
    """Common base: a FIFO that can be polled and watched."""

    kind = "endpoint"

    def __init__(self, bus: MessageBus, name: str, order: int) -> None:
        self.bus = bus
        self.name = name
        self.order = order
        self._pending: deque = deque()
        self._listeners: list[Listener] = []

    def add_listener(self, fn: Listener) -> None:
        self._listeners.append(fn)

    def has_pending(self) -> bool:
        with self.bus._lock:
            return bool(self._pending)

    def pending_count(self) -> int:
        with self.bus._lock:
            return len(self._pending)

    def take(self):
        """Remove and return the oldest pending item, or None."""
        with self.bus._lock:
            if not self._pending:
                return None
            item = self._pending.popleft()
            self._on_take(item)
            return item

    def _on_take(self, item) -> None:
        pass

    def _notify(self) -> None:
        for fn in self._listeners:
            fn(self)
        self.bus._notify(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class Subscription(Endpoint):
    kind = "subscription"

    def __init__(self, bus: MessageBus, topic: str, depth: int, order: int) -> None:
        if depth <= 0:
            raise ValueError("queue depth must be positive")
        super().__init__(bus, topic, order)
        self.topic = topic
        self.depth = depth
        self.received = 0
        self.taken = 0
        self.evicted = 0
        self.taken_seqs: list[int] = []

    def _deliver(self, msg: Message) -> None:
        if len(self._pending) >= self.depth:
            self._pending.popleft()
            self.evicted += 1
        self._pending.append(msg)
        self.received += 1

    def _on_take(self, item: Message) -> None:
        self.taken += 1
        self.taken_seqs.append(item.seq)


class ReplyHandle:
    """Single-use token routing one response back to the calling client."""

    __slots__ = ("client", "request_seq", "used")

    def __init__(self, client: ServiceClient, request_seq: int) -> None:
        self.client = client
        self.request_seq = request_seq
        self.used = False


class ServiceServer(Endpoint):
    kind = "server"

    def __init__(self, bus: MessageBus, name: str, order: int) -> None:
        super().__init__(bus, name, order)
        self.requests_received = 0
        self.requests_taken = 0

    def _on_take(self, item) -> None:
        self.requests_taken += 1


class ServiceClient(Endpoint):
    kind = "client"

    def __init__(self, bus: MessageBus, service: str, order: int) -> None:
        super().__init__(bus, service, order)
        self.service = service
        self._seq = 0
        self.requests_sent = 0
        self.responses_received = 0

    def call(self, payload: Any) -> int:
        return self.bus.call_service(self, payload)


class MessageBus:
    def __init__(self, clock: Clock | None = None, default_depth: int = DEFAULT_DEPTH) -> None:
        self.clock = clock if clock is not None else VirtualClock()
        self.default_depth = default_depth
        self._lock = threading.RLock()
        self._topics: dict[str, list[Subscription]] = {}
        self._topic_seq: dict[str, int] = {}
        self._published: dict[str, int] = {}
        self._servers: dict[str, ServiceServer] = {}
        self._subscriptions: list[Subscription] = []
        self._clients: list[ServiceClient] = []
        self._order = 0
        self._listeners: list[Listener] = []

    # -- topology -----------------------------------------------------------

    def _next_order(self) -> int:
        self._order += 1
        return self._order

    def _ensure_topic(self, topic: str) -> list[Subscription]:
        check_topic(topic)
        subs = self._topics.get(topic)
        if subs is None:
            subs = self._topics[topic] = []
            self._topic_seq[topic] = 0
            self._published[topic] = 0
        return subs

    def advertise(self, topic: str) -> None:
        with self._lock:
            self._ensure_topic(topic)

    def subscribe(self, topic: str, depth: int | None = None) -> Subscription:
        with self._lock:
            subs = self._ensure_topic(topic)
            sub = Subscription(self, topic, depth or self.default_depth, self._next_order())
            subs.append(sub)
            self._subscriptions.append(sub)
            return sub

    def create_server(self, name: str) -> ServiceServer:
        with self._lock:
            check_topic(name)
            if name in self._servers:
                raise ValueError(f"service {name!r} already has a server")
            server = ServiceServer(self, name, self._next_order())
            self._servers[name] = server
            return server

    def create_client(self, service: str) -> ServiceClient:
        with self._lock:
            check_topic(service)
            client = ServiceClient(self, service, self._next_order())
            self._clients.append(client)
            return client

    def add_listener(self, fn: Listener) -> None:
        """Called with the endpoint after anything is enqueued anywhere."""
        self._listeners.append(fn)

    def _notify(self, endpoint: Endpoint) -> None:
        for fn in self._listeners:
            fn(endpoint)

    # -- traffic ------------------------------------------------------------

    def publish(self, topic: str, payload: Any) -> int:
        with self._lock:
            subs = self._ensure_topic(topic)
            self._topic_seq[topic] += 1
            seq = self._topic_seq[topic]
            self._published[topic] += 1
            msg = Message(payload, self.clock.now(), seq, topic)
            for sub in subs:
                sub._deliver(msg)
            targets = list(subs)
        for sub in targets:
            sub._notify()
        return seq

    def call_service(self, client: ServiceClient, payload: Any) -> int:
        with self._lock:
            server = self._servers.get(client.service)
            if server is None:
                raise NoSuchService(client.service)
            client._seq += 1
            client.requests_sent += 1
            msg = Message(payload, self.clock.now(), client._seq, client.service)
            server._pending.append((msg, ReplyHandle(client, client._seq)))
            server.requests_received += 1
        server._notify()
        return msg.seq

    def send_response(self, handle: ReplyHandle, payload: Any) -> None:
        with self._lock:
            if not isinstance(handle, ReplyHandle):
                raise ReplyHandleError("not a reply handle")
            if handle.used:
                raise ReplyHandleError(f"reply handle for request {handle.request_seq} already used")
            handle.used = True
            client = handle.client
            client._pending.append(Message(payload, self.clock.now(), handle.request_seq, client.service))
            client.responses_received += 1
        client._notify()

    # -- inspection ---------------------------------------------------------

    def collect_ready(self) -> ReadySet:
        """Snapshot of endpoints with pending work, in creation order. Consumes nothing."""
        with self._lock:
            return ReadySet(
                subscribers=[s for s in self._subscriptions if s._pending],
                servers=[s for s in sorted(self._servers.values(), key=lambda e: e.order) if s._pending],
                clients=[c for c in self._clients if c._pending],
            )

    def published_count(self, topic: str) -> int:
        with self._lock:
            return self._published.get(topic, 0)

    def state_digest(self) -> tuple:
        """Hashable summary of all queue contents; used to check read-only operations."""
        with self._lock:
            subs = tuple((s.topic, s.order, tuple(m.seq for m in s._pending), s.evicted) for s in self._subscriptions)
            servers = tuple((n, tuple(m.seq for m, _ in s._pending)) for n, s in sorted(self._servers.items()))
            clients = tuple((c.service, c.order, tuple(m.seq for m in c._pending)) for c in self._clients)
            return subs, servers, clients, tuple(sorted(self._topic_seq.items()))
