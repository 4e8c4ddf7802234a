from __future__ import annotations

import random
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reconexec.bus import MessageBus
from reconexec.clock import MS, Timer
from reconexec.registry import (
    SOFTWARE,
    CallbackKind,
    CallbackLists,
    InvalidMask,
    OffsetVector,
    ReleaseError,
    ResourceMask,
    slot_indices,
)

SUB = CallbackKind.SUBSCRIBER


def sw():
    return ResourceMask(software=lambda inv: None)


def make(n_subs=3, mask=None):
    bus = MessageBus()
    lists = CallbackLists()
    subs = []
    for i in range(n_subs):
        s = bus.subscribe(f"/t{i}")
        lists.register(SUB, mask() if mask else sw(), s)
        subs.append(s)
    return bus, lists, subs


def test_hardware_mask_bit_zero_is_slot_zero():
    m = ResourceMask.from_bits(1)
    assert m.is_hardware and list(m.slots) == [0]
    assert m.bits == 1
    assert m.matches(0) and not m.matches(1) and not m.matches(SOFTWARE)


def test_mask_decoding():
    assert slot_indices(0b0110) == [1, 2]
    assert ResourceMask.from_bits(0b0110).bits == 0b0110


@pytest.mark.parametrize("kw", [{}, {"slots": {}}])
def test_empty_mask_rejected(kw):
    with pytest.raises(InvalidMask):
        ResourceMask(**kw)


def test_zero_bits_rejected():
    with pytest.raises(InvalidMask):
        ResourceMask.from_bits(0)


def test_mixed_mask_rejected():
    with pytest.raises(InvalidMask):
        ResourceMask(software=print, slots={0: None})


def test_register_assigns_ids_and_indices():
    bus = MessageBus()
    lists = CallbackLists()
    a = lists.register(SUB, sw(), bus.subscribe("/a"))
    b = lists.register(SUB, sw(), bus.subscribe("/b"))
    assert a != b
    assert [e.index for e in lists.subscribers] == [0, 1]


def test_register_checks_source_type():
    with pytest.raises(TypeError):
        CallbackLists().register(CallbackKind.TIMER, sw(), MessageBus().subscribe("/a"))


def test_register_requires_mask():
    with pytest.raises(InvalidMask):
        CallbackLists().register(SUB, None, MessageBus().subscribe("/a"))


def test_duplicate_source_allowed():
    bus = MessageBus()
    lists = CallbackLists()
    s = bus.subscribe("/a")
    lists.register(SUB, sw(), s)
    lists.register(SUB, sw(), s)
    assert len(lists.subscribers) == 2


def test_timer_has_priority_over_subscriber():
    bus, lists, subs = make(1)
    timer = Timer.starting_at(0, 10 * MS, 0)
    tid = lists.register(CallbackKind.TIMER, sw(), timer)
    bus.publish("/t0", 0)
    work = lists.next_ready(SOFTWARE, OffsetVector(lists), 10 * MS)
    assert work.entry.id == tid
    assert work.event.deadline == 10 * MS


def test_fresh_offsets_serve_in_index_order():
    bus, lists, subs = make(3)
    for i in range(3):
        bus.publish(f"/t{i}", 0)
    off = OffsetVector(lists)
    assert off[SUB] == 3
    order = []
    for _ in range(3):
        w = lists.next_ready(SOFTWARE, off, 0)
        order.append(w.entry.index)
        lists.release(w)
    assert order == [0, 1, 2]


def test_round_robin_resumes_after_last_served():
    bus, lists, subs = make(3)
    off = OffsetVector(lists)
    for _ in range(3):
        for i in range(3):
            bus.publish(f"/t{i}", 0)
    order = []
    for _ in range(9):
        w = lists.next_ready(SOFTWARE, off, 0)
        order.append(w.entry.index)
        lists.release(w)
    assert order == [0, 1, 2] * 3


def test_mask_filters_worker():
    bus = MessageBus()
    lists = CallbackLists()
    lists.register(SUB, ResourceMask.from_bits(0b01), bus.subscribe("/a"))
    b = lists.register(SUB, ResourceMask.from_bits(0b10), bus.subscribe("/b"))
    bus.publish("/a", 0)
    bus.publish("/b", 0)
    assert lists.next_ready(1, OffsetVector(lists), 0).entry.id == b


def test_all_busy_gives_nothing():
    bus, lists, subs = make(2)
    for i in range(2):
        bus.publish(f"/t{i}", 0)
        bus.publish(f"/t{i}", 0)
    off = OffsetVector(lists)
    held = [lists.next_ready(SOFTWARE, off, 0) for _ in range(2)]
    assert all(held)
    assert lists.next_ready(SOFTWARE, OffsetVector(lists), 0) is None


def test_release_makes_claimable_again():
    bus, lists, subs = make(1)
    bus.publish("/t0", 0)
    bus.publish("/t0", 0)
    w = lists.next_ready(SOFTWARE, OffsetVector(lists), 0)
    assert lists.next_ready(SOFTWARE, OffsetVector(lists), 0) is None
    lists.release(w)
    assert lists.next_ready(SOFTWARE, OffsetVector(lists), 0) is not None
    assert lists.get(w.entry.id).executions == 1


def test_double_release_is_an_error():
    bus, lists, subs = make(1)
    bus.publish("/t0", 0)
    w = lists.next_ready(SOFTWARE, OffsetVector(lists), 0)
    lists.release(w)
    with pytest.raises(ReleaseError):
        lists.release(w)


def test_flooded_subscriber_does_not_starve_server():
    bus = MessageBus(default_depth=1000)
    lists = CallbackLists()
    lists.register(SUB, sw(), bus.subscribe("/flood"))
    server = bus.create_server("/svc")
    sid = lists.register(CallbackKind.SERVICE_SERVER, sw(), server)
    client = bus.create_client("/svc")
    for _ in range(500):
        bus.publish("/flood", 0)
    client.call(0)
    off = OffsetVector(lists)
    claimed = []
    for _ in range(3):
        w = lists.next_ready(SOFTWARE, off, 0)
        claimed.append(w.entry.id)
        lists.release(w)
    assert sid in claimed


def test_collect_ready_is_read_only():
    bus, lists, subs = make(3)
    bus.publish("/t2", 0)
    bus.publish("/t0", 0)
    before = bus.state_digest()
    rs = lists.collect_ready(0)
    assert rs.subscribers == [lists.subscribers[0].id, lists.subscribers[2].id]
    assert bus.state_digest() == before


@settings(max_examples=50, deadline=None)
@given(
    n=st.integers(1, 6),
    pattern=st.lists(st.integers(0, 5), min_size=1, max_size=60),
)
def test_round_robin_window(n, pattern):
    """Between two services of a continuously ready subscriber, at most n-1 other subscribers run."""
    bus, lists, subs = make(n)
    for i in range(n):
        for _ in range(bus.default_depth):
            bus.publish(f"/t{i}", 0)
    off = OffsetVector(lists)
    last_seen: dict[int, int] = {}
    for step, _ in enumerate(pattern):
        w = lists.next_ready(SOFTWARE, off, 0)
        idx = w.entry.index
        if idx in last_seen:
            assert step - last_seen[idx] <= n
        last_seen[idx] = step
        lists.release(w)
        bus.publish(f"/t{idx}", 0)  # keep everything ready


def test_concurrent_claims_never_share_an_entry():
    bus = MessageBus(default_depth=100_000)
    lists = CallbackLists()
    n = 4
    for i in range(n):
        lists.register(SUB, sw(), bus.subscribe(f"/t{i}"))
    for _ in range(2000):
        bus.publish(f"/t{random.randrange(n)}", 0)
    active: set[int] = set()
    guard = threading.Lock()
    errors = []
    done_count = [0]

    def worker():
        off = OffsetVector(lists)
        while True:
            w = lists.next_ready(SOFTWARE, off, 0)
            if w is None:
                if not any(s.source.has_pending() for s in lists.subscribers):
                    return
                continue
            with guard:
                if w.entry.id in active:
                    errors.append(w.entry.id)
                active.add(w.entry.id)
            with guard:
                active.discard(w.entry.id)
                done_count[0] += 1
            lists.release(w)

    ts = [threading.Thread(target=worker) for _ in range(4)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert errors == []
    assert done_count[0] == 2000
    assert sum(e.executions for e in lists) == 2000
