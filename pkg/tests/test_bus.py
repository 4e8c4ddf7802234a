from __future__ import annotations

import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from reconexec.bus import MessageBus, NoSuchService, ReplyHandleError
from reconexec.clock import VirtualClock


def test_publish_without_subscribers_returns_seq():
    bus = MessageBus()
    assert bus.publish("/nobody", "x") == 1
    assert bus.publish("/nobody", "y") == 2
    assert bus.published_count("/nobody") == 2


def test_fan_out_to_every_subscriber():
    bus = MessageBus()
    a, b = bus.subscribe("/t"), bus.subscribe("/t")
    bus.publish("/t", 1)
    assert a.pending_count() == b.pending_count() == 1


def test_depth_ten_keeps_newest_ten():
    bus = MessageBus()
    sub = bus.subscribe("/t", depth=10)
    for i in range(11):
        bus.publish("/t", i)
    seqs = []
    while (m := sub.take()) is not None:
        seqs.append(m.seq)
    assert seqs == list(range(2, 12))
    assert sub.evicted == 1


def test_take_empty_then_fifo():
    bus = MessageBus()
    sub = bus.subscribe("/t")
    assert sub.take() is None
    bus.publish("/t", "p")
    assert sub.take().payload == "p"
    assert sub.take() is None


def test_publish_time_and_source_recorded():
    clock = VirtualClock(42)
    bus = MessageBus(clock)
    sub = bus.subscribe("/t")
    bus.publish("/t", 0)
    m = sub.take()
    assert (m.publish_time, m.source) == (42, "/t")


def test_topic_names_validated():
    with pytest.raises(ValueError):
        MessageBus().subscribe("no_slash")


def test_concurrent_takers_share_one_message_exactly_once():
    for _ in range(200):
        bus = MessageBus()
        sub = bus.subscribe("/t")
        bus.publish("/t", "only")
        got = []
        barrier = threading.Barrier(2)

        def taker():
            barrier.wait()
            m = sub.take()
            if m is not None:
                got.append(m)

        ts = [threading.Thread(target=taker) for _ in range(2)]
        for t in ts:
            t.start()
        for t in ts:
            t.join()
        assert len(got) == 1


def test_concurrent_stress_conserves_messages():
    bus = MessageBus(default_depth=100_000)
    sub = bus.subscribe("/t")
    n_pub, per = 4, 2000
    taken: list[int] = []
    lock = threading.Lock()
    done = threading.Event()

    def publisher():
        for i in range(per):
            bus.publish("/t", i)

    def taker():
        while not done.is_set() or sub.has_pending():
            m = sub.take()
            if m is not None:
                with lock:
                    taken.append(m.seq)

    pubs = [threading.Thread(target=publisher) for _ in range(n_pub)]
    takers = [threading.Thread(target=taker) for _ in range(3)]
    for t in pubs + takers:
        t.start()
    for t in pubs:
        t.join()
    done.set()
    for t in takers:
        t.join()
    assert sorted(taken) == list(range(1, n_pub * per + 1))


def test_service_roundtrip():
    bus = MessageBus()
    server = bus.create_server("/svc")
    client = bus.create_client("/svc")
    client.call("req")
    msg, handle = server.take()
    assert msg.payload == "req"
    bus.send_response(handle, "resp")
    assert client.pending_count() == 1
    assert client.take().payload == "resp"


def test_reply_handle_is_single_use():
    bus = MessageBus()
    server = bus.create_server("/svc")
    bus.create_client("/svc").call(0)
    _, handle = server.take()
    bus.send_response(handle, 1)
    with pytest.raises(ReplyHandleError):
        bus.send_response(handle, 2)


def test_response_without_request_rejected():
    with pytest.raises(ReplyHandleError):
        MessageBus().send_response(object(), 1)


def test_call_without_server():
    client = MessageBus().create_client("/missing")
    with pytest.raises(NoSuchService):
        client.call(1)


def test_duplicate_server_rejected():
    bus = MessageBus()
    bus.create_server("/svc")
    with pytest.raises(ValueError):
        bus.create_server("/svc")


@given(st.integers(1, 60))
def test_pipelined_requests_answered_in_order(n):
    bus = MessageBus()
    server = bus.create_server("/svc")
    client = bus.create_client("/svc")
    for i in range(n):
        client.call(i)
    while (req := server.take()) is not None:
        msg, handle = req
        bus.send_response(handle, msg.payload * 10)
    got = []
    while (m := client.take()) is not None:
        got.append((m.seq, m.payload))
    assert got == [(i + 1, i * 10) for i in range(n)]


def test_responses_route_to_the_calling_client():
    bus = MessageBus()
    server = bus.create_server("/svc")
    c1, c2 = bus.create_client("/svc"), bus.create_client("/svc")
    c1.call("a")
    c2.call("b")
    while (req := server.take()) is not None:
        bus.send_response(req[1], req[0].payload.upper())
    assert c1.take().payload == "A"
    assert c2.take().payload == "B"


def test_collect_ready_empty():
    rs = MessageBus().collect_ready()
    assert (rs.subscribers, rs.servers, rs.clients) == ([], [], [])
    assert not rs


def test_collect_ready_keeps_registration_order_and_consumes_nothing():
    bus = MessageBus()
    _, b, c = bus.subscribe("/a"), bus.subscribe("/b"), bus.subscribe("/c")
    bus.publish("/c", 1)
    bus.publish("/b", 1)
    before = bus.state_digest()
    rs = bus.collect_ready()
    assert rs.subscribers == [b, c]
    assert bus.state_digest() == before


def test_collect_ready_single_server():
    bus = MessageBus()
    bus.create_server("/other")
    server = bus.create_server("/svc")
    bus.create_client("/svc").call(0)
    rs = bus.collect_ready()
    assert rs.servers == [server]
    assert rs.subscribers == [] and rs.clients == []


def test_listeners_fire_on_enqueue():
    bus = MessageBus()
    sub = bus.subscribe("/t")
    seen = []
    sub.add_listener(lambda ep: seen.append(ep))
    bus.add_listener(lambda ep: seen.append("bus"))
    bus.publish("/t", 0)
    assert seen == [sub, "bus"]


@given(st.lists(st.tuples(st.sampled_from(["pub", "take"]), st.integers(0, 2)), max_size=200))
def test_subscription_conservation(ops):
    bus = MessageBus(default_depth=5)
    subs = [bus.subscribe("/t") for _ in range(3)]
    for op, i in ops:
        if op == "pub":
            bus.publish("/t", 0)
        else:
            subs[i].take()
    for s in subs:
        assert s.received == bus.published_count("/t")
        assert s.received == s.taken + s.evicted + s.pending_count()
        assert s.pending_count() <= 5
