from __future__ import annotations

import dataclasses
import math

import pytest

from conftest import only
from reconexec.clock import MS, SECOND
from reconexec.registry import CallbackKind
from reconexec.scenario import (
    EVENTS_HEADER,
    RESULTS_HEADER,
    ConfigError,
    RoundtripRecord,
    events_csv,
    format_duration,
    parse_config,
    parse_duration,
    resolve_mapping,
    results_csv,
    run_scenario,
    summarize,
)

MINIMAL = """
[slot.0]
bitstream_bytes = 1000000

[callback.sorting]
workload = sorting

[client.c]
target = sorting
"""


@pytest.mark.parametrize("text, ns", [
    ("250ms", 250 * MS), ("1.5ms", 1_500_000), ("20s", 20 * SECOND), ("7ns", 7), ("3us", 3000), ("0.85ms", 850_000),
])
def test_parse_duration(text, ns):
    assert parse_duration(text) == ns


@pytest.mark.parametrize("bad", ["", "10", "ms", "-1ms", "1 minute"])
def test_parse_duration_rejects(bad):
    with pytest.raises(ValueError):
        parse_duration(bad)


def test_format_duration():
    assert format_duration(250 * MS) == "250ms"


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert len(cfg.slots) == 1 and cfg.executor.num_hw_workers == 1 and cfg.executor.num_sw_workers == 1
    assert cfg.executor.wait_time == 1 * MS
    cb = cfg.callback("sorting")
    assert cb.kind is CallbackKind.SERVICE_SERVER and cb.service == "/sorting"
    assert cfg.clients[0].mode == "ping-pong" and cfg.clients[0].comm_delay == 0
    assert cfg.mapping == "all-sw" and cfg.duration == 10 * SECOND
    assert cfg.model.t_offset_ms == pytest.approx(6.8)


def test_mask_beyond_declared_slots_names_section():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL.replace("workload = sorting", "workload = sorting\nmask = 0b1000"))
    assert exc.value.section == "callback.sorting"
    assert "callback.sorting" in str(exc.value)


def test_unknown_key_reports_line():
    text = MINIMAL.replace("bitstream_bytes = 1000000", "bitstream_bytes = 1000000\ncolour = red")
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.line == 2 and "colour" in str(exc.value)


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(MINIMAL + "\n[network]\nspeed = 1\n")


def test_syntax_error_reports_line():
    with pytest.raises(ConfigError) as exc:
        parse_config("[slot.0]\nbitstream_bytes = 1\nthis is not a key value pair\n")
    assert exc.value.line == 3


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError):
        parse_config("[slot.0]\nbitstream_bytes = 1\nbitstream_bytes = 2\n")


def test_client_target_must_exist():
    with pytest.raises(ConfigError, match="client.c"):
        parse_config(MINIMAL.replace("target = sorting", "target = nope"))


def test_timer_client_mode_checked():
    # a ping-pong client has nothing to send to a timer callback
    with pytest.raises(ConfigError, match="ping-pong"):
        parse_config(MINIMAL.replace("workload = sorting", "workload = hash"))


def test_hw_workers_must_match_slots():
    with pytest.raises(ConfigError, match="executor"):
        parse_config(MINIMAL + "\n[executor]\nhw_workers = 2\n")


def test_bundled_scenario_topology(bundled):
    cfg = bundled
    assert len(cfg.slots) == 4 and len(cfg.callbacks) == 5 and len(cfg.clients) == 5
    assert (cfg.executor.num_sw_workers, cfg.executor.num_hw_workers) == (2, 4)
    assert [s.bitstream_size_bytes for s in cfg.slots] == [2_838_976, 2_838_976, 5_285_728, 4_883_328]
    kinds = {c.name: c.kind for c in cfg.callbacks}
    assert kinds == {
        "sobel": CallbackKind.SUBSCRIBER, "sorting": CallbackKind.SERVICE_SERVER, "mnist": CallbackKind.SUBSCRIBER,
        "inverse": CallbackKind.SUBSCRIBER, "hash": CallbackKind.TIMER,
    }
    assert cfg.callback("hash").period == 250 * MS
    assert [c.mode for c in cfg.clients].count("timer-listener") == 1


def test_mixed_mapping_puts_hash_in_software(bundled):
    m = resolve_mapping(bundled, "mixed")
    assert m["hash"] is None
    assert sorted(m[n] for n in ("sobel", "sorting", "mnist", "inverse")) == [1, 2, 4, 8]


def test_all_sw_and_all_hw_mappings(bundled):
    assert set(resolve_mapping(bundled, "all-sw").values()) == {None}
    hw = resolve_mapping(bundled, "all-hw")
    assert hw["inverse"] == hw["hash"] == 0b0010
    assert None not in hw.values()


def test_mixed_override(bundled):
    cfg = dataclasses.replace(bundled, callbacks=[
        dataclasses.replace(c, mixed="hw" if c.name == "hash" else ("sw" if c.name == "mnist" else None))
        for c in bundled.callbacks
    ])
    m = resolve_mapping(cfg, "mixed")
    assert m["hash"] is not None and m["mnist"] is None


def test_too_many_hw_callbacks_need_masks():
    text = MINIMAL + "\n[callback.inverse]\nworkload = inverse\n"
    cfg = parse_config(text)
    with pytest.raises(ConfigError, match="mask"):
        resolve_mapping(cfg, "all-hw")


def test_sorting_alone_in_software(bundled):
    r = run_scenario(only(bundled, "sorting"), mapping="all-sw", duration=5 * SECOND)
    mean = r.mean("sorting") / MS
    assert 41.0 <= mean <= 41.0 * 1.05


def test_sorting_alone_in_hardware(bundled):
    cfg = only(bundled, "sorting")
    r = run_scenario(cfg, mapping="all-hw", duration=5 * SECOND)
    warm = [x.roundtrip for x in r.roundtrips[1:]]
    assert sum(warm) / len(warm) / MS == pytest.approx(0.85, rel=0.02)
    sw = run_scenario(cfg, mapping="all-sw", duration=5 * SECOND)
    assert sw.mean("sorting") / r.mean("sorting") == pytest.approx(48.2, rel=0.05)


def test_hash_interarrival_straddles_period(bundled):
    r = run_scenario(bundled, mapping="all-sw", duration=10 * SECOND)
    gaps = r.by_client()["hash"]
    assert sum(gaps) / len(gaps) / MS == pytest.approx(250, rel=0.02)
    assert min(gaps) < 250 * MS < max(gaps)


def test_standard_executor_option(bundled):
    cfg = dataclasses.replace(only(bundled, "sorting"), all_sw_executor="standard")
    r = run_scenario(cfg, mapping="all-sw", duration=2 * SECOND)
    assert r.mean("sorting") / MS == pytest.approx(41.0, rel=0.05)
    assert r.reconfigurations == 0


def test_comm_delay_adds_both_ways(bundled):
    cfg = only(bundled, "sorting")
    cfg = dataclasses.replace(cfg, clients=[dataclasses.replace(cfg.clients[0], comm_delay=2 * MS)])
    r = run_scenario(cfg, mapping="all-sw", duration=2 * SECOND)
    assert r.mean("sorting") / MS == pytest.approx(45.0, rel=0.05)


def test_ping_pong_conservation(bundled):
    r = run_scenario(bundled, mapping="all-hw", duration=5 * SECOND)
    for c in bundled.clients:
        s = r.counters[c.name]
        if c.mode == "ping-pong":
            assert s["sent"] - s["received"] in (0, 1)
            assert len(r.by_client()[c.name]) == s["received"]
    assert r.duplicates == 0


def test_validated_kernels_run(bundled):
    cfg = dataclasses.replace(only(bundled, "sorting", "inverse"), validate_kernels=True)
    r = run_scenario(cfg, mapping="mixed", duration=200 * MS)
    assert r.counters["sorting"]["received"] > 0 and r.counters["inverse"]["received"] > 0


def test_summarize_single_bin():
    recs = [RoundtripRecord("c", 1, 10 * MS), RoundtripRecord("c", 2, 10 * MS)]
    s = summarize(recs, 1 * MS)["c"]
    assert (s.count, s.mean, s.min, s.max) == (2, 10 * MS, 10 * MS, 10 * MS)
    assert s.histogram == {10 * MS: 1.0}


def test_summarize_two_bins():
    recs = [RoundtripRecord("c", 1, 1 * MS), RoundtripRecord("c", 2, 3 * MS)]
    assert summarize(recs, 1 * MS)["c"].histogram == {1 * MS: 0.5, 3 * MS: 0.5}


def test_summarize_includes_silent_clients():
    s = summarize([], 1 * MS, clients=["quiet"])["quiet"]
    assert s.count == 0 and math.isnan(s.mean)


def test_summarize_bin_width_positive():
    with pytest.raises(ValueError):
        summarize([], 0)


def test_csv_headers_exact():
    assert results_csv([]).splitlines()[0] == "client,seq,roundtrip_ns"
    assert events_csv([]).splitlines()[0] == "callback,worker,claim_ns,start_ns,end_ns,reconfig_ns"
    assert RESULTS_HEADER == ("client", "seq", "roundtrip_ns")
    assert len(EVENTS_HEADER) == 6
