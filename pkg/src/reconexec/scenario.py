"""Scenario files, the client/server experiment topology, and result statistics.

A scenario file is INI-style::

    [scenario]          mapping, duration, seed, validate_kernels
    [model]             t_offset, bandwidth_MBps
    [executor]          sw_workers, hw_workers, wait_time, bitstream_path, all_sw_executor
    [slot.K]            bitstream_bytes, slice_luts, dsps, bram36, bram18
    [callback.NAME]     workload, kind, node, mask, period, sw_time, hw_time,
                        topic_in, topic_out, service, payload_in, payload_out, mixed
    [client.NAME]       target, mode, comm_delay

Durations carry a unit suffix (ns, us, ms, s). Masks are integers, bit i
selecting slot i (``0b0100``, ``4`` and ``0x4`` are all slot 2).
"""

from __future__ import annotations

import configparser
import csv
import io
import logging
import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .bus import MessageBus
from .clock import Duration, Instant, MS, SECOND
from .executor import (
    ExecutionRecord,
    ExecutorConfig,
    ReconExecutor,
    StandardExecutor,
    StopCondition,
    make_driver,
)
from .fabric import REPORTED_MODEL, ReconfigModel, SlotDescriptor
from .registry import CallbackKind, slot_indices
from .runtime import CLIENT_PRIORITY, Sleep, WaitFor
from .workloads import HASH_IMAGE_SIZE, WorkModel, workload

log = logging.getLogger(__name__)

MAPPINGS = ("all-sw", "mixed", "all-hw")
CLIENT_MODES = ("ping-pong", "timer-listener")
RESULTS_HEADER = ("client", "seq", "roundtrip_ns")
EVENTS_HEADER = ("callback", "worker", "claim_ns", "start_ns", "end_ns", "reconfig_ns")

DATA_DIR = Path(__file__).parent / "data"


class ConfigError(ValueError):
    def __init__(self, message: str, *, line: int | None = None, section: str | None = None) -> None:
        where = []
        if line is not None:
            where.append(f"line {line}")
        if section is not None:
            where.append(f"[{section}]")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.section = section


_UNITS = {"ns": 1, "us": 1_000, "µs": 1_000, "ms": MS, "s": SECOND}
_DURATION_RE = re.compile(r"^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*(ns|us|µs|ms|s)\s*$")


def parse_duration(text: str) -> Duration:
    """'250ms' -> 250_000_000. Exact decimal arithmetic, rounded to the nearest ns."""
    m = _DURATION_RE.match(text)
    if not m:
        raise ValueError(f"invalid duration {text!r}; expected a number with unit ns/us/ms/s")
    try:
        value = Decimal(m.group(1)) * _UNITS[m.group(2)]
    except InvalidOperation:
        raise ValueError(f"invalid duration {text!r}") from None
    return int(value.to_integral_value())


def format_duration(ns: Duration) -> str:
    return f"{ns / MS:g}ms"


@dataclass
class CallbackSpec:
    name: str
    work: WorkModel
    kind: CallbackKind
    node: str
    mask_bits: int | None = None
    period: Duration | None = None
    topic_in: str = ""
    topic_out: str = ""
    service: str = ""
    mixed: str | None = None

    @property
    def speedup(self) -> float:
        return self.work.speedup


@dataclass
class ClientSpec:
    name: str
    target: str
    mode: str = "ping-pong"
    comm_delay: Duration = 0


@dataclass
class ScenarioConfig:
    slots: list[SlotDescriptor]
    callbacks: list[CallbackSpec]
    clients: list[ClientSpec]
    model: ReconfigModel = REPORTED_MODEL
    executor: ExecutorConfig = field(default_factory=ExecutorConfig)
    all_sw_executor: str = "recon"
    mapping: str = "all-sw"
    duration: Duration = 10 * SECOND
    seed: int = 0
    validate_kernels: bool = False

    def callback(self, name: str) -> CallbackSpec:
        for cb in self.callbacks:
            if cb.name == name:
                return cb
        raise KeyError(name)

    def with_overrides(self, **kw) -> ScenarioConfig:
        import dataclasses

        return dataclasses.replace(self, **{k: v for k, v in kw.items() if v is not None})


# -- parsing ------------------------------------------------------------------------

_SECTION_KEYS = {
    "scenario": {"mapping", "duration", "seed", "validate_kernels"},
    "model": {"t_offset", "bandwidth_mbps"},
    "executor": {"sw_workers", "hw_workers", "wait_time", "bitstream_path", "all_sw_executor"},
    "slot": {"bitstream_bytes", "slice_luts", "dsps", "bram36", "bram18"},
    "callback": {"workload", "kind", "node", "mask", "period", "sw_time", "hw_time", "topic_in", "topic_out",
                 "service", "payload_in", "payload_out", "mixed"},
    "client": {"target", "mode", "comm_delay"},
}


def _section_lines(text: str) -> dict[str, int]:
    lines = {}
    for no, line in enumerate(text.splitlines(), 1):
        m = re.match(r"^\s*\[([^\]]+)\]", line)
        if m:
            lines.setdefault(m.group(1).strip(), no)
    return lines


def _int(value: str, what: str, section: str) -> int:
    try:
        return int(value, 0)
    except ValueError:
        raise ConfigError(f"{what} must be an integer, got {value!r}", section=section) from None


def _dur(value: str, what: str, section: str) -> Duration:
    try:
        return parse_duration(value)
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}", section=section) from None


def _bool(value: str, what: str, section: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{what} must be a boolean, got {value!r}", section=section)


def parse_config(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), comment_prefixes=("#", ";"), strict=True,
    )
    parser.optionxform = str.lower  # type: ignore[assignment]
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("expected a [section] header", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("cannot parse line", line=lineno) from None
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ConfigError(exc.message.split(":", 1)[-1].strip(), line=exc.lineno) from None
    lines = _section_lines(text)

    scenario: dict[str, str] = {}
    model: dict[str, str] = {}
    executor: dict[str, str] = {}
    slots: list[tuple[int, str, dict[str, str]]] = []
    callbacks: list[tuple[str, dict[str, str]]] = []
    clients: list[tuple[str, dict[str, str]]] = []

    for section in parser.sections():
        head, _, name = section.partition(".")
        head = head.strip()
        if head not in _SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]", line=lines.get(section))
        if head in ("slot", "callback", "client") and not name:
            raise ConfigError(f"[{head}] sections need a name, e.g. [{head}.NAME]", line=lines.get(section))
        if head not in ("slot", "callback", "client") and name:
            raise ConfigError(f"[{head}] takes no name", line=lines.get(section))
        values = dict(parser.items(section))
        unknown = sorted(set(values) - _SECTION_KEYS[head])
        if unknown:
            raise ConfigError(f"unknown key(s) {', '.join(unknown)}", line=lines.get(section), section=section)
        if head == "scenario":
            scenario = values
        elif head == "model":
            model = values
        elif head == "executor":
            executor = values
        elif head == "slot":
            slots.append((_int(name, "slot index", section), section, values))
        elif head == "callback":
            callbacks.append((name, values))
        else:
            clients.append((name, values))

    slot_descs = []
    for idx, section, values in sorted(slots):
        if "bitstream_bytes" not in values:
            raise ConfigError("bitstream_bytes is required", section=section)
        try:
            slot_descs.append(SlotDescriptor(
                idx,
                _int(values["bitstream_bytes"], "bitstream_bytes", section),
                *(_int(values.get(k, "0"), k, section) for k in ("slice_luts", "dsps", "bram36", "bram18")),
            ))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), section=section) from None
    if [s.id for s in slot_descs] != list(range(len(slot_descs))):
        raise ConfigError(f"slots must be numbered 0..n-1, got {[s.id for s in slot_descs]}")

    rm = REPORTED_MODEL
    if model:
        t_off = _dur(model["t_offset"], "t_offset", "model") if "t_offset" in model else rm.t_offset
        try:
            bw = float(model["bandwidth_mbps"]) * 1e6 if "bandwidth_mbps" in model else rm.bandwidth_bytes_per_sec
            rm = ReconfigModel(t_off, bw)
        except ValueError as exc:
            raise ConfigError(str(exc), section="model") from None

    n_slots = len(slot_descs)
    sw_workers = _int(executor.get("sw_workers", "1"), "sw_workers", "executor")
    hw_workers = _int(executor.get("hw_workers", str(n_slots)), "hw_workers", "executor")
    if hw_workers != n_slots:
        raise ConfigError(f"hw_workers={hw_workers} but {n_slots} slot(s) declared; one worker per slot",
                          section="executor")
    try:
        exec_cfg = ExecutorConfig(
            sw_workers, hw_workers,
            _dur(executor["wait_time"], "wait_time", "executor") if "wait_time" in executor else MS,
            executor.get("bitstream_path", ""),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), section="executor") from None
    all_sw_executor = executor.get("all_sw_executor", "recon")
    if all_sw_executor not in ("standard", "recon"):
        raise ConfigError("all_sw_executor must be 'standard' or 'recon'", section="executor")

    cb_specs = [_parse_callback(name, values, n_slots) for name, values in callbacks]
    names = [c.name for c in cb_specs]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate callback names")

    client_specs = []
    for name, values in clients:
        section = f"client.{name}"
        if "target" not in values:
            raise ConfigError("target is required", section=section)
        target = values["target"]
        if target not in names:
            raise ConfigError(f"target {target!r} is not a declared callback", section=section)
        mode = values.get("mode", "ping-pong")
        if mode not in CLIENT_MODES:
            raise ConfigError(f"mode must be one of {CLIENT_MODES}", section=section)
        is_timer = cb_specs[names.index(target)].kind is CallbackKind.TIMER
        if is_timer != (mode == "timer-listener"):
            raise ConfigError(f"{mode} client cannot target {target!r}", section=section)
        delay = _dur(values["comm_delay"], "comm_delay", section) if "comm_delay" in values else 0
        client_specs.append(ClientSpec(name, target, mode, delay))

    mapping = scenario.get("mapping", "all-sw")
    if mapping not in MAPPINGS:
        raise ConfigError(f"mapping must be one of {MAPPINGS}", section="scenario")
    return ScenarioConfig(
        slots=slot_descs,
        callbacks=cb_specs,
        clients=client_specs,
        model=rm,
        executor=exec_cfg,
        all_sw_executor=all_sw_executor,
        mapping=mapping,
        duration=_dur(scenario["duration"], "duration", "scenario") if "duration" in scenario else 10 * SECOND,
        seed=_int(scenario.get("seed", "0"), "seed", "scenario"),
        validate_kernels=_bool(scenario.get("validate_kernels", "false"), "validate_kernels", "scenario"),
    )


def _parse_callback(name: str, values: dict[str, str], n_slots: int) -> CallbackSpec:
    section = f"callback.{name}"
    base_name = values.get("workload", name)
    try:
        base = workload(base_name)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]), section=section) from None
    try:
        kind = CallbackKind.parse(values["kind"]) if "kind" in values else base.kind
    except ValueError as exc:
        raise ConfigError(str(exc), section=section) from None
    if kind is CallbackKind.SERVICE_CLIENT:
        raise ConfigError("scenarios host timer, subscriber and server callbacks only", section=section)
    period = _dur(values["period"], "period", section) if "period" in values else base.period
    try:
        work = WorkModel(
            base.name, base.title,
            _dur(values["sw_time"], "sw_time", section) if "sw_time" in values else base.sw_exec,
            _dur(values["hw_time"], "hw_time", section) if "hw_time" in values else base.hw_exec,
            _int(values.get("payload_in", str(base.payload_bytes_in)), "payload_in", section),
            _int(values.get("payload_out", str(base.payload_bytes_out)), "payload_out", section),
            kind, period if kind is CallbackKind.TIMER else None,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), section=section) from None
    mask = None
    if "mask" in values:
        mask = _int(values["mask"], "mask", section)
        if mask <= 0:
            raise ConfigError("mask selects no slot", section=section)
        bad = [s for s in slot_indices(mask) if s >= n_slots]
        if bad:
            raise ConfigError(f"mask {values['mask']} references undeclared slot(s) {bad}", section=section)
    mixed = values.get("mixed")
    if mixed is not None and mixed not in ("sw", "hw"):
        raise ConfigError("mixed must be 'sw' or 'hw'", section=section)
    return CallbackSpec(
        name=name, work=work, kind=kind,
        node=values.get("node", f"/{name}"),
        mask_bits=mask, period=period if kind is CallbackKind.TIMER else None,
        topic_in=values.get("topic_in", f"/{name}/in"),
        topic_out=values.get("topic_out", f"/{name}/out"),
        service=values.get("service", f"/{name}"),
        mixed=mixed,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    p = Path(path)
    if not p.exists() and (DATA_DIR / p.name).exists():
        p = DATA_DIR / p.name
    return parse_config(p.read_text())


# -- mapping ------------------------------------------------------------------------


def resolve_mapping(cfg: ScenarioConfig, mapping: str | None = None) -> dict[str, int | None]:
    """Callback name -> slot mask for hardware, or None for software."""
    mapping = mapping or cfg.mapping
    if mapping not in MAPPINGS:
        raise ConfigError(f"unknown mapping {mapping!r}")
    n = len(cfg.slots)
    if mapping == "all-sw":
        return {cb.name: None for cb in cfg.callbacks}
    if mapping == "all-hw":
        hw = list(cfg.callbacks)
    else:
        forced_hw = [cb for cb in cfg.callbacks if cb.mixed == "hw"]
        free = [cb for cb in cfg.callbacks if cb.mixed is None]
        room = max(0, n - len(forced_hw))
        best = sorted(free, key=lambda cb: cb.speedup, reverse=True)[:room]
        chosen = {cb.name for cb in forced_hw + best}
        hw = [cb for cb in cfg.callbacks if cb.name in chosen]
    if hw and n == 0:
        raise ConfigError(f"mapping {mapping} needs hardware slots but none are declared")
    result: dict[str, int | None] = {cb.name: None for cb in cfg.callbacks}
    if len(hw) <= n:
        for i, cb in enumerate(hw):
            result[cb.name] = 1 << i
    else:
        for cb in hw:
            if cb.mask_bits is None:
                raise ConfigError(f"{len(hw)} hardware callbacks share {n} slots; a mask is required",
                                  section=f"callback.{cb.name}")
            result[cb.name] = cb.mask_bits
    return result


# -- running ------------------------------------------------------------------------


@dataclass(frozen=True)
class RoundtripRecord:
    client: str
    seq: int
    roundtrip: Duration


@dataclass
class ScenarioResult:
    roundtrips: list[RoundtripRecord]
    executions: list[ExecutionRecord]
    mapping: str
    backend: str
    counters: dict[str, dict[str, int]]
    duplicates: int
    reconfigurations: int
    end_time: Instant

    def __iter__(self):
        return iter((self.roundtrips, self.executions))

    def by_client(self) -> dict[str, list[Duration]]:
        out: dict[str, list[Duration]] = {}
        for r in self.roundtrips:
            out.setdefault(r.client, []).append(r.roundtrip)
        return out

    def mean(self, client: str) -> float:
        values = self.by_client().get(client, [])
        return math.fsum(values) / len(values) if values else math.nan


class _Payloads:
    """Request payloads: real random data when validating kernels, sized zero buffers otherwise."""

    def __init__(self, cfg: ScenarioConfig) -> None:
        self.validate = cfg.validate_kernels
        self.rng = np.random.default_rng(cfg.seed)
        self._zeros: dict[int, bytes] = {}

    def zeros(self, n: int) -> bytes:
        if n not in self._zeros:
            self._zeros[n] = bytes(n)
        return self._zeros[n]

    def request(self, work: WorkModel):
        if not self.validate:
            return self.zeros(work.payload_bytes_in)
        if work.name == "sorting":
            return self.rng.integers(0, 2**32, size=work.payload_bytes_in // 4, dtype=np.uint32)
        if work.name == "sobel":
            return self.rng.integers(0, 256, size=(480, 640, 3), dtype=np.uint8)
        if work.name == "inverse":
            return kernels.pack_angles(*self.rng.uniform(-90, 90, size=2))
        return self.rng.integers(0, 256, size=work.payload_bytes_in, dtype=np.uint8).tobytes()


def _make_body(spec: CallbackSpec, payloads: _Payloads, seed: int):
    work = spec.work
    if spec.kind is CallbackKind.TIMER:
        image = kernels.synthetic_image(seed, *HASH_IMAGE_SIZE) if payloads.validate else None
        digest = kernels.hash_image(image) if image is not None else kernels.hash_image(bytes(32))

        def timer_body(inv):
            inv.publish(spec.topic_out, kernels.hash_image(image) if image is not None else digest)

        return timer_body

    def compute(payload):
        if not payloads.validate:
            return payloads.zeros(work.payload_bytes_out)
        if work.name == "sorting":
            return kernels.odd_even_sort(payload)
        if work.name == "sobel":
            return kernels.sobel(payload)
        if work.name == "inverse":
            return kernels.inverse_kinematics(payload)
        return payloads.zeros(work.payload_bytes_out)

    if spec.kind is CallbackKind.SERVICE_SERVER:
        def server_body(inv):
            inv.respond(compute(inv.payload))

        return server_body

    def subscriber_body(inv):
        inv.publish(spec.topic_out, compute(inv.payload))

    return subscriber_body


def run_scenario(cfg: ScenarioConfig, *, mapping: str | None = None, backend: str = "sim",
                 time_scale: float = 0.01, duration: Duration | None = None) -> ScenarioResult:
    """Build the client/server topology, spin the executor for ``duration``, collect records.

    ``time_scale`` only matters for the threaded backend (real seconds per model second).
    """
    mapping = mapping or cfg.mapping
    duration = cfg.duration if duration is None else duration
    placement = resolve_mapping(cfg, mapping)
    driver = make_driver(backend, time_scale if backend != "sim" else 1.0)
    bus = MessageBus(driver.clock)
    payloads = _Payloads(cfg)

    if mapping == "all-sw" and cfg.all_sw_executor == "standard":
        ex = StandardExecutor(ExecutorConfig(max(1, cfg.executor.num_sw_workers), 0, cfg.executor.wait_time),
                              bus, driver)
    else:
        ex = ReconExecutor(cfg.executor, bus, driver, slots=cfg.slots, model=cfg.model)

    for spec in cfg.callbacks:
        source = spec.period if spec.kind is CallbackKind.TIMER else (
            spec.service if spec.kind is CallbackKind.SERVICE_SERVER else spec.topic_in)
        body = _make_body(spec, payloads, cfg.seed)
        bits = placement[spec.name]
        if isinstance(ex, StandardExecutor):
            ex.add_callback(spec.name, spec.kind, source, body, spec.work.sw_exec)
        elif bits is None:
            if cfg.executor.num_sw_workers == 0:
                raise ConfigError(f"{spec.name} maps to software but the executor has no software workers")
            ex.add_sw_callback(spec.name, spec.kind, source, body, exec_time=spec.work.sw_exec)
        else:
            ex.add_hw_callback(spec.name, bits, spec.kind, source, body=body, exec_time=spec.work.hw_exec)

    records: list[RoundtripRecord] = []
    counters: dict[str, dict[str, int]] = {}
    for i, client in enumerate(cfg.clients):
        target = cfg.callback(client.target)
        stats = counters[client.name] = {"sent": 0, "received": 0}
        if client.mode == "timer-listener":
            actor = _listener(driver, bus.subscribe(target.topic_out), client, records, stats)
        elif target.kind is CallbackKind.SERVICE_SERVER:
            actor = _service_pinger(driver, bus.create_client(target.service), client, target, payloads, records, stats)
        else:
            actor = _topic_pinger(driver, bus, bus.subscribe(target.topic_out), client, target, payloads, records, stats)
        driver.spawn(actor, actor=i, priority=CLIENT_PRIORITY, name=f"client-{client.name}")

    executions = ex.spin(StopCondition(max_time=duration))
    end = driver.clock.now()

    duplicates = 0
    for sub in bus._subscriptions:
        duplicates += len(sub.taken_seqs) - len(set(sub.taken_seqs))
        counters.setdefault(f"topic:{sub.topic}#{sub.order}", {}).update(
            published=bus.published_count(sub.topic), received=sub.received, taken=sub.taken,
            pending=sub.pending_count(), evicted=sub.evicted,
        )
    for server in bus._servers.values():
        counters[f"service:{server.name}"] = {
            "received": server.requests_received, "taken": server.requests_taken, "pending": server.pending_count(),
        }
    n_reconfig = len(ex.fabric.reconfigurations) if isinstance(ex, ReconExecutor) else 0
    return ScenarioResult(records, executions, mapping, driver.backend, counters, duplicates, n_reconfig, end)


def _topic_pinger(driver, bus: MessageBus, responses, client: ClientSpec, target: CallbackSpec,
                  payloads: _Payloads, records: list, stats: dict):
    clock = driver.clock
    seq = 0
    while True:
        t0 = clock.now()
        yield Sleep(client.comm_delay)
        bus.publish(target.topic_in, payloads.request(target.work))
        stats["sent"] += 1
        yield WaitFor(responses)
        responses.take()
        yield Sleep(client.comm_delay)
        stats["received"] += 1
        seq += 1
        records.append(RoundtripRecord(client.name, seq, clock.now() - t0))


def _service_pinger(driver, svc_client, client: ClientSpec, target: CallbackSpec, payloads: _Payloads,
                    records: list, stats: dict):
    clock = driver.clock
    seq = 0
    while True:
        t0 = clock.now()
        yield Sleep(client.comm_delay)
        svc_client.call(payloads.request(target.work))
        stats["sent"] += 1
        yield WaitFor(svc_client)
        svc_client.take()
        yield Sleep(client.comm_delay)
        stats["received"] += 1
        seq += 1
        records.append(RoundtripRecord(client.name, seq, clock.now() - t0))


def _listener(driver, sub, client: ClientSpec, records: list, stats: dict):
    clock = driver.clock
    last: Instant | None = None
    seq = 0
    while True:
        yield WaitFor(sub)
        sub.take()
        yield Sleep(client.comm_delay)
        stats["received"] += 1
        now = clock.now()
        if last is not None:
            seq += 1
            records.append(RoundtripRecord(client.name, seq, now - last))
        last = now


# -- statistics and CSV ---------------------------------------------------------------


@dataclass
class ClientStats:
    count: int
    mean: float
    min: int
    max: int
    bin_width: int
    histogram: dict[int, float]


def summarize(records: Iterable[RoundtripRecord], bin_width: Duration,
              clients: Iterable[str] = ()) -> dict[str, ClientStats]:
    """Per-client moments and a fixed-width relative-frequency histogram keyed by bin start (ns).

    Names in ``clients`` that have no records get a zero-count entry.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    grouped: dict[str, list[int]] = {name: [] for name in clients}
    for r in records:
        grouped.setdefault(r.client, []).append(r.roundtrip)
    out = {}
    for client, values in grouped.items():
        if not values:
            out[client] = empty_stats(bin_width)
            continue
        counts: dict[int, int] = {}
        for v in values:
            b = (v // bin_width) * bin_width
            counts[b] = counts.get(b, 0) + 1
        n = len(values)
        out[client] = ClientStats(
            count=n,
            mean=math.fsum(values) / n,
            min=min(values),
            max=max(values),
            bin_width=bin_width,
            histogram={b: c / n for b, c in sorted(counts.items())},
        )
    return out


def empty_stats(bin_width: Duration) -> ClientStats:
    return ClientStats(0, math.nan, 0, 0, bin_width, {})


def results_csv(records: Sequence[RoundtripRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULTS_HEADER)
    for r in records:
        w.writerow((r.client, r.seq, r.roundtrip))
    return buf.getvalue()


def events_csv(records: Sequence[ExecutionRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EVENTS_HEADER)
    for r in records:
        w.writerow((r.name or r.callback, r.worker, r.claim_time, r.start_time, r.end_time, r.reconfig_spent))
    return buf.getvalue()
