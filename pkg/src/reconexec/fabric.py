"""Simulated reconfigurable slots, the configuration port and its latency model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .clock import Clock, Duration, Instant, MS, SECOND
from .registry import Bitstream
from .runtime import Acquire, FifoResource, Release, Sleep

MB = 1_000_000


class DegenerateFit(ValueError):
    pass


@dataclass(frozen=True)
class ReconfigModel:
    """Reconfiguration latency ``t = size / bandwidth + t_offset``."""

    t_offset: Duration
    bandwidth_bytes_per_sec: float

    def __post_init__(self) -> None:
        if self.t_offset <= 0 or self.bandwidth_bytes_per_sec <= 0:
            raise ValueError("t_offset and bandwidth must both be positive")

    @classmethod
    def from_ms_mbps(cls, t_offset_ms: float, bandwidth_mbps: float) -> ReconfigModel:
        return cls(int(round(t_offset_ms * MS)), bandwidth_mbps * MB)

    @property
    def t_offset_ms(self) -> float:
        return self.t_offset / MS

    @property
    def bandwidth_mbps(self) -> float:
        return self.bandwidth_bytes_per_sec / MB

    def reconfig_time(self, size_bytes: int) -> Duration:
        if size_bytes < 0:
            raise ValueError("bitstream size must be non-negative")
        return self.t_offset + int(round(size_bytes * SECOND / self.bandwidth_bytes_per_sec))


# Figures reported alongside the measurements, and the least-squares fit of the four rows.
REPORTED_MODEL = ReconfigModel.from_ms_mbps(6.8, 160.0)
FITTED_MODEL = ReconfigModel.from_ms_mbps(6.89, 165.5)

MEASURED_SAMPLES: list[tuple[int, float]] = [
    (2_838_976, 24.0),
    (2_838_976, 24.0),
    (5_285_728, 38.4),
    (4_883_328, 36.9),
]


def reconfig_time(model: ReconfigModel, size_bytes: int) -> Duration:
    return model.reconfig_time(size_bytes)


def fit_model(samples: Iterable[tuple[int, float]]) -> ReconfigModel:
    """Ordinary least squares of ``time_ms = size / B + t_offset`` over (size_bytes, time_ms) pairs."""
    pts = [(float(s), float(t)) for s, t in samples]
    if len({s for s, _ in pts}) < 2:
        raise DegenerateFit("need at least two distinct bitstream sizes")
    n = len(pts)
    mean_s = math.fsum(s for s, _ in pts) / n
    mean_t = math.fsum(t for _, t in pts) / n
    sxx = math.fsum((s - mean_s) ** 2 for s, _ in pts)
    sxy = math.fsum((s - mean_s) * (t - mean_t) for s, t in pts)
    slope = sxy / sxx  # ms per byte
    offset_ms = mean_t - slope * mean_s
    if slope <= 0 or offset_ms <= 0:
        raise DegenerateFit(f"fit gives non-physical model (slope={slope}, offset={offset_ms} ms)")
    return ReconfigModel(int(round(offset_ms * MS)), 1e3 / slope)


@dataclass(frozen=True)
class SlotDescriptor:
    id: int
    bitstream_size_bytes: int
    slice_luts: int = 0
    dsps: int = 0
    bram36: int = 0
    bram18: int = 0

    def __post_init__(self) -> None:
        if self.bitstream_size_bytes <= 0:
            raise ValueError(f"slot {self.id}: bitstream size must be positive")


# The four slots of the reconfiguration-overhead experiment.
FOUR_SLOT_LAYOUT = (
    SlotDescriptor(0, 2_838_976, 20800, 160, 60, 120),
    SlotDescriptor(1, 2_838_976, 20800, 160, 60, 120),
    SlotDescriptor(2, 5_285_728, 41600, 320, 240, 120),
    SlotDescriptor(3, 4_883_328, 40800, 280, 200, 100),
)


@dataclass
class SlotState:
    loaded: str | None = None
    configuring: bool = False
    executing: bool = False


@dataclass(frozen=True)
class Reconfiguration:
    slot: int
    bitstream: str
    requested: Instant
    start: Instant
    end: Instant


@dataclass
class Fabric:
    """A set of slots behind one configuration port.

    ``ensure_loaded`` is an actor generator (see ``runtime``) so the same code
    waits on the port in virtual time or in real threads.
    """

    slots: Sequence[SlotDescriptor]
    model: ReconfigModel
    clock: Clock
    port: FifoResource = field(default_factory=lambda: FifoResource("config-port"))

    def __post_init__(self) -> None:
        ids = [s.id for s in self.slots]
        if ids != list(range(len(ids))):
            raise ValueError(f"slot ids must be 0..n-1 in order, got {ids}")
        self.states = [SlotState() for _ in self.slots]
        self.reconfigurations: list[Reconfiguration] = []
        self.cache_hits = 0

    @property
    def num_slots(self) -> int:
        return len(self.slots)

    def make_bitstream(self, callback: int, slot: int, label: str = "") -> Bitstream:
        desc = self.slots[slot]
        name = label or f"cb{callback}"
        return Bitstream(f"{name}@rs{slot}", callback, slot, desc.bitstream_size_bytes)

    def reconfig_time(self, size_bytes: int) -> Duration:
        return self.model.reconfig_time(size_bytes)

    def ensure_loaded(self, slot: int, bitstream: Bitstream):
        if bitstream.target_slot != slot:
            raise ValueError(f"bitstream {bitstream.id} targets slot {bitstream.target_slot}, not {slot}")
        state = self.states[slot]
        if state.loaded == bitstream.id:
            self.cache_hits += 1
            return 0
        requested = self.clock.now()
        yield Acquire(self.port)
        start = self.clock.now()
        state.configuring = True
        yield Sleep(self.reconfig_time(bitstream.size_bytes))
        state.loaded = bitstream.id
        state.configuring = False
        end = self.clock.now()
        self.reconfigurations.append(Reconfiguration(slot, bitstream.id, requested, start, end))
        yield Release(self.port)
        return end - requested
