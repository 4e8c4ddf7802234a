"""Timing signatures of the five benchmark callbacks."""

from __future__ import annotations

from dataclasses import dataclass

from .clock import Duration, MS, ms
from .registry import CallbackKind


@dataclass(frozen=True)
class WorkModel:
    name: str
    title: str
    sw_exec: Duration
    hw_exec: Duration
    payload_bytes_in: int
    payload_bytes_out: int
    kind: CallbackKind
    period: Duration | None = None

    def __post_init__(self) -> None:
        if self.sw_exec <= 0 or self.hw_exec <= 0:
            raise ValueError(f"{self.name}: execution times must be positive")
        if self.kind is CallbackKind.TIMER and not self.period:
            raise ValueError(f"{self.name}: timer workloads need a period")

    @property
    def speedup(self) -> float:
        return self.sw_exec / self.hw_exec


IMAGE_BYTES = 640 * 480 * 3
HASH_IMAGE_SIZE = (1920, 1080)

_BUILTINS = (
    WorkModel("sobel", "Sobel filter", ms(42.00), ms(16.50), IMAGE_BYTES, IMAGE_BYTES, CallbackKind.SUBSCRIBER),
    WorkModel("sorting", "Number sorting", ms(41.00), ms(0.85), 2048 * 4, 2048 * 4, CallbackKind.SERVICE_SERVER),
    WorkModel("mnist", "MNIST classifier", ms(16.50), ms(11.90), 28 * 28, 4, CallbackKind.SUBSCRIBER),
    WorkModel("inverse", "Inverse kinematics", ms(1.50), ms(0.35), 4, 4, CallbackKind.SUBSCRIBER),
    WorkModel("hash", "Hash calculation", ms(94.00), ms(81.00), 0, 32, CallbackKind.TIMER, period=250 * MS),
)


def builtin_workloads() -> list[WorkModel]:
    return list(_BUILTINS)


def workload(name: str) -> WorkModel:
    for w in _BUILTINS:
        if w.name == name:
            return w
    raise KeyError(f"no built-in workload {name!r}; choose from {[w.name for w in _BUILTINS]}")


def speedup_table() -> list[tuple[str, float, float, float]]:
    """(title, hw_ms, sw_ms, speedup) rows."""
    return [(w.title, w.hw_exec / MS, w.sw_exec / MS, w.speedup) for w in _BUILTINS]
