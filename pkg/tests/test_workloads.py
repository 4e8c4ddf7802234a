from __future__ import annotations

import pytest

from reconexec.clock import MS
from reconexec.registry import CallbackKind
from reconexec.workloads import WorkModel, builtin_workloads, speedup_table, workload


@pytest.mark.parametrize("name, expected", [
    ("sobel", 2.5), ("sorting", 48.2), ("mnist", 1.4), ("inverse", 4.3), ("hash", 1.2),
])
def test_speedups(name, expected):
    assert round(workload(name).speedup, 1) == expected


def test_table_order_and_units():
    rows = speedup_table()
    assert [r[0] for r in rows] == [w.title for w in builtin_workloads()]
    assert rows[1][1:3] == (0.85, 41.0)


def test_hash_is_periodic_timer():
    h = workload("hash")
    assert h.kind is CallbackKind.TIMER and h.period == 250 * MS


def test_unknown_workload():
    with pytest.raises(KeyError):
        workload("fft")


def test_invalid_models():
    with pytest.raises(ValueError):
        WorkModel("x", "X", 0, 1, 0, 0, CallbackKind.SUBSCRIBER)
    with pytest.raises(ValueError):
        WorkModel("x", "X", 1, 1, 0, 0, CallbackKind.TIMER)
