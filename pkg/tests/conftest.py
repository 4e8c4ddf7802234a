from __future__ import annotations

import dataclasses

import pytest

from reconexec.scenario import load_config


@pytest.fixture(scope="session")
def bundled():
    return load_config("paper_v5c.scenario")


def only(cfg, *names):
    """Scenario reduced to the named callbacks and the clients targeting them."""
    return dataclasses.replace(
        cfg,
        callbacks=[c for c in cfg.callbacks if c.name in names],
        clients=[c for c in cfg.clients if c.target in names],
    )


ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def record():
    """Record one acceptance line: record("4", ok, "detail")."""
    def _record(criterion: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE.append((criterion, ok, detail))
        print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
