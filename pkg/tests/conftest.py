"""Shared node builders and draw scripts."""
from __future__ import annotations

from collections.abc import Iterable

import pytest

from coexsim.model import (
    US,
    NodeConfig,
    PriorityClassParams,
    SimParams,
    TechnologyKind,
    lookup_priority_class,
)

PARAMS = SimParams()
SIGMA = PARAMS.slot_sigma

WIFI_BE = lookup_priority_class("IEEE80211", "AC_BE", ppdu_max_override=True)
LTE_BE = lookup_priority_class("3GPP", 3)


def fixed_class(cw: int, p: int = 3, o_max: int = 10_000 * US) -> PriorityClassParams:
    return PriorityClassParams(p=p, cw_min=cw, cw_max=cw, o_max=o_max, name=f"fixed{cw}")


def ra(id: int, cls: PriorityClassParams = WIFI_BE, data: int = 5400 * US,
       ack: int = 50 * US) -> NodeConfig:
    return NodeConfig(id, TechnologyKind.RANDOM_ACCESS, cls, data, ack_duration=ack)


def gap(id: int, delta: int = 9 * US, phase: int = 0, cls: PriorityClassParams = LTE_BE,
        data: int = 6000 * US) -> NodeConfig:
    return NodeConfig(id, TechnologyKind.SYNC_GAP, cls, data, delta=delta, phase=phase)


def rs(id: int, delta: int = 1000 * US, phase: int = 0, cls: PriorityClassParams = LTE_BE,
       data: int = 6000 * US) -> NodeConfig:
    return NodeConfig(id, TechnologyKind.SYNC_RS, cls, data, delta=delta, phase=phase)


class Scripted:
    """Draw source returning queued values; ``fallback`` once they run out."""

    def __init__(self, values: Iterable[int] = (), fallback: int | None = None):
        self.values = list(values)
        self.fallback = fallback
        self.calls: list[tuple[int, int]] = []

    def __call__(self, k: int, cw: int) -> int:
        self.calls.append((k, cw))
        if self.values:
            return self.values.pop(0)
        if self.fallback is None:
            raise AssertionError(f"unexpected draw for node {k} (cw={cw})")
        return min(self.fallback, cw)


@pytest.fixture
def params() -> SimParams:
    return PARAMS


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
