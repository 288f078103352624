"""Slot-grid arithmetic for synchronous (slot-boundary) transmitters."""
from __future__ import annotations

import enum
import random
from collections.abc import Sequence
from dataclasses import dataclass

from .model import NodeConfig


class SyncMode(str, enum.Enum):
    SYNCHRONIZED = "synchronized"
    DESYNCHRONIZED = "desynchronized"


@dataclass(frozen=True)
class SlotGrid:
    delta: int
    phase: int = 0

    def __post_init__(self):
        if self.delta <= 0 or not 0 <= self.phase < self.delta:
            raise ValueError(f"invalid slot grid delta={self.delta} phase={self.phase}")


def sync_time(grid: SlotGrid, zeta: int) -> int:
    """Time from ``zeta`` to the next grid point at or after it (ns).

    The grid is {phase + m*delta}; with phase 0 this is
    ceil(zeta / delta) * delta - zeta.
    """
    return (grid.phase - zeta) % grid.delta


def draw_offsets(
    nodes: Sequence[NodeConfig],
    mode: SyncMode | str | Sequence[SyncMode | str],
    rng: random.Random,
) -> list[int]:
    """Grid phase for every node, in node order.

    Desynchronized synchronous nodes get an independent integer phase uniform
    on [0, delta); everything else gets 0. Draws happen in node order so the
    generator is consumed identically on every run.
    """
    if isinstance(mode, (str, SyncMode)):
        modes = [SyncMode(mode)] * len(nodes)
    else:
        modes = [SyncMode(m) for m in mode]
        if len(modes) != len(nodes):
            raise ValueError("one sync mode per node required")
    phases = []
    for node, m in zip(nodes, modes):
        if node.kind.synchronous and m is SyncMode.DESYNCHRONIZED:
            phases.append(rng.randrange(node.delta))
        else:
            phases.append(0)
    return phases
