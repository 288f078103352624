"""Seeded runs of a scenario, alone or across sweep points."""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Any

from .engine import RoundOutcome, simulate
from .metrics import MetricsReport, StatsAccumulator, build_report, default_partition
from .model import NodeConfig, SimParams
from .scenario import ScenarioSpec
from .sync import draw_offsets


@dataclass(frozen=True)
class RoundRecord:
    round: int
    start_ns: int
    delta_ns: int
    winners: tuple[int, ...]
    kind: str

    @classmethod
    def of(cls, o: RoundOutcome) -> RoundRecord:
        return cls(o.round, o.start, o.delta_ns, o.winners, o.kind)


@dataclass(frozen=True)
class SeedResult:
    seed: int
    nodes: tuple[NodeConfig, ...]
    stats: StatsAccumulator
    report: MetricsReport
    rounds_log: tuple[RoundRecord, ...] | None = None


def phased_nodes(spec: ScenarioSpec, rng: random.Random) -> tuple[SimParams, list[NodeConfig]]:
    """Expand the scenario and fix every node's grid phase from ``rng``."""
    params, nodes, modes = spec.expand()
    phases = draw_offsets(nodes, modes, rng)
    return params, [replace(n, phase=ph) for n, ph in zip(nodes, phases)]


def run(spec: ScenarioSpec, rounds: int, seed: int, log_rounds: bool = False) -> SeedResult:
    """One run: phases, then initial backoffs, then ``rounds`` cycles, all from one generator."""
    rng = random.Random(seed)
    params, nodes = phased_nodes(spec, rng)
    log: list[RoundRecord] | None = [] if log_rounds else None
    stats = simulate(nodes, params, rounds, rng,
                     on_round=(lambda o: log.append(RoundRecord.of(o))) if log_rounds else None)
    rates = None
    if spec.rates_mbps:
        rates = {k: float(v) for k, v in spec.rates_mbps.items()}
    report = build_report(stats, default_partition(nodes), rates)
    return SeedResult(seed, tuple(nodes), stats, report, tuple(log) if log is not None else None)


def _task(args: tuple[ScenarioSpec, int, int, bool]) -> SeedResult:
    return run(*args)


def run_many(
    points: list[tuple[Any, ScenarioSpec]],
    rounds: int | None = None,
    seeds: list[int] | None = None,
    log_rounds: bool = False,
    jobs: int = 1,
) -> list[tuple[Any, list[SeedResult]]]:
    """Run every (point, seed) pair; output order is point order then seed order.

    Runs share nothing, so ``jobs > 1`` gives identical results.
    """
    tasks = []
    for _, spec in points:
        for seed in seeds or spec.seeds:
            tasks.append((spec, rounds or spec.rounds, seed, log_rounds))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = [_task(t) for t in tasks]
    out, i = [], 0
    for value, spec in points:
        n = len(seeds or spec.seeds)
        out.append((value, results[i:i + n]))
        i += n
    return out
