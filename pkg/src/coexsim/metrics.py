"""Occupancy, success and collision figures computed from run totals."""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from .model import NodeConfig


class UndefinedMetricError(ArithmeticError):
    pass


@dataclass
class StatsAccumulator:
    """Integer running sums over all resolved rounds.

    Per-node lists are indexed by node id. ``effective_ns`` counts payload
    only: no SIFS/ACK overhead and no reservation signal.
    """

    n_nodes: int
    attempts: list[int] = field(default_factory=list)
    successes: list[int] = field(default_factory=list)
    collisions: list[int] = field(default_factory=list)
    occupancy_ns: list[int] = field(default_factory=list)
    success_occupancy_ns: list[int] = field(default_factory=list)
    effective_ns: list[int] = field(default_factory=list)
    total_elapsed_ns: int = 0
    rounds: int = 0

    def __post_init__(self):
        for name in ("attempts", "successes", "collisions", "occupancy_ns",
                     "success_occupancy_ns", "effective_ns"):
            if not getattr(self, name):
                setattr(self, name, [0] * self.n_nodes)

    def copy(self) -> StatsAccumulator:
        return StatsAccumulator(
            self.n_nodes,
            self.attempts[:],
            self.successes[:],
            self.collisions[:],
            self.occupancy_ns[:],
            self.success_occupancy_ns[:],
            self.effective_ns[:],
            self.total_elapsed_ns,
            self.rounds,
        )

    def rs_ns(self, k: int) -> int:
        """Airtime node k spent on reservation signal in successful rounds."""
        return self.success_occupancy_ns[k] - self.effective_ns[k]

    def as_dict(self) -> dict:
        return {
            "attempts": self.attempts,
            "successes": self.successes,
            "collisions": self.collisions,
            "occupancy_ns": self.occupancy_ns,
            "success_occupancy_ns": self.success_occupancy_ns,
            "effective_ns": self.effective_ns,
            "total_elapsed_ns": self.total_elapsed_ns,
            "rounds": self.rounds,
        }


def _elapsed(acc: StatsAccumulator) -> int:
    if acc.total_elapsed_ns <= 0:
        raise UndefinedMetricError("no elapsed time; normalized metrics are undefined")
    return acc.total_elapsed_ns


def node_occupancy(acc: StatsAccumulator, k: int) -> float:
    return acc.occupancy_ns[k] / _elapsed(acc)


def success_metrics(acc: StatsAccumulator, k: int) -> tuple[float, float]:
    """(S_COT, S_EFF) for node k."""
    t = _elapsed(acc)
    return acc.success_occupancy_ns[k] / t, acc.effective_ns[k] / t


def collision_probability(acc: StatsAccumulator, k: int) -> float | None:
    """Collisions per attempt; None when the node never attempted."""
    if acc.attempts[k] == 0:
        return None
    return acc.collisions[k] / acc.attempts[k]


def default_partition(nodes: Sequence[NodeConfig]) -> dict[int, str]:
    return {n.id: n.kind.technology for n in nodes}


@dataclass(frozen=True)
class NodeMetrics:
    id: int
    technology: str
    attempts: int
    successes: int
    collisions: int
    occupancy: float
    s_cot: float
    s_eff: float
    collision_probability: float | None


@dataclass(frozen=True)
class GroupMetrics:
    """Sums over one technology group (W, L) or all nodes."""

    occupancy: float
    s_cot: float
    s_eff: float
    attempts: int
    successes: int
    collisions: int
    collision_probability: float | None
    throughput: float | None = None


@dataclass(frozen=True)
class MetricsReport:
    nodes: tuple[NodeMetrics, ...]
    groups: Mapping[str, GroupMetrics]  # "W", "L", "all"
    total_elapsed_ns: int
    rounds: int

    @property
    def o_total(self) -> float:
        return self.groups["all"].occupancy


def technology_totals(
    acc: StatsAccumulator, partition: Mapping[int, str]
) -> tuple[float, float, float]:
    """(O^T, O_W^T, O_L^T)."""
    o_w = sum(node_occupancy(acc, k) for k, tech in partition.items() if tech == "W")
    o_l = sum(node_occupancy(acc, k) for k, tech in partition.items() if tech == "L")
    return o_w + o_l, o_w, o_l


def throughput(report: MetricsReport, r_w: float, r_l: float) -> tuple[float, float]:
    """(B_W, B_L) as rate times effective occupancy of each technology."""
    if r_w < 0 or r_l < 0:
        raise ValueError("rates must be non-negative")
    return r_w * report.groups["W"].s_eff, r_l * report.groups["L"].s_eff


def _group(acc: StatsAccumulator, ids: list[int], rate: float | None) -> GroupMetrics:
    t = _elapsed(acc)
    attempts = sum(acc.attempts[k] for k in ids)
    collisions = sum(acc.collisions[k] for k in ids)
    s_eff = sum(acc.effective_ns[k] for k in ids) / t
    return GroupMetrics(
        occupancy=sum(acc.occupancy_ns[k] for k in ids) / t,
        s_cot=sum(acc.success_occupancy_ns[k] for k in ids) / t,
        s_eff=s_eff,
        attempts=attempts,
        successes=sum(acc.successes[k] for k in ids),
        collisions=collisions,
        collision_probability=collisions / attempts if attempts else None,
        throughput=None if rate is None else rate * s_eff,
    )


def build_report(
    acc: StatsAccumulator,
    partition: Mapping[int, str],
    rates: Mapping[str, float] | None = None,
) -> MetricsReport:
    """All per-node and per-technology figures for one run.

    ``rates`` maps "W"/"L" to a transmission rate; when given, the matching
    group carries its effective throughput.
    """
    rates = rates or {}
    nodes = []
    for k in range(acc.n_nodes):
        s_cot, s_eff = success_metrics(acc, k)
        nodes.append(NodeMetrics(
            id=k,
            technology=partition[k],
            attempts=acc.attempts[k],
            successes=acc.successes[k],
            collisions=acc.collisions[k],
            occupancy=node_occupancy(acc, k),
            s_cot=s_cot,
            s_eff=s_eff,
            collision_probability=collision_probability(acc, k),
        ))
    groups = {
        tech: _group(acc, [k for k in range(acc.n_nodes) if partition[k] == tech], rates.get(tech))
        for tech in ("W", "L")
    }
    groups["all"] = _group(acc, list(range(acc.n_nodes)), None)
    return MetricsReport(tuple(nodes), groups, acc.total_elapsed_ns, acc.rounds)
