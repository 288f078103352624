"""Exact reference values for small instances.

``exhaustive_metrics`` enumerates every backoff draw sequence and replays the
engine on each branch with scripted draws. ``two_node_stationary`` solves
the residual-backoff Markov chain of two identical random-access nodes with a
fixed contention window; ``two_node_power_iteration`` reaches the same value
by iterating the full joint (b1, b2) chain instead.
"""
from __future__ import annotations

import itertools
import math
import random
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .engine import World, resolve_round, rng_draw
from .metrics import StatsAccumulator
from .model import NodeConfig, SimParams, check_nodes

MAX_NODES = 3
MAX_CW = 7
MAX_DOUBLING_HORIZON = 3
DEFAULT_MAX_BRANCHES = 2_000_000


class OracleRefused(ValueError):
    def __init__(self, message: str, estimate: int | None = None):
        super().__init__(message)
        self.estimate = estimate


@dataclass(frozen=True)
class ExactNode:
    attempts: float
    successes: float
    collisions: float
    occupancy: float
    s_cot: float
    s_eff: float

    @property
    def collision_probability(self) -> float | None:
        """Expected collisions over expected attempts."""
        return self.collisions / self.attempts if self.attempts else None


@dataclass(frozen=True)
class ExactReport:
    horizon: int
    nodes: tuple[ExactNode, ...]
    collision_round_fraction: float
    elapsed_ns: float
    total_probability: float
    branches: int


def sample_values(stats: StatsAccumulator, collision_rounds: int) -> dict[str, list[float]]:
    """Per-run quantities that ``exhaustive_metrics`` takes expectations of."""
    t = stats.total_elapsed_ns
    return {
        "attempts": list(map(float, stats.attempts)),
        "successes": list(map(float, stats.successes)),
        "collisions": list(map(float, stats.collisions)),
        "occupancy": [o / t for o in stats.occupancy_ns],
        "s_cot": [o / t for o in stats.success_occupancy_ns],
        "s_eff": [o / t for o in stats.effective_ns],
        "collision_round_fraction": [collision_rounds / stats.rounds],
        "elapsed_ns": [float(t)],
    }


def _check_size(configs: Sequence[NodeConfig], horizon: int) -> int:
    if horizon < 1:
        raise OracleRefused(f"horizon must be >= 1, got {horizon}")
    if len(configs) > MAX_NODES:
        raise OracleRefused(f"{len(configs)} nodes; enumeration supports at most {MAX_NODES}")
    if any(c.cls.cw_max > MAX_CW for c in configs):
        raise OracleRefused(f"contention windows above {MAX_CW} are not enumerable")
    doubling = any(c.cls.cw_min != c.cls.cw_max for c in configs)
    if doubling and horizon > MAX_DOUBLING_HORIZON:
        raise OracleRefused(
            f"with CW doubling the horizon is limited to {MAX_DOUBLING_HORIZON}, got {horizon}"
        )
    # worst case: every node redraws every round
    return math.prod(c.cls.cw_max + 1 for c in configs) ** (horizon + 1)


class _Script:
    """Draw source that replays fixed values and records requests."""

    def __init__(self, values: Sequence[int] = ()):
        self.values = list(values)
        self.requests: list[int] = []

    def __call__(self, k: int, cw: int) -> int:
        self.requests.append(cw)
        return self.values[len(self.requests) - 1] if self.values else 0


def _branches(cws: Sequence[int]):
    """All joint draws for the requested windows with their probability."""
    p = 1.0 / math.prod(w + 1 for w in cws)
    for values in itertools.product(*(range(w + 1) for w in cws)):
        yield values, p


def exhaustive_metrics(
    configs: Sequence[NodeConfig],
    params: SimParams,
    horizon: int,
    max_branches: int = DEFAULT_MAX_BRANCHES,
) -> ExactReport:
    """Exact expected metrics over ``horizon`` rounds.

    Node phases must already be fixed. Refuses (OracleRefused, with a size
    estimate) when the instance is outside the enumerable range or the
    branch count passes ``max_branches``.
    """
    configs = list(configs)
    check_nodes(configs, params)
    bound = _check_size(configs, horizon)

    # initial draws, one per node in id order
    probe = _Script()
    World.start(configs, params, probe)
    layer = []
    for values, p in _branches(probe.requests):
        world = World.start(configs, params, _Script(values))
        layer.append((world, 0, p))

    for step in range(horizon):
        nxt = []
        for world, collisions, p in layer:
            probe = _Script()
            outcome = resolve_round(world.copy(draw=probe))
            hit = collisions + (0 if outcome.success else 1)
            for values, q in _branches(probe.requests):
                w = world.copy(draw=_Script(values))
                resolve_round(w)
                nxt.append((w, hit, p * q))
            if len(nxt) > max_branches:
                covered = sum(b[2] for b in nxt)
                raise OracleRefused(
                    f"more than {max_branches} branches (worst-case bound {bound})",
                    estimate=int(len(nxt) / max(covered, 1e-300)),
                )
        remaining = horizon - step - 1
        if remaining:
            # refuse early when the observed growth rate overshoots the budget
            projected = len(nxt) * (len(nxt) / len(layer)) ** remaining
            if projected > max_branches:
                raise OracleRefused(
                    f"about {int(projected)} branches projected, limit {max_branches} "
                    f"(worst-case bound {bound})",
                    estimate=int(projected),
                )
        layer = nxt
    leaves = len(layer)

    n = len(configs)
    sums = {k: [0.0] * n for k in ("attempts", "successes", "collisions", "occupancy", "s_cot", "s_eff")}
    frac = elapsed = total = 0.0
    for world, collisions, p in layer:
        vals = sample_values(world.stats, collisions)
        for key, acc in sums.items():
            for k in range(n):
                acc[k] += p * vals[key][k]
        frac += p * vals["collision_round_fraction"][0]
        elapsed += p * vals["elapsed_ns"][0]
        total += p
    nodes = tuple(ExactNode(*(sums[key][k] for key in sums)) for k in range(n))
    return ExactReport(horizon, nodes, frac, elapsed, total, leaves)


def replicate(
    configs: Sequence[NodeConfig],
    params: SimParams,
    horizon: int,
    reps: int,
    seed: int,
) -> dict[str, list[list[float]]]:
    """Monte Carlo samples of the ``exhaustive_metrics`` quantities.

    Returns ``samples[key][i]``: the value of entry ``i`` of ``key`` in each
    of ``reps`` independent short runs drawn from one seeded stream.
    """
    rng = random.Random(seed)
    draw = rng_draw(rng)
    samples: dict[str, list[list[float]]] | None = None
    for _ in range(reps):
        world = World.start(configs, params, draw)
        collisions = 0
        for _ in range(horizon):
            collisions += 0 if resolve_round(world).success else 1
        vals = sample_values(world.stats, collisions)
        if samples is None:
            samples = {k: [[] for _ in v] for k, v in vals.items()}
        for key, v in vals.items():
            for i, x in enumerate(v):
                samples[key][i].append(x)
    return samples


def collision_from_round_rate(pc: float) -> float:
    """Per-attempt collision probability of either of two symmetric nodes.

    Per round each node attempts in every collision and in half the successes.
    """
    return 2 * pc / (1 + pc)


def residual_chain(cw: int) -> tuple[np.ndarray, np.ndarray]:
    """Transition matrix over {fresh pair, residual 1..cw} and per-state collision chance.

    State 0: both nodes drew fresh backoffs. State r >= 1: the previous loser
    carries residual r while the previous winner draws fresh.
    """
    if cw < 0:
        raise ValueError("cw must be >= 0")
    n = cw + 1
    u = 1.0 / n
    P = np.zeros((n, n))
    hit = np.zeros(n)
    # fresh pair: equal draws collide, otherwise the gap becomes the residual
    for a in range(n):
        for b in range(n):
            P[0, abs(a - b)] += u * u
    hit[0] = u
    for r in range(1, n):
        for draw in range(n):
            P[r, abs(draw - r)] += u
        hit[r] = u
    return P, hit


def stationary(P: np.ndarray) -> np.ndarray:
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones(n)])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    if np.any(pi < -1e-12):
        raise ArithmeticError("chain has no unique stationary distribution")
    return np.clip(pi, 0.0, None) / pi.sum()


def two_node_stationary(cw: int) -> float:
    """Long-run per-attempt collision probability, two identical random-access nodes, fixed CW."""
    if cw == 0:
        return 1.0
    P, hit = residual_chain(cw)
    pi = stationary(P)
    return collision_from_round_rate(float(pi @ hit))


def two_node_power_iteration(cw: int, max_steps: int = 10_000_000, tol: float = 1e-15) -> float:
    """Same quantity by iterating the distribution of the joint (b1, b2) chain.

    Built straight from the backoff rules: equal counters collide and both
    redraw; otherwise the smaller one transmits and redraws while the other
    keeps b - b_min.
    """
    n = cw + 1
    size = n * n
    T = np.zeros((size, size))
    u = 1.0 / n
    for b1 in range(n):
        for b2 in range(n):
            s = b1 * n + b2
            if b1 == b2:
                for x in range(n):
                    for y in range(n):
                        T[s, x * n + y] += u * u
            elif b1 < b2:
                for x in range(n):
                    T[s, x * n + (b2 - b1)] += u
            else:
                for y in range(n):
                    T[s, (b1 - b2) * n + y] += u
    tie = np.array([1.0 if i // n == i % n else 0.0 for i in range(size)])
    dist = np.full(size, 1.0 / size)
    for _ in range(max_steps):
        nxt = dist @ T
        if np.abs(nxt - dist).sum() < tol:
            dist = nxt
            break
        dist = nxt
    return collision_from_round_rate(float(dist @ tie))
