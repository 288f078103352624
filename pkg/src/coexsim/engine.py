"""Cycle-by-cycle contention resolution.

Every round the channel has just gone idle at ``clock.now``. Each node is
ready to start transmitting after an offset of p + b slots (plus the gap for
NR-U style nodes). The earliest offset fixes the contention delay; every node
whose own offset is within the carrier sensing time of it transmits too.
"""
from __future__ import annotations

import random
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .metrics import StatsAccumulator
from .model import NodeConfig, NodeState, SimClock, SimParams, TechnologyKind, check_nodes
from .sync import SlotGrid, sync_time

# draw(node_id, cw) -> integer uniform on [0, cw]
Draw = Callable[[int, int], int]

_GAP = TechnologyKind.SYNC_GAP
_RS = TechnologyKind.SYNC_RS
_RA = TechnologyKind.RANDOM_ACCESS


@dataclass(frozen=True)
class TransmissionProfile:
    total_occupancy: int
    rs_portion: int
    payload_portion: int


class RoundOutcome(NamedTuple):
    round: int
    start: int  # t(n)
    delta_ns: int  # contention delay, delta * sigma
    slot_sigma: int
    winners: tuple[int, ...]
    occupancy: dict[int, int]  # P_k per transmitting node
    rs: dict[int, int]  # reservation signal per transmitting SyncRS node
    airtime_consumed: int

    @property
    def success(self) -> bool:
        return len(self.winners) == 1

    @property
    def kind(self) -> str:
        return "success" if self.success else "collision"

    @property
    def delta_slots(self) -> Fraction:
        return Fraction(self.delta_ns, self.slot_sigma)

    @property
    def end(self) -> int:
        return self.start + self.airtime_consumed


def access_offset(state: NodeState, cfg: NodeConfig, sigma: int) -> int:
    """Idle time after the channel frees up until this node starts transmitting."""
    offset = (cfg.cls.p + state.backoff) * sigma
    if cfg.kind is _GAP:
        offset += state.sync_time
    return offset


def contention_delay(states: Sequence[NodeState], configs: Sequence[NodeConfig], sigma: int) -> int:
    if not states:
        raise ValueError("contention needs at least one node")
    return min(access_offset(s, c, sigma) for s, c in zip(states, configs))


def winner_set(
    states: Sequence[NodeState], configs: Sequence[NodeConfig], delta_ns: int, cs: int, sigma: int
) -> tuple[int, ...]:
    return tuple(
        c.id for s, c in zip(states, configs) if access_offset(s, c, sigma) - delta_ns < cs
    )


def transmission_profile(cfg: NodeConfig, sync: int, sifs: int) -> TransmissionProfile:
    d = cfg.data_duration
    if cfg.kind is _RA:
        return TransmissionProfile(d + sifs + cfg.ack_duration + sifs, 0, d)
    if cfg.kind is _RS:
        # RS fills the first part of the D-long burst, up to the slot boundary
        return TransmissionProfile(d + sifs, sync, d - sync)
    return TransmissionProfile(d + sifs, 0, d)


def advance_clock(clock: SimClock, delta_ns: int, profiles: Sequence[TransmissionProfile]) -> SimClock:
    if not profiles:
        raise ValueError("at least one transmitting node required")
    return SimClock(clock.round + 1, clock.now + delta_ns + max(p.total_occupancy for p in profiles))


def update_cw(cw: int, cfg: NodeConfig, success: bool) -> int:
    """Reset on success, double (capped) on collision. Only called for transmitters."""
    if success:
        return cfg.cls.cw_min
    return min(2 * (cw + 1) - 1, cfg.cls.cw_max)


def _counted(idle_ns: int, p: int, sigma: int) -> int:
    # ceil(idle / sigma) - p, never negative
    return max(-(-idle_ns // sigma) - p, 0)


def residual_backoff(state: NodeState, cfg: NodeConfig, delta_ns: int, sigma: int) -> int:
    """Backoff left to a node that did not transmit this round.

    Random access and RS nodes count down ceil(delta) - p slots; gap nodes
    only start counting after their gap, so ceil(delta - beta) - p.
    """
    idle = delta_ns - state.sync_time if cfg.kind is _GAP else delta_ns
    return max(state.backoff - _counted(idle, cfg.cls.p, sigma), 0)


def update_backoffs(
    states: Sequence[NodeState],
    configs: Sequence[NodeConfig],
    delta_ns: int,
    winners: Sequence[int],
    draw: Draw,
    sigma: int,
) -> list[int]:
    """New backoff per node. Winners must already carry their updated CW.

    Draws are made in ascending node id order.
    """
    xi = set(winners)
    return [
        draw(c.id, s.cw) if c.id in xi else residual_backoff(s, c, delta_ns, sigma)
        for s, c in zip(states, configs)
    ]


def next_sync_time(cfg: NodeConfig, backoff: int, now: int, sigma: int) -> int:
    """Gap/RS for the cycle starting at ``now``: wait from the countdown end to the grid."""
    if cfg.kind is _RA:
        return 0
    return sync_time(SlotGrid(cfg.delta, cfg.phase), now + (cfg.cls.p + backoff) * sigma)


class World:
    """Mutable state of one run.

    Node state lives in parallel lists (``backoff``, ``cw``, ``sync``) indexed
    by node id; ``states`` gives a NodeState snapshot view.
    """

    def __init__(
        self,
        configs: Sequence[NodeConfig],
        params: SimParams,
        draw: Draw,
        states: Sequence[NodeState],
        clock: SimClock = SimClock(),
        stats: StatsAccumulator | None = None,
    ):
        self.configs = tuple(configs)
        self.params = params
        self.draw = draw
        self.backoff = [s.backoff for s in states]
        self.cw = [s.cw for s in states]
        self.sync = [s.sync_time for s in states]
        self.round, self.now = clock
        self.stats = stats if stats is not None else StatsAccumulator(len(self.configs))
        sifs = params.sifs
        self._p_ns = tuple(c.cls.p * params.slot_sigma for c in self.configs)
        self._p = tuple(c.cls.p for c in self.configs)
        self._gap = tuple(c.kind is _GAP for c in self.configs)
        self._occ = tuple(transmission_profile(c, 0, sifs).total_occupancy for c in self.configs)
        self._rs_nodes = frozenset(c.id for c in self.configs if c.kind is _RS)
        # (id, p*sigma, delta, phase) per synchronous node
        self._grids = tuple(
            (c.id, c.cls.p * params.slot_sigma, c.delta, c.phase)
            for c in self.configs if c.kind.synchronous
        )

    @classmethod
    def start(cls, configs: Sequence[NodeConfig], params: SimParams, draw: Draw) -> World:
        """Initial state at t=0: CW = cw_min, b = rand(cw_min), beta from the grid."""
        sigma = params.slot_sigma
        states = []
        for c in configs:
            b = draw(c.id, c.cls.cw_min)
            states.append(NodeState(b, c.cls.cw_min, next_sync_time(c, b, 0, sigma)))
        return cls(configs, params, draw, states)

    @property
    def clock(self) -> SimClock:
        return SimClock(self.round, self.now)

    @clock.setter
    def clock(self, value: SimClock) -> None:
        self.round, self.now = value

    @property
    def states(self) -> list[NodeState]:
        return [NodeState(b, w, s) for b, w, s in zip(self.backoff, self.cw, self.sync)]

    def copy(self, draw: Draw | None = None) -> World:
        return World(self.configs, self.params, draw or self.draw, self.states,
                     self.clock, self.stats.copy())


def resolve_round(world: World) -> RoundOutcome:
    """Resolve one contention cycle in place and return what happened.

    contention delay -> transmitter set -> clock advance -> CW update ->
    backoff update (winners redraw in id order) -> gap/RS recomputation.
    """
    params = world.params
    sigma = params.slot_sigma
    backoff, sync = world.backoff, world.sync

    offsets = [
        pn + b * sigma + s if g else pn + b * sigma
        for pn, b, s, g in zip(world._p_ns, backoff, sync, world._gap)
    ]
    delta_ns = min(offsets)
    limit = delta_ns + params.sensing_cs
    xi = tuple([k for k, off in enumerate(offsets) if off < limit])
    success = len(xi) == 1

    all_occ = world._occ
    occ = {k: all_occ[k] for k in xi}
    rs_nodes = world._rs_nodes
    rs = {k: sync[k] for k in xi if k in rs_nodes} if rs_nodes else {}
    start = world.now
    now = world.now = start + delta_ns + max(occ.values())
    n = world.round
    world.round = n + 1

    acc = world.stats
    configs = world.configs
    for k in xi:
        acc.attempts[k] += 1
        acc.occupancy_ns[k] += all_occ[k]
        if success:
            acc.successes[k] += 1
            acc.success_occupancy_ns[k] += all_occ[k]
            acc.effective_ns[k] += configs[k].data_duration - rs.get(k, 0)
        else:
            acc.collisions[k] += 1
    acc.total_elapsed_ns = now
    acc.rounds += 1

    for k, (p, g, s) in enumerate(zip(world._p, world._gap, sync)):
        if k not in xi:
            counted = _counted(delta_ns - s if g else delta_ns, p, sigma)
            if counted:
                backoff[k] = max(backoff[k] - counted, 0)
    cws, draw = world.cw, world.draw
    for k in xi:
        cws[k] = update_cw(cws[k], configs[k], success)
        backoff[k] = draw(k, cws[k])
    for k, pn, d, phase in world._grids:
        sync[k] = (phase - now - pn - backoff[k] * sigma) % d

    return RoundOutcome(n, start, delta_ns, sigma, xi, occ, rs, now - start)


def rng_draw(rng: random.Random) -> Draw:
    """Uniform backoff draws from an MT19937 stream.

    CW + 1 is a power of two for every valid window, so the value is taken
    straight from getrandbits; any other size falls back to rejection
    sampling on getrandbits(bit_length).
    """
    getrandbits = rng.getrandbits

    def draw(_k: int, cw: int) -> int:
        n = cw + 1
        if n & cw == 0:
            return getrandbits(cw.bit_length()) if cw else 0
        bits = n.bit_length()
        r = getrandbits(bits)
        while r >= n:
            r = getrandbits(bits)
        return r

    return draw


def simulate(
    configs: Sequence[NodeConfig],
    params: SimParams,
    rounds: int,
    rng: random.Random,
    on_round: Callable[[RoundOutcome], None] | None = None,
) -> StatsAccumulator:
    """Run ``rounds`` contention cycles on already-phased node configs."""
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    check_nodes(list(configs), params)
    world = World.start(configs, params, rng_draw(rng))
    step = resolve_round
    if on_round is None:
        for _ in range(rounds):
            step(world)
    else:
        for _ in range(rounds):
            on_round(step(world))
    return world.stats
