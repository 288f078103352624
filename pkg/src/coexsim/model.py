"""Domain types and the standardized channel access parameter tables.

All durations are integer nanoseconds. Nothing in this module touches
floating-point time.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

US = 1_000
MS = 1_000_000


class ConfigurationError(ValueError):
    """Raised for unknown table lookups or invalid scenario inputs."""

    def __init__(self, message: str, errors: list[str] | None = None):
        super().__init__(message)
        self.errors = errors or [message]


class TechnologyKind(str, enum.Enum):
    RANDOM_ACCESS = "random_access"  # Wi-Fi style, no slot grid
    SYNC_RS = "sync_rs"  # LAA style, reservation signal up to the slot boundary
    SYNC_GAP = "sync_gap"  # NR-U style, idle gap before the backoff countdown

    @property
    def synchronous(self) -> bool:
        return self is not TechnologyKind.RANDOM_ACCESS

    @property
    def technology(self) -> str:
        """Two-way partition used by the aggregate metrics: W or L."""
        return "W" if self is TechnologyKind.RANDOM_ACCESS else "L"


# Synchronization slot durations allowed for scheduled nodes.
SYNC_SLOT_DURATIONS_NS = tuple(v * US for v in (9, 18, 36, 63, 125, 250, 500, 1000))
PPDU_MAX_TIME_NS = 5_484 * US


@dataclass(frozen=True)
class SimParams:
    slot_sigma: int = 9 * US
    sifs: int = 16 * US
    sensing_cs: int = 1 * US

    def problems(self) -> list[str]:
        out = []
        if self.slot_sigma <= 0:
            out.append(f"slot_sigma must be > 0, got {self.slot_sigma}")
        if self.sifs <= 0:
            out.append(f"sifs must be > 0, got {self.sifs}")
        if self.sensing_cs < 0:
            out.append(f"sensing_cs must be >= 0, got {self.sensing_cs}")
        # CS has to stay under half a backoff slot
        if 2 * self.sensing_cs >= self.slot_sigma:
            out.append(
                f"sensing_cs ({self.sensing_cs} ns) must be < slot_sigma/2 ({self.slot_sigma / 2:g} ns)"
            )
        return out


def _is_pow2_minus_1(w: int) -> bool:
    return w > 0 and (w + 1) & w == 0


def cw_sequence(cw_min: int, cw_max: int) -> list[int]:
    """Contention windows visited by repeated doubling, from cw_min up to cw_max."""
    seq = [cw_min]
    while seq[-1] < cw_max:
        seq.append(min(2 * (seq[-1] + 1) - 1, cw_max))
    return seq


@dataclass(frozen=True)
class PriorityClassParams:
    p: int
    cw_min: int
    cw_max: int
    o_max: int
    name: str = ""

    def problems(self) -> list[str]:
        out = []
        if self.p < 1:
            out.append(f"p must be >= 1, got {self.p}")
        if not 0 < self.cw_min <= self.cw_max:
            out.append(f"need 0 < cw_min <= cw_max, got cw_min={self.cw_min} cw_max={self.cw_max}")
            return out
        for label, w in (("cw_min", self.cw_min), ("cw_max", self.cw_max)):
            if not _is_pow2_minus_1(w):
                out.append(f"{label}={w} is not of the form 2^k - 1")
        if not out and cw_sequence(self.cw_min, self.cw_max)[-1] != self.cw_max:
            out.append(f"cw_max={self.cw_max} not reachable from cw_min={self.cw_min} by doubling")
        if self.o_max <= 0:
            out.append(f"o_max must be > 0, got {self.o_max}")
        return out


# (p DL, p UL, cw_min, cw_max DL, cw_max UL, o_max DL, o_max UL); o_max in ms
_TABLE = {
    "ETSI": {
        "4": (1, 2, 3, 7, 7, "2", "2"),
        "3": (1, 2, 7, 15, 15, "4", "4"),
        "2": (3, 3, 15, 63, 1023, "6", "6"),
        "1": (7, 7, 15, 1023, 1023, "6", "6"),
    },
    "3GPP": {
        "1": (1, 2, 3, 7, 7, "2", "2"),
        "2": (1, 2, 7, 15, 15, "3", "4"),
        "3": (3, 3, 15, 63, 1023, "8", "6"),
        "4": (7, 7, 15, 1023, 1023, "8", "6"),
    },
    "IEEE80211": {
        "AC_VO": (1, 2, 3, 7, 7, "2.08", "2.08"),
        "AC_VI": (1, 2, 7, 15, 15, "4.096", "4.096"),
        "AC_BE": (3, 3, 15, 63, 1023, "2.528", "2.528"),
        "AC_BK": (7, 7, 15, 1023, 1023, "2.528", "2.528"),
    },
}

_SPEC_ALIASES = {"ETSI": "ETSI", "3GPP": "3GPP", "IEEE80211": "IEEE80211", "802.11": "IEEE80211"}


def ms_to_ns(value: str) -> int:
    whole, _, frac = value.partition(".")
    return int(whole) * MS + int((frac + "000000")[:6])


def lookup_priority_class(
    spec: str, priority: str | int, direction: str = "DL", ppdu_max_override: bool = False
) -> PriorityClassParams:
    """Return one row of the ETSI / 3GPP / IEEE 802.11 parameter table.

    Args:
        spec: "ETSI", "3GPP" or "IEEE80211".
        priority: class number for ETSI/3GPP, access category for 802.11.
        direction: "DL" or "UL".
        ppdu_max_override: for IEEE80211 only, replace the TXOP limit with
            the 5.484 ms PPDU maximum time.
    """
    spec_key = _SPEC_ALIASES.get(str(spec).upper())
    direction = str(direction).upper()
    rows = _TABLE.get(spec_key or "")
    if rows is None or str(priority) not in rows or direction not in ("DL", "UL"):
        raise ConfigurationError(
            f"unknown priority class: spec={spec!r} priority={priority!r} direction={direction!r}"
        )
    if ppdu_max_override and spec_key != "IEEE80211":
        raise ConfigurationError(f"o_max override only applies to IEEE80211, not {spec}")
    p_dl, p_ul, cw_min, cw_max_dl, cw_max_ul, o_dl, o_ul = rows[str(priority)]
    ul = direction == "UL"
    o_max = PPDU_MAX_TIME_NS if ppdu_max_override else ms_to_ns(o_ul if ul else o_dl)
    return PriorityClassParams(
        p=p_ul if ul else p_dl,
        cw_min=cw_min,
        cw_max=cw_max_ul if ul else cw_max_dl,
        o_max=o_max,
        name=f"{spec_key}/{priority}/{direction}",
    )


@dataclass(frozen=True)
class Numerology:
    slots_per_subframe: int
    subcarrier_spacing_khz: int
    symbol_duration_us: float  # OFDM symbol including cyclic prefix
    slot_duration: int  # ns


def numerology(slots_per_subframe: int) -> Numerology:
    n_s = slots_per_subframe
    if n_s not in (1, 2, 4, 8):
        raise ConfigurationError(f"slots per subframe must be 1, 2, 4 or 8, got {n_s}")
    return Numerology(
        slots_per_subframe=n_s,
        subcarrier_spacing_khz=15 * n_s,
        symbol_duration_us=71.35 / n_s,
        slot_duration=1_000 * US // n_s,
    )


@dataclass(frozen=True)
class NodeConfig:
    id: int
    kind: TechnologyKind
    cls: PriorityClassParams
    data_duration: int
    delta: int = 0
    phase: int = 0
    ack_duration: int = 0

    def problems(self) -> list[str]:
        out = [f"class: {msg}" for msg in self.cls.problems()]
        if self.data_duration <= 0:
            out.append(f"data_duration must be > 0, got {self.data_duration}")
        if self.data_duration > self.cls.o_max:
            out.append(f"data_duration {self.data_duration} ns exceeds o_max {self.cls.o_max} ns")
        if self.ack_duration < 0:
            out.append(f"ack_duration must be >= 0, got {self.ack_duration}")
        if self.kind is TechnologyKind.RANDOM_ACCESS:
            if self.delta != 0:
                out.append(f"delta must be 0 for random access, got {self.delta}")
            if self.phase != 0:
                out.append(f"phase must be 0 for random access, got {self.phase}")
        else:
            if self.delta not in SYNC_SLOT_DURATIONS_NS:
                out.append(f"delta {self.delta} ns is not a standard synchronization slot duration")
            if not 0 <= self.phase < max(self.delta, 1):
                out.append(f"phase {self.phase} ns must lie in [0, delta={self.delta})")
            if self.kind is TechnologyKind.SYNC_RS and self.data_duration < self.delta:
                out.append(
                    f"data_duration {self.data_duration} ns shorter than delta {self.delta} ns; "
                    "the reservation signal could exhaust the transmission"
                )
        return out


@dataclass(slots=True)
class NodeState:
    backoff: int
    cw: int
    sync_time: int = 0


class SimClock(NamedTuple):
    round: int = 0
    now: int = 0


def validate_nodes(nodes: list[NodeConfig], params: SimParams) -> list[str]:
    """Every violated invariant as "node <id>: <field problem>"; empty when valid."""
    errors = [f"sim_params: {msg}" for msg in params.problems()]
    if not nodes:
        errors.append("scenario: at least one node is required")
    seen = set()
    for node in nodes:
        if node.id in seen:
            errors.append(f"node {node.id}: duplicate id")
        seen.add(node.id)
        errors.extend(f"node {node.id}: {msg}" for msg in node.problems())
    if nodes and sorted(seen) != list(range(len(nodes))):
        errors.append("scenario: node ids must be 0..N-1")
    return errors


def check_nodes(nodes: list[NodeConfig], params: SimParams) -> None:
    errors = validate_nodes(nodes, params)
    if errors:
        raise ConfigurationError(f"{len(errors)} invalid setting(s): " + "; ".join(errors), errors)
