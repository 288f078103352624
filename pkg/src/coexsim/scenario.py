"""Scenario and sweep files: schema, parsing and expansion to node lists.

Files are YAML documents with ``version: 1``. Durations are given in
microseconds (decimals allowed) and converted to exact integer nanoseconds.
"""
from __future__ import annotations

from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .model import (
    US,
    ConfigurationError,
    NodeConfig,
    PriorityClassParams,
    SimParams,
    TechnologyKind,
    lookup_priority_class,
    validate_nodes,
)
from .sync import SyncMode

SCHEMA_VERSION = 1

KIND_ALIASES = {
    "wifi": TechnologyKind.RANDOM_ACCESS,
    "random_access": TechnologyKind.RANDOM_ACCESS,
    "laa": TechnologyKind.SYNC_RS,
    "sync_rs": TechnologyKind.SYNC_RS,
    "nru": TechnologyKind.SYNC_GAP,
    "sync_gap": TechnologyKind.SYNC_GAP,
}

# Upper-bound data durations used when a group gives none (capped by o_max).
DEFAULT_DATA_US = {
    TechnologyKind.RANDOM_ACCESS: Decimal(5400),
    TechnologyKind.SYNC_RS: Decimal(6000),
    TechnologyKind.SYNC_GAP: Decimal(6000),
}
DEFAULT_ACK_US = Decimal(50)


class ScenarioFileError(ConfigurationError):
    pass


def us_to_ns(value: Any) -> int:
    """Exact µs -> ns conversion; rejects sub-nanosecond precision."""
    try:
        ns = Decimal(str(value)) * US
    except InvalidOperation:
        raise ValueError(f"not a number: {value!r}") from None
    if ns != ns.to_integral_value():
        raise ValueError(f"{value} µs is not a whole number of nanoseconds")
    return int(ns)


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SimParamsSpec(_Model):
    slot_us: Decimal = Decimal(9)
    sifs_us: Decimal = Decimal(16)
    cs_us: Decimal = Decimal(1)

    def build(self) -> SimParams:
        return SimParams(us_to_ns(self.slot_us), us_to_ns(self.sifs_us), us_to_ns(self.cs_us))


class NodeGroup(_Model):
    kind: str
    count: int = Field(1, ge=1)
    standard: str | None = None
    priority: str | None = None
    direction: Literal["DL", "UL"] = "DL"
    delta_us: Decimal | None = None
    data_us: Decimal | None = None
    ack_us: Decimal | None = None
    sync: SyncMode = SyncMode.DESYNCHRONIZED
    # custom channel access parameters; override the table row field by field
    p: int | None = None
    cw_min: int | None = None
    cw_max: int | None = None
    o_max_us: Decimal | None = None

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, v: str) -> str:
        if v.lower() not in KIND_ALIASES:
            raise ValueError(f"unknown kind {v!r}; expected one of {sorted(KIND_ALIASES)}")
        return v.lower()

    @field_validator("priority", mode="before")
    @classmethod
    def _priority_str(cls, v: Any) -> Any:
        return None if v is None else str(v)

    @property
    def technology(self) -> TechnologyKind:
        return KIND_ALIASES[self.kind]

    def priority_class(self, o_max_override: bool) -> PriorityClassParams:
        kind = self.technology
        if kind is TechnologyKind.RANDOM_ACCESS:
            standard, priority = self.standard or "IEEE80211", self.priority or "AC_BE"
        else:
            standard, priority = self.standard or "3GPP", self.priority or "3"
        override = o_max_override and standard.upper() in ("IEEE80211", "802.11")
        row = lookup_priority_class(standard, priority, self.direction, ppdu_max_override=override)
        custom = any(v is not None for v in (self.p, self.cw_min, self.cw_max, self.o_max_us))
        return PriorityClassParams(
            p=row.p if self.p is None else self.p,
            cw_min=row.cw_min if self.cw_min is None else self.cw_min,
            cw_max=row.cw_max if self.cw_max is None else self.cw_max,
            o_max=row.o_max if self.o_max_us is None else us_to_ns(self.o_max_us),
            name=row.name + ("+custom" if custom else ""),
        )

    def delta_ns(self) -> int:
        kind = self.technology
        if kind is TechnologyKind.RANDOM_ACCESS:
            if self.delta_us not in (None, 0):
                raise ConfigurationError("random access groups take no delta_us")
            return 0
        if self.delta_us is None:
            if kind is TechnologyKind.SYNC_RS:
                return 1000 * US  # LAA subframe
            raise ConfigurationError("sync_gap groups need delta_us")
        return us_to_ns(self.delta_us)


Axis = Literal["nodes", "delta", "mode", "data"]


class SweepSpec(_Model):
    axis: Axis
    values: list[Any]

    @field_validator("values")
    @classmethod
    def _non_empty(cls, v: list[Any]) -> list[Any]:
        if not v:
            raise ValueError("sweep needs at least one axis value")
        return v


class ScenarioSpec(_Model):
    version: int
    name: str = "scenario"
    rounds: int = Field(100_000, ge=1)
    seeds: list[int]
    o_max_override: bool = False
    sim_params: SimParamsSpec = SimParamsSpec()
    rates_mbps: dict[Literal["W", "L"], float] | None = None
    groups: list[NodeGroup] = Field(min_length=1)
    sweep: SweepSpec | None = None

    @field_validator("version")
    @classmethod
    def _version(cls, v: int) -> int:
        if v != SCHEMA_VERSION:
            raise ValueError(f"unsupported scenario version {v}; this build reads version {SCHEMA_VERSION}")
        return v

    @field_validator("seeds")
    @classmethod
    def _seeds(cls, v: list[int]) -> list[int]:
        if not v:
            raise ValueError("at least one seed is required")
        if len(set(v)) != len(v):
            raise ValueError("seeds must be distinct")
        return v

    @model_validator(mode="after")
    def _rates(self) -> ScenarioSpec:
        if self.rates_mbps and any(r < 0 for r in self.rates_mbps.values()):
            raise ValueError("rates must be non-negative")
        return self

    def expand(self) -> tuple[SimParams, list[NodeConfig], list[SyncMode]]:
        """Node list with phase 0 everywhere, plus each node's sync mode.

        Raises ConfigurationError listing every invalid field.
        """
        params = self.sim_params.build()
        nodes: list[NodeConfig] = []
        modes: list[SyncMode] = []
        errors: list[str] = []
        for gi, group in enumerate(self.groups):
            try:
                cls = group.priority_class(self.o_max_override)
                delta = group.delta_ns()
                if group.data_us is None:
                    data = min(us_to_ns(DEFAULT_DATA_US[group.technology]), cls.o_max)
                else:
                    data = us_to_ns(group.data_us)
                ack = 0
                if group.technology is TechnologyKind.RANDOM_ACCESS:
                    ack = us_to_ns(DEFAULT_ACK_US if group.ack_us is None else group.ack_us)
            except (ConfigurationError, ValueError) as exc:
                errors.append(f"groups[{gi}]: {exc}")
                continue
            for _ in range(group.count):
                nodes.append(NodeConfig(
                    id=len(nodes), kind=group.technology, cls=cls, data_duration=data,
                    delta=delta, phase=0, ack_duration=ack,
                ))
                modes.append(group.sync)
        errors.extend(validate_nodes(nodes, params) if not errors else [])
        if errors:
            raise ConfigurationError(f"scenario {self.name!r} is invalid: " + "; ".join(errors), errors)
        return params, nodes, modes

    def with_axis(self, axis: str, value: Any) -> ScenarioSpec:
        """Copy with one sweep axis value applied (and the sweep block dropped)."""
        groups = []
        for g in self.groups:
            sync_group = g.technology.synchronous
            if axis == "nodes":
                g = g.model_copy(update={"count": int(value)})
            elif axis == "delta" and sync_group:
                g = g.model_copy(update={"delta_us": Decimal(str(value))})
            elif axis == "mode" and sync_group:
                g = g.model_copy(update={"sync": SyncMode(value)})
            elif axis == "data" and sync_group:
                g = g.model_copy(update={"data_us": Decimal(str(value))})
            groups.append(g)
        spec = self.model_copy(update={"groups": groups, "sweep": None})
        return ScenarioSpec.model_validate(spec.model_dump())

    def sweep_points(self) -> list[tuple[Any, ScenarioSpec]]:
        if self.sweep is None:
            raise ConfigurationError(f"scenario {self.name!r} has no sweep block")
        return [(v, self.with_axis(self.sweep.axis, v)) for v in self.sweep.values]


def _line_of(node: yaml.Node | None, loc: tuple[Any, ...]) -> int | None:
    """1-based line of the YAML node addressed by a pydantic error location."""
    line = None
    for key in loc:
        if node is None:
            break
        line = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            node = next((v for k, v in node.value if k.value == key), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            node = None
    if node is not None:
        line = node.start_mark.line + 1
    return line


def parse_scenario_text(text: str, source: str = "<string>") -> ScenarioSpec:
    try:
        data = yaml.safe_load(text)
        tree = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark else source
        raise ScenarioFileError(f"{where}: parse error: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(data, dict):
        raise ScenarioFileError(f"{source}:1: top level must be a mapping")
    try:
        spec = ScenarioSpec.model_validate(data)
    except ValidationError as exc:
        errors = []
        for err in exc.errors():
            loc = tuple(err["loc"])
            line = _line_of(tree, loc)
            where = f"{source}:{line}" if line else source
            errors.append(f"{where}: {'.'.join(map(str, loc)) or '<root>'}: {err['msg']}")
        raise ScenarioFileError("\n".join(errors), errors) from None
    return spec


def parse_scenario(path: str | Path) -> ScenarioSpec:
    """Read, schema-check and fully validate a scenario file."""
    path = Path(path)
    spec = parse_scenario_text(path.read_text(), str(path))
    try:
        points = spec.sweep_points() if spec.sweep else [(None, spec)]
    except ValidationError as exc:
        raise ScenarioFileError(f"{path}: invalid sweep value: {exc}") from None
    for value, point in points:
        try:
            point.expand()
        except ConfigurationError as exc:
            prefix = f"{path}" if value is None else f"{path} [{spec.sweep.axis}={value}]"
            raise ScenarioFileError(f"{prefix}: {exc}", exc.errors) from None
    return spec


def validate_scenario(spec: ScenarioSpec) -> list[str]:
    """Every problem in the scenario (all sweep points included); empty if valid."""
    errors = []
    try:
        points = spec.sweep_points() if spec.sweep else [(None, spec)]
    except (ConfigurationError, ValidationError) as exc:
        return [str(exc)]
    for value, point in points:
        try:
            point.expand()
        except ConfigurationError as exc:
            tag = "" if value is None else f"[{spec.sweep.axis}={value}] "
            errors.extend(tag + e for e in exc.errors)
    return errors
