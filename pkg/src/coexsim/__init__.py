"""Monte Carlo contention simulator for Wi-Fi / LAA / NR-U coexistence on one channel."""
from .engine import (
    RoundOutcome,
    TransmissionProfile,
    World,
    advance_clock,
    contention_delay,
    resolve_round,
    simulate,
    update_backoffs,
    update_cw,
    winner_set,
)
from .metrics import (
    MetricsReport,
    StatsAccumulator,
    build_report,
    collision_probability,
    node_occupancy,
    success_metrics,
    technology_totals,
    throughput,
)
from .model import (
    ConfigurationError,
    NodeConfig,
    NodeState,
    PriorityClassParams,
    SimClock,
    SimParams,
    TechnologyKind,
    lookup_priority_class,
    numerology,
)
from .runner import run
from .scenario import ScenarioSpec, SweepSpec, parse_scenario, validate_scenario
from .sync import SlotGrid, SyncMode, draw_offsets, sync_time

__version__ = "0.1.0"
