"""Acceptance criteria at desk scale: 10^5 rounds, seeds 1..10.

Each test records one PASS/FAIL line (printed in the terminal summary) and
then asserts. Long runs are cached per scenario point so criteria sharing a
configuration share the simulation.
"""
import math
import random
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import pytest

from coexsim.engine import World, resolve_round, simulate
from coexsim.metrics import node_occupancy
from coexsim.model import US, lookup_priority_class
from coexsim.oracle import (
    exhaustive_metrics,
    replicate,
    two_node_power_iteration,
    two_node_stationary,
)
from coexsim.results import seed_aggregates
from coexsim.runner import run
from coexsim.scenario import parse_scenario

from conftest import PARAMS, Scripted, fixed_class, gap, ra, record_criterion, rs

pytestmark = pytest.mark.acceptance

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
ROUNDS = 100_000
SEEDS = range(1, 11)


@lru_cache(maxsize=None)
def point(file: str, value=None):
    """Per-seed results of one scenario (or one of its sweep points)."""
    spec = parse_scenario(SCENARIOS / file)
    if value is not None:
        spec = dict(spec.sweep_points())[value]
    return [run(spec, ROUNDS, seed) for seed in SEEDS]


def mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values)


def seed_mean(results, key: str) -> float:
    return mean(seed_aggregates(r)[key] for r in results)


def test_equal_footing_fairness():
    res = point("equal_footing.yaml")
    s_w, s_l = seed_mean(res, "S_COT_W"), seed_mean(res, "S_COT_L")
    gap_ = abs(s_w - s_l)
    ok = gap_ <= 0.02
    record_criterion(1, ok, f"S_W={s_w:.4f} S_L={s_l:.4f} |diff|={gap_:.4f} (<= 0.02)")
    assert ok


def test_dense_gap_advantage():
    res = point("sync_vs_desync.yaml", "desynchronized")
    s_w, s_l = seed_mean(res, "S_COT_W"), seed_mean(res, "S_COT_L")
    spread = s_l - s_w
    ok = 0.05 <= spread <= 0.15
    record_criterion(2, ok, f"10+10, delta=9us: S_W={s_w:.4f} S_L={s_l:.4f} "
                            f"S_L-S_W={spread:+.4f} (in [0.05, 0.15])")
    assert ok


def test_gap_starvation():
    failures, rows = [], []
    for n in range(1, 11):
        res = point("laa_gap_nodes.yaml", n)
        s_w, s_l = seed_mean(res, "S_COT_W"), seed_mean(res, "S_COT_L")
        c_w, c_l = seed_mean(res, "C_W"), seed_mean(res, "C_L")
        rows.append(f"N={n}: S_W={s_w:.4f} S_L={s_l:.4f} C_W={c_w:.4f} C_L={c_l:.4f}")
        if s_l > 0.05:
            failures.append(f"N={n} S_L>0.05")
        if n >= 2 and s_w < 10 * s_l:
            failures.append(f"N={n} S_W<10*S_L")
        if c_l > c_w:
            failures.append(f"N={n} C_L>C_W")
    ok = not failures
    record_criterion(3, ok, "; ".join(rows) + ("" if ok else f" | violated: {', '.join(failures)}"))
    assert ok, failures


def test_rs_near_fairness():
    failures, rows = [], []
    delta = 1000 * US
    for n in range(1, 11):
        res = point("laa_rs_nodes.yaml", n)
        s_w, s_l = seed_mean(res, "S_COT_W"), seed_mean(res, "S_COT_L")
        lost = mean(a["S_COT_L"] - a["S_EFF_L"] for a in map(seed_aggregates, res))
        predicted = mean(
            (delta / 2) * r.report.groups["L"].successes / r.stats.total_elapsed_ns for r in res
        )
        rel = abs(lost - predicted) / predicted
        strict = all(seed_aggregates(r)["S_EFF_L"] < seed_aggregates(r)["S_COT_L"] for r in res)
        rows.append(f"N={n}: |S_W-S_L|={abs(s_w - s_l):.4f} RS share={lost:.4f} "
                    f"vs {predicted:.4f} ({rel:.1%})")
        if abs(s_w - s_l) > 0.05:
            failures.append(f"N={n} |S_W-S_L|>0.05")
        if not strict:
            failures.append(f"N={n} S_EFF_L not < S_COT_L")
        if rel > 0.20:
            failures.append(f"N={n} RS share off by {rel:.1%}")
    ok = not failures
    record_criterion(4, ok, "; ".join(rows) + ("" if ok else f" | violated: {', '.join(failures)}"))
    assert ok, failures


def test_synchronization_penalty():
    sync = point("sync_vs_desync.yaml", "synchronized")
    desync = point("sync_vs_desync.yaml", "desynchronized")
    c_sync, c_desync = seed_mean(sync, "C_L"), seed_mean(desync, "C_L")
    s_sync, s_desync = seed_mean(sync, "S_COT_L"), seed_mean(desync, "S_COT_L")
    ok = c_sync >= 2 * c_desync and s_sync < s_desync
    record_criterion(5, ok, f"C_L sync={c_sync:.4f} desync={c_desync:.4f} "
                            f"ratio={c_sync / c_desync:.3f} (>= 2); "
                            f"S_L sync={s_sync:.4f} < desync={s_desync:.4f}")
    assert ok


ETSI4 = lookup_priority_class("ETSI", 4)
ORACLE_CASES = {
    "2 RA, CW=3, H=1": ([ra(0, cls=fixed_class(3)), ra(1, cls=fixed_class(3))], 1),
    "2 RA, CW=3, H=2": ([ra(0, cls=fixed_class(3)), ra(1, cls=fixed_class(3))], 2),
    "2 RA, CW=3, H=3": ([ra(0, cls=fixed_class(3)), ra(1, cls=fixed_class(3))], 3),
    "RA + gap 9us aligned, CW=3, H=3": (
        [ra(0, cls=fixed_class(3)), gap(1, delta=9 * US, cls=fixed_class(3))], 3),
    "RA + RS 36us, CW 3->7, H=3": (
        [ra(0, cls=ETSI4, data=1900 * US),
         rs(1, delta=36 * US, phase=11 * US, cls=ETSI4, data=2000 * US)], 3),
    "RA + gap 18us + RS 63us, CW=1, H=3": (
        [ra(0, cls=fixed_class(1)), gap(1, delta=18 * US, phase=5 * US, cls=fixed_class(1)),
         rs(2, delta=63 * US, phase=40 * US, cls=fixed_class(1), data=3000 * US)], 3),
    "3 RA, CW 3->7, H=2": ([ra(k, cls=ETSI4, data=1900 * US) for k in range(3)], 2),
}
REPS_PER_SEED = 1000


def _compare(name, nodes, horizon):
    exact = exhaustive_metrics(nodes, PARAMS, horizon)
    pooled: dict[str, list[list[float]]] = {}
    for seed in SEEDS:
        for key, per_entry in replicate(nodes, PARAMS, horizon, REPS_PER_SEED, seed).items():
            dest = pooled.setdefault(key, [[] for _ in per_entry])
            for i, xs in enumerate(per_entry):
                dest[i].extend(xs)
    expected = {key: [getattr(n, key) for n in exact.nodes]
                for key in ("attempts", "successes", "collisions", "occupancy", "s_cot", "s_eff")}
    expected["collision_round_fraction"] = [exact.collision_round_fraction]
    expected["elapsed_ns"] = [exact.elapsed_ns]
    bad, worst = [], 0.0
    for key, values in expected.items():
        for i, want in enumerate(values):
            xs = pooled[key][i]
            m = math.fsum(xs) / len(xs)
            se = math.sqrt(math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1) / len(xs))
            if se == 0:
                if not math.isclose(m, want, rel_tol=1e-9, abs_tol=1e-12):
                    bad.append(f"{name}: {key}[{i}] {m} != {want}")
                continue
            z = abs(m - want) / se
            worst = max(worst, z)
            if z > 3:
                bad.append(f"{name}: {key}[{i}] MC {m:.6g} vs exact {want:.6g} ({z:.2f} SE)")
    return exact, bad, worst


def test_oracle_equivalence():
    failures, worst = [], 0.0
    for name, (nodes, horizon) in ORACLE_CASES.items():
        exact, bad, z = _compare(name, nodes, horizon)
        failures += bad
        worst = max(worst, z)
        if abs(exact.total_probability - 1) > 1e-12:
            failures.append(f"{name}: branch probabilities sum to {exact.total_probability}")

    cls = fixed_class(3)
    estimates = []
    for seed in SEEDS:
        acc = simulate([ra(0, cls=cls), ra(1, cls=cls)], PARAMS, ROUNDS, random.Random(seed))
        estimates.append(sum(acc.collisions) / sum(acc.attempts))
    m = mean(estimates)
    se = math.sqrt(math.fsum((e - m) ** 2 for e in estimates) / 9 / 10)
    exact_c = two_node_stationary(3)
    z_c = abs(m - exact_c) / se
    if z_c > 3:
        failures.append(f"stationary C {exact_c:.5f} vs MC {m:.5f} ({z_c:.2f} SE)")
    routes = abs(exact_c - two_node_power_iteration(3))
    if routes > 1e-4:
        failures.append(f"stationary solver vs power iteration differ by {routes:.2e}")

    ok = not failures
    record_criterion(6, ok, f"{len(ORACLE_CASES)} enumerated scenarios, worst |MC-exact| = "
                            f"{worst:.2f} SE; two-node C exact={exact_c:.5f} MC={m:.5f} "
                            f"({z_c:.2f} SE), solver vs power iteration {routes:.1e}"
                            + ("" if ok else " | " + "; ".join(failures)))
    assert ok, failures


def test_hand_trace():
    world = World.start([ra(0)], PARAMS, Scripted([4], fallback=0))
    resolve_round(world)
    acc = world.stats
    exact = Fraction(acc.occupancy_ns[0], acc.total_elapsed_ns)
    ok = exact == Fraction(5482, 5545) and node_occupancy(acc, 0) == 5482 / 5545
    record_criterion(7, ok, f"O = {exact} = {float(exact):.6f}")
    assert ok


def test_invariant_suite():
    from test_properties import (
        EXAMPLES,
        test_gap_monotone_in_delta,
        test_identical_random_access_nodes_symmetric,
        test_round_invariants,
    )

    test_round_invariants()
    test_gap_monotone_in_delta()
    test_identical_random_access_nodes_symmetric()
    record_criterion(8, True, f"round and run invariants over {EXAMPLES} randomized scenarios, "
                              f"gap monotonicity over {EXAMPLES} cases, symmetry over 10 seeds")

