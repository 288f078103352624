"""Command line entry point: validate, run, sweep, oracle."""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import oracle
from .model import ConfigurationError
from .results import build_document, round_rows, write_outputs
from .runner import phased_nodes, run_many
from .scenario import parse_scenario, validate_scenario

log = logging.getLogger("coexsim")


def _seeds(args: argparse.Namespace) -> list[int] | None:
    if args.seed:
        return args.seed
    if args.n_seeds:
        return list(range(1, args.n_seeds + 1))
    return None


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenario", type=Path)
    p.add_argument("--rounds", type=int, help="contention rounds per run (default: from file)")
    p.add_argument("--seed", type=int, action="append", help="seed; repeat for several")
    p.add_argument("--n-seeds", type=int, help="use seeds 1..N")
    p.add_argument("--out", type=Path, help="output directory (default: results/<name>)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--log-rounds", action="store_true", help="also write a per-round trace")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def _emit(spec, points, axis, args) -> int:
    doc = build_document(spec.name, points, axis)
    rounds = round_rows(spec.name, points) if args.log_rounds else None
    out = args.out or Path("results") / spec.name
    for path in write_outputs(doc, out, args.format, rounds):
        print(path)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    spec = parse_scenario(args.scenario)
    errors = validate_scenario(spec)
    if errors:
        for e in errors:
            print(e, file=sys.stderr)
        return 1
    points = spec.sweep_points() if spec.sweep else [(None, spec)]
    for value, point in points:
        params, nodes, modes = point.expand()
        tag = "" if value is None else f"[{spec.sweep.axis}={value}] "
        print(f"{tag}{spec.name}: {len(nodes)} nodes, sigma={params.slot_sigma} ns, "
              f"sifs={params.sifs} ns, cs={params.sensing_cs} ns")
        for node, mode in zip(nodes, modes):
            c = node.cls
            print(f"  node {node.id}: {node.kind.value} {c.name} p={c.p} cw=[{c.cw_min},{c.cw_max}] "
                  f"o_max={c.o_max} D={node.data_duration} delta={node.delta}"
                  + (f" {mode.value}" if node.kind.synchronous else ""))
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    spec = parse_scenario(args.scenario)
    t0 = time.perf_counter()
    points = run_many([(None, spec)], args.rounds, _seeds(args), args.log_rounds, args.jobs)
    log.info("ran %s in %.2f s", spec.name, time.perf_counter() - t0)
    return _emit(spec, points, None, args)


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = parse_scenario(args.scenario)
    if spec.sweep is None:
        raise ConfigurationError(f"{args.scenario}: no sweep block")
    t0 = time.perf_counter()
    points = run_many(spec.sweep_points(), args.rounds, _seeds(args), args.log_rounds, args.jobs)
    log.info("swept %s over %d points in %.2f s", spec.name, len(points), time.perf_counter() - t0)
    return _emit(spec, points, spec.sweep.axis, args)


def cmd_oracle(args: argparse.Namespace) -> int:
    if args.two_node_cw is not None:
        result = {
            "cw": args.two_node_cw,
            "collision_probability": oracle.two_node_stationary(args.two_node_cw),
            "power_iteration": oracle.two_node_power_iteration(args.two_node_cw),
        }
    else:
        if args.scenario is None:
            raise ConfigurationError("oracle needs a scenario file or --two-node-cw")
        spec = parse_scenario(args.scenario)
        params, nodes = phased_nodes(spec, random.Random(args.seed))
        exact = oracle.exhaustive_metrics(nodes, params, args.horizon)
        result = {
            "scenario": spec.name,
            "horizon": exact.horizon,
            "branches": exact.branches,
            "total_probability": exact.total_probability,
            "collision_round_fraction": exact.collision_round_fraction,
            "expected_elapsed_ns": exact.elapsed_ns,
            "phases_ns": [n.phase for n in nodes],
            "nodes": [dict(asdict(n), collision_probability=n.collision_probability)
                      for n in exact.nodes],
        }
    text = json.dumps(result, indent=2)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text + "\n")
        print(args.out)
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coexsim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file and print the expanded nodes")
    p.add_argument("scenario", type=Path)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="simulate a scenario for every seed")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="simulate every point of the scenario's sweep block")
    _add_run_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exact expectations for a small scenario")
    p.add_argument("scenario", type=Path, nargs="?")
    p.add_argument("--horizon", type=int, default=1)
    p.add_argument("--seed", type=int, default=1, help="seed for desynchronized phases")
    p.add_argument("--two-node-cw", type=int, help="stationary collision probability, 2 nodes")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, oracle.OracleRefused) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
