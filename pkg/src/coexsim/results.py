"""Result tables: per-node rows, per-seed aggregates and seed summaries.

The same row models back the CSV and JSON outputs, so the column set is the
schema. Bump RESULTS_SCHEMA_VERSION on any change to the row fields.
"""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict
from scipy import stats as st

from .runner import RoundRecord, SeedResult

RESULTS_SCHEMA_VERSION = 1

AGGREGATE_METRICS = (
    "O_T", "O_W", "O_L",
    "S_COT", "S_COT_W", "S_COT_L",
    "S_EFF", "S_EFF_W", "S_EFF_L",
    "C_W", "C_L",
    "B_W", "B_L",
)


class _Row(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NodeRow(_Row):
    schema_version: int = RESULTS_SCHEMA_VERSION
    scenario: str
    axis: str | None = None
    axis_value: str | None = None
    seed: int
    node_id: int
    kind: str
    technology: Literal["W", "L"]
    delta_ns: int
    phase_ns: int
    data_ns: int
    attempts: int
    successes: int
    collisions: int
    occupancy_ns: int
    success_occupancy_ns: int
    effective_ns: int
    total_elapsed_ns: int
    O: float
    S_COT: float
    S_EFF: float
    C: float | None


class SummaryRow(_Row):
    """row_type "seed": one run; "mean" / "ci95": across seeds (ci95 holds half-widths)."""

    schema_version: int = RESULTS_SCHEMA_VERSION
    scenario: str
    axis: str | None = None
    axis_value: str | None = None
    row_type: Literal["seed", "mean", "ci95"]
    seed: int | None = None
    n_seeds: int
    rounds: int
    n_w: int
    n_l: int
    total_elapsed_ns: int | None = None
    O_T: float | None = None
    O_W: float | None = None
    O_L: float | None = None
    S_COT: float | None = None
    S_COT_W: float | None = None
    S_COT_L: float | None = None
    S_EFF: float | None = None
    S_EFF_W: float | None = None
    S_EFF_L: float | None = None
    C_W: float | None = None
    C_L: float | None = None
    B_W: float | None = None
    B_L: float | None = None


class RoundRow(_Row):
    scenario: str
    axis_value: str | None = None
    seed: int
    round: int
    t_ns: int
    delta_ns: int
    winners: str  # space separated node ids
    kind: Literal["success", "collision"]


class ResultsDocument(_Row):
    schema_version: int = RESULTS_SCHEMA_VERSION
    scenario: str
    axis: str | None = None
    nodes: list[NodeRow]
    summary: list[SummaryRow]


def mean_ci95(values: list[float]) -> tuple[float | None, float | None]:
    """Mean and Student-t 95% half-width; half-width is None below two samples."""
    if not values:
        return None, None
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, None
    sd = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1))
    return mean, float(st.t.ppf(0.975, n - 1)) * sd / math.sqrt(n)


def _fmt(value: Any) -> str | None:
    return None if value is None else str(value)


def seed_aggregates(res: SeedResult) -> dict[str, float | None]:
    g = res.report.groups
    w, l, a = g["W"], g["L"], g["all"]
    return {
        "O_T": a.occupancy, "O_W": w.occupancy, "O_L": l.occupancy,
        "S_COT": a.s_cot, "S_COT_W": w.s_cot, "S_COT_L": l.s_cot,
        "S_EFF": a.s_eff, "S_EFF_W": w.s_eff, "S_EFF_L": l.s_eff,
        "C_W": w.collision_probability, "C_L": l.collision_probability,
        "B_W": w.throughput, "B_L": l.throughput,
    }


def node_rows(scenario: str, results: list[SeedResult], axis: str | None = None,
              axis_value: Any = None) -> list[NodeRow]:
    rows = []
    for res in results:
        acc = res.stats
        for node, m in zip(res.nodes, res.report.nodes):
            rows.append(NodeRow(
                scenario=scenario, axis=axis, axis_value=_fmt(axis_value), seed=res.seed,
                node_id=node.id, kind=node.kind.value, technology=m.technology,
                delta_ns=node.delta, phase_ns=node.phase, data_ns=node.data_duration,
                attempts=m.attempts, successes=m.successes, collisions=m.collisions,
                occupancy_ns=acc.occupancy_ns[node.id],
                success_occupancy_ns=acc.success_occupancy_ns[node.id],
                effective_ns=acc.effective_ns[node.id],
                total_elapsed_ns=acc.total_elapsed_ns,
                O=m.occupancy, S_COT=m.s_cot, S_EFF=m.s_eff, C=m.collision_probability,
            ))
    return rows


def summary_rows(scenario: str, results: list[SeedResult], axis: str | None = None,
                 axis_value: Any = None) -> list[SummaryRow]:
    if not results:
        return []
    first = results[0]
    common = dict(
        scenario=scenario, axis=axis, axis_value=_fmt(axis_value), n_seeds=len(results),
        rounds=first.stats.rounds,
        n_w=sum(n.kind.technology == "W" for n in first.nodes),
        n_l=sum(n.kind.technology == "L" for n in first.nodes),
    )
    per_seed = [seed_aggregates(r) for r in results]
    rows = [
        SummaryRow(row_type="seed", seed=r.seed, total_elapsed_ns=r.stats.total_elapsed_ns,
                   **common, **agg)
        for r, agg in zip(results, per_seed)
    ]
    means, halves = {}, {}
    for key in AGGREGATE_METRICS:
        means[key], halves[key] = mean_ci95([a[key] for a in per_seed if a[key] is not None])
    rows.append(SummaryRow(row_type="mean", **common, **means))
    rows.append(SummaryRow(row_type="ci95", **common, **halves))
    return rows


def build_document(scenario: str, points: list[tuple[Any, list[SeedResult]]],
                   axis: str | None = None) -> ResultsDocument:
    nodes, summary = [], []
    for value, results in points:
        nodes += node_rows(scenario, results, axis, value)
        summary += summary_rows(scenario, results, axis, value)
    return ResultsDocument(scenario=scenario, axis=axis, nodes=nodes, summary=summary)


def round_rows(scenario: str, points: list[tuple[Any, list[SeedResult]]]) -> list[RoundRow]:
    rows = []
    for value, results in points:
        for res in results:
            for rec in res.rounds_log or ():
                rows.append(_round_row(scenario, value, res.seed, rec))
    return rows


def _round_row(scenario: str, value: Any, seed: int, rec: RoundRecord) -> RoundRow:
    return RoundRow(scenario=scenario, axis_value=_fmt(value), seed=seed, round=rec.round,
                    t_ns=rec.start_ns, delta_ns=rec.delta_ns,
                    winners=" ".join(map(str, rec.winners)), kind=rec.kind)


def to_csv(rows: list[_Row], model: type[_Row]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    fields = list(model.model_fields)
    writer.writerow(fields)
    for row in rows:
        data = row.model_dump()
        writer.writerow(["" if data[f] is None else repr(data[f]) if isinstance(data[f], float)
                         else data[f] for f in fields])
    return buf.getvalue()


def read_csv(text: str, model: type[_Row]) -> list[_Row]:
    reader = csv.DictReader(io.StringIO(text))
    return [model.model_validate({k: (v if v != "" else None) for k, v in row.items()})
            for row in reader]


def write_outputs(doc: ResultsDocument, out_dir: Path, fmt: str,
                  rounds: list[RoundRow] | None = None) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "json":
        path = out_dir / "results.json"
        path.write_text(doc.model_dump_json(indent=2) + "\n")
        written.append(path)
    else:
        for name, rows, model in (("nodes.csv", doc.nodes, NodeRow),
                                  ("summary.csv", doc.summary, SummaryRow)):
            path = out_dir / name
            path.write_text(to_csv(rows, model), newline="")
            written.append(path)
    if rounds is not None:
        path = out_dir / "rounds.csv"
        path.write_text(to_csv(rounds, RoundRow), newline="")
        written.append(path)
    return written
