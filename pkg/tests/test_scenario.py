from decimal import Decimal
from pathlib import Path

import pytest

from coexsim.model import MS, US, TechnologyKind
from coexsim.scenario import (
    ScenarioFileError,
    parse_scenario,
    parse_scenario_text,
    us_to_ns,
    validate_scenario,
)
from coexsim.sync import SyncMode

ROOT = Path(__file__).resolve().parents[1]

MINIMAL = """\
version: 1
name: minimal
seeds: [1]
groups:
  - kind: wifi
  - kind: nru
    delta_us: 9
"""


def write(tmp_path, text, name="s.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_minimal_file_gets_best_effort_defaults(tmp_path):
    spec = parse_scenario(write(tmp_path, MINIMAL))
    params, nodes, modes = spec.expand()
    assert (params.slot_sigma, params.sifs, params.sensing_cs) == (9 * US, 16 * US, 1 * US)
    assert spec.rounds == 100_000
    w, l = nodes
    assert w.kind is TechnologyKind.RANDOM_ACCESS and l.kind is TechnologyKind.SYNC_GAP
    assert (w.cls.p, w.cls.cw_min, w.cls.cw_max, w.cls.o_max) == (3, 15, 63, 2_528 * US)
    assert (w.data_duration, w.ack_duration, w.delta) == (2_528 * US, 50 * US, 0)
    assert (l.cls.p, l.cls.cw_min, l.cls.cw_max, l.cls.o_max) == (3, 15, 63, 8 * MS)
    assert (l.data_duration, l.delta, l.phase) == (6 * MS, 9 * US, 0)
    assert modes == [SyncMode.DESYNCHRONIZED] * 2


def test_override_extends_wifi_bursts(tmp_path):
    spec = parse_scenario(write(tmp_path, MINIMAL + "o_max_override: true\n"))
    w = spec.expand()[1][0]
    assert w.cls.o_max == 5_484 * US and w.data_duration == 5_400 * US


def test_delta_10us_rejected(tmp_path):
    with pytest.raises(ScenarioFileError, match="delta"):
        parse_scenario(write(tmp_path, MINIMAL.replace("delta_us: 9", "delta_us: 10")))


def test_missing_seeds_rejected_with_location(tmp_path):
    with pytest.raises(ScenarioFileError, match="seeds") as info:
        parse_scenario(write(tmp_path, MINIMAL.replace("seeds: [1]\n", "")))
    assert "Field required" in str(info.value)
    with pytest.raises(ScenarioFileError, match=r"s\.yaml:3: seeds: .*at least one seed"):
        parse_scenario(write(tmp_path, MINIMAL.replace("seeds: [1]", "seeds: []")))


def test_error_points_at_line(tmp_path):
    text = MINIMAL.replace("  - kind: nru", "  - kind: bluetooth")
    with pytest.raises(ScenarioFileError, match=r"s\.yaml:6: groups\.1\.kind"):
        parse_scenario(write(tmp_path, text))


def test_yaml_syntax_error(tmp_path):
    with pytest.raises(ScenarioFileError, match=r"s\.yaml:2:8: parse error: mapping values"):
        parse_scenario(write(tmp_path, "version: 1\nname: a: b\nseeds: [1]\n"))


def test_unknown_field_and_version(tmp_path):
    with pytest.raises(ScenarioFileError, match="speed"):
        parse_scenario_text(MINIMAL + "speed: 3\n")
    with pytest.raises(ScenarioFileError, match="version"):
        parse_scenario_text(MINIMAL.replace("version: 1", "version: 2"))


def test_empty_sweep_rejected():
    with pytest.raises(ScenarioFileError, match="at least one axis value"):
        parse_scenario_text(MINIMAL + "sweep:\n  axis: delta\n  values: []\n")


def test_bad_sweep_point_rejected(tmp_path):
    with pytest.raises(ScenarioFileError, match=r"delta=10"):
        parse_scenario(write(tmp_path, MINIMAL + "sweep:\n  axis: delta\n  values: [9, 10]\n"))


def test_sweep_axes():
    spec = parse_scenario_text(MINIMAL + "sweep:\n  axis: delta\n  values: [18, 1000]\n")
    points = spec.sweep_points()
    assert [v for v, _ in points] == [18, 1000]
    for value, point in points:
        _, nodes, _ = point.expand()
        assert nodes[0].delta == 0 and nodes[1].delta == value * US
        assert point.sweep is None

    spec = parse_scenario_text(MINIMAL + "sweep:\n  axis: nodes\n  values: [3]\n")
    _, nodes, _ = spec.sweep_points()[0][1].expand()
    assert [n.kind.technology for n in nodes] == ["W"] * 3 + ["L"] * 3
    assert [n.id for n in nodes] == list(range(6))

    spec = parse_scenario_text(MINIMAL + "sweep:\n  axis: mode\n  values: [synchronized]\n")
    assert spec.sweep_points()[0][1].expand()[2][1] is SyncMode.SYNCHRONIZED


def test_custom_class_fields():
    text = MINIMAL.replace("  - kind: wifi", "  - kind: wifi\n    cw_min: 3\n    cw_max: 3\n    data_us: 1000")
    w = parse_scenario_text(text).expand()[1][0]
    assert (w.cls.cw_min, w.cls.cw_max, w.data_duration) == (3, 3, 1 * MS)
    assert w.cls.name.endswith("+custom")


def test_validate_collects_every_problem():
    text = MINIMAL.replace("delta_us: 9", "delta_us: 10\n    data_us: 9000")
    errors = validate_scenario(parse_scenario_text(text))
    assert len(errors) == 2 and all(e.startswith("node 1:") for e in errors)


@pytest.mark.parametrize("value,ns", [("9", 9000), ("0.45", 450), ("2528", 2_528_000), (16, 16_000)])
def test_us_to_ns(value, ns):
    assert us_to_ns(value) == ns


def test_us_to_ns_rejects_sub_ns():
    with pytest.raises(ValueError):
        us_to_ns(Decimal("0.0001"))
    with pytest.raises(ValueError):
        us_to_ns("nine")


@pytest.mark.parametrize("path", sorted((ROOT / "scenarios").glob("*.yaml")), ids=lambda p: p.name)
def test_shipped_scenarios_valid(path):
    assert validate_scenario(parse_scenario(path)) == []
