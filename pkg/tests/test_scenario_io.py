import json

import numpy as np
import pytest

from beaconpursuit import (
    ControlParams,
    Scenario,
    cb_cost_series,
    load_scenario,
    read_trajectory_csv,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    shape_names,
    shapes_from_positions_headings,
    simulate,
    write_trajectory_csv,
)
from beaconpursuit.errors import ParameterError
from beaconpursuit.geometry import AgentState, frame_from_heading, vec3
from beaconpursuit.scenario_io import trajectory_header


def agent_at(position, heading) -> AgentState:
    return AgentState(position=vec3(*position), frame=frame_from_heading(vec3(*heading)))


def pair_scenario(**kw) -> Scenario:
    defaults = dict(
        config_type="III",
        params=ControlParams(mu=0.9, lam=0.6, a=0.707, a0=-0.707, b=2.0),
        agents=[agent_at((3.3, 0.1, -5.2), (0, 1, 0)), agent_at((-3.3, 0, 5.2), (0, -1, 0))],
        dt=1e-3,
        t_final=0.05,
    )
    defaults.update(kw)
    return Scenario(**defaults)


def single_scenario(**kw) -> Scenario:
    defaults = dict(
        config_type="I",
        params=ControlParams(mu=1.0, lam=0.45, ab1=-0.156, ab2=-0.187, b=10.0),
        agents=[agent_at((8.4, 0, 3.9), (0, 1, 0))],
        dt=1e-3,
        t_final=0.05,
    )
    defaults.update(kw)
    return Scenario(**defaults)


MINIMAL_DOC = {
    "config_type": "II",
    "mu": 1.0,
    "lambda": 0.5,
    "a": -0.5,
    "a0": 0.0,
    "b": 0.0,
    "agents": [
        {"position": [3.0, 0.0, 0.0], "heading": [0.0, 1.0, 0.0]},
        {"position": [-3.0, 0.0, 0.0], "heading": [0.0, -1.0, 0.0]},
    ],
}


# --- scenario JSON ------------------------------------------------------------


def test_scenario_roundtrip(tmp_path):
    s = pair_scenario(record_stride=7, seed=42, description="spiral start")
    path = tmp_path / "scenario.json"
    save_scenario(s, path)
    back = load_scenario(path)
    assert back.config_type == s.config_type
    assert back.params == s.params
    assert back.dt == s.dt
    assert back.t_final == s.t_final
    assert back.record_stride == 7
    assert back.seed == 42
    assert back.description == "spiral start"
    for a, b in zip(s.agents, back.agents):
        assert np.array_equal(a.position, b.position)
        assert np.array_equal(a.frame.as_matrix(), b.frame.as_matrix())


def test_scenario_roundtrip_single(tmp_path):
    s = single_scenario()
    path = tmp_path / "scenario.json"
    save_scenario(s, path)
    back = load_scenario(path)
    assert back.params == s.params
    doc = json.loads(path.read_text())
    assert {"ab1", "ab2"} <= set(doc)
    assert "a" not in doc


def test_scenario_dict_uses_lambda_key():
    doc = scenario_to_dict(pair_scenario())
    assert "lambda" in doc and "lam" not in doc
    with pytest.raises(ParameterError):
        bad = dict(doc)
        bad["lam"] = bad.pop("lambda")
        scenario_from_dict(bad)


def test_scenario_from_dict_defaults():
    s = scenario_from_dict(MINIMAL_DOC)
    assert s.dt == 1e-3
    assert s.t_final == 200.0
    assert s.record_stride is None
    assert s.seed is None
    assert s.description == ""


def test_scenario_from_dict_rejects_unknown_keys():
    doc = dict(MINIMAL_DOC, extra=1)
    with pytest.raises(ParameterError):
        scenario_from_dict(doc)
    # Beacon-target keys of the wrong config family are unknown too.
    doc = dict(MINIMAL_DOC)
    doc["ab1"] = -0.2
    with pytest.raises(ParameterError):
        scenario_from_dict(doc)


def test_scenario_from_dict_rejects_missing_and_bad_types():
    doc = {k: v for k, v in MINIMAL_DOC.items() if k != "mu"}
    with pytest.raises(ParameterError):
        scenario_from_dict(doc)
    with pytest.raises(ParameterError):
        scenario_from_dict(dict(MINIMAL_DOC, mu="1.0"))
    with pytest.raises(ParameterError):
        scenario_from_dict(dict(MINIMAL_DOC, record_stride=2.5))
    with pytest.raises(ParameterError):
        scenario_from_dict(dict(MINIMAL_DOC, record_stride=True))
    with pytest.raises(ParameterError):
        scenario_from_dict(dict(MINIMAL_DOC, seed=True))
    with pytest.raises(ParameterError):
        scenario_from_dict(dict(MINIMAL_DOC, description=3))
    with pytest.raises(ParameterError):
        scenario_from_dict(dict(MINIMAL_DOC, agents="nope"))
    with pytest.raises(ParameterError):
        scenario_from_dict(dict(MINIMAL_DOC, config_type="IV"))
    with pytest.raises(ParameterError):
        scenario_from_dict([1, 2, 3])


def test_scenario_from_dict_rejects_bad_agent_entries():
    doc = dict(MINIMAL_DOC)
    doc["agents"] = [dict(MINIMAL_DOC["agents"][0], extra=1), MINIMAL_DOC["agents"][1]]
    with pytest.raises(ParameterError):
        scenario_from_dict(doc)


def test_load_scenario_rejects_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ParameterError):
        load_scenario(path)


# --- trajectory CSV ------------------------------------------------------------


def test_csv_header_layout():
    traj = simulate(pair_scenario())
    cols = trajectory_header(traj)
    agent1 = ["r1x", "r1y", "r1z", "x1x", "x1y", "x1z", "u1", "v1"]
    agent2 = ["r2x", "r2y", "r2z", "x2x", "x2y", "x2z", "u2", "v2"]
    expected = ["t"] + agent1 + agent2 + list(shape_names("III"))
    expected += ["cb_cost_1", "cb_cost_2"]
    assert cols == expected

    single = trajectory_header(simulate(single_scenario()))
    assert single == ["t"] + agent1 + list(shape_names("I")) + ["cb_cost_1"]


def test_csv_roundtrip_exact(tmp_path):
    traj = simulate(pair_scenario())
    path = tmp_path / "run.csv"
    write_trajectory_csv(traj, path)
    table = read_trajectory_csv(path)
    assert np.array_equal(table.times, traj.times)
    assert np.array_equal(table.positions, traj.states[:, :, 0, :])
    assert np.array_equal(table.headings, traj.states[:, :, 1, :])
    assert np.array_equal(table.controls, traj.controls)
    assert np.array_equal(table.shapes, traj.shapes)
    assert np.array_equal(table.costs, cb_cost_series(traj))
    assert table.shape_names == shape_names("III")


def test_csv_reextraction_matches_shape_columns(tmp_path):
    for s in (pair_scenario(), single_scenario()):
        path = tmp_path / "run.csv"
        write_trajectory_csv(simulate(s), path)
        table = read_trajectory_csv(path)
        again = shapes_from_positions_headings(
            table.positions, table.headings, s.params.b
        )
        assert np.max(np.abs(again - table.shapes)) < 1e-12


def test_csv_bytes_deterministic(tmp_path):
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    write_trajectory_csv(simulate(pair_scenario()), p1)
    write_trajectory_csv(simulate(pair_scenario()), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_csv_read_rejects_bad_files(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("t,r1x\n")
    with pytest.raises(ParameterError):
        read_trajectory_csv(path)
    path.write_text("t,r1x\n1.0,2.0,3.0\n")
    with pytest.raises(ParameterError):
        read_trajectory_csv(path)
