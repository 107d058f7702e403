"""Scenario JSON and trajectory CSV formats.

Scenario files are single JSON documents. Frames are never stored: each
agent carries only `heading`, and the transverse axes are completed
deterministically (y = unit(heading x k) with k = (0,0,1), falling back
to k = (0,1,0) for near-vertical headings; z = x cross y), so a file
fully determines a run.

Trajectory CSV: header row, then one row per snapshot with columns
t, per-agent r{i}x r{i}y r{i}z x{i}x x{i}y x{i}z u{i} v{i}, the shape
variables by name, then per-agent pursuit costs cb_cost_{i}. Floats are
printed with 17 significant digits so values round-trip exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .control_laws import ControlParams
from .dynamics import Scenario, Trajectory
from .errors import ParameterError
from .geometry import AgentState, as_vec3, frame_from_heading
from .harness import cb_cost_series
from .shape_space import extract_series_pair, extract_series_single, shape_names

_COMMON_KEYS = {
    "config_type",
    "mu",
    "lambda",
    "b",
    "dt",
    "t_final",
    "record_stride",
    "agents",
    "seed",
    "description",
}
_TARGET_KEYS = {"I": {"ab1", "ab2"}, "II": {"a", "a0"}, "III": {"a", "a0"}}


def scenario_to_dict(s: Scenario) -> dict:
    """JSON-ready document for a scenario; inverse of scenario_from_dict."""
    doc: dict = {"config_type": s.config_type, "mu": s.params.mu, "lambda": s.params.lam}
    if s.config_type == "I":
        doc["ab1"] = s.params.ab1
        doc["ab2"] = s.params.ab2
    else:
        doc["a"] = s.params.a
        doc["a0"] = s.params.a0
    doc["b"] = s.params.b
    doc["dt"] = s.dt
    doc["t_final"] = s.t_final
    doc["record_stride"] = s.record_stride
    doc["agents"] = [
        {
            "position": [float(v) for v in ag.position],
            "heading": [float(v) for v in ag.frame.x_axis],
        }
        for ag in s.agents
    ]
    if s.seed is not None:
        doc["seed"] = s.seed
    if s.description:
        doc["description"] = s.description
    return doc


def scenario_from_dict(doc: dict) -> Scenario:
    """Build and validate a scenario from its JSON document."""
    if not isinstance(doc, dict):
        raise ParameterError("scenario document must be a JSON object")
    config = doc.get("config_type")
    if config not in _TARGET_KEYS:
        raise ParameterError(f"config_type must be one of I, II, III, got {config!r}")
    allowed = _COMMON_KEYS | _TARGET_KEYS[config]
    unknown = set(doc) - allowed
    if unknown:
        raise ParameterError(f"unknown scenario keys {sorted(unknown)}")
    missing = {"mu", "lambda", "b", "agents"} - set(doc)
    if missing:
        raise ParameterError(f"missing scenario keys {sorted(missing)}")

    def num(key: str, default: float | None = None) -> float:
        v = doc.get(key, default)
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ParameterError(f"{key} must be a number, got {v!r}")
        return float(v)

    kwargs = dict(mu=num("mu"), lam=num("lambda"), b=num("b"))
    if config == "I":
        kwargs["ab1"] = num("ab1", 0.0)
        kwargs["ab2"] = num("ab2", 0.0)
    else:
        kwargs["a"] = num("a", 0.0)
        kwargs["a0"] = num("a0", 0.0)
    params = ControlParams(**kwargs)

    raw_agents = doc["agents"]
    if not isinstance(raw_agents, list):
        raise ParameterError("agents must be a list")
    agents = []
    for i, entry in enumerate(raw_agents):
        if not isinstance(entry, dict) or set(entry) != {"position", "heading"}:
            raise ParameterError(
                f"agent {i} must be an object with position and heading"
            )
        position = as_vec3(entry["position"])
        heading = as_vec3(entry["heading"])
        agents.append(
            AgentState(position=position, frame=frame_from_heading(heading))
        )

    stride = doc.get("record_stride")
    if stride is not None:
        if not isinstance(stride, int) or isinstance(stride, bool):
            raise ParameterError("record_stride must be an integer or null")
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise ParameterError("seed must be an integer or null")
    description = doc.get("description", "")
    if not isinstance(description, str):
        raise ParameterError("description must be a string")
    return Scenario(
        config_type=config,
        params=params,
        agents=agents,
        dt=num("dt", 1e-3),
        t_final=num("t_final", 200.0),
        record_stride=stride,
        seed=seed,
        description=description,
    )


def save_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2) + "\n")


def load_scenario(path: str | Path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ParameterError(f"malformed scenario JSON: {e}") from e
    return scenario_from_dict(doc)


# --- trajectory CSV ----------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_header(traj: Trajectory) -> list[str]:
    n = traj.states.shape[1]
    cols = ["t"]
    for i in range(1, n + 1):
        cols += [f"r{i}x", f"r{i}y", f"r{i}z", f"x{i}x", f"x{i}y", f"x{i}z", f"u{i}", f"v{i}"]
    cols += list(traj.shape_names)
    cols += [f"cb_cost_{i}" for i in range(1, (1 if n == 1 else 2) + 1)]
    return cols


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> None:
    """Write the snapshot table; identical inputs give identical bytes."""
    costs = cb_cost_series(traj)
    n = traj.states.shape[1]
    lines = [",".join(trajectory_header(traj))]
    for k in range(len(traj.times)):
        row = [_fmt(traj.times[k])]
        for i in range(n):
            row += [_fmt(v) for v in traj.states[k, i, 0]]
            row += [_fmt(v) for v in traj.states[k, i, 1]]
            row += [_fmt(traj.controls[k, i, 0]), _fmt(traj.controls[k, i, 1])]
        row += [_fmt(v) for v in traj.shapes[k]]
        row += [_fmt(v) for v in costs[k]]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class TrajectoryTable:
    """Parsed trajectory CSV: raw columns regrouped by meaning."""

    columns: list[str]
    times: np.ndarray
    positions: np.ndarray  # (k, n, 3)
    headings: np.ndarray  # (k, n, 3)
    controls: np.ndarray  # (k, n, 2)
    shape_names: tuple[str, ...]
    shapes: np.ndarray  # (k, m)
    costs: np.ndarray  # (k, n_costs)


def read_trajectory_csv(path: str | Path) -> TrajectoryTable:
    text = Path(path).read_text().strip().split("\n")
    if len(text) < 2:
        raise ParameterError("trajectory CSV has no data rows")
    columns = text[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in text[1:]])
    if data.shape[1] != len(columns):
        raise ParameterError("trajectory CSV rows do not match the header")
    n = sum(1 for c in columns if c.startswith("r") and c.endswith("x"))
    k = data.shape[0]
    times = data[:, 0]
    positions = np.empty((k, n, 3))
    headings = np.empty((k, n, 3))
    controls = np.empty((k, n, 2))
    for i in range(n):
        base = 1 + 8 * i
        positions[:, i] = data[:, base : base + 3]
        headings[:, i] = data[:, base + 3 : base + 6]
        controls[:, i] = data[:, base + 6 : base + 8]
    shape_start = 1 + 8 * n
    names = shape_names("I" if n == 1 else "II")
    shapes = data[:, shape_start : shape_start + len(names)]
    costs = data[:, shape_start + len(names) :]
    return TrajectoryTable(
        columns=columns,
        times=times,
        positions=positions,
        headings=headings,
        controls=controls,
        shape_names=names,
        shapes=shapes,
        costs=costs,
    )


def shapes_from_positions_headings(
    positions: np.ndarray, headings: np.ndarray, b: float
) -> np.ndarray:
    """Re-extract shape columns from exported positions and headings.

    Only the position and heading rows of the packed layout matter for
    extraction, so the transverse axes are left zeroed.
    """
    k, n = positions.shape[0], positions.shape[1]
    S = np.zeros((k, n, 4, 3))
    S[:, :, 0, :] = positions
    S[:, :, 1, :] = headings
    if n == 1:
        return extract_series_single(S, b)
    return extract_series_pair(S, b)
