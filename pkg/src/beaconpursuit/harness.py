"""Convergence detection, prediction-vs-run comparison, realizations.

This is the layer that closes the loop between the closed-form
equilibrium predictions and actual simulations: detect whether a run
has settled, average its trailing window into a steady shape, and score
it against a prediction quantity by quantity. It also realizes
predicted equilibria as world-coordinate initial conditions, which is
how the preset scenarios are built (the circling plane is placed
perpendicular to the z axis; any rigid rotation about that axis is
equivalent).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory
from .equilibria import EquilibriumPrediction
from .errors import NotConverged, ParameterError, TooShort
from .geometry import AgentState, frame_from_heading
from .shape_space import (
    BEARING_SLACK,
    ShapeStateI,
    ShapeStateII_III,
)

DEFAULT_WINDOW = 20.0
DEFAULT_CONV_TOL = 1e-4
DEFAULT_COMPARE_TOL = 0.01


def cb_cost(xbar: float, a: float) -> float:
    """Instantaneous pursuit cost (xbar - a)^2 / 2, in [0, 2]."""
    for name, v in (("xbar", xbar), ("a", a)):
        if not np.isfinite(v) or abs(v) > 1.0 + BEARING_SLACK:
            raise ParameterError(f"{name} = {v} outside [-1, 1]")
    return 0.5 * (xbar - a) ** 2


def cb_cost_series(traj: Trajectory) -> np.ndarray:
    """Per-snapshot pursuit costs, one column per agent.

    Mutual-pursuit agents are scored on their bearing toward the other
    agent. The single two-beacon agent gets one column: its two beacon
    costs combined with the same attention weights the control uses.
    """
    p = traj.scenario.params
    sh = traj.shapes
    if traj.scenario.config_type == "I":
        c = p.lam * 0.5 * (sh[:, 0] - p.ab1) ** 2
        c = c + (1.0 - p.lam) * 0.5 * (sh[:, 1] - p.ab2) ** 2
        return c.reshape(-1, 1)
    out = np.empty((sh.shape[0], 2))
    out[:, 0] = 0.5 * (sh[:, 0] - p.a) ** 2
    out[:, 1] = 0.5 * (sh[:, 1] - p.a) ** 2
    return out


@dataclass
class ConvergenceReport:
    """Trailing-window steadiness of a run's shape variables.

    converged holds iff no shape component strays from its trailing
    window mean by tol or more within that window. settle_time is the
    earliest recorded time from which the run stays within tol of the
    final means through the end (None when never). cb_cost_final sums
    the agents' pursuit costs, averaged over the window.
    """

    converged: bool
    settle_time: float | None
    steady_shape: ShapeStateI | ShapeStateII_III
    window_max_dev: float
    cb_cost_final: float
    window: float
    tol: float


def detect_convergence(
    traj: Trajectory,
    window: float = DEFAULT_WINDOW,
    tol: float = DEFAULT_CONV_TOL,
) -> ConvergenceReport:
    """Judge steadiness of the shape variables over the trailing window."""
    if window <= 0.0 or tol <= 0.0:
        raise ParameterError("window and tol must be positive")
    t = traj.times
    span = float(t[-1] - t[0])
    if span < 2.0 * window - 1e-12:
        raise TooShort(
            f"trajectory spans {span} time units, need at least {2.0 * window}"
        )
    mask = t >= t[-1] - window - 1e-12
    W = traj.shapes[mask]
    means = W.mean(axis=0)
    dev = float(np.max(np.abs(W - means)))
    converged = dev < tol

    # Earliest time from which every later snapshot stays within tol of
    # the final means; scan the in-tolerance flags from the tail.
    within = np.max(np.abs(traj.shapes - means), axis=1) < tol
    settle_time: float | None = None
    if within[-1]:
        idx = len(within) - 1
        while idx > 0 and within[idx - 1]:
            idx -= 1
        settle_time = float(t[idx])

    if traj.scenario.config_type == "I":
        steady: ShapeStateI | ShapeStateII_III = ShapeStateI.from_array(means)
    else:
        steady = ShapeStateII_III.from_array(means)
    cost = float(np.mean(np.sum(cb_cost_series(traj)[mask], axis=1)))
    return ConvergenceReport(
        converged=converged,
        settle_time=settle_time,
        steady_shape=steady,
        window_max_dev=dev,
        cb_cost_final=cost,
        window=window,
        tol=tol,
    )


@dataclass
class ComparisonReport:
    """Prediction-vs-run scorecard over the trailing window.

    Every fully determined predicted quantity is compared at relative
    tolerance; family (IC-determined) components are skipped, as are
    axis-dependent observables (radius, vertical offset) for coincident
    beacons, where the circling axis is set by the initial conditions
    rather than the beacon geometry.
    """

    prediction: EquilibriumPrediction
    convergence: ConvergenceReport
    predicted: dict[str, float]
    observed: dict[str, float]
    per_quantity_rel_error: dict[str, float]
    skipped: tuple[str, ...]
    tol: float
    passed: bool


def _window_position_stats(traj: Trajectory, window: float) -> tuple[float, float]:
    """Mean circling radius about the z axis and mean height of agent 1."""
    t = traj.times
    mask = t >= t[-1] - window - 1e-12
    pos = traj.states[mask, 0, 0, :]
    radius = float(np.mean(np.hypot(pos[:, 0], pos[:, 1])))
    height = float(np.mean(pos[:, 2]))
    return radius, height


def compare(
    traj: Trajectory,
    prediction: EquilibriumPrediction,
    tol: float = DEFAULT_COMPARE_TOL,
    window: float = DEFAULT_WINDOW,
    conv_tol: float = DEFAULT_CONV_TOL,
) -> ComparisonReport:
    """Score a converged run against one equilibrium prediction.

    Raises NotConverged when the trailing window still moves; existence
    of the prediction is required. Shape quantities come from the steady
    window means; radius and vertical offset come from world positions
    (config I measures the offset as distance below the upper beacon,
    config III as the plane height, matching the prediction semantics).
    """
    if not prediction.exists:
        raise ParameterError(
            f"{prediction.case_label} does not exist here: {prediction.reason}"
        )
    conv = detect_convergence(traj, window=window, tol=conv_tol)
    if not conv.converged:
        raise NotConverged(
            f"trailing window deviation {conv.window_max_dev:.3e} "
            f"at tolerance {conv.tol:.3e}"
        )
    p = traj.scenario.params
    config = traj.scenario.config_type
    radius_obs, height_obs = _window_position_stats(traj, window)

    predicted = prediction.quantities()
    observed: dict[str, float] = {}
    skipped: list[str] = []
    for name in predicted:
        if name in ("radius", "vertical_offset"):
            if config == "II":
                skipped.append(name)
                continue
            if name == "radius":
                observed[name] = radius_obs
            elif config == "I":
                observed[name] = p.b - height_obs
            else:
                observed[name] = height_obs
        else:
            observed[name] = float(getattr(conv.steady_shape, name))
    rel = {
        name: abs(observed[name] - predicted[name]) / max(abs(predicted[name]), 1e-12)
        for name in observed
    }
    return ComparisonReport(
        prediction=prediction,
        convergence=conv,
        predicted=predicted,
        observed=observed,
        per_quantity_rel_error=rel,
        skipped=tuple(skipped),
        tol=tol,
        passed=all(v < tol for v in rel.values()),
    )


# --- world-coordinate realizations ------------------------------------------


def _circle_state(radius: float, phase: float, height: float, flip: bool) -> AgentState:
    """Agent on a horizontal circle about the z axis, heading tangent.

    flip picks the antipodal point with the opposed tangent, which keeps
    both agents turning the same way around the axis.
    """
    c = math.cos(phase)
    s = math.sin(phase)
    sgn = -1.0 if flip else 1.0
    position = np.array([sgn * radius * c, sgn * radius * s, height])
    heading = np.array([-sgn * s, sgn * c, 0.0])
    return AgentState(position=position, frame=frame_from_heading(heading))


def equilibrium_states(
    prediction: EquilibriumPrediction,
    phase: float = 0.0,
    family: dict[str, float] | None = None,
    radial_scale: float = 1.0,
    vertical_scale: float = 1.0,
) -> list[AgentState]:
    """World-coordinate agent states realizing a predicted equilibrium.

    The circling plane(s) are placed perpendicular to the z axis at the
    predicted heights. Family cases take their free parameter through
    `family`: P4.1 accepts rho_1b1, P5.1 accepts z0 (the plane height);
    sensible defaults are used otherwise. radial_scale and
    vertical_scale inflate the circle and shift the heights, for initial
    conditions near (rather than on) the equilibrium.
    """
    if not prediction.exists:
        raise ParameterError(
            f"{prediction.case_label} does not exist here: {prediction.reason}"
        )
    family = dict(family or {})
    p = prediction.params
    label = prediction.case_label

    if prediction.config_type == "I":
        height = (p.b - prediction.vertical_offset) * vertical_scale
        return [_circle_state(prediction.radius * radial_scale, phase, height, False)]

    if label == "P4.1":
        q = float(family.pop("rho_1b1", 0.8 * prediction.rho))
        if family:
            raise ParameterError(f"unknown family parameters {sorted(family)}")
        half = prediction.rho / 2.0
        if q < half:
            raise ParameterError("P4.1 family needs rho_1b1 >= rho/2")
        height = math.sqrt(q * q - half * half) * vertical_scale
        r = half * radial_scale
        return [
            _circle_state(r, phase, height, False),
            _circle_state(r, phase, height, True),
        ]
    if label in ("P4.2a", "P4.2b"):
        if family:
            raise ParameterError(f"unknown family parameters {sorted(family)}")
        if prediction.xtilde < 0.0:
            r = (prediction.rho / 2.0) * radial_scale
            return [
                _circle_state(r, phase, 0.0, False),
                _circle_state(r, phase, 0.0, True),
            ]
        r = prediction.radius * radial_scale
        h = (prediction.rho / 2.0) * vertical_scale
        return [
            _circle_state(r, phase, h, False),
            _circle_state(r, phase, -h, False),
        ]

    if label == "P5.1":
        z0 = float(family.pop("z0", 0.2 * p.b))
        if family:
            raise ParameterError(f"unknown family parameters {sorted(family)}")
        r = (prediction.rho / 2.0) * radial_scale
        h = z0 * vertical_scale
        return [
            _circle_state(r, phase, h, False),
            _circle_state(r, phase, h, True),
        ]
    if family:
        raise ParameterError(f"unknown family parameters {sorted(family)}")
    z1 = prediction.rhat1 / (2.0 * p.b)
    z2 = prediction.rhat2 / (2.0 * p.b)
    r = prediction.radius * radial_scale
    if prediction.xtilde > 0.0:
        return [
            _circle_state(r, phase, z1 * vertical_scale, False),
            _circle_state(r, phase, z2 * vertical_scale, False),
        ]
    return [
        _circle_state(r, phase, z1 * vertical_scale, False),
        _circle_state(r, phase, z2 * vertical_scale, True),
    ]
