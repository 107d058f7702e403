"""Scalar shape variables and their self-contained reduced dynamics.

The closed loop is invariant under rigid motions about the beacon axis,
so trajectories project onto a small set of scalars: bearing cosines,
separations, the heading alignment x̃ = x₁·x₂ and, when the two beacons
are distinct, the projections r̂ᵢ = rᵢ·b̂ and x̂ᵢ = xᵢ·b̂ onto the
beacon-to-beacon vector b̂ (length 2b).

Two reductions live here:

* single (config I): (x̄₁b₁, x̄₁b₂, ρ₁b₁, ρ₁b₂) for one agent and two
  beacons, closed via the law-of-cosines dot product between the two
  beacon rays;
* pair (configs II and III): the twelve variables (x̄₁, x̄₂, x̄₁b₁, x̄₂b₂,
  x̃, ρ, ρ₁b₁, ρ₂b₂, r̂₁, r̂₂, x̂₁, x̂₂), closed via four substituted dot
  products that follow from the closure identity r₁b₁ = b̂ + r₂b₂ + r.

The reduced right-hand sides are evaluated purely from shape values,
independently of the full-state integrator; agreement between the two
routes is checked by finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .control_laws import ControlParams
from .errors import (
    ConstraintViolation,
    DegenerateVector,
    ParameterError,
    TooShort,
)
from .geometry import AgentState

BEARING_SLACK = 1e-9  # round-off allowance on cosine ranges
DEGENERATE_NORM = 1e-12
COLLINEAR_MARGIN = 1e-12  # |cos| within this of 1 counts as on-axis

SHAPE_NAMES_I = ("xbar_1b1", "xbar_1b2", "rho_1b1", "rho_1b2")
SHAPE_NAMES_II_III = (
    "xbar1",
    "xbar2",
    "xbar_1b1",
    "xbar_2b2",
    "xtilde",
    "rho",
    "rho_1b1",
    "rho_2b2",
    "rhat1",
    "rhat2",
    "xhat1",
    "xhat2",
)


def shape_names(config_type: str) -> tuple[str, ...]:
    if config_type == "I":
        return SHAPE_NAMES_I
    if config_type in ("II", "III"):
        return SHAPE_NAMES_II_III
    raise ParameterError(f"unknown config type {config_type!r}")


def law_of_cosines_dot(rho_1b1: float, rho_1b2: float, b: float) -> float:
    """Cosine of the angle at the agent between the two beacon rays.

    The triangle has sides rho_1b1, rho_1b2 and 2b (the beacon
    separation). Saturated or violated triangle constraints are rejected:
    the reduced dynamics are not valid on the beacon axis.
    """
    if not (
        np.isfinite(rho_1b1)
        and np.isfinite(rho_1b2)
        and np.isfinite(b)
        and rho_1b1 > 0.0
        and rho_1b2 > 0.0
        and b >= 0.0
    ):
        raise ConstraintViolation(
            f"invalid triangle sides rho_1b1={rho_1b1}, rho_1b2={rho_1b2}, b={b}"
        )
    d = (rho_1b1 * rho_1b1 + rho_1b2 * rho_1b2 - 4.0 * b * b) / (
        2.0 * rho_1b1 * rho_1b2
    )
    if not (-1.0 < d < 1.0):
        raise ConstraintViolation(
            f"collinear agent-beacon geometry: beacon-ray cosine {d} not in (-1, 1)"
        )
    return float(d)


def _check_range(name: str, value: float, lo: float, hi: float, slack: float) -> None:
    if not np.isfinite(value) or value < lo - slack or value > hi + slack:
        raise ConstraintViolation(f"{name} = {value} outside [{lo}, {hi}]")


@dataclass
class ShapeStateI:
    """Shape of one agent relative to two beacons on the z axis.

    ``collinear`` marks an agent on the beacon axis (triangle constraints
    saturated); such states extract fine but their reduced dynamics are
    undefined and shape_rhs_I rejects them.
    """

    xbar_1b1: float
    xbar_1b2: float
    rho_1b1: float
    rho_1b2: float
    collinear: bool = False

    def __post_init__(self) -> None:
        _check_range("xbar_1b1", self.xbar_1b1, -1.0, 1.0, BEARING_SLACK)
        _check_range("xbar_1b2", self.xbar_1b2, -1.0, 1.0, BEARING_SLACK)
        for name in ("rho_1b1", "rho_1b2"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0.0:
                raise ConstraintViolation(f"{name} = {v} must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.xbar_1b1, self.xbar_1b2, self.rho_1b1, self.rho_1b2])

    @classmethod
    def from_array(cls, values: np.ndarray, collinear: bool = False) -> ShapeStateI:
        v = np.asarray(values, dtype=float)
        if v.shape != (4,):
            raise ParameterError(f"expected 4 shape values, got shape {v.shape}")
        return cls(*(float(x) for x in v), collinear=collinear)


@dataclass
class ShapeRatesI:
    """Time derivatives of ShapeStateI, same field order."""

    xbar_1b1: float
    xbar_1b2: float
    rho_1b1: float
    rho_1b2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.xbar_1b1, self.xbar_1b2, self.rho_1b1, self.rho_1b2])


@dataclass
class ShapeStateII_III:
    """Shape of a mutual-pursuit pair, with or without beacon separation.

    r̂ᵢ carries units of length squared and x̂ᵢ of length because b̂ is not
    normalized. For coincident beacons (b = 0) all four projections are
    identically zero.
    """

    xbar1: float
    xbar2: float
    xbar_1b1: float
    xbar_2b2: float
    xtilde: float
    rho: float
    rho_1b1: float
    rho_2b2: float
    rhat1: float
    rhat2: float
    xhat1: float
    xhat2: float

    def __post_init__(self) -> None:
        for name in ("xbar1", "xbar2", "xbar_1b1", "xbar_2b2", "xtilde"):
            _check_range(name, getattr(self, name), -1.0, 1.0, BEARING_SLACK)
        for name in ("rho", "rho_1b1", "rho_2b2"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0.0:
                raise ConstraintViolation(f"{name} = {v} must be positive")
        for name in ("rhat1", "rhat2", "xhat1", "xhat2"):
            if not np.isfinite(getattr(self, name)):
                raise ConstraintViolation(f"{name} must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in SHAPE_NAMES_II_III])

    @classmethod
    def from_array(cls, values: np.ndarray) -> ShapeStateII_III:
        v = np.asarray(values, dtype=float)
        if v.shape != (12,):
            raise ParameterError(f"expected 12 shape values, got shape {v.shape}")
        return cls(*(float(x) for x in v))


@dataclass
class ShapeRatesII_III:
    """Time derivatives of ShapeStateII_III, same field order."""

    xbar1: float
    xbar2: float
    xbar_1b1: float
    xbar_2b2: float
    xtilde: float
    rho: float
    rho_1b1: float
    rho_2b2: float
    rhat1: float
    rhat2: float
    xhat1: float
    xhat2: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in SHAPE_NAMES_II_III])


# --- extraction -----------------------------------------------------------


def _norms(v: np.ndarray, what: str) -> np.ndarray:
    n = np.sqrt(np.sum(v * v, axis=-1))
    if np.any(n <= DEGENERATE_NORM):
        raise DegenerateVector(f"{what} separation at or below {DEGENERATE_NORM}")
    return n


def extract_series_single(states: np.ndarray, b: float) -> np.ndarray:
    """Shape values (k, 4) from packed single-agent snapshots (k, 1, 4, 3)."""
    r1 = states[:, 0, 0, :]
    x1 = states[:, 0, 1, :]
    r1b1 = r1.copy()
    r1b1[:, 2] += b
    r1b2 = r1.copy()
    r1b2[:, 2] -= b
    q1 = _norms(r1b1, "agent-beacon")
    q2 = _norms(r1b2, "agent-beacon")
    out = np.empty((states.shape[0], 4))
    out[:, 0] = np.sum(x1 * r1b1, axis=1) / q1
    out[:, 1] = np.sum(x1 * r1b2, axis=1) / q2
    out[:, 2] = q1
    out[:, 3] = q2
    return out


def extract_series_pair(states: np.ndarray, b: float) -> np.ndarray:
    """Shape values (k, 12) from packed two-agent snapshots (k, 2, 4, 3)."""
    r1 = states[:, 0, 0, :]
    x1 = states[:, 0, 1, :]
    r2 = states[:, 1, 0, :]
    x2 = states[:, 1, 1, :]
    r = r1 - r2
    rho = _norms(r, "agent-agent")
    r1b1 = r1.copy()
    r1b1[:, 2] += b
    r2b2 = r2.copy()
    r2b2[:, 2] -= b
    q1 = _norms(r1b1, "agent-beacon")
    q2 = _norms(r2b2, "agent-beacon")
    out = np.empty((states.shape[0], 12))
    out[:, 0] = np.sum(x1 * r, axis=1) / rho
    out[:, 1] = -np.sum(x2 * r, axis=1) / rho
    out[:, 2] = np.sum(x1 * r1b1, axis=1) / q1
    out[:, 3] = np.sum(x2 * r2b2, axis=1) / q2
    out[:, 4] = np.sum(x1 * x2, axis=1)
    out[:, 5] = rho
    out[:, 6] = q1
    out[:, 7] = q2
    # b_hat = (0, 0, 2b), so the projections are 2b times the z components.
    out[:, 8] = 2.0 * b * r1[:, 2]
    out[:, 9] = 2.0 * b * r2[:, 2]
    out[:, 10] = 2.0 * b * x1[:, 2]
    out[:, 11] = 2.0 * b * x2[:, 2]
    return out


def extract_shape_I(agent: AgentState, b: float) -> ShapeStateI:
    """Shape variables of one agent against beacons at (0, 0, -b), (0, 0, +b).

    On-axis agents are flagged collinear rather than rejected; their
    reduced dynamics are undefined but the extraction itself is plain
    vector arithmetic.
    """
    S = np.empty((1, 1, 4, 3))
    S[0, 0, 0] = agent.position
    S[0, 0, 1] = agent.frame.x_axis
    S[0, 0, 2] = agent.frame.y_axis
    S[0, 0, 3] = agent.frame.z_axis
    vals = extract_series_single(S, b)[0]
    r1b1 = agent.position + np.array([0.0, 0.0, b])
    r1b2 = agent.position - np.array([0.0, 0.0, b])
    cosang = float(
        np.dot(r1b1, r1b2) / (np.linalg.norm(r1b1) * np.linalg.norm(r1b2))
    )
    return ShapeStateI.from_array(vals, collinear=abs(cosang) >= 1.0 - COLLINEAR_MARGIN)


def extract_shape_II_III(
    agents: list[AgentState] | tuple[AgentState, ...], b: float
) -> ShapeStateII_III:
    """Shape variables of a pair against beacons at (0, 0, -b), (0, 0, +b)."""
    if len(agents) != 2:
        raise ParameterError(f"expected 2 agents, got {len(agents)}")
    S = np.empty((1, 2, 4, 3))
    for i, ag in enumerate(agents):
        S[0, i, 0] = ag.position
        S[0, i, 1] = ag.frame.x_axis
        S[0, i, 2] = ag.frame.y_axis
        S[0, i, 3] = ag.frame.z_axis
    return ShapeStateII_III.from_array(extract_series_pair(S, b)[0])


# --- substituted dot products ---------------------------------------------


def constraint_dots(sh: ShapeStateII_III) -> tuple[float, float, float, float]:
    """The four dot products that close the pair reduction, unchecked.

    Returns (x₂·unit(r₁b₁), x₁·unit(r₂b₂), unit(r₁b₁)·unit(r),
    unit(r₂b₂)·unit(r)) expressed purely in shape variables via the
    closure identity r₁b₁ = b̂ + r₂b₂ + r.
    """
    v = sh.as_array().reshape(1, 12)
    d = _pair_dots(v)
    return (float(d[0, 0]), float(d[0, 1]), float(d[0, 2]), float(d[0, 3]))


def _pair_dots(V: np.ndarray) -> np.ndarray:
    xbar1 = V[:, 0]
    xbar2 = V[:, 1]
    xbar_1b1 = V[:, 2]
    xbar_2b2 = V[:, 3]
    rho = V[:, 5]
    q1 = V[:, 6]
    q2 = V[:, 7]
    rhat1 = V[:, 8]
    rhat2 = V[:, 9]
    xhat1 = V[:, 10]
    xhat2 = V[:, 11]
    out = np.empty((V.shape[0], 4))
    out[:, 0] = (xhat2 + q2 * xbar_2b2 - rho * xbar2) / q1
    out[:, 1] = (-xhat1 + q1 * xbar_1b1 - rho * xbar1) / q2
    out[:, 2] = (q1 * q1 + rho * rho - q2 * q2 - 2.0 * rhat2) / (2.0 * rho * q1)
    out[:, 3] = (q1 * q1 - rho * rho - q2 * q2 - 2.0 * rhat1) / (2.0 * rho * q2)
    return out


_PAIR_DOT_NAMES = (
    "x2.unit(r1b1)",
    "x1.unit(r2b2)",
    "unit(r1b1).unit(r)",
    "unit(r2b2).unit(r)",
)


# --- reduced right-hand sides ---------------------------------------------


def _validate_single_values(V: np.ndarray) -> None:
    if not np.all(np.isfinite(V)):
        raise ConstraintViolation("non-finite shape values")
    for j, name in enumerate(SHAPE_NAMES_I[:2]):
        bad = np.abs(V[:, j]) > 1.0 + BEARING_SLACK
        if np.any(bad):
            i = int(np.argmax(bad))
            raise ConstraintViolation(f"{name} = {V[i, j]} outside [-1, 1]")
    for j, name in enumerate(SHAPE_NAMES_I[2:], start=2):
        if np.any(V[:, j] <= 0.0):
            i = int(np.argmax(V[:, j] <= 0.0))
            raise ConstraintViolation(f"{name} = {V[i, j]} must be positive")


def _rhs_single_arrays(V: np.ndarray, p: ControlParams) -> np.ndarray:
    """Reduced dynamics for config I on stacked shape values (k, 4)."""
    _validate_single_values(V)
    xb1 = V[:, 0]
    xb2 = V[:, 1]
    q1 = V[:, 2]
    q2 = V[:, 3]
    d = (q1 * q1 + q2 * q2 - 4.0 * p.b * p.b) / (2.0 * q1 * q2)
    inside = (-1.0 < d) & (d < 1.0)
    if not np.all(inside):
        i = int(np.argmax(~inside))
        raise ConstraintViolation(
            f"collinear agent-beacon geometry at row {i}: beacon-ray cosine {d[i]}"
        )
    c1 = p.lam * p.mu * (xb1 - p.ab1)
    c2 = (1.0 - p.lam) * p.mu * (xb2 - p.ab2)
    out = np.empty_like(V)
    out[:, 0] = -c2 * (d - xb1 * xb2) - (c1 - 1.0 / q1) * (1.0 - xb1 * xb1)
    out[:, 1] = -c1 * (d - xb1 * xb2) - (c2 - 1.0 / q2) * (1.0 - xb2 * xb2)
    out[:, 2] = xb1
    out[:, 3] = xb2
    return out


def _validate_pair_values(V: np.ndarray, b: float) -> None:
    if not np.all(np.isfinite(V)):
        raise ConstraintViolation("non-finite shape values")
    for j, name in enumerate(SHAPE_NAMES_II_III[:5]):
        bad = np.abs(V[:, j]) > 1.0 + BEARING_SLACK
        if np.any(bad):
            i = int(np.argmax(bad))
            raise ConstraintViolation(f"{name} = {V[i, j]} outside [-1, 1]")
    for j in (5, 6, 7):
        if np.any(V[:, j] <= 0.0):
            i = int(np.argmax(V[:, j] <= 0.0))
            raise ConstraintViolation(
                f"{SHAPE_NAMES_II_III[j]} = {V[i, j]} must be positive"
            )
    lim = 2.0 * b + BEARING_SLACK * max(1.0, 2.0 * b)
    for j in (10, 11):
        bad = np.abs(V[:, j]) > lim
        if np.any(bad):
            i = int(np.argmax(bad))
            raise ConstraintViolation(
                f"{SHAPE_NAMES_II_III[j]} = {V[i, j]} exceeds |b_hat| = {2.0 * b}"
            )


def _rhs_pair_arrays(V: np.ndarray, p: ControlParams) -> np.ndarray:
    """Reduced dynamics for configs II/III on stacked shape values (k, 12)."""
    _validate_pair_values(V, p.b)
    dots = _pair_dots(V)
    bad = np.abs(dots) > 1.0 + BEARING_SLACK
    if np.any(bad):
        i, j = np.unravel_index(int(np.argmax(bad)), bad.shape)
        raise ConstraintViolation(
            f"substituted dot {_PAIR_DOT_NAMES[j]} = {dots[i, j]} at row {i} "
            "outside [-1, 1]"
        )
    d20 = dots[:, 0]
    d21 = dots[:, 1]
    d22 = dots[:, 2]
    d23 = dots[:, 3]
    xbar1 = V[:, 0]
    xbar2 = V[:, 1]
    xb1 = V[:, 2]
    xb2 = V[:, 3]
    xt = V[:, 4]
    rho = V[:, 5]
    q1 = V[:, 6]
    q2 = V[:, 7]
    rhat1 = V[:, 8]
    rhat2 = V[:, 9]
    xhat1 = V[:, 10]
    xhat2 = V[:, 11]
    ca1 = (1.0 - p.lam) * p.mu * (xbar1 - p.a)
    ca2 = (1.0 - p.lam) * p.mu * (xbar2 - p.a)
    cb1 = p.lam * p.mu * (xb1 - p.a0)
    cb2 = p.lam * p.mu * (xb2 - p.a0)
    bb = p.b * p.b
    out = np.empty_like(V)
    out[:, 0] = (
        -ca1 * (1.0 - xbar1 * xbar1)
        - cb1 * (d22 - xb1 * xbar1)
        + (1.0 - xt - xbar1 * xbar1 - xbar1 * xbar2) / rho
    )
    out[:, 1] = (
        -ca2 * (1.0 - xbar2 * xbar2)
        - cb2 * (-d23 - xb2 * xbar2)
        + (1.0 - xt - xbar2 * xbar2 - xbar1 * xbar2) / rho
    )
    out[:, 2] = -ca1 * (d22 - xb1 * xbar1) - (cb1 - 1.0 / q1) * (1.0 - xb1 * xb1)
    out[:, 3] = -ca2 * (-d23 - xb2 * xbar2) - (cb2 - 1.0 / q2) * (1.0 - xb2 * xb2)
    out[:, 4] = (
        ca1 * (xbar2 + xt * xbar1)
        + ca2 * (xbar1 + xt * xbar2)
        - cb1 * (d20 - xb1 * xt)
        - cb2 * (d21 - xb2 * xt)
    )
    out[:, 5] = xbar1 + xbar2
    out[:, 6] = xb1
    out[:, 7] = xb2
    out[:, 8] = xhat1
    out[:, 9] = xhat2
    out[:, 10] = (
        -(ca1 / rho + cb1 / q1) * rhat1
        + (ca1 / rho) * rhat2
        - 2.0 * cb1 * bb / q1
        + (ca1 * xbar1 + cb1 * xb1) * xhat1
    )
    out[:, 11] = (
        -(ca2 / rho + cb2 / q2) * rhat2
        + (ca2 / rho) * rhat1
        + 2.0 * cb2 * bb / q2
        + (ca2 * xbar2 + cb2 * xb2) * xhat2
    )
    return out


def shape_rhs_I(sh: ShapeStateI, p: ControlParams) -> ShapeRatesI:
    """Reduced dynamics of config I at one shape point.

    Rejects collinear (on-axis) states: the beacon-ray cosine must lie
    strictly inside (-1, 1).
    """
    if sh.collinear:
        raise ConstraintViolation("agent flagged collinear with the beacons")
    rates = _rhs_single_arrays(sh.as_array().reshape(1, 4), p)[0]
    return ShapeRatesI(*(float(x) for x in rates))


def shape_rhs_II_III(sh: ShapeStateII_III, p: ControlParams) -> ShapeRatesII_III:
    """Reduced dynamics of configs II/III at one shape point.

    The four substituted dot products must lie in [-1, 1] within a 1e-9
    slack; boundary values (collinear arrangements) are legitimate
    equilibria and pass.
    """
    rates = _rhs_pair_arrays(sh.as_array().reshape(1, 12), p)[0]
    return ShapeRatesII_III(*(float(x) for x in rates))


def shape_rhs_series(V: np.ndarray, config_type: str, p: ControlParams) -> np.ndarray:
    """Reduced dynamics on stacked shape rows, dispatched by config type."""
    if config_type == "I":
        return _rhs_single_arrays(np.asarray(V, dtype=float), p)
    if config_type in ("II", "III"):
        return _rhs_pair_arrays(np.asarray(V, dtype=float), p)
    raise ParameterError(f"unknown config type {config_type!r}")


# --- finite-difference consistency ----------------------------------------


@dataclass
class FiniteDifferenceReport:
    """Agreement between differentiated extractions and the reduced rhs.

    max_abs_error is over all interior snapshots and components;
    per_component maps shape names to their own maxima. The error is
    dominated by the central-difference truncation, so it shrinks as h².
    """

    h: float
    n_points: int
    max_abs_error: float
    per_component: dict[str, float]


def finite_difference_check(traj) -> FiniteDifferenceReport:
    """Differentiate a trajectory's shape columns and compare to the rhs.

    Uses central differences at the recording stride, evaluated at every
    interior snapshot. Needs at least three snapshots on a uniform grid.
    """
    times = traj.times
    if len(times) < 3:
        raise TooShort("need at least 3 snapshots for central differences")
    steps = np.diff(times)
    h = float(steps[0])
    if np.any(np.abs(steps - h) > 1e-9 * max(1.0, h)):
        raise ParameterError("snapshots are not uniformly spaced")
    vals = traj.shapes
    fd = (vals[2:] - vals[:-2]) / (2.0 * h)
    rhs = shape_rhs_series(
        vals[1:-1], traj.scenario.config_type, traj.scenario.params
    )
    err = np.abs(fd - rhs)
    names = shape_names(traj.scenario.config_type)
    return FiniteDifferenceReport(
        h=h,
        n_points=err.shape[0],
        max_abs_error=float(np.max(err)),
        per_component={n: float(np.max(err[:, j])) for j, n in enumerate(names)},
    )
