"""Constant-bearing steering laws.

Each law produces a gyroscopic steering command (u, v): the particle's
acceleration is u * y_axis + v * z_axis, so speed is never altered. The
building block drives the bearing cosine xbar = heading . unit(r) toward
a commanded value ``a``, where r points from the reference point to the
particle. Composite laws blend one such term per reference point with a
fixed attention split.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .geometry import AgentState, Vec3, unit


@dataclass(frozen=True)
class SteeringCommand:
    """Curvature pair applied in the particle's own (y_axis, z_axis) plane."""

    u: float
    v: float


@dataclass(frozen=True)
class ControlParams:
    """Gains and bearing targets for the steering laws.

    mu > 0 is the overall gain, lam in (0, 1) the attention weight on the
    beacon term(s). Bearing parameters are cosines and must lie in
    [-1, 1]: `a` for the neighbor term and `a0` for the single-beacon
    term, or `ab1` / `ab2` for the two-beacon law. `b >= 0` is the half
    separation of the beacon pair at (0, 0, -b) and (0, 0, +b).
    """

    mu: float
    lam: float
    a: float = 0.0
    a0: float = 0.0
    ab1: float = 0.0
    ab2: float = 0.0
    b: float = 0.0

    def __post_init__(self) -> None:
        vals = [self.mu, self.lam, self.a, self.a0, self.ab1, self.ab2, self.b]
        if not all(np.isfinite(v) for v in vals):
            raise ParameterError(f"control parameters must be finite, got {self}")
        if self.mu <= 0.0:
            raise ParameterError(f"mu must be positive, got {self.mu}")
        if not 0.0 < self.lam < 1.0:
            raise ParameterError(f"lam must lie strictly inside (0, 1), got {self.lam}")
        for name in ("a", "a0", "ab1", "ab2"):
            val = getattr(self, name)
            if not -1.0 <= val <= 1.0:
                raise ParameterError(f"{name} is a bearing cosine and must lie in [-1, 1], got {val}")
        if self.b < 0.0:
            raise ParameterError(f"b must be nonnegative, got {self.b}")


def cb_control(agent: AgentState, target: Vec3, a: float, mu: float) -> SteeringCommand:
    """Single-reference constant-bearing law.

    With d = unit(agent.position - target):

        u = -mu (heading . d - a) (y_axis . d)
        v = -mu (heading . d - a) (z_axis . d)

    Only the direction of the baseline enters, so the law is bearing-only,
    and |u|, |v| <= 2 mu.
    """
    d = unit(agent.position - np.asarray(target, dtype=float))
    gain = -mu * (float(agent.frame.x_axis @ d) - a)
    return SteeringCommand(
        u=gain * float(agent.frame.y_axis @ d),
        v=gain * float(agent.frame.z_axis @ d),
    )


def beacon_referenced_control(
    agent: AgentState, other: Vec3, beacon: Vec3, p: ControlParams
) -> SteeringCommand:
    """Blend a neighbor-pursuit term with a beacon-holding term.

    Equals (1 - lam) * cb_control(agent, other, a, mu)
         + lam * cb_control(agent, beacon, a0, mu).
    """
    cn = cb_control(agent, other, p.a, p.mu)
    cb = cb_control(agent, beacon, p.a0, p.mu)
    w = p.lam
    return SteeringCommand(
        u=(1.0 - w) * cn.u + w * cb.u,
        v=(1.0 - w) * cn.v + w * cb.v,
    )


def two_beacon_control(
    agent: AgentState, beacon1: Vec3, beacon2: Vec3, p: ControlParams
) -> SteeringCommand:
    """Split attention between two fixed beacons.

    Equals (1 - lam) * cb_control(agent, beacon2, ab2, mu)
         + lam * cb_control(agent, beacon1, ab1, mu).
    """
    c2 = cb_control(agent, beacon2, p.ab2, p.mu)
    c1 = cb_control(agent, beacon1, p.ab1, p.mu)
    w = p.lam
    return SteeringCommand(
        u=(1.0 - w) * c2.u + w * c1.u,
        v=(1.0 - w) * c2.v + w * c1.v,
    )
