"""Closed-form circling equilibria and algebraic residual verification.

Each supported configuration admits relative equilibria in shape space
where every bearing cosine vanishes and the separations hold steady: the
agents trace circles about the beacon axis. The predictors below emit
one verdict per known case, evaluated independently (a parameter set may
satisfy several cases at once, and genuinely does for the two-sided
case_label "b" pair). Nothing is searched numerically; every value is a
closed form, and `residual` certifies a prediction by evaluating the
reduced dynamics at the predicted shape and checking that every
derivative vanishes.

Conventions: weighted targets enter through s± = mu*(w1 ± w2) where
(w1, w2) are the attention-weighted bearing targets of the two steering
terms. Case families that leave components to the initial conditions
carry `free` names and textual `relations` instead of fabricated
numbers; `family_members` instantiates valid representatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .control_laws import ControlParams
from .errors import ParameterError
from .shape_space import (
    SHAPE_NAMES_I,
    SHAPE_NAMES_II_III,
    ShapeStateI,
    ShapeStateII_III,
    shape_rhs_I,
    shape_rhs_II_III,
)

CASE_LABELS = (
    "P3.1a",
    "P3.1b",
    "P4.1",
    "P4.2a",
    "P4.2b",
    "P5.1",
    "P5.2a",
    "P5.2b_plus",
    "P5.2b_minus",
    "P5.2c",
    "P5.2d",
)

# Relative tolerance deciding razor-edge case boundaries (target equality).
BOUNDARY_TOL = 1e-12

RESIDUAL_TOL = 1e-9  # scaled by mu at evaluation time


def _close(x: float, y: float) -> bool:
    return abs(x - y) <= BOUNDARY_TOL * max(1.0, abs(x), abs(y))


@dataclass(frozen=True)
class EquilibriumPrediction:
    """One case verdict: existence, steady shape values, derived geometry.

    Fields left None are not defined by the case (or not defined for the
    config, like a vertical offset with coincident beacons). Components
    the case leaves to the initial conditions are named in `free`, tied
    together by the textual `relations`, and instantiated on demand via
    `shape(...)` or `family_members(...)`.

    vertical_offset is the axial position of agent 1's circling plane:
    for config I the distance from the upper beacon along the axis, for
    config III the plane's z coordinate (rhat1 / (2b)).
    """

    case_label: str
    config_type: str
    exists: bool
    params: ControlParams
    reason: str = ""
    xtilde: float | None = None
    rho: float | None = None
    rho_1b1: float | None = None
    rho_1b2: float | None = None
    rho_2b2: float | None = None
    rhat1: float | None = None
    rhat2: float | None = None
    rho_plus: float | None = None
    rho_minus: float | None = None
    phi: float | None = None
    radius: float | None = None
    vertical_offset: float | None = None
    free: tuple[str, ...] = ()
    relations: tuple[str, ...] = ()

    def quantities(self) -> dict[str, float]:
        """Fully determined steady quantities, for comparison against runs."""
        out: dict[str, float] = {}
        for name in (
            "xtilde",
            "rho",
            "rho_1b1",
            "rho_1b2",
            "rho_2b2",
            "rhat1",
            "rhat2",
            "radius",
            "vertical_offset",
        ):
            v = getattr(self, name)
            if v is not None and name not in self.free:
                out[name] = float(v)
        return out

    def shape(self, **family: float) -> ShapeStateI | ShapeStateII_III:
        """Concrete shape state at the equilibrium.

        Family cases need their free components supplied by keyword;
        dependent components follow from the case's relations. All
        bearing cosines are zero at these equilibria.
        """
        if not self.exists:
            raise ParameterError(
                f"{self.case_label} does not exist here: {self.reason}"
            )
        vals = {
            "rho": self.rho,
            "rho_1b1": self.rho_1b1,
            "rho_2b2": self.rho_2b2,
            "rhat1": self.rhat1,
            "rhat2": self.rhat2,
        }
        for k, v in family.items():
            if k not in self.free:
                raise ParameterError(
                    f"{k} is not a free component of {self.case_label}"
                )
            vals[k] = float(v)
        if self.case_label == "P4.1":
            if vals["rho_1b1"] is None:
                raise ParameterError("P4.1 family needs rho_1b1")
            vals["rho_2b2"] = vals["rho_1b1"]
        elif self.case_label == "P5.1":
            if vals["rho_1b1"] is None or vals["rhat1"] is None:
                raise ParameterError("P5.1 family needs rho_1b1 and rhat1")
            vals["rhat2"] = vals["rhat1"]
            inner = vals["rho_1b1"] ** 2 - 2.0 * vals["rhat1"]
            if inner <= 0.0:
                raise ParameterError(
                    "rho_1b1 and rhat1 violate rho_1b1^2 - 2*rhat1 > 0"
                )
            vals["rho_2b2"] = math.sqrt(inner)
        if self.config_type == "I":
            return ShapeStateI(
                xbar_1b1=0.0,
                xbar_1b2=0.0,
                rho_1b1=self.rho_1b1,
                rho_1b2=self.rho_1b2,
            )
        return ShapeStateII_III(
            xbar1=0.0,
            xbar2=0.0,
            xbar_1b1=0.0,
            xbar_2b2=0.0,
            xtilde=self.xtilde,
            rho=vals["rho"],
            rho_1b1=vals["rho_1b1"],
            rho_2b2=vals["rho_2b2"],
            rhat1=vals["rhat1"],
            rhat2=vals["rhat2"],
            xhat1=0.0,
            xhat2=0.0,
        )

    def family_members(self, n: int = 3) -> list[ShapeStateI | ShapeStateII_III]:
        """Concrete shape states covering the case; n samples for families.

        P4.1 samples the shared agent-beacon distance between just above
        its collinear floor (rho/2) and well beyond it; P5.1 sweeps the
        circling plane's height between the beacons. Determined cases
        return their single shape.
        """
        if not self.exists:
            raise ParameterError(
                f"{self.case_label} does not exist here: {self.reason}"
            )
        if n < 1:
            raise ParameterError("need at least one family member")
        if self.case_label == "P4.1":
            fracs = np.linspace(0.55, 1.5, n)
            return [self.shape(rho_1b1=float(f) * self.rho) for f in fracs]
        if self.case_label == "P5.1":
            b = self.params.b
            heights = np.linspace(-0.4 * b, 0.45 * b, n)
            return [
                self.shape(
                    rhat1=2.0 * b * float(z),
                    rho_1b1=math.hypot(self.rho / 2.0, float(z) + b),
                )
                for z in heights
            ]
        return [self.shape()]


@dataclass
class ResidualReport:
    """Reduced-dynamics residual at a predicted equilibrium."""

    case_label: str
    max_abs_derivative: float
    per_component: dict[str, float]
    tolerance: float
    passed: bool
    n_members: int = 1


def residual(
    prediction: EquilibriumPrediction,
    p: ControlParams | None = None,
    n_family: int = 3,
    tolerance: float | None = None,
) -> ResidualReport:
    """Evaluate the reduced dynamics at a prediction's shape values.

    A true equilibrium zeroes every shape derivative; the report passes
    iff the largest magnitude stays below the tolerance (1e-9 scaled by
    mu unless overridden). Families are sampled at n_family members and
    all must pass at once.
    """
    if p is None:
        p = prediction.params
    if not prediction.exists:
        raise ParameterError(
            f"cannot verify {prediction.case_label}: {prediction.reason}"
        )
    tol = tolerance if tolerance is not None else RESIDUAL_TOL * p.mu
    members = prediction.family_members(n_family)
    names = SHAPE_NAMES_I if prediction.config_type == "I" else SHAPE_NAMES_II_III
    per = {n: 0.0 for n in names}
    worst = 0.0
    for m in members:
        if isinstance(m, ShapeStateI):
            rates = shape_rhs_I(m, p).as_array()
        else:
            rates = shape_rhs_II_III(m, p).as_array()
        mags = np.abs(rates)
        worst = max(worst, float(np.max(mags)))
        for j, n in enumerate(names):
            per[n] = max(per[n], float(mags[j]))
    return ResidualReport(
        case_label=prediction.case_label,
        max_abs_derivative=worst,
        per_component=per,
        tolerance=tol,
        passed=worst < tol,
        n_members=len(members),
    )


# --- config I: one agent, two beacons --------------------------------------


def predict_config_I(p: ControlParams) -> list[EquilibriumPrediction]:
    """Case verdicts for the single-agent two-beacon loop.

    Case a: equal weighted targets, a circle in the mid-plane between
    the beacons. Case b: any negative weighted-target sum; the circling
    plane sits off-center, located through the sum/difference variables
    rho_plus = rho_1b1 + rho_1b2 and rho_minus = rho_1b2 - rho_1b1.
    """
    if p.b <= 0.0:
        raise ParameterError(
            "distinct beacons (b > 0) required: the circling plane offset "
            "divides by the beacon separation"
        )
    w1 = p.lam * p.ab1
    w2 = (1.0 - p.lam) * p.ab2
    preds = []

    base = dict(case_label="P3.1a", config_type="I", params=p)
    if not _close(w1, w2):
        preds.append(
            EquilibriumPrediction(
                exists=False,
                reason="requires lam*ab1 = (1-lam)*ab2",
                **base,
            )
        )
    elif not w1 < 0.0:
        preds.append(
            EquilibriumPrediction(
                exists=False,
                reason="requires lam*ab1 < 0",
                **base,
            )
        )
    else:
        g = p.mu * w1
        q = (1.0 + math.sqrt(1.0 + (4.0 * g * p.b) ** 2)) / (-4.0 * g)
        preds.append(
            EquilibriumPrediction(
                exists=True,
                rho_1b1=q,
                rho_1b2=q,
                rho_plus=2.0 * q,
                rho_minus=0.0,
                radius=math.sqrt(q * q - p.b * p.b),
                vertical_offset=p.b,
                **base,
            )
        )

    base = dict(case_label="P3.1b", config_type="I", params=p)
    s_plus = p.mu * (w1 + w2)
    if not s_plus < 0.0:
        preds.append(
            EquilibriumPrediction(
                exists=False,
                reason="requires lam*ab1 + (1-lam)*ab2 < 0",
                **base,
            )
        )
    else:
        s_minus = p.mu * (w1 - w2)
        rp = (1.0 + math.sqrt(1.0 + (2.0 * p.b * s_plus) ** 2)) / (-s_plus)
        # Algebraically (sqrt(1+(2b s)^2) - 1)/(-s); this form is exact at
        # s_minus = 0 and avoids the cancellation there.
        rm = -4.0 * p.b * p.b * s_minus / (
            math.sqrt(1.0 + (2.0 * p.b * s_minus) ** 2) + 1.0
        )
        q1 = (rp - rm) / 2.0
        q2 = (rp + rm) / 2.0
        r13 = rp * rm / (4.0 * p.b) + p.b
        preds.append(
            EquilibriumPrediction(
                exists=True,
                rho_1b1=q1,
                rho_1b2=q2,
                rho_plus=rp,
                rho_minus=rm,
                radius=math.sqrt(q2 * q2 - r13 * r13),
                vertical_offset=r13,
                **base,
            )
        )
    return preds


# --- config II: mutual pursuit, coincident beacons --------------------------


def predict_config_II(p: ControlParams) -> list[EquilibriumPrediction]:
    """Case verdicts for mutual pursuit with a single shared beacon.

    With no beacon attention target (a0 = 0) the equilibrium is a
    one-parameter family: antipodal circling at any common distance from
    the beacon axis. With a0 != 0 the distance locks (collinear case a)
    or the headings align and the pair stacks along the axis (case b).
    """
    if p.b != 0.0:
        raise ParameterError("coincident beacons (b = 0) required")
    preds = []

    base = dict(case_label="P4.1", config_type="II", params=p)
    if p.a0 != 0.0:
        preds.append(
            EquilibriumPrediction(exists=False, reason="requires a0 = 0", **base)
        )
    elif not p.a < 0.0:
        preds.append(
            EquilibriumPrediction(exists=False, reason="requires a < 0", **base)
        )
    else:
        rho = 2.0 / ((1.0 - p.lam) * p.mu * (-p.a))
        preds.append(
            EquilibriumPrediction(
                exists=True,
                xtilde=-1.0,
                rho=rho,
                rhat1=0.0,
                rhat2=0.0,
                radius=rho / 2.0,
                free=("rho_1b1", "rho_2b2"),
                relations=("rho_2b2 = rho_1b1", "rho_1b1 >= rho/2"),
                **base,
            )
        )

    s_plus = p.mu * ((1.0 - p.lam) * p.a + p.lam * p.a0)

    base = dict(case_label="P4.2a", config_type="II", params=p)
    if p.a0 == 0.0:
        preds.append(
            EquilibriumPrediction(exists=False, reason="requires a0 != 0", **base)
        )
    elif not s_plus < 0.0:
        preds.append(
            EquilibriumPrediction(
                exists=False,
                reason="requires (1-lam)*a + lam*a0 < 0",
                **base,
            )
        )
    else:
        q = 1.0 / (-s_plus)
        preds.append(
            EquilibriumPrediction(
                exists=True,
                xtilde=-1.0,
                rho=2.0 * q,
                rho_1b1=q,
                rho_2b2=q,
                rhat1=0.0,
                rhat2=0.0,
                radius=q,
                **base,
            )
        )

    base = dict(case_label="P4.2b", config_type="II", params=p)
    reason = ""
    if p.a0 == 0.0:
        reason = "requires a0 != 0"
    elif not s_plus < 0.0:
        reason = "requires (1-lam)*a + lam*a0 < 0"
    elif not p.a0 < 0.0:
        reason = "requires a0 < 0"
    elif not p.a > 0.0:
        reason = "requires a > 0"
    if reason:
        preds.append(EquilibriumPrediction(exists=False, reason=reason, **base))
    else:
        denom = p.mu * (
            (1.0 - p.lam) ** 2 * p.a * p.a - p.lam**2 * p.a0 * p.a0
        )
        q = p.lam * p.a0 / denom
        rho = -2.0 * (1.0 - p.lam) * p.a / denom
        preds.append(
            EquilibriumPrediction(
                exists=True,
                xtilde=1.0,
                rho=rho,
                rho_1b1=q,
                rho_2b2=q,
                rhat1=0.0,
                rhat2=0.0,
                radius=math.sqrt(q * q - (rho / 2.0) ** 2),
                **base,
            )
        )
    return preds


# --- config III: mutual pursuit, distinct beacons ---------------------------


def predict_config_III(p: ControlParams) -> list[EquilibriumPrediction]:
    """Case verdicts for mutual pursuit with separated beacons.

    a0 = 0 reduces to the shared-beacon family lifted off the mid-plane
    (the plane height is set by initial conditions). a0 != 0 splits on
    the heading alignment: aligned pairs (xtilde = +1) stack along the
    axis with offsets controlled by Phi; opposed pairs (xtilde = -1)
    mirror across the mid-plane with the sum/difference variables
    rho_plus = rho/2 + rho_1b1, rho_minus = rho/2 - rho_1b1.
    """
    if p.b <= 0.0:
        raise ParameterError("distinct beacons (b > 0) required")
    preds = []

    base = dict(case_label="P5.1", config_type="III", params=p)
    if p.a0 != 0.0:
        preds.append(
            EquilibriumPrediction(exists=False, reason="requires a0 = 0", **base)
        )
    elif not p.a < 0.0:
        preds.append(
            EquilibriumPrediction(exists=False, reason="requires a < 0", **base)
        )
    else:
        rho = 2.0 / ((1.0 - p.lam) * p.mu * (-p.a))
        preds.append(
            EquilibriumPrediction(
                exists=True,
                xtilde=-1.0,
                rho=rho,
                radius=rho / 2.0,
                free=("rho_1b1", "rho_2b2", "rhat1", "rhat2", "vertical_offset"),
                relations=(
                    "rhat2 = rhat1",
                    "rho_1b1**2 - rho_2b2**2 = 2*rhat1",
                    "rho_1b1 >= rho/2",
                ),
                **base,
            )
        )

    A = (1.0 - p.lam) * p.a
    B = p.lam * p.a0
    denom = p.mu * (A * A - B * B)
    phi = A / denom if denom != 0.0 else math.inf
    phi_out = phi if (p.a0 != 0.0 and math.isfinite(phi)) else None

    def aligned(label: str, sign: float) -> EquilibriumPrediction:
        rho = 2.0 * (-phi + sign * p.b)
        rhat1 = 2.0 * p.b * (-p.b + sign * phi)
        q = (B / A) * phi
        axial = (rhat1 + 2.0 * p.b * p.b) / (2.0 * p.b)
        return EquilibriumPrediction(
            case_label=label,
            config_type="III",
            params=p,
            exists=True,
            xtilde=1.0,
            rho=rho,
            rho_1b1=q,
            rho_2b2=q,
            rhat1=rhat1,
            rhat2=-rhat1,
            phi=phi,
            radius=math.sqrt(q * q - axial * axial),
            vertical_offset=rhat1 / (2.0 * p.b),
        )

    base = dict(case_label="P5.2a", config_type="III", params=p)
    reason = ""
    if p.a0 == 0.0:
        reason = "requires a0 != 0"
    elif not p.a0 < 0.0:
        reason = "requires a0 < 0"
    elif not p.a < 0.0:
        reason = "requires a < 0"
    elif not denom < 0.0:
        reason = "requires (1-lam)^2*a^2 < lam^2*a0^2"
    elif not phi < p.b:
        reason = "requires Phi < b"
    if reason:
        preds.append(
            EquilibriumPrediction(exists=False, reason=reason, phi=phi_out, **base)
        )
    else:
        preds.append(aligned("P5.2a", +1.0))

    common = ""
    if p.a0 == 0.0:
        common = "requires a0 != 0"
    elif not p.a0 < 0.0:
        common = "requires a0 < 0"
    elif not p.a > 0.0:
        common = "requires a > 0"
    elif not denom < 0.0:
        common = "requires (1-lam)^2*a^2 < lam^2*a0^2"

    base = dict(case_label="P5.2b_plus", config_type="III", params=p)
    if common:
        preds.append(
            EquilibriumPrediction(exists=False, reason=common, phi=phi_out, **base)
        )
    else:
        preds.append(aligned("P5.2b_plus", +1.0))

    base = dict(case_label="P5.2b_minus", config_type="III", params=p)
    if common:
        preds.append(
            EquilibriumPrediction(exists=False, reason=common, phi=phi_out, **base)
        )
    elif not -phi > p.b:
        preds.append(
            EquilibriumPrediction(
                exists=False,
                reason="requires -Phi > b (positive separation)",
                phi=phi,
                **base,
            )
        )
    else:
        preds.append(aligned("P5.2b_minus", -1.0))

    equal_targets = _close(A, B)
    s_plus = p.mu * (A + B)
    s_minus = p.mu * (A - B)

    base = dict(case_label="P5.2c", config_type="III", params=p)
    reason = ""
    if p.a0 == 0.0:
        reason = "requires a0 != 0"
    elif not equal_targets:
        reason = "requires (1-lam)*a = lam*a0"
    elif not B < 0.0:
        reason = "requires lam*a0 < 0"
    if reason:
        preds.append(EquilibriumPrediction(exists=False, reason=reason, **base))
    else:
        s = 2.0 * p.lam * p.mu * p.a0
        rho = (1.0 + math.sqrt(1.0 + (s * p.b) ** 2)) / (-s)
        preds.append(
            EquilibriumPrediction(
                exists=True,
                xtilde=-1.0,
                rho=rho,
                rho_1b1=rho / 2.0,
                rho_2b2=rho / 2.0,
                rhat1=-p.b * p.b,
                rhat2=p.b * p.b,
                rho_plus=rho,
                rho_minus=0.0,
                radius=math.sqrt((rho / 2.0) ** 2 - (p.b / 2.0) ** 2),
                vertical_offset=-p.b / 2.0,
                **base,
            )
        )

    base = dict(case_label="P5.2d", config_type="III", params=p)
    reason = ""
    if p.a0 == 0.0:
        reason = "requires a0 != 0"
    elif not s_plus < 0.0:
        reason = "requires (1-lam)*a + lam*a0 < 0"
    elif equal_targets:
        reason = "requires (1-lam)*a != lam*a0"
    if reason:
        preds.append(EquilibriumPrediction(exists=False, reason=reason, **base))
    else:
        rp = (1.0 + math.sqrt(1.0 + (s_plus * p.b) ** 2)) / (-s_plus)
        # Algebraically (sqrt(1+(s b)^2) - 1)/s; exact at s_minus -> 0,
        # where this case degenerates to the equal-target one.
        rm = s_minus * p.b * p.b / (math.sqrt(1.0 + (s_minus * p.b) ** 2) + 1.0)
        rho = rp + rm
        q = (rp - rm) / 2.0
        rhat1 = -rp * rm - p.b * p.b
        axial = (rhat1 + 2.0 * p.b * p.b) / (2.0 * p.b)
        preds.append(
            EquilibriumPrediction(
                exists=True,
                xtilde=-1.0,
                rho=rho,
                rho_1b1=q,
                rho_2b2=q,
                rhat1=rhat1,
                rhat2=-rhat1,
                rho_plus=rp,
                rho_minus=rm,
                radius=math.sqrt(q * q - axial * axial),
                vertical_offset=rhat1 / (2.0 * p.b),
                **base,
            )
        )
    return preds


def predict(config_type: str, p: ControlParams) -> list[EquilibriumPrediction]:
    """All case verdicts for one configuration.

    Coincident beacons degenerate the two-beacon pair geometry to the
    shared-beacon one, so type III with b = 0 is answered by the
    shared-beacon cases; a shared-beacon request with b > 0 is an error.
    """
    if config_type == "I":
        return predict_config_I(p)
    if config_type == "II":
        return predict_config_II(p)
    if config_type == "III":
        if p.b == 0.0:
            return predict_config_II(p)
        return predict_config_III(p)
    raise ParameterError(f"unknown config type {config_type!r}")
