"""Vectors, orthonormal frames and particle states in R^3.

Every moving particle carries a right-handed orthonormal frame (x_axis,
y_axis, z_axis) whose first axis is the unit velocity. All vectors are
plain float64 numpy arrays of shape (3,); `vec3` is the validating
constructor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrame, DegenerateVector, ParameterError

Vec3 = np.ndarray

# Norms at or below this are treated as zero-length.
DEGENERATE_NORM = 1e-12
# Gram determinants at or below this mean the axes are effectively dependent.
GRAM_DET_MIN = 1e-9
# Frame axes must be orthonormal to within this tolerance.
FRAME_TOL = 1e-9

X_HAT = np.array([1.0, 0.0, 0.0])
Y_HAT = np.array([0.0, 1.0, 0.0])
Z_HAT = np.array([0.0, 0.0, 1.0])


def vec3(x: float, y: float, z: float) -> Vec3:
    """Build a float64 3-vector, rejecting non-finite components."""
    v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise ParameterError(f"vector components must be finite, got {v}")
    return v


def as_vec3(v) -> Vec3:
    """Coerce an arbitrary 3-sequence to a finite float64 vector."""
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ParameterError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ParameterError(f"vector components must be finite, got {a}")
    return a


def unit(v: Vec3) -> Vec3:
    """Return v / |v|.

    Raises DegenerateVector when |v| <= 1e-12; the result's norm is 1 to
    within one ulp.
    """
    n = float(np.linalg.norm(v))
    if n <= DEGENERATE_NORM:
        raise DegenerateVector(f"cannot normalize a vector of norm {n:.3e}")
    return v / n


def orthonormalize(x: Vec3, y: Vec3, z: Vec3) -> tuple[Vec3, Vec3, Vec3]:
    """Gram-Schmidt the axes, keeping the direction of x exactly.

    The input axes must be linearly independent (Gram determinant above
    1e-9), otherwise DegenerateFrame is raised. The output is orthonormal
    to machine precision, the map is idempotent there, and handedness is
    preserved: positive-diagonal triangular row operations cannot flip
    the sign of det[x, y, z].
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    gram = np.array(
        [
            [x @ x, x @ y, x @ z],
            [y @ x, y @ y, y @ z],
            [z @ x, z @ y, z @ z],
        ]
    )
    det = float(np.linalg.det(gram))
    if not np.isfinite(det) or det <= GRAM_DET_MIN:
        raise DegenerateFrame(f"axes nearly dependent (Gram determinant {det:.3e})")
    ex = unit(x)
    ey = unit(y - (y @ ex) * ex)
    ez = unit(z - (z @ ex) * ex - (z @ ey) * ey)
    return ex, ey, ez


@dataclass(eq=False)
class Frame:
    """Right-handed orthonormal triple of axes.

    Construction validates unit norms and mutual orthogonality to 1e-9 and
    requires x_axis . (y_axis x z_axis) > 0.
    """

    x_axis: Vec3
    y_axis: Vec3
    z_axis: Vec3

    def __post_init__(self) -> None:
        self.x_axis = as_vec3(self.x_axis)
        self.y_axis = as_vec3(self.y_axis)
        self.z_axis = as_vec3(self.z_axis)
        axes = (self.x_axis, self.y_axis, self.z_axis)
        for a in axes:
            if abs(float(np.linalg.norm(a)) - 1.0) > FRAME_TOL:
                raise DegenerateFrame(f"axis {a} is not unit length")
        for i in range(3):
            for j in range(i + 1, 3):
                if abs(float(axes[i] @ axes[j])) > FRAME_TOL:
                    raise DegenerateFrame(
                        f"axes {i} and {j} are not orthogonal (dot {axes[i] @ axes[j]:.3e})"
                    )
        if float(self.x_axis @ np.cross(self.y_axis, self.z_axis)) <= 0.0:
            raise DegenerateFrame("frame is left-handed")

    def as_matrix(self) -> np.ndarray:
        """Rows are (x_axis, y_axis, z_axis)."""
        return np.stack([self.x_axis, self.y_axis, self.z_axis])


def frame_from_heading(heading) -> Frame:
    """Complete a heading to a full frame.

    y_axis = unit(heading x k) with k = (0, 0, 1), falling back to
    k = (0, 1, 0) when the heading is within 1e-9 of vertical;
    z_axis = x_axis x y_axis.
    """
    x = unit(as_vec3(heading))
    c = np.cross(x, Z_HAT)
    if float(np.linalg.norm(c)) < 1e-9:
        c = np.cross(x, Y_HAT)
    y = unit(c)
    z = np.cross(x, y)
    return Frame(x, y, z)


@dataclass(eq=False)
class AgentState:
    """Position plus the particle's moving frame."""

    position: Vec3
    frame: Frame

    def __post_init__(self) -> None:
        self.position = as_vec3(self.position)
        if not isinstance(self.frame, Frame):
            raise ParameterError("frame must be a Frame instance")

    @property
    def heading(self) -> Vec3:
        return self.frame.x_axis
