"""Minimal 3D vector/rotation algebra and the point-based rigid body configuration.

A pose is represented either as (position, rotation matrix) or as three world
frame points (p_o, p_x, p_y) at mutual unit distance, which is the
representation the rest of the library works in.  2D problems are embedded in
3D with z = 0 and rotation axes along +/- z.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Tolerance used when constructing objects internally.
CONSTRUCT_TOL = 1e-9
# Looser tolerance for externally supplied (file-parsed) poses.
INPUT_TOL = 1e-6


class InvalidInputError(ValueError):
    """Raised when an argument violates a documented precondition."""


class DegenerateConfigurationError(ValueError):
    """Raised when a point configuration has lost its rigidity invariants."""


def vec3(x, y=None, z=None) -> np.ndarray:
    """Build a finite 3-vector from components or any length-3 sequence."""
    if y is None:
        v = np.asarray(x, dtype=float)
    else:
        v = np.array([x, y, z], dtype=float)
    if v.shape != (3,):
        raise InvalidInputError(f"expected 3 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"non-finite vector {v}")
    return v


def unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise InvalidInputError("cannot normalize zero vector")
    return v / n


def check_rotation(R: np.ndarray, tol: float = CONSTRUCT_TOL) -> np.ndarray:
    """Validate that R is a proper rotation (orthonormal, det +1)."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise InvalidInputError(f"rotation must be 3x3, got {R.shape}")
    if not np.all(np.isfinite(R)):
        raise InvalidInputError("non-finite rotation matrix")
    if np.max(np.abs(R.T @ R - np.eye(3))) > tol:
        raise InvalidInputError("matrix is not orthonormal")
    if abs(np.linalg.det(R) - 1.0) > tol:
        raise InvalidInputError("matrix is not a proper rotation (det != 1)")
    return R


def axis_angle_rotation(axis, angle: float) -> np.ndarray:
    """Rotation matrix for a right-handed rotation by `angle` about unit `axis`."""
    a = vec3(axis)
    if abs(np.linalg.norm(a) - 1.0) > CONSTRUCT_TOL:
        raise InvalidInputError(f"axis must be unit length, |axis| = {np.linalg.norm(a)}")
    c, s = np.cos(angle), np.sin(angle)
    K = np.array([[0.0, -a[2], a[1]],
                  [a[2], 0.0, -a[0]],
                  [-a[1], a[0], 0.0]])
    return np.eye(3) + s * K + (1.0 - c) * (K @ K)


@dataclass(frozen=True)
class PointConfiguration:
    """Rigid body pose as three world-frame points.

    p_x - p_o and p_y - p_o are the body x and y directions; both unit length
    and mutually orthogonal.
    """

    p_o: np.ndarray
    p_x: np.ndarray
    p_y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_o", vec3(self.p_o))
        object.__setattr__(self, "p_x", vec3(self.p_x))
        object.__setattr__(self, "p_y", vec3(self.p_y))

    @property
    def d_x(self) -> np.ndarray:
        return self.p_x - self.p_o

    @property
    def d_y(self) -> np.ndarray:
        return self.p_y - self.p_o

    def rigidity_error(self) -> float:
        """Largest violation of the unit-length/orthogonality invariants."""
        dx, dy = self.d_x, self.d_y
        return max(abs(np.linalg.norm(dx) - 1.0),
                   abs(np.linalg.norm(dy) - 1.0),
                   abs(float(dx @ dy)))

    def validate(self, tol: float = CONSTRUCT_TOL) -> "PointConfiguration":
        err = self.rigidity_error()
        if err > tol:
            raise DegenerateConfigurationError(
                f"configuration rigidity violated by {err:.3e} (tol {tol:.1e})")
        return self

    def points(self) -> np.ndarray:
        """Stack the three points as a (3, 3) array, one point per row."""
        return np.stack([self.p_o, self.p_x, self.p_y])


def config_from_pose(position, orientation) -> PointConfiguration:
    """Point configuration for a body at `position` with rotation `orientation`."""
    p = vec3(position)
    R = check_rotation(orientation)
    return PointConfiguration(p, p + R[:, 0], p + R[:, 1])


def pose_from_config(q: PointConfiguration, tol: float = INPUT_TOL):
    """Recover (position, rotation) from a point configuration.

    The third rotation column is rebuilt as d_x x d_y, so mild numerical drift
    in the inputs does not produce an improper rotation.
    """
    q.validate(tol)
    dx, dy = unit(q.d_x), q.d_y
    dy = unit(dy - (dy @ dx) * dx)
    R = np.column_stack([dx, dy, np.cross(dx, dy)])
    return q.p_o.copy(), R


def config_from_xytheta(x: float, y: float, theta: float) -> PointConfiguration:
    """2D pose (x, y, heading) embedded in the z = 0 plane."""
    return config_from_pose(vec3(x, y, 0.0), axis_angle_rotation(vec3(0, 0, 1.0), theta))


def xytheta_from_config(q: PointConfiguration):
    p, R = pose_from_config(q)
    return float(p[0]), float(p[1]), float(np.arctan2(R[1, 0], R[0, 0]))
