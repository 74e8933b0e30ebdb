"""Optimality conditions for constant-velocity control words.

The optimality witness is a pair of constant vectors (k, c): every control
active on a shortest path keeps

    k . moment(u)  +  axis(u) . c  =  H  (normalized to 1)

where moment(u) is the control's geometric Jacobian column for the body
origin (linear velocity for translations, world axis x (goal - center) for
rotations) and axis(u) is the signed world rotation axis.  Inactive controls
must stay at or below H.  2D problems store the scalar c in c[2], since the
axis term reduces to +/- c_z there.

The module also carries the nine-dimensional adjoint of the point-based
representation and its derivative residuals, which vanish identically on
extremals.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .controls import Control, ControlSet, Trajectory, apply_control, simulate, \
    world_frame_control
from .geometry import InvalidInputError, PointConfiguration, vec3


@dataclass(frozen=True)
class ExtremalCertificate:
    """Constant multipliers (k, c) with the running level H normalized to 1.

    `abnormal` marks an H = 0 certificate; those are representable but never
    produced by the solver search.
    """

    k: np.ndarray
    c: np.ndarray = field(default_factory=lambda: np.zeros(3))
    H: float = 1.0
    abnormal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "k", vec3(self.k))
        object.__setattr__(self, "c", vec3(self.c))
        if not self.abnormal and self.H != 1.0:
            raise InvalidInputError("certificate level must be normalized to 1")
        if np.all(self.k == 0.0) and np.all(self.c == 0.0):
            raise InvalidInputError("certificate requires k or c nonzero")


@dataclass(frozen=True)
class ControlMoment:
    """Geometric-Jacobian column of a control plus its rotation-axis term."""

    moment: np.ndarray
    axis_term: np.ndarray  # signed world axis for rotations, zero for translations


def control_moment(q: PointConfiguration, u: Control, goal) -> ControlMoment:
    """Moment of `u` at configuration `q` toward the goal position."""
    g = vec3(goal)
    wc = world_frame_control(q, u)
    if u.kind == "translation":
        return ControlMoment(wc.velocity, np.zeros(3))
    return ControlMoment(np.cross(wc.axis, g - wc.center), wc.axis)


def hamiltonian_value(cert: ExtremalCertificate, q: PointConfiguration,
                      u: Control, goal) -> float:
    """k . moment + axis . c for control `u` at `q`."""
    cm = control_moment(q, u, goal)
    return float(cert.k @ cm.moment + cm.axis_term @ cert.c)


def h_profile(cert: ExtremalCertificate, q0: PointConfiguration, traj: Trajectory,
              U: ControlSet, goal, samples_per_segment: int = 8) -> list:
    """Hamiltonian of the active control sampled along the trajectory."""
    if samples_per_segment < 2:
        raise InvalidInputError("need at least 2 samples per segment")
    out = []
    q = q0
    for idx, dur in traj.segments:
        u = U[idx]
        for s in np.linspace(0.0, dur, samples_per_segment):
            out.append(hamiltonian_value(cert, apply_control(q, u, s), u, goal))
        q = apply_control(q, u, dur)
    return out


@dataclass(frozen=True)
class NecessaryConditionReport:
    constant: bool
    max_active_deviation: float
    max_violation_by_inactive: float


def verify_necessary_condition(cert: ExtremalCertificate, q0: PointConfiguration,
                               traj: Trajectory, U: ControlSet, goal,
                               tol: float = 1e-6,
                               samples_per_segment: int = 16) -> NecessaryConditionReport:
    """Check H stays at 1 on the active control and never exceeds 1 elsewhere."""
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    active_dev = 0.0
    inactive_excess = 0.0
    q = q0
    for idx, dur in traj.segments:
        u = U[idx]
        for s in np.linspace(0.0, dur, samples_per_segment):
            qs = apply_control(q, u, s)
            h_act = hamiltonian_value(cert, qs, u, goal)
            active_dev = max(active_dev, abs(h_act - 1.0))
            for j, other in enumerate(U):
                if j == idx:
                    continue
                h = hamiltonian_value(cert, qs, other, goal)
                inactive_excess = max(inactive_excess, h - 1.0)
        q = apply_control(q, u, dur)
    return NecessaryConditionReport(
        constant=(active_dev <= tol and inactive_excess <= tol),
        max_active_deviation=active_dev,
        max_violation_by_inactive=inactive_excess)


# --- point-based adjoint -----------------------------------------------------

@dataclass(frozen=True)
class AdjointVector:
    """Nine-dimensional costate of the point-based representation."""

    lam: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.lam, dtype=float)
        if v.shape != (9,):
            raise InvalidInputError("adjoint has nine components")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("non-finite adjoint")
        object.__setattr__(self, "lam", v)


def body_point_velocities(u: Control):
    """Body-frame rates (u(p_o), u(d_x), u(d_y)) of the three tracked quantities."""
    if u.kind == "translation":
        return u.v.copy(), np.zeros(3), np.zeros(3)
    w = u.omega * u.axis
    return np.cross(w, -u.center), np.cross(w, [1.0, 0, 0]), np.cross(w, [0, 1.0, 0])


def _rotation_partials(dx, dy):
    """d R / d component for the six components of (d_x, d_y).

    R has columns (d_x, d_y, d_x x d_y); only the third column couples the
    two direction vectors.
    """
    Z = np.zeros((3, 3))
    out = []
    for col, other, sign in ((0, dy, +1.0), (1, dx, -1.0)):
        for comp in range(3):
            P = Z.copy()
            P[comp, col] = 1.0
            e = np.zeros(3)
            e[comp] = 1.0
            P[:, 2] = sign * np.cross(e, other)
            out.append(P)
    return out


def adjoint_residuals(lam: AdjointVector, q: PointConfiguration, u: Control) -> np.ndarray:
    """The nine costate derivatives; all zero along an extremal.

    Components 1-3 are identically zero: the world-frame rates do not depend
    on the body origin, only on the direction vectors through R.
    """
    lo, lx, ly = lam.lam[0:3], lam.lam[3:6], lam.lam[6:9]
    upo, udx, udy = body_point_velocities(u)
    out = np.zeros(9)
    for i, P in enumerate(_rotation_partials(q.d_x, q.d_y)):
        out[3 + i] = -(lo @ (P @ upo) + lx @ (P @ udx) + ly @ (P @ udy))
    return out


def solve_adjoint_tail(k, samples) -> AdjointVector:
    """Recover lambda_4..9 given lambda_1..3 = k from the zero-derivative system.

    `samples` is an iterable of (configuration, control) pairs along a
    trajectory; the six equations per sample are stacked and solved in the
    least-squares sense.
    """
    k = vec3(k)
    rows, rhs = [], []
    for q, u in samples:
        upo, udx, udy = body_point_velocities(u)
        for P in _rotation_partials(q.d_x, q.d_y):
            # residual = -(k.(P upo) + lx.(P udx) + ly.(P udy)) per component pair
            row = np.concatenate([P @ udx, P @ udy])
            rows.append(row)
            rhs.append(-(k @ (P @ upo)))
    tail, *_ = np.linalg.lstsq(np.asarray(rows), np.asarray(rhs), rcond=None)
    return AdjointVector(np.concatenate([k, tail]))
