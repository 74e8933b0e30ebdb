"""Discrete constant-velocity control sets and forward kinematics.

Controls are specified in the body frame: a translation carries a linear
velocity vector, a rotation carries an axis, a center and a signed angular
speed.  Applying a control for a duration is a rigid transform; a trajectory
is an ordered list of (control index, duration) segments composed in the
current body frame.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import (CONSTRUCT_TOL, InvalidInputError, PointConfiguration,
                       axis_angle_rotation, check_rotation, config_from_pose,
                       pose_from_config, vec3)


class InvalidDurationError(InvalidInputError):
    """Raised for negative segment durations."""


class InvalidTrajectoryError(InvalidInputError):
    """Raised when a trajectory references a control outside its set."""


@dataclass(frozen=True)
class Control:
    """One constant-velocity motion, either a translation or a rotation.

    Translation: `v` is the body-frame linear velocity (length/time).
    Rotation: `axis` is a unit body-frame axis, `center` a body-frame point on
    the rotation axis, `omega` a signed angular speed (rad/time).
    """

    kind: str  # "translation" | "rotation"
    v: np.ndarray | None = None
    axis: np.ndarray | None = None
    center: np.ndarray | None = None
    omega: float = 0.0

    def __post_init__(self):
        if self.kind == "translation":
            object.__setattr__(self, "v", vec3(self.v))
            if np.linalg.norm(self.v) == 0.0:
                raise InvalidInputError("translation requires |v| > 0")
        elif self.kind == "rotation":
            object.__setattr__(self, "axis", vec3(self.axis))
            object.__setattr__(self, "center", vec3(self.center))
            if abs(np.linalg.norm(self.axis) - 1.0) > CONSTRUCT_TOL:
                raise InvalidInputError("rotation axis must be unit length")
            if self.omega == 0.0:
                raise InvalidInputError("rotation requires omega != 0")
        else:
            raise InvalidInputError(f"unknown control kind {self.kind!r}")

    @property
    def is_rotation(self) -> bool:
        return self.kind == "rotation"

    def key(self):
        if self.kind == "translation":
            return ("translation", tuple(np.round(self.v, 12)))
        return ("rotation", tuple(np.round(self.axis, 12)),
                tuple(np.round(self.center, 12)), round(self.omega, 12))

    @staticmethod
    def translation(v) -> "Control":
        return Control("translation", v=vec3(v))

    @staticmethod
    def rotation(axis, center, omega: float) -> "Control":
        return Control("rotation", axis=vec3(axis), center=vec3(center), omega=float(omega))


@dataclass(frozen=True)
class ControlSet:
    """Ordered list of distinct controls with stable indices."""

    controls: tuple
    name: str = ""

    def __post_init__(self):
        ctrls = tuple(self.controls)
        if not ctrls:
            raise InvalidInputError("control set needs at least one control")
        keys = [u.key() for u in ctrls]
        if len(set(keys)) != len(keys):
            raise InvalidInputError("duplicate controls in set")
        object.__setattr__(self, "controls", ctrls)

    def __len__(self) -> int:
        return len(self.controls)

    def __getitem__(self, i: int) -> Control:
        return self.controls[i]

    def __iter__(self):
        return iter(self.controls)

    def is_planar(self) -> bool:
        """True when every control lives in the z = 0 plane with +/-z rotation axes."""
        for u in self.controls:
            if u.is_rotation:
                if abs(abs(u.axis[2]) - 1.0) > 1e-12 or abs(u.center[2]) > 1e-12:
                    return False
            elif abs(u.v[2]) > 1e-12:
                return False
        return True

    def to_json_dict(self) -> dict:
        out = []
        for u in self.controls:
            if u.kind == "translation":
                out.append({"type": "translation", "v": list(u.v)})
            else:
                out.append({"type": "rotation", "axis": list(u.axis),
                            "center": list(u.center), "omega": u.omega})
        return {"name": self.name, "controls": out}

    @staticmethod
    def from_json_dict(data: dict) -> "ControlSet":
        ctrls = []
        for i, c in enumerate(data.get("controls", [])):
            kind = c.get("type")
            if kind == "translation":
                ctrls.append(Control.translation(c["v"]))
            elif kind == "rotation":
                ctrls.append(Control.rotation(c["axis"], c["center"], c["omega"]))
            elif kind == "skew":
                raise InvalidInputError(f"control {i}: skew motions are not supported")
            else:
                raise InvalidInputError(f"control {i}: unknown type {kind!r}")
        return ControlSet(tuple(ctrls), name=data.get("name", ""))

    @staticmethod
    def from_file(path) -> "ControlSet":
        with open(path) as f:
            return ControlSet.from_json_dict(json.load(f))


def dubins_set() -> ControlSet:
    """Canonical Dubins controls: unit forward, unit-radius left and right turns.

    Index 0 = straight (S), 1 = left turn (L), 2 = right turn (R).
    """
    return ControlSet((
        Control.translation([1.0, 0.0, 0.0]),
        Control.rotation([0.0, 0.0, 1.0], [0.0, 1.0, 0.0], 1.0),
        Control.rotation([0.0, 0.0, 1.0], [0.0, -1.0, 0.0], -1.0),
    ), name="dubins")


DUBINS_LETTERS = {0: "S", 1: "L", 2: "R"}


@dataclass(frozen=True)
class Trajectory:
    """Ordered (control index, duration >= 0) segments.

    Consecutive segments with the same control index are merged on
    construction, so the index sequence is the canonical control word.
    """

    segments: tuple = field(default=())

    def __post_init__(self):
        merged = []
        for idx, t in self.segments:
            idx, t = int(idx), float(t)
            if t < 0.0:
                raise InvalidDurationError(f"negative duration {t}")
            if merged and merged[-1][0] == idx:
                merged[-1][1] += t
            else:
                merged.append([idx, t])
        object.__setattr__(self, "segments", tuple((i, t) for i, t in merged))

    @property
    def total_time(self) -> float:
        return float(sum(t for _, t in self.segments))

    def word(self, min_duration: float = 0.0) -> tuple:
        """Control word: segment indices, dropping segments <= min_duration."""
        out = []
        for idx, t in self.segments:
            if t > min_duration and (not out or out[-1] != idx):
                out.append(idx)
        return tuple(out)

    def letters(self, letters=DUBINS_LETTERS, min_duration: float = 0.0) -> str:
        return "".join(letters.get(i, str(i)) for i in self.word(min_duration))


def control_transform(u: Control, t: float):
    """Body-frame rigid transform (rotation matrix, translation) after time t.

    A point x in the body frame at time 0 sits at Rm @ x + d at time t,
    still expressed in the time-0 body frame.
    """
    if t < 0.0:
        raise InvalidDurationError(f"negative duration {t}")
    if u.kind == "translation":
        return np.eye(3), u.v * t
    Rm = axis_angle_rotation(u.axis, u.omega * t)
    return Rm, u.center - Rm @ u.center


def apply_control(q: PointConfiguration, u: Control, t: float) -> PointConfiguration:
    """Advance a configuration by control u for duration t."""
    p, R = pose_from_config(q)
    Rm, d = control_transform(u, t)
    return config_from_pose(p + R @ d, R @ Rm)


def simulate(q0: PointConfiguration, traj: Trajectory, U: ControlSet) -> PointConfiguration:
    """Forward kinematics: apply each segment in order in the current body frame."""
    q = q0
    for idx, t in traj.segments:
        if not 0 <= idx < len(U):
            raise InvalidTrajectoryError(f"control index {idx} out of range")
        q = apply_control(q, U[idx], t)
    return q


@dataclass(frozen=True)
class WorldControl:
    """A control expressed in the world frame at a given configuration."""

    velocity: np.ndarray          # linear velocity of p_o
    axis: np.ndarray              # omega * world rotation axis; zero for translations
    center: np.ndarray | None     # world rotation center; None for translations


def world_frame_control(q: PointConfiguration, u: Control) -> WorldControl:
    p, R = pose_from_config(q)
    if u.kind == "translation":
        return WorldControl(R @ u.v, np.zeros(3), None)
    w = R @ (u.omega * u.axis)
    r = p + R @ u.center
    return WorldControl(np.cross(w, p - r), w, r)
