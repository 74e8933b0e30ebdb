import math
from pathlib import Path

import numpy as np
import pytest

from kinosynth.controls import (Control, ControlSet, InvalidDurationError,
                                InvalidTrajectoryError, Trajectory,
                                apply_control, control_transform, dubins_set,
                                simulate, world_frame_control)
from kinosynth.geometry import InvalidInputError, config_from_xytheta, \
    xytheta_from_config

DATA = Path(__file__).resolve().parents[1] / "src" / "kinosynth" / "data"


def test_control_validation():
    with pytest.raises(InvalidInputError):
        Control.translation([0, 0, 0])
    with pytest.raises(InvalidInputError):
        Control.rotation([0, 0, 2], [0, 0, 0], 1.0)
    with pytest.raises(InvalidInputError):
        Control.rotation([0, 0, 1], [0, 0, 0], 0.0)
    with pytest.raises(InvalidInputError):
        Control("teleport")


def test_control_set_rejects_duplicates_and_empty():
    u = Control.translation([1, 0, 0])
    with pytest.raises(InvalidInputError):
        ControlSet((u, Control.translation([1, 0, 0])))
    with pytest.raises(InvalidInputError):
        ControlSet(())


def test_dubins_set_shape():
    U = dubins_set()
    assert len(U) == 3
    assert U[0].kind == "translation"
    assert U.is_planar()


def test_straight_transform():
    U = dubins_set()
    q = apply_control(config_from_xytheta(0, 0, 0), U[0], 2.5)
    assert np.allclose(xytheta_from_config(q), (2.5, 0.0, 0.0), atol=1e-12)


def test_left_turn_quarter_circle():
    U = dubins_set()
    q = apply_control(config_from_xytheta(0, 0, 0), U[1], math.pi / 2)
    x, y, th = xytheta_from_config(q)
    assert np.allclose((x, y), (1.0, 1.0), atol=1e-12)
    assert math.isclose(th, math.pi / 2, abs_tol=1e-12)


def test_right_turn_mirrors_left():
    U = dubins_set()
    ql = apply_control(config_from_xytheta(0, 0, 0), U[1], 0.8)
    qr = apply_control(config_from_xytheta(0, 0, 0), U[2], 0.8)
    xl, yl, tl = xytheta_from_config(ql)
    xr, yr, tr = xytheta_from_config(qr)
    assert math.isclose(xl, xr, abs_tol=1e-12)
    assert math.isclose(yl, -yr, abs_tol=1e-12)
    assert math.isclose(tl, -tr, abs_tol=1e-12)


def test_control_transform_identity_at_zero():
    U = dubins_set()
    for u in U:
        Rm, d = control_transform(u, 0.0)
        assert np.allclose(Rm, np.eye(3))
        assert np.allclose(d, 0.0)
    with pytest.raises(InvalidDurationError):
        control_transform(U[0], -1.0)


def test_trajectory_merges_repeats_and_word():
    t = Trajectory(((0, 1.0), (0, 2.0), (1, 0.5), (1, 0.0), (2, 0.25)))
    assert t.segments == ((0, 3.0), (1, 0.5), (2, 0.25))
    assert t.total_time == 3.75
    assert t.word() == (0, 1, 2)
    assert t.word(min_duration=0.3) == (0, 1)
    assert t.letters() == "SLR"


def test_trajectory_rejects_negative_duration():
    with pytest.raises(InvalidDurationError):
        Trajectory(((0, -0.1),))


def test_simulate_out_of_range_index():
    U = dubins_set()
    with pytest.raises(InvalidTrajectoryError):
        simulate(config_from_xytheta(0, 0, 0), Trajectory(((7, 1.0),)), U)


def test_simulate_composes_in_body_frame():
    U = dubins_set()
    traj = Trajectory(((1, math.pi / 2), (0, 1.0)))
    q = simulate(config_from_xytheta(0, 0, 0), traj, U)
    # after the quarter turn the straight moves along +y
    assert np.allclose(xytheta_from_config(q), (1.0, 2.0, math.pi / 2),
                       atol=1e-12)


def test_world_frame_control():
    U = dubins_set()
    q = config_from_xytheta(0, 0, math.pi / 2)
    wt = world_frame_control(q, U[0])
    assert np.allclose(wt.velocity, [0, 1, 0], atol=1e-12)
    wr = world_frame_control(q, U[1])
    assert np.allclose(wr.center, [-1, 0, 0], atol=1e-12)
    assert np.allclose(wr.axis, [0, 0, 1], atol=1e-12)


def test_json_round_trip_and_file():
    U = dubins_set()
    again = ControlSet.from_json_dict(U.to_json_dict())
    assert [u.key() for u in again] == [u.key() for u in U]
    shipped = ControlSet.from_file(DATA / "dubins.json")
    assert [u.key() for u in shipped] == [u.key() for u in U]


def test_from_json_rejects_unknown_kinds():
    with pytest.raises(InvalidInputError):
        ControlSet.from_json_dict({"controls": [{"type": "skew"}]})
    with pytest.raises(InvalidInputError):
        ControlSet.from_json_dict({"controls": [{"type": "warp"}]})
