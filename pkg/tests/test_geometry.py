import math

import numpy as np
import pytest

from kinosynth.geometry import (DegenerateConfigurationError, InvalidInputError,
                                PointConfiguration, axis_angle_rotation,
                                check_rotation, config_from_pose,
                                config_from_xytheta, pose_from_config, unit,
                                vec3, xytheta_from_config)


def test_vec3_from_components_and_sequence():
    assert np.allclose(vec3(1, 2, 3), [1.0, 2.0, 3.0])
    assert np.allclose(vec3([1, 2, 3]), [1.0, 2.0, 3.0])


def test_vec3_rejects_bad_shapes_and_nan():
    with pytest.raises(InvalidInputError):
        vec3([1, 2])
    with pytest.raises(InvalidInputError):
        vec3([1, 2, float("nan")])


def test_unit_normalizes_and_rejects_zero():
    assert np.allclose(unit(vec3(0, 0, 2)), [0, 0, 1])
    with pytest.raises(InvalidInputError):
        unit(vec3(0, 0, 0))


def test_axis_angle_quarter_turn_about_z():
    R = axis_angle_rotation([0, 0, 1], math.pi / 2)
    assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-12)
    assert np.allclose(R @ [0, 1, 0], [-1, 0, 0], atol=1e-12)


def test_axis_angle_requires_unit_axis():
    with pytest.raises(InvalidInputError):
        axis_angle_rotation([0, 0, 2], 0.1)


def test_check_rotation_rejects_reflection():
    M = np.diag([1.0, 1.0, -1.0])
    with pytest.raises(InvalidInputError):
        check_rotation(M)


def test_pose_round_trip():
    R = axis_angle_rotation(unit(vec3(1, 2, 3)), 0.7)
    p = vec3(0.3, -1.2, 2.0)
    q = config_from_pose(p, R)
    p2, R2 = pose_from_config(q)
    assert np.allclose(p, p2, atol=1e-12)
    assert np.allclose(R, R2, atol=1e-12)


def test_xytheta_round_trip():
    q = config_from_xytheta(1.5, -0.5, 2.2)
    x, y, th = xytheta_from_config(q)
    assert math.isclose(x, 1.5, abs_tol=1e-12)
    assert math.isclose(y, -0.5, abs_tol=1e-12)
    assert math.isclose(th, 2.2, abs_tol=1e-12)


def test_rigidity_validation():
    q = PointConfiguration([0, 0, 0], [2, 0, 0], [0, 1, 0])
    assert q.rigidity_error() > 0.5
    with pytest.raises(DegenerateConfigurationError):
        q.validate()


def test_points_stack_order():
    q = config_from_xytheta(0.0, 0.0, 0.0)
    pts = q.points()
    assert np.allclose(pts[0], [0, 0, 0])
    assert np.allclose(pts[1], [1, 0, 0])
    assert np.allclose(pts[2], [0, 1, 0])
