import math

import numpy as np
import pytest

from kinosynth.controls import Control, ControlSet, Trajectory, dubins_set
from kinosynth.extremal import (AdjointVector, ControlMoment,
                                ExtremalCertificate, adjoint_residuals,
                                body_point_velocities, control_moment,
                                h_profile, hamiltonian_value,
                                solve_adjoint_tail,
                                verify_necessary_condition)
from kinosynth.geometry import (InvalidInputError, axis_angle_rotation,
                                config_from_pose, config_from_xytheta, unit,
                                vec3)

rng = np.random.default_rng(3)


def random_config():
    axis = unit(rng.normal(size=3))
    return config_from_pose(rng.normal(size=3),
                            axis_angle_rotation(axis, rng.uniform(0, 2 * math.pi)))


def random_control():
    if rng.random() < 0.5:
        return Control.translation(rng.normal(size=3))
    return Control.rotation(unit(rng.normal(size=3)), rng.normal(size=3),
                            rng.uniform(0.2, 2.0) * (1 if rng.random() < 0.5 else -1))


def test_certificate_validation():
    with pytest.raises(InvalidInputError):
        ExtremalCertificate(k=[0, 0, 0], c=[0, 0, 0])
    with pytest.raises(InvalidInputError):
        ExtremalCertificate(k=[1, 0, 0], H=2.0)
    cert = ExtremalCertificate(k=[1, 0, 0])
    assert cert.H == 1.0 and not cert.abnormal


def test_control_moments_at_origin():
    U = dubins_set()
    q = config_from_xytheta(0, 0, 0)
    goal = (0.0, 0.0, 0.0)
    cm_s = control_moment(q, U[0], goal)
    assert np.allclose(cm_s.moment, [1, 0, 0])
    assert np.allclose(cm_s.axis_term, 0.0)
    cm_l = control_moment(q, U[1], goal)
    # axis x (goal - center) with world center (0, 1, 0)
    assert np.allclose(cm_l.moment, [1, 0, 0])
    assert np.allclose(cm_l.axis_term, [0, 0, 1])
    cm_r = control_moment(q, U[2], goal)
    assert np.allclose(cm_r.moment, [1, 0, 0])
    assert np.allclose(cm_r.axis_term, [0, 0, -1])


def test_hamiltonian_matches_moment_dot():
    U = dubins_set()
    q = config_from_xytheta(0.3, -0.7, 0.4)
    cert = ExtremalCertificate(k=[0.5, -0.2, 0], c=[0, 0, 0.3])
    for u in U:
        cm = control_moment(q, u, (0, 0, 0))
        expected = cert.k @ cm.moment + cert.c @ cm.axis_term
        assert math.isclose(hamiltonian_value(cert, q, u, (0, 0, 0)),
                            expected, abs_tol=1e-12)


def test_h_profile_constant_on_straight_extremal():
    U = dubins_set()
    q0 = config_from_xytheta(0, 0, 0)
    # straight toward +x with tie-level turns: k = (1, 0), c = 0
    cert = ExtremalCertificate(k=[1, 0, 0])
    traj = Trajectory(((0, 4.0),))
    hs = h_profile(cert, q0, traj, U, (4.0, 0.0, 0.0))
    assert max(abs(h - 1.0) for h in hs) < 1e-12
    rep = verify_necessary_condition(cert, q0, traj, U, (4.0, 0.0, 0.0))
    assert rep.constant


def test_verify_flags_perturbed_certificate():
    U = dubins_set()
    q0 = config_from_xytheta(0, 0, 0)
    cert = ExtremalCertificate(k=[1, 0.2, 0])
    traj = Trajectory(((0, 4.0),))
    rep = verify_necessary_condition(cert, q0, traj, U, (4.0, 0.0, 0.0))
    assert not rep.constant


def test_adjoint_vector_validation():
    with pytest.raises(InvalidInputError):
        AdjointVector(np.zeros(8))
    with pytest.raises(InvalidInputError):
        AdjointVector(np.full(9, np.inf))


def test_body_point_velocities_translation():
    u = Control.translation([1, 2, 3])
    upo, udx, udy = body_point_velocities(u)
    assert np.allclose(upo, [1, 2, 3])
    assert np.allclose(udx, 0.0)
    assert np.allclose(udy, 0.0)


def test_first_three_residual_components_vanish():
    for _ in range(25):
        lam = AdjointVector(rng.normal(size=9))
        out = adjoint_residuals(lam, random_config(), random_control())
        assert np.all(out[:3] == 0.0)


def test_adjoint_tail_zeroes_residuals_on_single_rotation():
    # a pure arc admits a constant adjoint: lambda = (k, 0, +/-k)
    U = dubins_set()
    from kinosynth.controls import apply_control
    q0 = config_from_xytheta(0, 0, 0)
    k = vec3(0.6, 0.8, 0.0)
    samples = [(apply_control(q0, U[2], s), U[2]) for s in (0.0, 0.4, 0.9)]
    lam = solve_adjoint_tail(k, samples)
    assert np.allclose(lam.lam[3:6], 0.0, atol=1e-12)
    assert np.allclose(lam.lam[6:9], -k, atol=1e-12)
    worst = max(float(np.linalg.norm(adjoint_residuals(lam, qq, uu)))
                for qq, uu in samples)
    assert worst < 1e-12


def test_adjoint_residual_on_translation_is_irreducible():
    # a straight segment pins components 4-6 at -k no matter the tail
    U = dubins_set()
    q = config_from_xytheta(0.3, -0.4, 0.7)
    k = vec3(0.6, 0.8, 0.0)
    for tail in (np.zeros(6), np.arange(6, dtype=float)):
        lam = AdjointVector(np.concatenate([k, tail]))
        r = adjoint_residuals(lam, q, U[0])
        assert np.allclose(r[3:6], -k, atol=1e-12)
        assert np.allclose(r[6:9], 0.0, atol=1e-12)
