import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinosynth.controls import dubins_set, simulate
from kinosynth.dubins import (MIRROR_CLASS, WORD_TYPES, dubins_region_label,
                              dubins_shortest, dubins_words)
from kinosynth.geometry import config_from_xytheta, xytheta_from_config

poses = st.tuples(st.floats(-5, 5), st.floats(-5, 5),
                  st.floats(0, 2 * math.pi - 1e-9))


def test_straight_line_is_a_degenerate_csc_word():
    w = dubins_shortest((0, 0, 0), (4, 0, 0))
    assert math.isclose(w.length, 4.0, abs_tol=1e-12)


def test_known_rsr_instance():
    w = dubins_shortest((0, 0, 0), (0, -2, 0))
    assert MIRROR_CLASS[w.type] == "RSR"
    assert math.isclose(w.length, 2 * math.pi + 2, abs_tol=1e-9)


def test_zero_distance():
    w = dubins_shortest((1, 2, 0.5), (1, 2, 0.5))
    assert math.isclose(w.length, 0.0, abs_tol=1e-12)


@settings(max_examples=40, deadline=None)
@given(poses, poses)
def test_words_simulate_to_goal(a, b):
    U = dubins_set()
    q0 = config_from_xytheta(*a)
    for w in dubins_words(a, b):
        q = simulate(q0, w.trajectory(), U)
        x, y, th = xytheta_from_config(q)
        assert math.hypot(x - b[0], y - b[1]) < 1e-6
        assert abs((th - b[2] + math.pi) % (2 * math.pi) - math.pi) < 1e-6


@settings(max_examples=40, deadline=None)
@given(poses, poses)
def test_shortest_is_minimum(a, b):
    words = dubins_words(a, b)
    best = dubins_shortest(a, b)
    assert all(best.length <= w.length + 1e-12 for w in words)


@settings(max_examples=40, deadline=None)
@given(poses)
def test_same_heading_mirror_twins_tie(p):
    # between same-heading poses a word and its time reversal always tie
    lengths = {w.type: w.length for w in dubins_words((p[0], p[1], 0.0),
                                                      (0.0, 0.0, 0.0))}
    for a, b in (("LSL", "RSR"), ("LRL", "RLR")):
        if a in lengths and b in lengths:
            assert math.isclose(lengths[a], lengths[b], abs_tol=1e-9)


def test_region_label_interior_checkpoint():
    assert dubins_region_label((0.5, 0.4, 0.0)) == "RSR"


def test_region_label_values_are_class_names():
    lab = dubins_region_label((-2.8, -1.5, 0.0))
    assert lab in set(MIRROR_CLASS.values()) | {"boundary"}


def test_region_label_boundary_on_negative_x_axis():
    # LSR and the RSR class genuinely tie on the y = 0, x < 0 ray
    assert dubins_region_label((-3.0, 0.0, 0.0), tie_tol=1e-6) == "boundary"


def test_word_types_cover_planners():
    assert set(WORD_TYPES) == set(MIRROR_CLASS)
