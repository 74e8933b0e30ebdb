"""Closed-form Dubins shortest paths (unit speed, unit turn radius).

Independent ground truth for the solver and the synthesis mapper: the six
candidate words LSL, LSR, RSL, RSR, LRL, RLR are enumerated and the minimum
length one returned.  Words simulate exactly onto the canonical control set
from :func:`kinosynth.controls.dubins_set` (S = index 0, L = 1, R = 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .controls import Trajectory

WORD_TYPES = ("LSL", "LSR", "RSL", "RSR", "LRL", "RLR")
_INDEX = {"S": 0, "L": 1, "R": 2}
BOUNDARY_TIE_TOL = 1e-9


def _mod2pi(x: float) -> float:
    return x % (2.0 * math.pi)


@dataclass(frozen=True)
class DubinsWord:
    """One feasible Dubins word with segment parameters t, p, q (lengths)."""

    type: str
    t: float
    p: float
    q: float

    @property
    def length(self) -> float:
        return self.t + self.p + self.q

    def trajectory(self) -> Trajectory:
        return Trajectory(tuple(
            (_INDEX[letter], dur)
            for letter, dur in zip(self.type, (self.t, self.p, self.q))))


def _lsl(a, b, d):
    tmp = d + math.sin(a) - math.sin(b)
    p_sq = 2 + d * d - 2 * math.cos(a - b) + 2 * d * (math.sin(a) - math.sin(b))
    if p_sq < 0:
        return None
    th = math.atan2(math.cos(b) - math.cos(a), tmp)
    return _mod2pi(-a + th), math.sqrt(p_sq), _mod2pi(b - th)


def _rsr(a, b, d):
    tmp = d - math.sin(a) + math.sin(b)
    p_sq = 2 + d * d - 2 * math.cos(a - b) + 2 * d * (math.sin(b) - math.sin(a))
    if p_sq < 0:
        return None
    th = math.atan2(math.cos(a) - math.cos(b), tmp)
    return _mod2pi(a - th), math.sqrt(p_sq), _mod2pi(-b + th)


def _lsr(a, b, d):
    p_sq = -2 + d * d + 2 * math.cos(a - b) + 2 * d * (math.sin(a) + math.sin(b))
    if p_sq < 0:
        return None
    p = math.sqrt(p_sq)
    th = math.atan2(-math.cos(a) - math.cos(b), d + math.sin(a) + math.sin(b)) \
        - math.atan2(-2.0, p)
    return _mod2pi(-a + th), p, _mod2pi(-b + th)


def _rsl(a, b, d):
    p_sq = -2 + d * d + 2 * math.cos(a - b) - 2 * d * (math.sin(a) + math.sin(b))
    if p_sq < 0:
        return None
    p = math.sqrt(p_sq)
    th = math.atan2(math.cos(a) + math.cos(b), d - math.sin(a) - math.sin(b)) \
        - math.atan2(2.0, p)
    return _mod2pi(a - th), p, _mod2pi(b - th)


def _rlr(a, b, d):
    tmp = (6.0 - d * d + 2 * math.cos(a - b) + 2 * d * (math.sin(a) - math.sin(b))) / 8.0
    if abs(tmp) > 1.0:
        return None
    p = _mod2pi(2.0 * math.pi - math.acos(tmp))
    t = _mod2pi(a - math.atan2(math.cos(a) - math.cos(b),
                               d - math.sin(a) + math.sin(b)) + p / 2.0)
    return t, p, _mod2pi(a - b - t + p)


def _lrl(a, b, d):
    tmp = (6.0 - d * d + 2 * math.cos(a - b) + 2 * d * (math.sin(b) - math.sin(a))) / 8.0
    if abs(tmp) > 1.0:
        return None
    p = _mod2pi(2.0 * math.pi - math.acos(tmp))
    t = _mod2pi(-a + math.atan2(-math.cos(a) + math.cos(b),
                                d + math.sin(a) - math.sin(b)) + p / 2.0)
    return t, p, _mod2pi(b - a - t + p)


_PLANNERS = {"LSL": _lsl, "LSR": _lsr, "RSL": _rsl,
             "RSR": _rsr, "LRL": _lrl, "RLR": _rlr}


def dubins_words(start, goal) -> list:
    """All feasible Dubins words from start to goal, both (x, y, theta)."""
    x0, y0, th0 = start
    x1, y1, th1 = goal
    dx, dy = x1 - x0, y1 - y0
    d = math.hypot(dx, dy)
    phi = math.atan2(dy, dx) if d > 0 else 0.0
    a, b = _mod2pi(th0 - phi), _mod2pi(th1 - phi)
    out = []
    for name in WORD_TYPES:
        res = _PLANNERS[name](a, b, d)
        if res is not None:
            out.append(DubinsWord(name, *res))
    return out


def dubins_shortest(start, goal) -> DubinsWord:
    """Minimum length word; ties broken by the fixed WORD_TYPES order."""
    words = dubins_words(start, goal)
    best = None
    for w in words:  # already in WORD_TYPES order
        if best is None or w.length < best.length - 0.0:
            if best is None or w.length < best.length:
                best = w
    return best


# Words that are time reversals of each other (L and R exchanged, order
# flipped) always have equal length between same-heading poses, so the pair
# forms one synthesis region, named here by its lexicographically greater
# member.
MIRROR_CLASS = {"LSL": "RSR", "RSR": "RSR", "LRL": "RLR", "RLR": "RLR",
                "LSR": "LSR", "RSL": "RSL"}


def dubins_region_label(pose, tie_tol: float = BOUNDARY_TIE_TOL) -> str:
    """Synthesis label for the shortest path from `pose` to the origin pose.

    Near-ties within `tie_tol` between words of distinct mirror classes are
    labeled "boundary"; the systematic tie between a word and its time
    reversal is not a region boundary and resolves to the class name.
    """
    words = sorted(dubins_words(pose, (0.0, 0.0, 0.0)), key=lambda w: w.length)
    classes = {MIRROR_CLASS[w.type] for w in words
               if w.length - words[0].length < tie_tol}
    if len(classes) > 1:
        return "boundary"
    return MIRROR_CLASS[words[0].type]
