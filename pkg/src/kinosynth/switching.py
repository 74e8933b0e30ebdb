"""Switching-curve tests from the certificate constraint gradients.

A configuration sits on a switching curve between two controls when both
controls (and the last control, evaluated at the goal) hold their
Hamiltonian at the shared level and no certificate perturbation can do
better.  The operational test: take the gradient of the constraint with
respect to k for each hypothesized switching control, which is simply that
control's moment, and ask whether stepping k along one of those gradients
strictly increases the dot product with all three hypothesized moments.  If
such a step exists the configuration is interior to a synthesis region (a
strictly better certificate is available for a single word); if none exists
the tie is forced and the configuration is at best on a switching curve,
where a tangent direction is recovered from the first-order consistency
relation between the position step and the certificate step.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .controls import Control, ControlSet, world_frame_control
from .extremal import ExtremalCertificate, control_moment
from .geometry import (DegenerateConfigurationError, InvalidInputError,
                       PointConfiguration, config_from_pose, vec3)

PARALLEL_TOL = 1e-9   # |sin(angle to k)| below this is a pure gauge direction
IMPROVE_MARGIN = 1e-9  # strict-positivity margin for unit delta-k candidates


@dataclass(frozen=True)
class DeltaDirections:
    """Candidate certificate step assembled from control-moment gradients."""

    grad_k_basis: tuple   # one moment vector per hypothesized control
    weights: tuple        # alpha_i multipliers
    delta_k: np.ndarray   # sum of alpha_i * basis_i
    delta_q: np.ndarray   # position step on the slice, zero when unused

    def __post_init__(self):
        combo = sum((w * b for w, b in zip(self.weights, self.grad_k_basis)),
                    np.zeros(3))
        if float(np.max(np.abs(combo - self.delta_k))) > 1e-12:
            raise InvalidInputError("delta_k must equal the weighted basis sum")


@dataclass(frozen=True)
class FeasibleK:
    """Certificate satisfying the three H = 1 equations of a hypothesis."""

    certificate: ExtremalCertificate
    multiple: bool  # underdetermined system; certificate is the min-norm pick


@dataclass(frozen=True)
class SwitchClassification:
    """Verdict of the switching-curve procedure for one configuration."""

    verdict: str                       # NoFeasibleK | Interior | OnCurve
    first: int | None = None           # Interior: first control of the region
    last: int | None = None            # Interior: last control of the region
    tangent: np.ndarray | None = None  # OnCurve: unit tangent on the slice
    certificate: ExtremalCertificate | None = None
    delta_k: np.ndarray | None = None
    hypothesis: tuple | None = None

    def __post_init__(self):
        if self.verdict == "Interior" and self.delta_k is None:
            raise InvalidInputError("Interior verdict requires an improving delta_k")
        if self.verdict == "OnCurve" and self.tangent is None:
            raise InvalidInputError("OnCurve verdict requires a tangent")


def grad_q_constraint(k, u: Control, q: PointConfiguration) -> np.ndarray:
    """Gradient of the H = 1 constraint with respect to the body position.

    Rotations give axis x k (the constraint depends on position only through
    the center-to-goal vector); translations are position-independent, so the
    gradient is degenerate.
    """
    k = vec3(k)
    if u.kind == "translation":
        return np.zeros(3)
    cm = control_moment(q, u, np.zeros(3))
    return np.cross(cm.axis_term, k)


def grad_k_constraint(u: Control, q: PointConfiguration, goal) -> np.ndarray:
    """Gradient of the constraint with respect to k: the control's moment."""
    return control_moment(q, u, goal).moment


def _goal_config(goal) -> PointConfiguration:
    return config_from_pose(vec3(goal), np.eye(3))


def _hypothesis_rows(q: PointConfiguration, U_hyp, goal):
    """(moment row, axis row) per hypothesized control; last at the goal."""
    goal = vec3(goal)
    qg = _goal_config(goal)
    cms = [control_moment(q, U_hyp[0], goal),
           control_moment(q, U_hyp[1], goal),
           control_moment(qg, U_hyp[2], goal)]
    return cms


def _planar_hypothesis(q: PointConfiguration, U_hyp) -> bool:
    if abs(float(q.p_o[2])) > 1e-9 or abs(float(q.d_x[2])) > 1e-9 \
            or abs(float(q.d_y[2])) > 1e-9:
        return False
    for u in U_hyp:
        if u.kind == "rotation" and (abs(u.axis[0]) > 1e-12
                                     or abs(u.axis[1]) > 1e-12):
            return False
        if u.kind == "translation" and abs(u.v[2]) > 1e-12:
            return False
    return True


def feasible_k(q: PointConfiguration, U_hyp, goal) -> FeasibleK | None:
    """Solve the three H = 1 equations of a switching hypothesis for (k, c).

    `U_hyp` is (u_i, u_j, u_last) with u_i != u_j; the last control is
    evaluated at the goal configuration.  Returns None when the system is
    inconsistent.  Planar hypotheses reduce to the three unknowns
    (k_x, k_y, c_z); otherwise the full six unknowns are solved and the
    minimum-norm representative is returned with the multiplicity flag set.
    """
    if len(U_hyp) != 3:
        raise InvalidInputError("hypothesis needs (u_i, u_j, u_last)")
    if U_hyp[0].key() == U_hyp[1].key():
        raise InvalidInputError("switching controls must differ")
    cms = _hypothesis_rows(q, U_hyp, goal)
    planar = _planar_hypothesis(q, U_hyp)
    if planar:
        A = np.array([[cm.moment[0], cm.moment[1], cm.axis_term[2]]
                      for cm in cms])
    else:
        A = np.array([np.concatenate([cm.moment, cm.axis_term]) for cm in cms])
    b = np.ones(3)
    x, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if float(np.max(np.abs(A @ x - b))) > 1e-8:
        return None
    if planar:
        cert = ExtremalCertificate(k=vec3(x[0], x[1], 0.0),
                                   c=vec3(0.0, 0.0, x[2]))
    else:
        cert = ExtremalCertificate(k=vec3(x[:3]), c=vec3(x[3:]))
    return FeasibleK(certificate=cert, multiple=rank < A.shape[1])


def _not_parallel(d: np.ndarray, k: np.ndarray) -> bool:
    nd, nk = float(np.linalg.norm(d)), float(np.linalg.norm(k))
    if nd < 1e-15:
        return False
    if nk < 1e-15:
        return True
    return float(np.linalg.norm(np.cross(d / nd, k / nk))) >= PARALLEL_TOL


def improving_delta_k(cert, q: PointConfiguration, U_hyp, goal) -> np.ndarray | None:
    """Certificate step that strictly increases all hypothesized moments.

    Candidates are the gradient directions themselves: the moments of the two
    switching controls at q.  A candidate improves when its unit vector has a
    strictly positive dot product (margin IMPROVE_MARGIN) with the moments of
    all three hypothesized controls, the last evaluated at the goal, and is
    not parallel to k (scaling k is a gauge move, not an improvement).
    Returns the best improving unit step or None.
    """
    cert = cert.certificate if isinstance(cert, FeasibleK) else cert
    cms = _hypothesis_rows(q, U_hyp, goal)
    moments = [cm.moment for cm in cms]
    if U_hyp[0].key() == U_hyp[1].key():
        # single-control hypothesis: its own gradient trivially improves
        b = moments[0]
        n = float(np.linalg.norm(b))
        return b / n if n > 1e-15 else None
    best = None
    for b in (moments[0], moments[1]):
        n = float(np.linalg.norm(b))
        if n < 1e-15 or not _not_parallel(b, cert.k):
            continue
        d = b / n
        margin = min(float(d @ m) for m in moments)
        if margin > IMPROVE_MARGIN and (best is None or margin > best[0]):
            best = (margin, d)
    return None if best is None else best[1]


@dataclass(frozen=True)
class WeightRelation:
    """Linear relation sum_i alpha_i * coefficients_i = 0 among basis weights."""

    grad_k_basis: tuple
    coefficients: tuple
    vacuous: bool  # all coefficients negligible: full family admissible


def weight_relation(cert, q: PointConfiguration, U_hyp, goal) -> WeightRelation:
    """Relation among the basis weights imposed by the last control.

    Stepping k by delta_k = sum alpha_i basis_i must leave the last control's
    level unchanged (its moment d is evaluated at the goal and does not move
    with the configuration), which pins sum alpha_i (basis_i . d) = 0.
    """
    cms = _hypothesis_rows(q, U_hyp, goal)
    d = cms[2].moment
    if float(np.linalg.norm(d)) < 1e-12:
        raise DegenerateConfigurationError("last control has zero moment")
    basis = (cms[0].moment.copy(), cms[1].moment.copy())
    coeff = tuple(float(b @ d) for b in basis)
    return WeightRelation(grad_k_basis=basis, coefficients=coeff,
                          vacuous=all(abs(c) < 1e-12 for c in coeff))


def joint_delta_test(cert, delta_k, q: PointConfiguration, u_i: Control,
                     u_j: Control, goal) -> np.ndarray | None:
    """Position step consistent with the certificate step, on the slice.

    First-order consistency between a position step Delta and a certificate
    step delta_k reads Delta . [(k + delta_k) x (axis_i - axis_j)] =
    delta_k . (moment_i - moment_j).  When the axes differ this is one linear
    equation on the slice, and the admissible steps follow the orbit of a
    hypothesized rotation anchored at the goal; the returned unit direction
    is that orbit's tangent.  When the axes agree the left side degenerates
    and the condition reduces to delta_k being orthogonal to the moment
    difference.
    """
    cert = cert.certificate if isinstance(cert, FeasibleK) else cert
    delta_k = vec3(delta_k)
    goal = vec3(goal)
    cm_i = control_moment(q, u_i, goal)
    cm_j = control_moment(q, u_j, goal)
    axis_diff = cm_i.axis_term - cm_j.axis_term
    rhs = float(delta_k @ (cm_i.moment - cm_j.moment))
    a = np.cross(np.asarray(cert.k, dtype=float) + delta_k, axis_diff)
    a_slice = np.array([a[0], a[1], 0.0])
    na = float(np.linalg.norm(a_slice))
    if na < 1e-12:
        # same rotation axis (or translations): no Delta dependence remains
        return None if abs(rhs) > 1e-9 else np.array([0.0, 0.0, 0.0])
    return _orbit_tangent(q, (u_i, u_j), goal)


def _orbit_tangent(q: PointConfiguration, U_pair, goal) -> np.ndarray | None:
    """Tangent of the candidate switching curve through the configuration.

    Holding the forced tie while sliding the configuration follows the screw
    of one of the hypothesized rotations anchored at the goal: the candidate
    curve through the body origin p is that rotation's circular orbit about
    its goal-anchored center, with tangent axis x (p - center).  When both
    controls rotate, the orbit of the center nearer to p is used.  The sign
    is canonicalized so the largest-magnitude component is positive.
    """
    qg = _goal_config(vec3(goal))
    p = np.asarray(q.p_o, dtype=float)
    best = None
    for u in U_pair:
        if u.kind != "rotation":
            continue
        wc = world_frame_control(qg, u)
        r = p - wc.center
        dist = float(np.linalg.norm(r))
        if best is None or dist < best[0]:
            best = (dist, np.cross(wc.axis, r))
    if best is None:
        return None
    t = best[1]
    n = float(np.linalg.norm(t))
    if n < 1e-12:
        return None
    t = t / n
    return t if t[int(np.argmax(np.abs(t)))] >= 0 else -t


def default_hypotheses(U: ControlSet):
    """All (i, j, last) index triples, skipping translation-translation pairs.

    Rotation-rotation pairs come first: both their constraint gradients move
    with the configuration, so they carry the most switching information.
    """
    m = len(U)
    pairs = []
    for i, j in itertools.combinations(range(m), 2):
        kinds = (U[i].kind, U[j].kind)
        if kinds == ("translation", "translation"):
            continue
        pairs.append((kinds.count("rotation") != 2, i, j))
    pairs.sort()
    return [(i, j, l) for _, i, j in pairs for l in range(m)]


def classify_configuration(q: PointConfiguration, U: ControlSet, goal,
                           hypotheses=None,
                           solver_params=None) -> SwitchClassification:
    """Run the switching-curve procedure over all hypotheses and aggregate.

    Per hypothesis: feasible_k, then the improving-step test; an improving
    step means the hypothesis sees the configuration as interior, no
    improving step means the tie is forced and the configuration is on a
    switching curve with a tangent from the goal-anchored orbit.  OnCurve
    dominates Interior dominates NoFeasibleK across hypotheses.  The
    Interior first/last hint is read from the shortest trajectory to the
    goal, falling back to the hypothesis when the solve fails.
    """
    from .solver import canonical_best_word, solve_shortest  # avoid a cycle

    goal = vec3(goal)
    if hypotheses is None:
        hypotheses = default_hypotheses(U)
    on_curve = None
    interior = None
    for (i, j, l) in hypotheses:
        U_hyp = (U[i], U[j], U[l])
        fk = feasible_k(q, U_hyp, goal)
        if fk is None:
            continue
        dk = improving_delta_k(fk, q, U_hyp, goal)
        if dk is not None:
            d_last = control_moment(_goal_config(goal), U_hyp[2], goal).moment
            moments = [control_moment(q, U_hyp[0], goal).moment,
                       control_moment(q, U_hyp[1], goal).moment, d_last]
            margin = min(float(dk @ m) for m in moments)
            cand_first = i if float(np.linalg.norm(
                dk - moments[0] / np.linalg.norm(moments[0]))) < 1e-9 else j
            if interior is None or margin > interior[0]:
                interior = (margin, fk, dk, (i, j, l), cand_first)
            continue
        rel = None
        try:
            rel = weight_relation(fk, q, U_hyp, goal)
        except DegenerateConfigurationError:
            continue
        # build the admissible delta_k from the weight relation and test it
        ci, cj = rel.coefficients
        alpha, beta = (cj, -ci) if (abs(ci) > 1e-12 or abs(cj) > 1e-12) \
            else (1.0, 1.0)
        dk_curve = alpha * rel.grad_k_basis[0] + beta * rel.grad_k_basis[1]
        n = float(np.linalg.norm(dk_curve))
        dk_curve = dk_curve / n if n > 1e-12 else dk_curve
        tangent = joint_delta_test(fk, 1e-4 * dk_curve, q, U_hyp[0], U_hyp[1],
                                   goal)
        if tangent is None or float(np.linalg.norm(tangent)) < 1e-12:
            continue
        # prefer hypotheses whose certificate system is uniquely determined
        if on_curve is None or (on_curve[0] and not fk.multiple):
            on_curve = (fk.multiple, SwitchClassification(
                verdict="OnCurve", tangent=tangent,
                certificate=fk.certificate, delta_k=dk_curve,
                hypothesis=(i, j, l)))
    if on_curve is not None:
        return on_curve[1]
    if interior is not None:
        margin, fk, dk, hyp, cand_first = interior
        first, last = cand_first, hyp[2]
        try:
            res = solve_shortest(q, _goal_config(goal), U, solver_params)
            word = canonical_best_word(res).word
            if word:
                first, last = word[0], word[-1]
        except Exception:
            pass
        return SwitchClassification(
            verdict="Interior", first=first, last=last,
            certificate=fk.certificate, delta_k=dk, hypothesis=hyp)
    return SwitchClassification(verdict="NoFeasibleK")
