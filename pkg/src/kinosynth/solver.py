"""Shortest-path search over extremal certificates.

The solver hypothesizes the first and last control of the optimal word, which
pins two linear conditions on the certificate (k, c): the first control holds
H = 1 at the start and the last holds H = 1 at the goal.  The remaining
one-parameter family is swept; each candidate certificate is rolled out by
PMP maximization and scored by how close its trajectory comes to the goal.
Grid refinement around the best candidates drives the goal mismatch to the
requested tolerance, which is resolution completeness rather than a global
optimality proof.

Planar problems use an exact scalar engine: along a rotation segment every
inactive Hamiltonian is a single-frequency sinusoid and along a translation
it is affine, so switch times and closest-approach times come from closed
forms instead of numeric integration.  Switches between a turn and a straight
are tangential (the straight's H touches 1 from below), so the rollout treats
near-grazing maxima as switch opportunities and resolves the resulting ties
by keeping the candidate control that survives longest.  When a translation
becomes active every Hamiltonian is stationary, which leaves the straight
length free; the rollout closes that gap by jointly optimizing the straight
length and a final arc against the goal in closed form.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .controls import ControlSet, Trajectory, apply_control, simulate
from .extremal import ExtremalCertificate
from .geometry import (InvalidInputError, PointConfiguration, vec3,
                       xytheta_from_config)

TWO_PI = 2.0 * math.pi
# fixed ten-point scan over a full turn used by the tail optimization
_TAIL_SCAN = tuple((math.cos(TWO_PI * i / 10.0), math.sin(TWO_PI * i / 10.0),
                    TWO_PI * i / 10.0) for i in range(1, 11))


class NoPathFoundError(RuntimeError):
    """No candidate certificate reached the goal at the finest resolution."""


class AmbiguousExtremalError(RuntimeError):
    """The rollout could not pick an active control (non-finite H values)."""


@dataclass(frozen=True)
class SolverParams:
    """Search, rollout and tolerance settings for solve_shortest."""

    eps_goal: float = 1e-6
    eps_seg: float = 1e-6
    max_segments: int = 12
    max_time: float | None = None
    coarse_grid: int = 181
    refine_budget: int = 900  # extra bisections per certificate family
    width_floor: float = 1e-12
    tie_tol: float = 1e-9
    graze_gap: float = 1e-7
    dedup_time_tol: float = 1e-3  # rollout-time window for resolved-root dedup
    seeds: tuple = ()          # Seed warm starts, usually from a neighbor solve
    sphere_directions: int = 256
    magnitudes: int = 24


@dataclass(frozen=True)
class Seed:
    """Warm-start certificate for a hypothesized (first, last) control pair."""

    first: int
    last: int
    x: tuple  # (k1, k2, c) planar certificate coordinates


@dataclass(frozen=True)
class WordCandidate:
    """Best solved trajectory for one control word."""

    word: tuple
    total_time: float
    goal_error: float
    first: int
    last: int
    x: tuple
    segments: tuple


@dataclass(frozen=True)
class SolveResult:
    trajectory: Trajectory
    certificate: ExtremalCertificate | None
    goal_error: float
    total_time: float
    reached: bool = True
    by_word: tuple = ()


# --- planar rollout engine ---------------------------------------------------

@dataclass
class _Outcome:
    segments: list
    best_segments: list
    best_E: float
    best_time: float
    reached: bool
    H0: float
    flag: str


def _first_rise(A, B, C, H0, cap, tie_tol, graze_gap):
    """Earliest psi in (0, cap] where A + B cos(psi) + C sin(psi) overtakes H0.

    Returns the first rising crossing, or the tangential maximum when the
    sinusoid peaks within graze_gap of H0 without crossing, or None.
    """
    M = math.hypot(B, C)
    if M < 1e-14:
        return None
    if A + B >= H0 - tie_tol and C > 1e-12:
        return 0.0
    peak = A + M
    if peak < H0 - graze_gap:
        return None
    psi0 = math.atan2(C, B) % TWO_PI
    if peak <= H0:
        return psi0 if psi0 <= cap else None
    cosv = (H0 - A) / M
    if cosv > 1.0:
        cosv = 1.0
    elif cosv < -1.0:
        cosv = -1.0
    d = math.acos(cosv)
    psi = (psi0 - d) % TWO_PI
    return psi if psi <= cap else None


class _PlanarEngine:
    """Closed-form extremal rollout for z = 0 problems."""

    def __init__(self, U: ControlSet, goal_xyth, tie_tol=1e-9, graze_gap=1e-7):
        self.U = U
        self.tie = tie_tol
        self.graze = graze_gap
        gx, gy, gth = goal_xyth
        c, s = math.cos(gth), math.sin(gth)
        self.g = (gx, gy)
        self.gp = ((gx, gy), (gx + c, gy + s), (gx - s, gy + c))
        self.ctrl = []
        for u in U:
            if u.kind == "translation":
                self.ctrl.append(("t", float(u.v[0]), float(u.v[1])))
            else:
                wz = float(u.omega * u.axis[2])
                self.ctrl.append(("r", float(u.center[0]), float(u.center[1]), wz))
        self.m = len(self.ctrl)
        self.rot_idx = [j for j, cc in enumerate(self.ctrl) if cc[0] == "r"]

    # -- pointwise quantities --

    def _points(self, x, y, co, si):
        return ((x, y), (x + co, y + si), (x - si, y + co))

    def _world(self, j, x, y, co, si):
        cc = self.ctrl[j]
        if cc[0] == "t":
            return (co * cc[1] - si * cc[2], si * cc[1] + co * cc[2])
        return (x + co * cc[1] - si * cc[2], y + si * cc[1] + co * cc[2])

    def _h_all(self, x, y, co, si, k1, k2, cz):
        gx, gy = self.g
        out = []
        for j, cc in enumerate(self.ctrl):
            w = self._world(j, x, y, co, si)
            if cc[0] == "t":
                out.append(k1 * w[0] + k2 * w[1])
            else:
                wz = cc[3]
                out.append(wz * (k2 * (gx - w[0]) - k1 * (gy - w[1]) + cz))
        return out

    def e_value(self, x, y, co, si):
        pts = self._points(x, y, co, si)
        return sum((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2
                   for p, q in zip(pts, self.gp))

    # -- per-segment closed forms --

    def _rot_events(self, a, x, y, co, si, k1, k2, cz, hv, H0, remaining):
        """Earliest overtake (in psi = |wz| t) during a rotation segment."""
        cc = self.ctrl[a]
        rax, ray = self._world(a, x, y, co, si)
        wza = cc[3]
        W = abs(wza)
        sigma = 1.0 if wza > 0 else -1.0
        cap = min(TWO_PI, W * remaining)
        gx, gy = self.g
        best = cap
        capped = True
        for j, oc in enumerate(self.ctrl):
            if j == a:
                continue
            if oc[0] == "t":
                vw = self._world(j, x, y, co, si)
                A = 0.0
                B = k1 * vw[0] + k2 * vw[1]
                C = -k1 * vw[1] + k2 * vw[0]
            else:
                rj = self._world(j, x, y, co, si)
                ux, uy = rj[0] - rax, rj[1] - ray
                wzj = oc[3]
                A = wzj * (k2 * gx - k1 * gy + cz + k1 * ray - k2 * rax)
                B = wzj * (k1 * uy - k2 * ux)
                C = wzj * (k1 * ux + k2 * uy)
            ev = _first_rise(A, B, sigma * C, H0, cap, self.tie, self.graze)
            if ev is not None and ev < best:
                best = ev
                capped = False
        return best, capped, (rax, ray, W, sigma)

    def _trans_duration(self, a, x, y, co, si, k1, k2, hv, H0):
        """Time a translation survives before a rotation's affine H overtakes."""
        vw = self._world(a, x, y, co, si)
        dur = math.inf
        for j in self.rot_idx:
            s = self.ctrl[j][3] * (k1 * vw[1] - k2 * vw[0])
            if s > 1e-13:
                if hv[j] >= H0 - self.tie:
                    return 0.0
                dur = min(dur, (H0 - hv[j]) / s)
        return dur

    def _e_min_rotation(self, geom, x, y, co, si, psi_end):
        """Closest squared goal mismatch within (0, psi_end] of a rotation."""
        rax, ray, W, sigma = geom
        pts = self._points(x, y, co, si)
        S0 = P = Q = 0.0
        for p, gq in zip(pts, self.gp):
            ux, uy = p[0] - rax, p[1] - ray
            wx, wy = gq[0] - rax, gq[1] - ray
            S0 += ux * ux + uy * uy + wx * wx + wy * wy
            P += wx * ux + wy * uy
            Q += -wx * uy + wy * ux
        Qs = sigma * Q
        cands = [(S0 - 2.0 * (P * math.cos(psi_end) + Qs * math.sin(psi_end)), psi_end)]
        ME = math.hypot(P, Qs)
        psiE = math.atan2(Qs, P) % TWO_PI
        if 0.0 < psiE <= psi_end:
            cands.append((S0 - 2.0 * ME, psiE))
        return min(cands)

    def _advance_rotation(self, geom, x, y, th, psi):
        rax, ray, W, sigma = geom
        phi = sigma * psi
        c, s = math.cos(phi), math.sin(phi)
        dx, dy = x - rax, y - ray
        return (rax + dx * c - dy * s, ray + dx * s + dy * c, th + phi)

    # -- straight-segment tail optimization --

    def tail(self, a, x, y, co, si, s_cap, cap=math.inf):
        """Best (goal mismatch, segments) for straight a then one optional arc.

        During a straight all Hamiltonians are stationary at the tie level, so
        the exit time is not determined by the maximization condition; it is
        chosen here, jointly with a final arc angle, to minimize the goal
        mismatch in closed form.  Arc candidates whose mismatch lower bound
        cannot beat `cap` are skipped without the angle search.
        """
        vx, vy = self._world(a, x, y, co, si)
        vv3 = 3.0 * (vx * vx + vy * vy)
        inv3 = 1.0 / vv3
        pts = self._points(x, y, co, si)
        gp = self.gp
        # straight only
        acc = sum((p[0] - q[0]) * vx + (p[1] - q[1]) * vy
                  for p, q in zip(pts, gp))
        s0 = -acc * inv3
        if s0 < 0.0:
            s0 = 0.0
        elif s0 > s_cap:
            s0 = s_cap
        e0 = sum((p[0] + vx * s0 - q[0]) ** 2 + (p[1] + vy * s0 - q[1]) ** 2
                 for p, q in zip(pts, gp))
        best = (e0, [[a, s0]])
        for j in self.rot_idx:
            wzj = self.ctrl[j][3]
            sgn = 1.0 if wzj > 0 else -1.0
            rjx, rjy = self._world(j, x, y, co, si)
            # E(beta, s) = C0 + 3|v|^2 s^2 - 2(A1 cos + B1 sin)
            #            + 2 s (A2 cos + B2 sin) - 2 s VG
            # for "straight s, then arc beta about the (carried) center".
            A1 = B1 = A2 = B2 = C0 = VG = 0.0
            for p, q in zip(pts, gp):
                ux, uy = p[0] - rjx, p[1] - rjy
                wx, wy = q[0] - rjx, q[1] - rjy
                A1 += ux * wx + uy * wy
                B1 += ux * wy - uy * wx
                A2 += vx * ux + vy * uy
                B2 += -vx * uy + vy * ux
                C0 += ux * ux + uy * uy + wx * wx + wy * wy
                VG += vx * wx + vy * wy
            # minimum over (beta, s) is at least C0 - 2|(A1,B1)| minus the
            # largest possible straight-term gain (VG - t)^2 / (3|v|^2)
            lb = (C0 - 2.0 * math.hypot(A1, B1)
                  - (abs(VG) + math.hypot(A2, B2)) ** 2 * inv3)
            if lb >= best[0] or lb >= cap:
                continue

            def ev(cb, sb):
                t = A2 * cb + B2 * sb
                s = (VG - t) * inv3
                if s < 0.0:
                    s = 0.0
                elif s > s_cap:
                    s = s_cap
                return (C0 + vv3 * s * s - 2.0 * (A1 * cb + B1 * sb)
                        + 2.0 * s * (t - VG)), s

            bb, (bE, bs) = 0.0, ev(1.0, 0.0)
            step = sgn * TWO_PI / 10.0
            for cb, sb, beta in _TAIL_SCAN:
                E, s = ev(cb, sgn * sb)
                if E < bE:
                    bb, bE, bs = sgn * beta, E, s
            # alternate the two closed-form coordinate minima; the linear
            # convergence is accelerated with Aitken extrapolation
            prev2 = prev1 = None
            for _ in range(60):
                beta_hat = math.atan2(B1 - bs * B2, A1 - bs * A2) % TWO_PI
                if sgn < 0:
                    beta_hat -= TWO_PI
                E, s = ev(math.cos(beta_hat), math.sin(beta_hat))
                if E >= bE - max(1e-22, 1e-12 * bE):
                    break
                bb, bE, bs = beta_hat, E, s
                if prev2 is not None:
                    d1, d0 = bb - prev1, prev1 - prev2
                    if abs(d1 - d0) > 1e-30:
                        b_acc = bb - d1 * d1 / (d1 - d0)
                        E, s = ev(math.cos(b_acc), math.sin(b_acc))
                        if E < bE:
                            bb, bE, bs = b_acc, E, s
                    prev2 = prev1 = None
                else:
                    prev2, prev1 = prev1, bb
            if bE < best[0]:
                segsj = [[a, bs]]
                # a full-circle arc returns to the same pose in more time
                arc = abs(bb) % TWO_PI
                if 1e-12 < arc < TWO_PI - 1e-9:
                    segsj.append([j, arc / abs(wzj)])
                best = (bE, segsj)
        return best

    # -- the rollout --

    def rollout(self, x, y, th, k1, k2, cz, eps_goal, max_segments, max_time):
        E_th = eps_goal * eps_goal / 3.0
        segs = []
        t_used = 0.0
        co, si = math.cos(th), math.sin(th)
        best_E = self.e_value(x, y, co, si)
        best_segs, best_t = [], 0.0
        hv = self._h_all(x, y, co, si, k1, k2, cz)
        H0 = max(hv)
        if not math.isfinite(H0):
            raise AmbiguousExtremalError("non-finite Hamiltonian values")
        if best_E <= E_th:
            return _Outcome([], [], best_E, 0.0, True, H0, "goal")
        flag = "segments"
        reached = False
        tiny_run = 0
        for _ in range(max_segments):
            remaining = max_time - t_used
            if remaining <= 1e-12:
                flag = "time"
                break
            co, si = math.cos(th), math.sin(th)
            hv = self._h_all(x, y, co, si, k1, k2, cz)
            cands = [j for j in range(self.m) if hv[j] >= H0 - self.tie]
            if not cands:
                cands = [hv.index(max(hv))]
            infos = {}
            pick, pick_key = None, None
            for j in cands:
                if self.ctrl[j][0] == "t":
                    dur = self._trans_duration(j, x, y, co, si, k1, k2, hv, H0)
                    infos[j] = (dur, None)
                else:
                    psi_end, capped, geom = self._rot_events(
                        j, x, y, co, si, k1, k2, cz, hv, H0, remaining)
                    infos[j] = (psi_end / geom[2], (psi_end, capped, geom))
                key = (-infos[j][0], 0 if self.ctrl[j][0] == "t" else 1, j)
                if pick_key is None or key < pick_key:
                    pick, pick_key = j, key
            # a tied straight always gets a terminal tail-optimized candidate,
            # even when a turn survives longer and the main line continues
            for j in cands:
                if self.ctrl[j][0] == "t" and j != pick:
                    tE, tsegs = self.tail(j, x, y, co, si, remaining, best_E)
                    if tE < best_E:
                        best_E = tE
                        best_segs = [list(sg) for sg in segs] + tsegs
                        best_t = t_used + sum(sg[1] for sg in tsegs)
                        if best_E <= E_th:
                            reached = True
            if reached:
                flag = "goal"
                break
            if self.ctrl[pick][0] == "t":
                tE, tsegs = self.tail(pick, x, y, co, si, remaining, best_E)
                if tE < best_E:
                    best_E = tE
                    best_segs = [list(sg) for sg in segs] + tsegs
                    best_t = t_used + sum(sg[1] for sg in tsegs)
                reached = best_E <= E_th
                flag = "tail"
                break
            psi_end, capped, geom = infos[pick][1]
            W = geom[2]
            dur = psi_end / W
            Ec, psi_c = self._e_min_rotation(geom, x, y, co, si, psi_end)
            if Ec < best_E:
                best_E = Ec
                best_segs = [list(sg) for sg in segs] + [[pick, psi_c / W]]
                best_t = t_used + psi_c / W
            if best_E <= E_th:
                reached = True
                flag = "goal"
                break
            if segs and segs[-1][0] == pick:
                segs[-1][1] += dur
            else:
                segs.append([pick, dur])
            x, y, th = self._advance_rotation(geom, x, y, th, psi_end)
            t_used += dur
            if capped:
                flag = "cap"
                break
            tiny_run = tiny_run + 1 if dur < 1e-9 else 0
            if tiny_run >= 3:
                flag = "chatter"
                break
        return _Outcome(segs, best_segs, best_E, best_t, reached, H0, flag)

    def constraint_row(self, j, x, y, th):
        """Coefficients of (k1, k2, c) in H_j = 1 at the given planar pose."""
        co, si = math.cos(th), math.sin(th)
        w = self._world(j, x, y, co, si)
        if self.ctrl[j][0] == "t":
            return [w[0], w[1], 0.0]
        wz = self.ctrl[j][3]
        gx, gy = self.g
        return [-wz * (gy - w[1]), wz * (gx - w[0]), wz]


# --- planar certificate search ----------------------------------------------

def _planar_config(q: PointConfiguration) -> bool:
    pts = q.points()
    return bool(np.max(np.abs(pts[:, 2])) < 1e-9)


def _score(out: _Outcome, E_th: float):
    if out.reached:
        return (0, out.best_time, out.best_E)
    return (1, out.best_E, out.best_time)


def _normalized_result(eng, q_s, q_g, U, entry, params):
    """Build a SolveResult from the winning rollout, rescaling H to 1."""
    out, x = entry
    H0 = out.H0
    cert = ExtremalCertificate(k=vec3(x[0] / H0, x[1] / H0, 0.0),
                               c=vec3(0.0, 0.0, x[2] / H0))
    traj = Trajectory(tuple((sg[0], sg[1]) for sg in out.best_segments
                            if sg[1] > 1e-12))
    q_end = simulate(q_s, traj, U)
    err = float(np.sum(np.linalg.norm(q_end.points() - q_g.points(), axis=1)))
    return SolveResult(trajectory=traj, certificate=cert, goal_error=err,
                       total_time=traj.total_time, reached=out.reached)


def _h_deviation(eng, q_s, U, x, segments):
    """Worst Hamiltonian inconsistency of certificate x along a segment list:
    the active control must sit at the tie level and no control may exceed it.
    """
    k1, k2, cz = x
    dev = 0.0
    q = q_s
    for idx, dur in ((sg[0], sg[1]) for sg in segments):
        if dur <= 1e-12:
            continue
        for frac in (0.25, 0.75):
            qf = apply_control(q, U[idx], frac * dur)
            xs, ys, ths = xytheta_from_config(qf)
            hv = eng._h_all(xs, ys, math.cos(ths), math.sin(ths), k1, k2, cz)
            dev = max(dev, abs(hv[idx] - 1.0), max(hv) - 1.0)
        q = apply_control(q, U[idx], dur)
    return dev


def _solve_planar(q_s, q_g, U, params: SolverParams) -> SolveResult:
    xs, ys, ths = xytheta_from_config(q_s)
    gx, gy, gth = xytheta_from_config(q_g)
    eng = _PlanarEngine(U, (gx, gy, gth), params.tie_tol, params.graze_gap)
    # solve to a slightly tighter tolerance so the reported goal error stays
    # under eps_goal after the exact re-simulation of the winner
    eps_run = 0.8 * params.eps_goal
    E_th = eps_run ** 2 / 3.0
    if eng.e_value(xs, ys, math.cos(ths), math.sin(ths)) <= E_th:
        return SolveResult(trajectory=Trajectory(()), certificate=None,
                           goal_error=0.0, total_time=0.0)
    dist = math.hypot(gx - xs, gy - ys)
    max_time = params.max_time if params.max_time is not None else 16.0 + 3.0 * dist
    m = len(U)

    def run(x):
        return eng.rollout(xs, ys, ths, x[0], x[1], x[2], eps_run,
                           params.max_segments, max_time)

    families = {}
    for fi in range(m):
        row_s = eng.constraint_row(fi, xs, ys, ths)
        for li in range(m):
            A = np.array([row_s, eng.constraint_row(li, gx, gy, gth)])
            u_, sv, vh = np.linalg.svd(A)
            rank = int(np.sum(sv > 1e-10 * max(1.0, sv[0])))
            x0, *_ = np.linalg.lstsq(A, np.ones(2), rcond=None)
            if np.max(np.abs(A @ x0 - 1.0)) > 1e-9:
                continue
            families[(fi, li)] = (x0, [vh[r] for r in range(rank, 3)])

    reached_pool = []  # every goal-reaching evaluation, kept for by_word
    best_any = [None]  # lowest-mismatch evaluation overall, for diagnostics

    def evaluate(fi, li, nd, phi):
        x0, nulls = families[(fi, li)]
        x = x0 + math.tan(phi) * nulls[nd]
        out = run(x)
        e = (_score(out, E_th), phi, fi, li, nd, out, tuple(x))
        if out.reached:
            reached_pool.append(e)
        if best_any[0] is None or e[0] < best_any[0][0]:
            best_any[0] = e
        return e

    h = math.pi / (2 * params.coarse_grid)
    phis = [float(p) for p in
            np.linspace(-math.pi / 2 + h, math.pi / 2 - h, params.coarse_grid)]
    seed_phis = {}
    seed_centers = {}
    for seed in params.seeds:
        fam = families.get((seed.first, seed.last))
        if fam is None:
            continue
        x0, nulls = fam
        dx = np.asarray(seed.x, dtype=float) - x0
        for nd, n in enumerate(nulls):
            phi0 = math.atan(float(n @ dx))
            seed_centers.setdefault((seed.first, seed.last, nd), []).append(phi0)
            # geometric offsets: the polish below covers the fine scales, the
            # coarser offsets here give the drill straddling intervals when
            # the warm start is farther off than the polish bracket
            offs = [0.0] + [s * d for d in (1e-2, 3e-2, 1e-1)
                            for s in (1.0, -1.0)]
            seed_phis.setdefault((seed.first, seed.last, nd), []).extend(
                phi0 + o for o in offs if abs(phi0 + o) < math.pi / 2)

    # polish each warm start directly before the global drill: scan a narrow
    # bracket, then run a damped secant on sqrt(mismatch), which is locally
    # linear in phi on the funnel around a root.  This recovers roots that a
    # small drill budget would miss when other funnels compete for it.
    lim = math.pi / 2 - 1e-9
    for (fi, li, nd), centers in seed_centers.items():
        done = []
        for phi0 in centers:
            if any(abs(phi0 - d) < 1e-4 for d in done):
                continue
            done.append(phi0)
            lo = max(phi0 - 3e-3, -lim)
            hi = min(phi0 + 3e-3, lim)
            if hi <= lo:
                continue
            pts = sorted((evaluate(fi, li, nd, float(p))
                          for p in np.linspace(lo, hi, 7)),
                         key=lambda e: e[5].best_E)
            a, b = pts[0], pts[1]
            damp = 1.0
            for _ in range(12):
                if a[5].best_E <= E_th:
                    break
                ra = math.sqrt(max(a[5].best_E, 0.0))
                rb = math.sqrt(max(b[5].best_E, 0.0))
                if rb - ra < 1e-30:
                    break
                pn = a[1] - damp * ra * (b[1] - a[1]) / (rb - ra)
                pn = min(max(pn, a[1] - (hi - lo)), a[1] + (hi - lo))
                pn = min(max(pn, -lim), lim)
                if min(abs(pn - a[1]), abs(pn - b[1])) < params.width_floor:
                    break
                c = evaluate(fi, li, nd, pn)
                damp = 1.0 if c[5].best_E < a[5].best_E else damp * 0.5
                a, b = sorted((a, b, c), key=lambda e: e[5].best_E)[:2]

    tick = itertools.count()
    for (fi, li), (x0, nulls) in families.items():
        for nd in range(len(nulls)):
            extra = list(seed_phis.get((fi, li, nd), ()))
            if len(nulls) == 1:
                # exact candidates for words that contain a straight: the
                # active straight grazes the tie level tangentially, which
                # pins |k| |v| = 1; intersecting that circle with the family
                # line is a quadratic in the line parameter
                nv = nulls[nd]
                for cc in eng.ctrl:
                    if cc[0] != "t":
                        continue
                    vn2 = cc[1] * cc[1] + cc[2] * cc[2]
                    aq = nv[0] * nv[0] + nv[1] * nv[1]
                    bq = 2.0 * (x0[0] * nv[0] + x0[1] * nv[1])
                    cq = x0[0] * x0[0] + x0[1] * x0[1] - 1.0 / vn2
                    roots = []
                    if aq > 1e-30:
                        disc = bq * bq - 4.0 * aq * cq
                        if disc >= 0.0:
                            rt = math.sqrt(disc)
                            roots = [(-bq + rt) / (2 * aq), (-bq - rt) / (2 * aq)]
                    elif abs(bq) > 1e-30:
                        roots = [-cq / bq]
                    for t in roots:
                        p0 = math.atan(t)
                        extra.extend(p0 + d for d in (0.0, 1e-7, -1e-7)
                                     if abs(p0 + d) < math.pi / 2)
            ps = sorted(set(phis) | set(extra))
            ents = [evaluate(fi, li, nd, p) for p in ps]
            roots = [(e[1], e[5].best_time) for e in ents if e[5].reached]

            def near_resolved(e):
                # tracking the same trajectory branch as a resolved root:
                # the rollout time is the discriminator, phi only bounds it
                return any(abs(e[1] - pr) < 1e-2
                           and abs(e[5].best_time - tr) < params.dedup_time_tol
                           for pr, tr in roots)
            # Adaptive subdivision: goal-reaching certificates are isolated
            # zeros of the mismatch, usually one-sided funnels ending at a
            # jump where the switch structure changes.  Repeatedly bisect the
            # interval with the lowest endpoint mismatch; that drills into
            # every funnel, including ones invisible as grid local minima.
            heap = []
            for ea, eb in zip(ents, ents[1:]):
                heapq.heappush(heap, (min(ea[5].best_E, eb[5].best_E),
                                      next(tick), ea, eb, 0))
            budget = params.refine_budget
            buckets = {}  # drills per 1e-4 wide phi bucket, to bound
            # the spend on any single root and leave budget for the rest

            def mixed_interval(ca, cb):
                # one endpoint reaches the goal, the other tracks a clearly
                # different trajectory: approaching the same root from the
                # other side can yield a shorter rollout (for example without
                # a spurious full turn), so keep drilling
                return ((ca[5].best_E <= E_th) != (cb[5].best_E <= E_th)) \
                    and abs(ca[5].best_time - cb[5].best_time) > 1e-3

            while heap and budget > 0:
                sc, _, ea, eb, stall = heapq.heappop(heap)
                if eb[1] - ea[1] < params.width_floor:
                    continue
                if sc <= E_th and (not mixed_interval(ea, eb)
                                   or eb[1] - ea[1] < 1e-8):
                    # a root has been found and both sides agree, or the
                    # hidden branch behind the jump has been approached to
                    # negligible width; done here
                    continue
                if near_resolved(ea) and near_resolved(eb):
                    # both endpoints track a root that is already resolved
                    continue
                # split where a linear model of sqrt(mismatch) hits zero
                # (regula falsi); clip into the interior so jumps in the
                # landscape still shrink the interval geometrically
                w = eb[1] - ea[1]
                ra = math.sqrt(max(ea[5].best_E, 0.0))
                rb = math.sqrt(max(eb[5].best_E, 0.0))
                pm = (ea[1] * rb + eb[1] * ra) / (ra + rb) if ra + rb > 0 \
                    else 0.5 * (ea[1] + eb[1])
                pm = min(max(pm, ea[1] + 0.1 * w), eb[1] - 0.1 * w)
                fine, coarse = round(pm, 4), round(pm, 2)
                # endpoints tracking clearly different trajectories straddle a
                # branch jump that may hide a second root, so those intervals
                # are exempt from the per-bucket spending caps
                straddles = abs(ea[5].best_time - eb[5].best_time) > 1e-3
                if not straddles and (buckets.get(fine, 0) >= 50
                                      or buckets.get(coarse, 0) >= 100):
                    continue
                buckets[fine] = buckets.get(fine, 0) + 1
                if fine != coarse:
                    buckets[coarse] = buckets.get(coarse, 0) + 1
                em = evaluate(fi, li, nd, pm)
                budget -= 1
                if em[5].reached:
                    roots.append((em[1], em[5].best_time))
                for ca, cb in ((ea, em), (em, eb)):
                    child = min(ca[5].best_E, cb[5].best_E)
                    # funnels shrink the mismatch geometrically under
                    # bisection; flat valleys stagnate and are abandoned
                    cstall = 0 if (child < 0.8 * sc or mixed_interval(ca, cb)) \
                        else stall + 1
                    if cstall < 8:
                        heapq.heappush(heap, (child, next(tick), ca, cb, cstall))

    by_word = {}
    for e in reached_pool:
        out = e[5]
        # key on the family hypothesis too: a spurious root from another
        # (first, last) family can realize the same word at a worse time, and
        # keeping both preserves the true family entry for warm starting
        w = (tuple(sg[0] for sg in out.best_segments if sg[1] > 1e-6),
             e[2], e[3])
        if w not in by_word or out.best_time < by_word[w][5].best_time:
            by_word[w] = e
    if not by_word:
        best = best_any[0]
        detail = f"best goal mismatch {best[5].best_E:.3e}" if best else "no candidates"
        raise NoPathFoundError(
            f"no certificate reached the goal within {params.eps_goal:.1e} ({detail})")
    # a spurious family can land on the goal marginally faster (within the
    # goal tolerance) with a certificate that is not extremal; among
    # time-tied leaders prefer the certificate that keeps H constant
    entries = list(by_word.values())
    t_best = min(e[5].best_time for e in entries)
    tie = max(1e-5, 10.0 * params.eps_goal)
    leaders = [e for e in entries if e[5].best_time <= t_best + tie]
    if len(leaders) > 1:
        winner = min(leaders, key=lambda e: (
            _h_deviation(eng, q_s, U, e[6], e[5].best_segments),
            e[5].best_time))
    else:
        winner = leaders[0]
    result = _normalized_result(eng, q_s, q_g, U, (winner[5], winner[6]), params)
    cands = []
    for (w, _, _), e in sorted(by_word.items()):
        out = e[5]
        res_w = _normalized_result(eng, q_s, q_g, U, (out, e[6]), params)
        cands.append(WordCandidate(
            word=w, total_time=res_w.total_time, goal_error=res_w.goal_error,
            first=e[2], last=e[3], x=e[6],
            segments=tuple((sg[0], sg[1]) for sg in out.best_segments)))
    return SolveResult(trajectory=result.trajectory, certificate=result.certificate,
                       goal_error=result.goal_error, total_time=result.total_time,
                       reached=result.reached, by_word=tuple(cands))


# --- public API ---------------------------------------------------------------

def solve_shortest(q_s: PointConfiguration, q_g: PointConfiguration,
                   U: ControlSet, params: SolverParams | None = None) -> SolveResult:
    """Shortest trajectory from q_s to q_g over the control set U.

    Planar problems (z = 0, vertical rotation axes) use the exact scalar
    engine; general 3D problems fall back to a direction-grid search over k
    with sampled switch detection.
    """
    params = params or SolverParams()
    q_s.validate(1e-6)
    q_g.validate(1e-6)
    if U.is_planar() and _planar_config(q_s) and _planar_config(q_g):
        return _solve_planar(q_s, q_g, U, params)
    return _solve_generic(q_s, q_g, U, params)


def canonical_best_word(result: SolveResult, tie_tol: float = 1e-6) -> WordCandidate:
    """Deterministic representative among cost-tied best words.

    Mirror-symmetric problems produce exactly tied words (a word and its
    time reversal); ties within `tie_tol` of the best time resolve to the
    lexicographically greatest word tuple so downstream labels are stable.
    """
    if not result.by_word:
        raise InvalidInputError("result carries no word candidates")
    best = min(c.total_time for c in result.by_word)
    tied = [c for c in result.by_word if c.total_time <= best + tie_tol]
    return max(tied, key=lambda c: c.word)


def extremal_trajectory(cert: ExtremalCertificate, q0: PointConfiguration,
                        U: ControlSet, goal, max_segments: int = 12,
                        max_time: float = 100.0) -> Trajectory:
    """Roll out the PMP-maximizing trajectory for a fixed certificate.

    Applies the control with the largest Hamiltonian, switching when another
    control's value overtakes it; stops at the goal slice, a budget limit, or
    a stall.  `goal` is the goal position of the body origin for rotation
    moments; the goal orientation is taken from the certificate context only
    through the rollout's closest-approach truncation, so pass the full goal
    configuration via solve_shortest when orientation matters.
    """
    if max_segments < 1 or max_time <= 0:
        raise InvalidInputError("max_segments >= 1 and max_time > 0 required")
    g = vec3(goal)
    if U.is_planar() and _planar_config(q0) and abs(g[2]) < 1e-9:
        xs, ys, ths = xytheta_from_config(q0)
        eng = _PlanarEngine(U, (float(g[0]), float(g[1]), 0.0))
        out = eng.rollout(xs, ys, ths, float(cert.k[0]), float(cert.k[1]),
                          float(cert.c[2]), 1e-6, max_segments, max_time)
        segs = out.best_segments if out.reached else out.segments
        return Trajectory(tuple((sg[0], sg[1]) for sg in segs if sg[1] > 1e-12))
    eng = _GenericEngine(U, g, g)
    out = eng.rollout(q0, np.asarray(cert.k, dtype=float),
                      np.asarray(cert.c, dtype=float), 1e-6, max_segments, max_time)
    segs = out.best_segments if out.reached else out.segments
    return Trajectory(tuple((sg[0], sg[1]) for sg in segs if sg[1] > 1e-12))


# --- generic 3D engine --------------------------------------------------------

def _fibonacci_directions(n: int) -> np.ndarray:
    """Roughly uniform unit directions on the sphere (golden-angle spiral)."""
    i = np.arange(n) + 0.5
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _rotvec(w: np.ndarray, t: float) -> np.ndarray:
    angle = float(np.linalg.norm(w)) * t
    if abs(angle) < 1e-300:
        return np.eye(3)
    axis = w / np.linalg.norm(w)
    c, s = math.cos(angle), math.sin(angle)
    K = np.array([[0.0, -axis[2], axis[1]],
                  [axis[2], 0.0, -axis[0]],
                  [-axis[1], axis[0], 0.0]])
    return np.eye(3) + s * K + (1.0 - c) * (K @ K)


class _GenericEngine:
    """Sampling-plus-bisection rollout for arbitrary 3D control sets.

    Slower than the planar engine: Hamiltonians are sampled along each
    candidate segment and switch times are pinned by bisection, as the
    inactive values are two-frequency sinusoids in 3D.
    """

    SAMPLES = 96

    def __init__(self, U: ControlSet, goal_points, goal_pos,
                 tie_tol=1e-9, graze_gap=1e-7):
        self.U = U
        self.tie = tie_tol
        self.graze = graze_gap
        self.g = np.asarray(goal_pos, dtype=float)
        gp = np.asarray(goal_points, dtype=float)
        self.gp = gp if gp.shape == (3, 3) else None
        self.ctrl = []
        for u in U:
            if u.kind == "translation":
                self.ctrl.append(("t", u.v.copy()))
            else:
                self.ctrl.append(("r", u.omega * u.axis, u.center.copy(),
                                  abs(u.omega)))
        self.m = len(self.ctrl)

    def _pose(self, q: PointConfiguration):
        dx, dy = q.d_x, q.d_y
        R = np.column_stack([dx, dy, np.cross(dx, dy)])
        return q.p_o.copy(), R

    def _points(self, p, R):
        return np.stack([p, p + R[:, 0], p + R[:, 1]])

    def e_value(self, p, R):
        return float(np.sum((self._points(p, R) - self.gp) ** 2))

    def _h(self, j, p, R, k, c):
        cc = self.ctrl[j]
        if cc[0] == "t":
            return float(k @ (R @ cc[1]))
        w = R @ cc[1]
        r = p + R @ cc[2]
        return float(k @ np.cross(w, self.g - r) + w @ c)

    def _advance(self, j, p, R, t):
        cc = self.ctrl[j]
        if cc[0] == "t":
            return p + (R @ cc[1]) * t, R
        w = R @ cc[1]
        r = p + R @ cc[2]
        Rm = _rotvec(w, t)
        return r + Rm @ (p - r), Rm @ R

    def _segment_scan(self, a, p, R, k, c, H0, remaining):
        """(duration, capped) until another control overtakes H0."""
        cc = self.ctrl[a]
        cap = remaining if cc[0] == "t" else min(remaining, TWO_PI / cc[3])
        ts = np.linspace(0.0, cap, self.SAMPLES)
        states = [self._advance(a, p, R, float(t)) for t in ts]
        best = cap
        capped = True
        for j in range(self.m):
            if j == a:
                continue
            vals = np.array([self._h(j, ps, Rs, k, c) for ps, Rs in states])
            above = vals > H0 + self.tie
            rise = None
            for i in range(1, len(ts)):
                if above[i] and not above[i - 1]:
                    lo, hi = float(ts[i - 1]), float(ts[i])
                    for _ in range(60):
                        mid = 0.5 * (lo + hi)
                        pm, Rm = self._advance(a, p, R, mid)
                        if self._h(j, pm, Rm, k, c) > H0:
                            hi = mid
                        else:
                            lo = mid
                    rise = hi
                    break
            if rise is None and not above.any():
                # tangential graze: local max within graze_gap of the level
                i = int(np.argmax(vals))
                if 0 < i < len(ts) - 1 and vals[i] >= H0 - self.graze:
                    rise = float(ts[i])
            if rise is not None and 1e-12 < rise < best:
                best = rise
                capped = False
        return best, capped

    def _e_min_scan(self, a, p, R, dur):
        ts = np.linspace(0.0, dur, self.SAMPLES)[1:]
        vals = []
        for t in ts:
            ps, Rs = self._advance(a, p, R, float(t))
            vals.append(self.e_value(ps, Rs))
        i = int(np.argmin(vals))
        lo = float(ts[max(0, i - 1)])
        hi = float(ts[min(len(ts) - 1, i + 1)])
        gr = (math.sqrt(5.0) - 1.0) / 2.0
        aa, bb = lo, hi
        c1 = bb - gr * (bb - aa)
        c2 = aa + gr * (bb - aa)
        f1 = self.e_value(*self._advance(a, p, R, c1))
        f2 = self.e_value(*self._advance(a, p, R, c2))
        for _ in range(70):
            if f1 < f2:
                bb, c2, f2 = c2, c1, f1
                c1 = bb - gr * (bb - aa)
                f1 = self.e_value(*self._advance(a, p, R, c1))
            else:
                aa, c1, f1 = c1, c2, f2
                c2 = aa + gr * (bb - aa)
                f2 = self.e_value(*self._advance(a, p, R, c2))
        t_best = 0.5 * (aa + bb)
        return self.e_value(*self._advance(a, p, R, t_best)), t_best

    def tail(self, a, p, R, s_cap):
        """Straight exit plus one optional arc, optimized against the goal."""
        v = R @ self.ctrl[a][1]
        vv = float(v @ v)
        pts = self._points(p, R)
        acc = float(np.sum((pts - self.gp) @ v))
        s0 = min(max(-acc / (3.0 * vv), 0.0), s_cap)
        e0 = float(np.sum((pts + v * s0 - self.gp) ** 2))
        best = (e0, [[a, s0]])
        for j in range(self.m):
            if self.ctrl[j][0] != "r":
                continue
            w = R @ self.ctrl[j][1]
            speed = float(np.linalg.norm(w))
            r = p + R @ self.ctrl[j][2]
            us = pts - r
            gs = self.gp - r
            axis = w / speed

            def eval_beta(beta):
                Rm = _rotvec(axis, beta)
                es = us @ Rm.T - gs
                aa = float(np.sum(es @ v))
                s = min(max(-aa / (3.0 * vv), 0.0), s_cap)
                return float(np.sum((es + v * s) ** 2)), s

            bb, (bE, bs) = 0.0, eval_beta(0.0)
            for beta in np.linspace(0.0, TWO_PI, 49)[1:]:
                E, s = eval_beta(float(beta))
                if E < bE:
                    bb, bE, bs = float(beta), E, s
            for _ in range(40):
                gr = 0.02 * TWO_PI
                improved = False
                for beta in (bb - gr, bb + gr):
                    beta = beta % TWO_PI
                    E, s = eval_beta(beta)
                    if E < bE - 1e-18:
                        bb, bE, bs = beta, E, s
                        improved = True
                if not improved:
                    gr *= 0.5
                    if gr < 1e-10:
                        break
            if bE < best[0]:
                segsj = [[a, bs]]
                # a full-circle arc returns to the same pose in more time
                arc = bb % TWO_PI
                if 1e-12 < arc < TWO_PI - 1e-9:
                    segsj.append([j, arc / speed])
                best = (bE, segsj)
        return best

    def rollout(self, q0: PointConfiguration, k, c, eps_goal, max_segments,
                max_time):
        E_th = eps_goal * eps_goal / 3.0
        p, R = self._pose(q0)
        segs = []
        t_used = 0.0
        best_E = self.e_value(p, R)
        best_segs, best_t = [], 0.0
        hv = [self._h(j, p, R, k, c) for j in range(self.m)]
        H0 = max(hv)
        if not math.isfinite(H0):
            raise AmbiguousExtremalError("non-finite Hamiltonian values")
        if best_E <= E_th:
            return _Outcome([], [], best_E, 0.0, True, H0, "goal")
        flag = "segments"
        reached = False
        for _ in range(max_segments):
            remaining = max_time - t_used
            if remaining <= 1e-9:
                flag = "time"
                break
            hv = [self._h(j, p, R, k, c) for j in range(self.m)]
            cands = [j for j in range(self.m) if hv[j] >= H0 - self.tie]
            if not cands:
                cands = [int(np.argmax(hv))]
            infos = {j: self._segment_scan(j, p, R, k, c, H0, remaining)
                     for j in cands}
            pick = min(cands, key=lambda j: (-infos[j][0],
                                             0 if self.ctrl[j][0] == "t" else 1, j))
            if self.ctrl[pick][0] == "t":
                tE, tsegs = self.tail(pick, p, R, remaining)
                if tE < best_E:
                    best_E = tE
                    best_segs = [list(sg) for sg in segs] + tsegs
                    best_t = t_used + sum(sg[1] for sg in tsegs)
                reached = best_E <= E_th
                flag = "tail"
                break
            dur, capped = infos[pick]
            Ec, t_c = self._e_min_scan(pick, p, R, dur)
            if Ec < best_E:
                best_E = Ec
                best_segs = [list(sg) for sg in segs] + [[pick, t_c]]
                best_t = t_used + t_c
            if best_E <= E_th:
                reached = True
                flag = "goal"
                break
            if segs and segs[-1][0] == pick:
                segs[-1][1] += dur
            else:
                segs.append([pick, dur])
            p, R = self._advance(pick, p, R, dur)
            t_used += dur
            if capped:
                flag = "cap"
                break
        return _Outcome(segs, best_segs, best_E, best_t, reached, H0, flag)


def _solve_generic(q_s, q_g, U, params: SolverParams) -> SolveResult:
    """Direction-grid search over k with linear recovery of c from the last control."""
    eng = _GenericEngine(U, q_g.points(), q_g.p_o, params.tie_tol, params.graze_gap)
    p0, R0 = eng._pose(q_s)
    E_th = params.eps_goal ** 2 / 3.0
    if eng.e_value(p0, R0) <= E_th:
        return SolveResult(trajectory=Trajectory(()), certificate=None,
                           goal_error=0.0, total_time=0.0)
    dist = float(np.linalg.norm(q_g.p_o - q_s.p_o))
    max_time = params.max_time if params.max_time is not None else 16.0 + 3.0 * dist
    pg, Rg = eng._pose(q_g)

    def candidates_for(k):
        """(k, c) pairs satisfying H_last = 1 at the goal, one per hypothesis."""
        out = []
        for li in range(eng.m):
            cc = eng.ctrl[li]
            if cc[0] == "t":
                dot = float(k @ (Rg @ cc[1]))
                if dot > 1e-9:
                    out.append((k / dot, np.zeros(3)))
            else:
                w = Rg @ cc[1]
                r = pg + Rg @ cc[2]
                km = float(k @ np.cross(w, eng.g - r))
                c = w * ((1.0 - km) / float(w @ w))
                out.append((k, c))
        return out

    best = None
    dirs = _fibonacci_directions(params.sphere_directions)
    mags = np.geomspace(0.05, 20.0, params.magnitudes)
    for d in dirs:
        for mu in mags:
            for k, c in candidates_for(d * mu):
                out = eng.rollout(q_s, k, c, params.eps_goal,
                                  params.max_segments, max_time)
                sc = _score(out, E_th)
                if best is None or sc < best[0]:
                    best = (sc, out, k, c)
        if best is not None and best[1].reached:
            break
    if best is None:
        raise NoPathFoundError("no feasible certificate candidates")
    # local pattern refinement on (k, c)
    step = 0.25
    while step > 1e-9:
        sc0, out0, k0, c0 = best
        improved = False
        for dim in range(3):
            for sgn in (-1.0, 1.0):
                k = k0.copy()
                k[dim] += sgn * step * max(1.0, float(np.linalg.norm(k0)))
                for kk, cc in candidates_for(k):
                    out = eng.rollout(q_s, kk, cc, params.eps_goal,
                                      params.max_segments, max_time)
                    sc = _score(out, E_th)
                    if sc < best[0]:
                        best = (sc, out, kk, cc)
                        improved = True
        if not improved:
            step /= 3.0
        if best[1].reached and step < 1e-8:
            break
    sc, out, k, c = best
    if not out.reached:
        raise NoPathFoundError(
            f"no certificate reached the goal (best mismatch {out.best_E:.3e})")
    H0 = out.H0
    cert = ExtremalCertificate(k=vec3(k / H0), c=vec3(c / H0))
    traj = Trajectory(tuple((sg[0], sg[1]) for sg in out.best_segments
                            if sg[1] > 1e-12))
    q_end = simulate(q_s, traj, U)
    err = float(np.sum(np.linalg.norm(q_end.points() - q_g.points(), axis=1)))
    return SolveResult(trajectory=traj, certificate=cert, goal_error=err,
                       total_time=traj.total_time, reached=True)


# --- brute-force oracle -------------------------------------------------------

def _affine_compose(P, T):
    """Apply affine P after T: (P o T) for planar (cos, sin, tx, ty) maps."""
    pc, ps, px, py = P
    tc, ts, tx, ty = T
    return (pc * tc - ps * ts, pc * ts + ps * tc,
            pc * tx - ps * ty + px, ps * tx + pc * ty + py)


def _affine_apply(P, pt):
    c, s, tx, ty = P
    return (c * pt[0] - s * pt[1] + tx, s * pt[0] + c * pt[1] + ty)


def _word_descent(eng: _PlanarEngine, xyth, word, t_cap, seeds, sweeps=80):
    """Exact coordinate descent over segment durations of a fixed word.

    Each coordinate minimum is closed form: with downstream segments folded
    into fixed body-frame points, the mismatch is a sinusoid of the rotation
    angle or a quadratic of the straight length.
    """
    n = len(word)
    caps = []
    for idx in word:
        cc = eng.ctrl[idx]
        caps.append(t_cap if cc[0] == "t" else TWO_PI / abs(cc[3]))
    base = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))

    def body_transform(idx, t):
        cc = eng.ctrl[idx]
        if cc[0] == "t":
            return (1.0, 0.0, cc[1] * t, cc[2] * t)
        phi = cc[3] * t
        c, s = math.cos(phi), math.sin(phi)
        return (c, s, cc[1] - (c * cc[1] - s * cc[2]),
                cc[2] - (s * cc[1] + c * cc[2]))

    def evaluate(ts):
        P = (math.cos(xyth[2]), math.sin(xyth[2]), xyth[0], xyth[1])
        for idx, t in zip(word, ts):
            P = _affine_compose(P, body_transform(idx, t))
        pts = [_affine_apply(P, b) for b in base]
        return sum((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2
                   for p, q in zip(pts, eng.gp))

    best = None
    for seed in seeds:
        ts = [min(s, cap) for s, cap in zip(seed, caps)]
        E = evaluate(ts)
        for _ in range(sweeps):
            moved = 0.0
            # prefix poses and suffix body composites
            poses = [(math.cos(xyth[2]), math.sin(xyth[2]), xyth[0], xyth[1])]
            for idx, t in zip(word, ts):
                poses.append(_affine_compose(poses[-1], body_transform(idx, t)))
            suffix = [(1.0, 0.0, 0.0, 0.0)] * (n + 1)
            for j in range(n - 1, -1, -1):
                suffix[j] = _affine_compose(body_transform(word[j], ts[j]),
                                            suffix[j + 1])
            for j in range(n):
                ys = [_affine_apply(poses[j], _affine_apply(suffix[j + 1], b))
                      for b in base]
                cc = eng.ctrl[word[j]]
                st = poses[j]
                if cc[0] == "t":
                    vx = st[0] * cc[1] - st[1] * cc[2]
                    vy = st[1] * cc[1] + st[0] * cc[2]
                    acc = sum((yy[0] - q[0]) * vx + (yy[1] - q[1]) * vy
                              for yy, q in zip(ys, eng.gp))
                    t_new = min(max(-acc / (3.0 * (vx * vx + vy * vy)), 0.0),
                                caps[j])
                else:
                    rax = st[2] + st[0] * cc[1] - st[1] * cc[2]
                    ray = st[3] + st[1] * cc[1] + st[0] * cc[2]
                    sigma = 1.0 if cc[3] > 0 else -1.0
                    P = Q = 0.0
                    for yy, q in zip(ys, eng.gp):
                        ux, uy = yy[0] - rax, yy[1] - ray
                        wx, wy = q[0] - rax, q[1] - ray
                        P += wx * ux + wy * uy
                        Q += -wx * uy + wy * ux
                    Qs = sigma * Q
                    cap_psi = caps[j] * abs(cc[3])
                    cands = [0.0, cap_psi]
                    psiE = math.atan2(Qs, P) % TWO_PI
                    if psiE <= cap_psi:
                        cands.append(psiE)
                    # minimize S0 - 2(P cos + Qs sin); S0 constant
                    psi = min(cands, key=lambda ps: -(P * math.cos(ps)
                                                      + Qs * math.sin(ps)))
                    t_new = psi / abs(cc[3])
                moved = max(moved, abs(t_new - ts[j]))
                if t_new != ts[j]:
                    ts[j] = t_new
                    poses = [poses[0]]
                    for idx, t in zip(word, ts):
                        poses.append(_affine_compose(poses[-1],
                                                     body_transform(idx, t)))
                    for jj in range(n - 1, -1, -1):
                        suffix[jj] = _affine_compose(
                            body_transform(word[jj], ts[jj]), suffix[jj + 1])
            if moved < 1e-13:
                break
        E = evaluate(ts)
        if best is None or E < best[0]:
            best = (E, list(ts))
    return best


def brute_force_oracle(q_s: PointConfiguration, q_g: PointConfiguration,
                       U: ControlSet, max_segments: int = 3,
                       duration_grid: float = 1.0) -> SolveResult:
    """Independent oracle: enumerate short words and optimize their durations.

    No certificate machinery is involved; every control word up to
    max_segments (without immediate repeats) is optimized by exact coordinate
    descent from a grid of duration seeds.
    """
    if max_segments < 1 or max_segments > 5:
        raise InvalidInputError("oracle supports 1 <= max_segments <= 5")
    if duration_grid <= 0:
        raise InvalidInputError("duration_grid must be positive")
    if not (U.is_planar() and _planar_config(q_s) and _planar_config(q_g)):
        raise InvalidInputError("brute_force_oracle handles planar problems only")
    xs, ys, ths = xytheta_from_config(q_s)
    gx, gy, gth = xytheta_from_config(q_g)
    eng = _PlanarEngine(U, (gx, gy, gth))
    eps = 1e-6
    E_th = eps * eps / 3.0
    if eng.e_value(xs, ys, math.cos(ths), math.sin(ths)) <= E_th:
        return SolveResult(trajectory=Trajectory(()), certificate=None,
                           goal_error=0.0, total_time=0.0)
    m = len(U)
    t_cap = 8.0 + 2.0 * math.hypot(gx - xs, gy - ys)
    words = []
    for n in range(1, max_segments + 1):
        for w in itertools.product(range(m), repeat=n):
            if all(w[i] != w[i + 1] for i in range(n - 1)):
                words.append(w)
    seed_vals = [0.5 * duration_grid, 2.0 * duration_grid, 4.5 * duration_grid]
    best = None
    for w in words:
        seeds = list(itertools.product(seed_vals, repeat=len(w)))
        E, ts = _word_descent(eng, (xs, ys, ths), w, t_cap, seeds)
        if E <= E_th:
            total = sum(ts)
            if best is None or total < best[0]:
                best = (total, w, ts)
    if best is None:
        raise NoPathFoundError("oracle: no word reached the goal")
    total, w, ts = best
    traj = Trajectory(tuple((idx, t) for idx, t in zip(w, ts) if t > 1e-12))
    q_end = simulate(q_s, traj, U)
    err = float(np.sum(np.linalg.norm(q_end.points() - q_g.points(), axis=1)))
    return SolveResult(trajectory=traj, certificate=None, goal_error=err,
                       total_time=traj.total_time)


def experimental_descent(q_s: PointConfiguration, q_g: PointConfiguration,
                         U: ControlSet, cert0: ExtremalCertificate,
                         params: SolverParams | None = None,
                         max_iters: int = 50) -> SolveResult:
    """Iterate the improving-direction test to update k until it vanishes.

    Experimental alternative search; not part of the verified surface.  Falls
    back to the best rollout seen if the iteration cap is reached.
    """
    from .switching import improving_delta_k  # local import to avoid a cycle

    params = params or SolverParams()
    if not (U.is_planar() and _planar_config(q_s) and _planar_config(q_g)):
        raise InvalidInputError("experimental_descent handles planar problems only")
    xs, ys, ths = xytheta_from_config(q_s)
    gx, gy, gth = xytheta_from_config(q_g)
    eng = _PlanarEngine(U, (gx, gy, gth), params.tie_tol, params.graze_gap)
    E_th = params.eps_goal ** 2 / 3.0
    dist = math.hypot(gx - xs, gy - ys)
    max_time = params.max_time if params.max_time is not None else 16.0 + 3.0 * dist
    cert = cert0
    best = None
    for _ in range(max_iters):
        out = eng.rollout(xs, ys, ths, float(cert.k[0]), float(cert.k[1]),
                          float(cert.c[2]), params.eps_goal,
                          params.max_segments, max_time)
        if best is None or (out.best_E, out.best_time) < (best[0].best_E,
                                                          best[0].best_time):
            best = (out, cert)
        if out.reached:
            break
        word = [sg[0] for sg in out.segments if sg[1] > 1e-9]
        if len(word) < 2:
            break
        hyp = (U[word[0]], U[word[1]], U[word[-1]])
        dk = improving_delta_k(cert, q_s, hyp, q_g.p_o)
        if dk is None:
            break
        k_new = np.asarray(cert.k, dtype=float) + 0.2 * np.asarray(dk)
        row = eng.constraint_row(word[0], xs, ys, ths)
        h_first = row[0] * k_new[0] + row[1] * k_new[1] + row[2] * float(cert.c[2])
        if abs(h_first) < 1e-9:
            break
        cert = ExtremalCertificate(k=vec3(k_new / h_first),
                                   c=vec3(0, 0, float(cert.c[2]) / h_first))
    out, cert = best
    traj = Trajectory(tuple((sg[0], sg[1]) for sg in
                            (out.best_segments if out.reached else out.segments)
                            if sg[1] > 1e-12))
    q_end = simulate(q_s, traj, U)
    err = float(np.sum(np.linalg.norm(q_end.points() - q_g.points(), axis=1)))
    return SolveResult(trajectory=traj, certificate=cert, goal_error=err,
                       total_time=traj.total_time, reached=out.reached)
