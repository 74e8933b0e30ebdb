"""Command-line front end: solve, oracle, switch-test, synth-map, check.

Structured inputs and outputs are JSON, grids are CSV, figures are SVG/PNG.
Exit codes are a stable contract: 0 success, 1 input error, 2 no path at the
configured resolution, 3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import fields, replace

import numpy as np

from .controls import ControlSet, Trajectory, dubins_set, simulate
from .dubins import dubins_words
from .extremal import (ExtremalCertificate, h_profile,
                       verify_necessary_condition)
from .geometry import InvalidInputError, config_from_pose, vec3
from .solver import NoPathFoundError, SolverParams, solve_shortest
from .switching import classify_configuration, default_hypotheses
from .synthesis import map_slice, render_png, write_csv, write_svg

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_PATH = 2
EXIT_VERIFY = 3


class CliInputError(Exception):
    """Any problem with user-supplied files or arguments."""


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise CliInputError(f"{path}: {e.strerror or e}")
    except json.JSONDecodeError as e:
        raise CliInputError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}")


def _parse_pose(data, what="pose"):
    """Accept [x, y, theta] or {position: [x,y,z], rotation: 3x3}."""
    if isinstance(data, (list, tuple)) and len(data) == 3:
        x, y, th = (float(v) for v in data)
        c, s = math.cos(th), math.sin(th)
        R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return config_from_pose(vec3(x, y, 0.0), R)
    if isinstance(data, dict) and "position" in data and "rotation" in data:
        return config_from_pose(vec3(data["position"]),
                                np.asarray(data["rotation"], dtype=float))
    raise CliInputError(
        f"{what}: expected [x, y, theta] or {{position, rotation}}")


def _parse_control_set(data, base_dir="."):
    if data is None or data == "dubins":
        return dubins_set()
    if isinstance(data, str):
        path = data if os.path.isabs(data) else os.path.join(base_dir, data)
        return ControlSet.from_json_dict(_load_json(path))
    if isinstance(data, dict):
        return ControlSet.from_json_dict(data)
    raise CliInputError("control_set: expected a path, an object or \"dubins\"")


_PARAM_NAMES = {f.name for f in fields(SolverParams)}


def _parse_params(data) -> SolverParams:
    if not data:
        return SolverParams()
    unknown = set(data) - _PARAM_NAMES
    if unknown:
        raise CliInputError(f"unknown solver params: {sorted(unknown)}")
    try:
        return replace(SolverParams(), **data)
    except (TypeError, ValueError) as e:
        raise CliInputError(f"solver params: {e}")


def _resolve_threads(args):
    env = os.environ.get("KINOSYNTH_THREADS")
    raw = env if env is not None else getattr(args, "threads", None)
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise CliInputError(f"threads: expected an integer, got {raw!r}")
    if n < 1:
        raise CliInputError("threads: must be at least 1")
    return n


def _emit(data, path=None):
    text = json.dumps(data, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# --- solve --------------------------------------------------------------------

def cmd_solve(args) -> int:
    _resolve_threads(args)
    problem = _load_json(args.problem)
    base_dir = os.path.dirname(os.path.abspath(args.problem))
    if "start" not in problem or "goal" not in problem:
        raise CliInputError(f"{args.problem}: needs \"start\" and \"goal\"")
    q_s = _parse_pose(problem["start"], "start")
    q_g = _parse_pose(problem["goal"], "goal")
    U = _parse_control_set(problem.get("control_set"), base_dir)
    params = _parse_params(problem.get("params"))
    if args.eps_goal is not None:
        params = replace(params, eps_goal=args.eps_goal)
    try:
        res = solve_shortest(q_s, q_g, U, params)
    except NoPathFoundError as e:
        print(f"no path: {e}", file=sys.stderr)
        return EXIT_NO_PATH
    cert = res.certificate
    out = {
        "start": problem["start"],
        "goal": problem["goal"],
        "control_set": U.to_json_dict(),
        "segments": [[i, t] for i, t in res.trajectory.segments],
        "word": list(res.trajectory.word()),
        "letters": res.trajectory.letters(),
        "total_time": res.total_time,
        "goal_error": res.goal_error,
        "certificate": None if cert is None else
            {"k": list(cert.k), "c": list(cert.c), "H": cert.H},
    }
    _emit(out, args.output)
    return EXIT_OK


# --- oracle -------------------------------------------------------------------

def cmd_oracle(args) -> int:
    start = (args.pose[0], args.pose[1], args.pose[2])
    goal = (args.pose[3], args.pose[4], args.pose[5])
    words = sorted(dubins_words(start, goal), key=lambda w: w.length)
    if not words:
        print("no dubins word connects the poses", file=sys.stderr)
        return EXIT_NO_PATH
    best = words[0]
    tied = [w for w in words if w.length - best.length < args.tie_tol]
    for w in tied:
        print(f"{w.type} t={w.t:.9f} p={w.p:.9f} q={w.q:.9f} "
              f"length={w.length:.9f}")
    if len(tied) > 1:
        print(f"tie: {'/'.join(w.type for w in tied)} within {args.tie_tol:g}")
    return EXIT_OK


# --- switch-test --------------------------------------------------------------

def cmd_switch_test(args) -> int:
    _resolve_threads(args)
    q = _parse_pose(args.pose, "pose")
    U = _parse_control_set(args.control_set)
    goal = vec3(args.goal)
    hypotheses = None
    if args.hypothesis is not None:
        i, j, l = args.hypothesis
        m = len(U)
        if not all(0 <= v < m for v in (i, j, l)):
            raise CliInputError(f"hypothesis indices must be in [0, {m})")
        hypotheses = [(i, j, l)]
    else:
        hypotheses = default_hypotheses(U)
    v = classify_configuration(q, U, goal, hypotheses=hypotheses)
    cert = v.certificate

    def opt_vec(x):
        return None if x is None else [float(c) for c in x]

    _emit({
        "verdict": v.verdict,
        "k": None if cert is None else opt_vec(cert.k),
        "c": None if cert is None else opt_vec(cert.c),
        "delta_k": opt_vec(v.delta_k),
        "tangent": opt_vec(v.tangent),
        "hypothesis": None if v.hypothesis is None else list(v.hypothesis),
        "first": v.first,
        "last": v.last,
    }, args.output)
    return EXIT_OK


# --- synth-map ----------------------------------------------------------------

def cmd_synth_map(args) -> int:
    _resolve_threads(args)
    cfg = _load_json(args.config)
    base_dir = os.path.dirname(os.path.abspath(args.config))
    U = _parse_control_set(cfg.get("control_set"), base_dir)
    bounds = cfg.get("bounds")
    if not (isinstance(bounds, (list, tuple)) and len(bounds) == 4):
        raise CliInputError(f"{args.config}: bounds must be "
                            "[x_min, x_max, y_min, y_max]")
    resolution = float(cfg.get("resolution", 0.0))
    if resolution <= 0:
        raise CliInputError(f"{args.config}: resolution must be positive")
    orientation = cfg.get("orientation", 0.0)
    if isinstance(orientation, (int, float)):
        c, s = math.cos(orientation), math.sin(orientation)
        R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    else:
        R = np.asarray(orientation, dtype=float)
    params = None
    if cfg.get("params"):
        params = _parse_params(cfg["params"])
    outputs = cfg.get("outputs", {})
    csv_path = args.output or outputs.get("csv")
    if not csv_path:
        raise CliInputError("no CSV output path (use -o or outputs.csv)")
    m = map_slice(U, R, bounds, resolution, params,
                  refine_boundary=bool(cfg.get("refine_boundary", False)))
    try:
        write_csv(m, csv_path)
        svg_path = args.svg or outputs.get("svg")
        if svg_path:
            write_svg(m, svg_path)
        png_path = args.png or outputs.get("png")
        if png_path is None and not args.no_png:
            png_path = os.path.splitext(csv_path)[0] + ".png"
        if png_path:
            render_png(m, png_path)
    except OSError as e:
        raise CliInputError(f"writing outputs: {e}")
    return EXIT_OK


# --- check --------------------------------------------------------------------

def cmd_check(args) -> int:
    data = _load_json(args.result)
    base_dir = os.path.dirname(os.path.abspath(args.result))
    for key in ("start", "control_set", "segments", "certificate"):
        if key not in data or data[key] is None:
            raise CliInputError(f"{args.result}: missing {key!r}")
    q0 = _parse_pose(data["start"], "start")
    U = _parse_control_set(data["control_set"], base_dir)
    try:
        traj = Trajectory(tuple((int(i), float(t)) for i, t in data["segments"]))
    except (TypeError, ValueError, InvalidInputError) as e:
        raise CliInputError(f"{args.result}: segments: {e}")
    cd = data["certificate"]
    k = vec3(cd["k"])
    if args.perturb_k:
        k = k + vec3(args.perturb_k)
    try:
        cert = ExtremalCertificate(k=k, c=vec3(cd.get("c", (0, 0, 0))),
                                   H=float(cd.get("H", 1.0)))
    except InvalidInputError as e:
        raise CliInputError(f"{args.result}: certificate: {e}")
    if "goal" in data and data["goal"] is not None:
        goal = vec3(_parse_pose(data["goal"], "goal").points()[0])
    else:
        goal = vec3(simulate(q0, traj, U).points()[0])
    hs = h_profile(cert, q0, traj, U, goal)
    report = verify_necessary_condition(cert, q0, traj, U, goal, tol=args.tol)
    _emit({
        "constant": report.constant,
        "max_active_deviation": report.max_active_deviation,
        "max_violation_by_inactive": report.max_violation_by_inactive,
        "h_min": min(hs) if hs else 1.0,
        "h_max": max(hs) if hs else 1.0,
        "samples": len(hs),
        "tol": args.tol,
    }, args.output)
    return EXIT_OK if report.constant else EXIT_VERIFY


# --- argument wiring ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="kinosynth",
        description="shortest kinematic trajectories over discrete control sets")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("-o", "--output", default=None,
                        help="output file (default: stdout)")
        sp.add_argument("--threads", type=int, default=None,
                        help="cap worker parallelism "
                             "(KINOSYNTH_THREADS overrides)")

    sp = sub.add_parser("solve", help="solve a problem file")
    sp.add_argument("problem", help="problem JSON (start, goal, control_set)")
    sp.add_argument("--eps-goal", type=float, default=None)
    common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("oracle", help="closed-form Dubins ground truth")
    sp.add_argument("pose", type=float, nargs=6,
                    metavar=("x", "y", "th", "gx", "gy", "gth"))
    sp.add_argument("--tie-tol", type=float, default=1e-9)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("switch-test",
                        help="classify a configuration against switching curves")
    sp.add_argument("--pose", type=float, nargs=3, required=True,
                    metavar=("x", "y", "th"))
    sp.add_argument("--goal", type=float, nargs=3, default=(0.0, 0.0, 0.0),
                    metavar=("gx", "gy", "gz"))
    sp.add_argument("--control-set", default="dubins",
                    help="control set JSON path (default: dubins)")
    sp.add_argument("--hypothesis", type=int, nargs=3, default=None,
                    metavar=("i", "j", "last"))
    common(sp)
    sp.set_defaults(func=cmd_switch_test)

    sp = sub.add_parser("synth-map", help="rasterize a synthesis map")
    sp.add_argument("config", help="map config JSON")
    sp.add_argument("--svg", default=None, help="also write an SVG")
    sp.add_argument("--png", default=None, help="figure path (default: "
                    "next to the CSV)")
    sp.add_argument("--no-png", action="store_true",
                    help="skip the figure")
    common(sp)
    sp.set_defaults(func=cmd_synth_map)

    sp = sub.add_parser("check", help="verify a result's extremal certificate")
    sp.add_argument("result", help="solve output JSON")
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--perturb-k", type=float, nargs=3, default=None,
                    metavar=("dx", "dy", "dz"))
    common(sp)
    sp.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliInputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except InvalidInputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
