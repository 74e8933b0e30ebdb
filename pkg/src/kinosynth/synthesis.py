"""Synthesis maps: rasterized shortest-path regions over a fixed-orientation slice.

A synthesis map labels every cell of a planar grid with the control word of
the shortest trajectory from that cell (at the slice orientation) to the
origin goal.  Boundaries between differently labeled cells are traced into
polylines.  Maps export to CSV (bit-identical for identical inputs), SVG and
PNG.

The per-cell solves reuse the certificate search in :mod:`kinosynth.solver`.
A full independent search per cell would dominate the runtime, so the grid is
filled in three passes: a sparse serpentine pass of well-budgeted anchor
solves, a cheap seeded fill pass that warm starts each cell from already
solved neighbors, and a relaxation queue that re-solves any cell whose
neighbors later found a faster trajectory.  Warm starts propagate certificate
coordinates, so a region discovered anywhere spreads across the whole region.
"""
from __future__ import annotations

import hashlib
import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .controls import ControlSet
from .geometry import InvalidInputError, config_from_pose, vec3
from .solver import NoPathFoundError, Seed, SolverParams, solve_shortest

UNSOLVED = None  # cell word for solver failures; exported as "UNSOLVED"


@dataclass
class MapCell:
    """One grid cell: canonical word, optimal time, boundary flag."""

    word: tuple | None
    total_time: float
    boundary: bool = False


@dataclass
class BoundaryCurve:
    """Connected polyline along cell edges separating two words."""

    points: list
    words: tuple  # (word_a, word_b), sorted


@dataclass
class SynthesisMap:
    bounds: tuple  # (x_min, x_max, y_min, y_max)
    resolution: float
    orientation: np.ndarray
    cells: list  # cells[iy][ix] is a MapCell
    curves: list = field(default_factory=list)
    control_set: ControlSet | None = None

    @property
    def shape(self):
        return (len(self.cells), len(self.cells[0]) if self.cells else 0)

    def xs(self):
        nx = self.shape[1]
        return [self.bounds[0] + i * self.resolution for i in range(nx)]

    def ys(self):
        ny = self.shape[0]
        return [self.bounds[2] + i * self.resolution for i in range(ny)]

    def cell_at(self, x, y) -> MapCell:
        ix = int(round((x - self.bounds[0]) / self.resolution))
        iy = int(round((y - self.bounds[2]) / self.resolution))
        ny, nx = self.shape
        if not (0 <= ix < nx and 0 <= iy < ny):
            raise InvalidInputError("point outside map bounds")
        return self.cells[iy][ix]


def canonical_word(segments, min_duration: float) -> tuple:
    """Merge repeated controls and drop segments shorter than min_duration."""
    out = []
    for idx, dur in segments:
        if dur < min_duration:
            continue
        if out and out[-1] == idx:
            continue
        out.append(int(idx))
    return tuple(out)


def _label_from_result(res, min_duration, label_tie):
    """Canonical cell label: the lexicographically greatest canonical word
    among candidates within label_tie of the optimum.

    Systematic ties (a word and its time-reversed twin) then resolve to one
    fixed representative on every cell of the shared region instead of
    flickering with rounding noise.
    """
    if not res.by_word:
        return (), res.total_time, []
    best_t = min(c.total_time for c in res.by_word)
    tied = [canonical_word(c.segments, min_duration)
            for c in res.by_word if c.total_time <= best_t + label_tie]
    return max(tied), best_t, sorted(set(tied))


def _map_profiles(base: SolverParams):
    """Anchor, fill and relax search strengths derived from one base."""
    anchor = replace(base, coarse_grid=41, refine_budget=100)
    fill = replace(base, coarse_grid=11, refine_budget=12)
    relax = replace(base, coarse_grid=5, refine_budget=6)
    return anchor, fill, relax


DEFAULT_MAP_PARAMS = SolverParams(eps_goal=1e-4, dedup_time_tol=3e-2)
_SEEDS_PER_SOURCE = 4
_RELAX_GAIN = 1e-6


def _seeds_from(entry):
    if entry is None:
        return []
    return [Seed(c.first, c.last, c.x) for c in entry[:_SEEDS_PER_SOURCE]]


def map_slice(U: ControlSet, orientation, bounds, resolution,
              solver_params: SolverParams | None = None,
              anchor_stride: int = 6,
              refine_boundary: bool = False) -> SynthesisMap:
    """Rasterize the synthesis regions of the slice into a SynthesisMap.

    Each cell holds the canonical word and total time of the shortest
    trajectory from pose (x, y, 0; orientation) to the origin goal.  Cells
    the solver cannot reach are labeled UNSOLVED.  Cells whose word differs
    from a 4-neighbor are boundary-flagged; with refine_boundary, each
    boundary cell is re-checked once at half resolution around its center.
    """
    x_min, x_max, y_min, y_max = (float(v) for v in bounds)
    resolution = float(resolution)
    if resolution <= 0:
        raise InvalidInputError("resolution must be positive")
    if x_max <= x_min or y_max <= y_min:
        raise InvalidInputError("bounds must be nonempty")
    base = solver_params or DEFAULT_MAP_PARAMS
    anchor_p, fill_p, relax_p = _map_profiles(base)
    min_dur = max(base.eps_seg, 10.0 * base.eps_goal)
    label_tie = max(1e-6, 10.0 * base.eps_goal)
    R = np.asarray(orientation, dtype=float)
    goal = config_from_pose(vec3(0.0, 0.0, 0.0), np.eye(3))

    nx = int(math.ceil((x_max - x_min) / resolution))
    ny = int(math.ceil((y_max - y_min) / resolution))
    xs = [x_min + i * resolution for i in range(nx)]
    ys = [y_min + i * resolution for i in range(ny)]

    labels = [[UNSOLVED] * nx for _ in range(ny)]
    times = [[math.nan] * nx for _ in range(ny)]
    ties = [[()] * nx for _ in range(ny)]
    cands = [[None] * nx for _ in range(ny)]  # sorted WordCandidates for seeding

    def solve_cell(ix, iy, params, seeds):
        q = config_from_pose(vec3(xs[ix], ys[iy], 0.0), R)
        try:
            res = solve_shortest(q, goal, U, replace(params, seeds=tuple(seeds)))
        except NoPathFoundError:
            return False
        word, best_t, tied = _label_from_result(res, min_dur, label_tie)
        old_t = times[iy][ix]
        if math.isnan(old_t) or best_t < old_t - _RELAX_GAIN:
            labels[iy][ix] = word
            times[iy][ix] = best_t
            ties[iy][ix] = tuple(tied)
            cands[iy][ix] = tuple(sorted(res.by_word, key=lambda c: c.total_time))
            return True
        return False

    def serpentine(ix_range, iy_range):
        for row, iy in enumerate(iy_range):
            cols = ix_range if row % 2 == 0 else list(reversed(ix_range))
            for ix in cols:
                yield ix, iy

    # pass 1: sparse anchors, each warm started from the previous anchor
    anchor_ix = list(range(0, nx, max(1, anchor_stride)))
    anchor_iy = list(range(0, ny, max(1, anchor_stride)))
    prev = None
    for ix, iy in serpentine(anchor_ix, anchor_iy):
        solve_cell(ix, iy, anchor_p, _seeds_from(prev))
        prev = cands[iy][ix]

    # pass 2: cheap seeded fill, serpentine bottom-up
    for ix, iy in serpentine(list(range(nx)), list(range(ny))):
        if cands[iy][ix] is not None:
            continue
        seeds = []
        if iy > 0:
            seeds += _seeds_from(cands[iy - 1][ix])
        ax = min(anchor_ix, key=lambda a: abs(a - ix))
        ay = min(anchor_iy, key=lambda a: abs(a - iy))
        seeds += _seeds_from(cands[ay][ax])
        for nbx in (ix - 1, ix + 1):
            if 0 <= nbx < nx and cands[iy][nbx] is not None:
                seeds += _seeds_from(cands[iy][nbx])
        solve_cell(ix, iy, fill_p, seeds)

    # pass 3: relaxation queue seeded by every label disagreement; a cell is
    # re-solved with its neighbors' certificates and, on improvement, its
    # neighbors are queued in turn, so corrections flood through a region
    def neighbors(ix, iy):
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            jx, jy = ix + dx, iy + dy
            if 0 <= jx < nx and 0 <= jy < ny:
                yield jx, jy

    queue = deque()
    queued = set()
    for iy in range(ny):
        for ix in range(nx):
            if any(labels[jy][jx] != labels[iy][ix]
                   for jx, jy in neighbors(ix, iy)):
                queue.append((ix, iy))
                queued.add((ix, iy))
    pops = 0
    cap = 4 * nx * ny
    while queue and pops < cap:
        ix, iy = queue.popleft()
        queued.discard((ix, iy))
        pops += 1
        seeds = []
        for jx, jy in neighbors(ix, iy):
            seeds += _seeds_from(cands[jy][jx])
        if not seeds:
            continue
        if solve_cell(ix, iy, relax_p, seeds):
            for nb in neighbors(ix, iy):
                if nb not in queued:
                    queue.append(nb)
                    queued.add(nb)

    unflag = set()
    if refine_boundary:
        # one half-resolution pass: a word-flagged cell whose four half-step
        # sub-samples all reproduce its own word does not contain the curve,
        # so its flag is dropped and the boundary band thins to the true side
        half = resolution / 2.0
        for iy in range(ny):
            for ix in range(nx):
                if cands[iy][ix] is None:
                    continue
                if all(labels[jy][jx] == labels[iy][ix]
                       for jx, jy in neighbors(ix, iy)):
                    continue
                seeds = _seeds_from(cands[iy][ix])
                for jx, jy in neighbors(ix, iy):
                    seeds += _seeds_from(cands[jy][jx])[:1]
                own = True
                for sx, sy in ((half, 0.0), (-half, 0.0), (0.0, half), (0.0, -half)):
                    q = config_from_pose(
                        vec3(xs[ix] + sx, ys[iy] + sy, 0.0), R)
                    try:
                        res = solve_shortest(q, goal, U,
                                             replace(relax_p, seeds=tuple(seeds)))
                    except NoPathFoundError:
                        own = False
                        break
                    word, _, _ = _label_from_result(res, min_dur, label_tie)
                    if word != labels[iy][ix]:
                        own = False
                        break
                if own:
                    unflag.add((ix, iy))

    cells = []
    for iy in range(ny):
        row = []
        for ix in range(nx):
            word = labels[iy][ix]
            boundary = any(labels[jy][jx] != word for jx, jy in neighbors(ix, iy))
            if boundary and (ix, iy) in unflag:
                boundary = False
            if not boundary and len(ties[iy][ix]) > 1:
                # near-tie between distinct words: flag only where the tie is
                # not shared by every neighbor, so systematic region-wide ties
                # (time-reversed twins) do not flag whole regions
                boundary = any(ties[jy][jx] != ties[iy][ix]
                               for jx, jy in neighbors(ix, iy))
            row.append(MapCell(word=word, total_time=times[iy][ix],
                               boundary=boundary))
        cells.append(row)

    m = SynthesisMap(bounds=(x_min, x_max, y_min, y_max), resolution=resolution,
                     orientation=R, cells=cells, control_set=U)
    m.curves = [c.points for c in extract_boundaries(m)]
    return m


# --- boundary extraction ------------------------------------------------------

def extract_boundaries(m: SynthesisMap) -> list:
    """Connected polylines along edges between differently labeled cells.

    Each polyline is tagged with the sorted (word_a, word_b) pair it
    separates.  Edges touching UNSOLVED cells are skipped.
    """
    ny, nx = m.shape
    res = m.resolution
    xs, ys = m.xs(), m.ys()
    half = res / 2.0
    segs = {}  # (word_a, word_b) -> list of ((x1,y1),(x2,y2))
    for iy in range(ny):
        for ix in range(nx):
            a = m.cells[iy][ix].word
            if a is UNSOLVED:
                continue
            if ix + 1 < nx:
                b = m.cells[iy][ix + 1].word
                if b is not UNSOLVED and a != b:
                    xm = xs[ix] + half
                    key = tuple(sorted((a, b)))
                    segs.setdefault(key, []).append(
                        ((xm, ys[iy] - half), (xm, ys[iy] + half)))
            if iy + 1 < ny:
                b = m.cells[iy + 1][ix].word
                if b is not UNSOLVED and a != b:
                    ym = ys[iy] + half
                    key = tuple(sorted((a, b)))
                    segs.setdefault(key, []).append(
                        ((xs[ix] - half, ym), (xs[ix] + half, ym)))
    out = []
    for key in sorted(segs):
        for pts in _chain_segments(segs[key]):
            out.append(BoundaryCurve(
                points=[vec3(p[0], p[1], 0.0) for p in pts], words=key))
    return out


def _quant(p):
    return (round(p[0], 9), round(p[1], 9))


def _chain_segments(segments):
    """Merge edge segments sharing endpoints into ordered polylines."""
    adj = {}
    for i, (p, q) in enumerate(segments):
        adj.setdefault(_quant(p), []).append(i)
        adj.setdefault(_quant(q), []).append(i)
    used = [False] * len(segments)
    chains = []
    # open chains first (start at odd-degree endpoints), then closed loops
    starts = sorted(p for p, ids in adj.items() if len(ids) % 2 == 1)
    for phase in (0, 1):
        for start in (starts if phase == 0 else sorted(adj)):
            for i in adj[start]:
                if used[i]:
                    continue
                chain = [start]
                node, seg = start, i
                while True:
                    used[seg] = True
                    p, q = _quant(segments[seg][0]), _quant(segments[seg][1])
                    node = q if node == p else p
                    chain.append(node)
                    nxt = [j for j in adj[node] if not used[j]]
                    if not nxt:
                        break
                    seg = nxt[0]
                chains.append(chain)
    return chains


# --- cross check against the switching-curve procedure ------------------------

@dataclass
class CrossCheckReport:
    samples: list  # (point, grid_claim, verdict, agreed)
    agreement: float
    interior_checked: int
    boundary_checked: int


def cross_check_with_switch_test(m: SynthesisMap, sample_count: int,
                                 solver_params: SolverParams | None = None) -> CrossCheckReport:
    """Compare grid labels with classify_configuration verdicts.

    Interior cells agree when the verdict is Interior with matching first and
    last controls.  Boundary edge midpoints agree on an OnCurve verdict, or on
    an Interior verdict matching either flanking word, since a midpoint sits
    up to half a cell away from the true curve.
    """
    from .switching import classify_configuration  # avoid a cycle

    if m.control_set is None:
        raise InvalidInputError("map carries no control set to check against")
    params = solver_params or replace(DEFAULT_MAP_PARAMS, coarse_grid=41,
                                      refine_budget=100)
    ny, nx = m.shape
    xs, ys = m.xs(), m.ys()
    interior, edges = [], []
    for iy in range(ny):
        for ix in range(nx):
            c = m.cells[iy][ix]
            if c.word is UNSOLVED or c.word == ():
                continue
            if not c.boundary:
                interior.append((ix, iy))
            if ix + 1 < nx:
                w2 = m.cells[iy][ix + 1].word
                if w2 is not UNSOLVED and w2 != c.word:
                    edges.append(((xs[ix] + m.resolution / 2.0, ys[iy]),
                                  (c.word, w2)))
    n_b = min(len(edges), sample_count // 4)
    n_i = min(len(interior), sample_count - n_b)

    def spaced(seq, n):
        if n <= 0 or not seq:
            return []
        step = max(1, len(seq) // n)
        return seq[::step][:n]

    samples = []
    agreed_n = 0
    for ix, iy in spaced(interior, n_i):
        word = m.cells[iy][ix].word
        q = config_from_pose(vec3(xs[ix], ys[iy], 0.0), m.orientation)
        v = classify_configuration(q, m.control_set, (0.0, 0.0, 0.0),
                                   solver_params=params)
        ok = (v.verdict == "Interior"
              and (v.first, v.last) == (word[0], word[-1]))
        samples.append(((xs[ix], ys[iy]), ("Interior", word), v.verdict, ok))
        agreed_n += ok
    for (pt, (wa, wb)) in spaced(edges, n_b):
        q = config_from_pose(vec3(pt[0], pt[1], 0.0), m.orientation)
        v = classify_configuration(q, m.control_set, (0.0, 0.0, 0.0),
                                   solver_params=params)
        ok = v.verdict == "OnCurve" or (
            v.verdict == "Interior"
            and any(w and (v.first, v.last) == (w[0], w[-1]) for w in (wa, wb)))
        samples.append((pt, ("Boundary", (wa, wb)), v.verdict, ok))
        agreed_n += ok
    total = len(samples)
    return CrossCheckReport(samples=samples,
                            agreement=agreed_n / total if total else 1.0,
                            interior_checked=n_i, boundary_checked=n_b)


# --- exports ------------------------------------------------------------------

def _word_text(word):
    if word is UNSOLVED:
        return "UNSOLVED"
    return "+".join(str(i) for i in word)


def to_csv(m: SynthesisMap) -> str:
    """Delimited cell dump; identical inputs produce identical bytes."""
    lines = ["x,y,word,total_time,boundary"]
    xs, ys = m.xs(), m.ys()
    for iy in range(len(ys)):
        for ix in range(len(xs)):
            c = m.cells[iy][ix]
            t = "nan" if math.isnan(c.total_time) else f"{c.total_time:.9f}"
            lines.append(f"{xs[ix]:.6f},{ys[iy]:.6f},{_word_text(c.word)},"
                         f"{t},{int(c.boundary)}")
    return "\n".join(lines) + "\n"


def write_csv(m: SynthesisMap, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_csv(m))


def word_color(word) -> str:
    """Stable fill color for a word label (hash of its text form)."""
    digest = hashlib.sha256(_word_text(word).encode()).hexdigest()
    # keep colors in a light band so boundary strokes stay visible
    r, g, b = (int(digest[i:i + 2], 16) for i in (0, 2, 4))
    return "#{:02x}{:02x}{:02x}".format(128 + r // 2, 128 + g // 2, 128 + b // 2)


def to_svg(m: SynthesisMap, pixels_per_unit: float = 40.0) -> str:
    x_min, x_max, y_min, y_max = m.bounds
    res = m.resolution
    w = (x_max - x_min) * pixels_per_unit
    h = (y_max - y_min) * pixels_per_unit
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" '
        f'height="{h:.0f}" viewBox="{x_min} {y_min} {x_max - x_min} '
        f'{y_max - y_min}">',
        # flip y so the map reads with y increasing upward
        f'<g transform="translate(0,{y_min + y_max}) scale(1,-1)">',
    ]
    xs, ys = m.xs(), m.ys()
    for iy in range(len(ys)):
        for ix in range(len(xs)):
            c = m.cells[iy][ix]
            parts.append(
                f'<rect x="{xs[ix] - res / 2:.6f}" y="{ys[iy] - res / 2:.6f}" '
                f'width="{res:.6f}" height="{res:.6f}" '
                f'fill="{word_color(c.word)}"/>')
    for curve in extract_boundaries(m):
        pts = " ".join(f"{p[0]:.6f},{p[1]:.6f}" for p in curve.points)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="black" '
                     f'stroke-width="{res / 4:.6f}"/>')
    parts.append("</g></svg>")
    return "\n".join(parts) + "\n"


def write_svg(m: SynthesisMap, path, pixels_per_unit: float = 40.0) -> None:
    with open(path, "w") as fh:
        fh.write(to_svg(m, pixels_per_unit))


def render_png(m: SynthesisMap, path, dpi: int = 150) -> None:
    """Raster figure of the map: region fills plus boundary polylines."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.colors import ListedColormap

    words = sorted({c.word for row in m.cells for c in row},
                   key=lambda w: (w is UNSOLVED, w))
    index = {w: i for i, w in enumerate(words)}
    grid = np.array([[index[c.word] for c in row] for row in m.cells])
    cmap = ListedColormap([word_color(w) for w in words])
    x_min, x_max, y_min, y_max = m.bounds
    half = m.resolution / 2.0
    xs, ys = m.xs(), m.ys()
    fig, ax = plt.subplots(figsize=(7, 7))
    ax.imshow(grid, origin="lower", cmap=cmap, interpolation="nearest",
              extent=(xs[0] - half, xs[-1] + half, ys[0] - half, ys[-1] + half),
              vmin=-0.5, vmax=len(words) - 0.5)
    for curve in extract_boundaries(m):
        pts = np.array([[p[0], p[1]] for p in curve.points])
        ax.plot(pts[:, 0], pts[:, 1], "k-", linewidth=1.0)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("synthesis regions")
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)
