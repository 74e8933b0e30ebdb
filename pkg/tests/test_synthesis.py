import math

import numpy as np
import pytest

from kinosynth.geometry import InvalidInputError
from kinosynth.solver import SolverParams
from kinosynth.synthesis import (BoundaryCurve, MapCell, SynthesisMap,
                                 canonical_word, cross_check_with_switch_test,
                                 extract_boundaries, map_slice, render_png,
                                 to_csv, to_svg, word_color, write_csv,
                                 write_svg)


def synthetic_map(labels):
    ny, nx = len(labels), len(labels[0])
    cells = []
    for iy in range(ny):
        row = []
        for ix in range(nx):
            w = labels[iy][ix]
            boundary = any(
                labels[jy][jx] != w
                for jx, jy in ((ix + 1, iy), (ix - 1, iy), (ix, iy + 1), (ix, iy - 1))
                if 0 <= jx < nx and 0 <= jy < ny)
            row.append(MapCell(word=w, total_time=1.0, boundary=boundary))
        cells.append(row)
    return SynthesisMap(bounds=(0.0, nx * 0.5, 0.0, ny * 0.5), resolution=0.5,
                       orientation=np.eye(3), cells=cells)


def test_canonical_word_merges_and_filters():
    segs = ((2, 1.0), (2, 0.5), (0, 1e-5), (1, 0.8))
    assert canonical_word(segs, 1e-3) == (2, 1)
    assert canonical_word(segs, 1e-6) == (2, 0, 1)
    assert canonical_word((), 1e-3) == ()


def test_half_plane_split_gives_single_straight_polyline():
    labels = [[(0,)] * 3 + [(1,)] * 3 for _ in range(6)]
    m = synthetic_map(labels)
    curves = extract_boundaries(m)
    assert len(curves) == 1
    c = curves[0]
    assert c.words == ((0,), (1,))
    xs = {round(float(p[0]), 9) for p in c.points}
    assert len(xs) == 1  # vertical straight line
    assert len(c.points) == 7


def test_uniform_map_has_no_boundaries():
    m = synthetic_map([[(0,)] * 4 for _ in range(4)])
    assert extract_boundaries(m) == []


def test_unsolved_cells_are_skipped_in_curves():
    labels = [[(0,), None, (1,)]]
    m = synthetic_map(labels)
    assert extract_boundaries(m) == []


def test_csv_schema_and_determinism():
    m = synthetic_map([[(0,), (1,)], [(0,), (1,)]])
    text = to_csv(m)
    lines = text.strip().split("\n")
    assert lines[0] == "x,y,word,total_time,boundary"
    assert len(lines) == 5
    assert to_csv(m) == text


def test_word_text_in_csv():
    m = synthetic_map([[(2, 0, 2), None], [(), (1,)]])
    body = to_csv(m).strip().split("\n")[1:]
    fields = [ln.split(",") for ln in body]
    assert fields[0][2] == "2+0+2"
    assert fields[1][2] == "UNSOLVED"
    assert fields[2][2] == ""


def test_word_color_is_stable_and_hex():
    c1 = word_color((2, 0, 2))
    assert c1 == word_color((2, 0, 2))
    assert len(c1) == 7 and c1.startswith("#")
    assert c1 != word_color((1, 0, 1))


def test_svg_contains_rects_and_polylines():
    m = synthetic_map([[(0,), (1,)], [(0,), (1,)]])
    svg = to_svg(m)
    assert svg.count("<rect") == 4
    assert "<polyline" in svg
    assert to_svg(m) == svg


def test_map_slice_validates_inputs(dubins):
    with pytest.raises(InvalidInputError):
        map_slice(dubins, np.eye(3), (-1, 1, -1, 1), 0.0)
    with pytest.raises(InvalidInputError):
        map_slice(dubins, np.eye(3), (1, -1, -1, 1), 0.1)


@pytest.fixture(scope="module")
def small_map(dubins):
    return map_slice(dubins, np.eye(3), (-1.0, 1.0, -1.0, 1.0), 0.25)


def test_small_map_shape_and_goal_cell(dubins, small_map):
    ny, nx = small_map.shape
    assert (ny, nx) == (8, 8)
    goal = small_map.cell_at(0.0, 0.0)
    assert goal.word == ()
    assert goal.total_time == 0.0


def test_small_map_interior_labels(dubins, small_map):
    # well inside the big rear region every cell is the RSR-class word
    c = small_map.cell_at(0.5, 0.25)
    assert c.word == (2, 0, 2)
    assert not c.boundary
    # times equal the closed form
    from kinosynth.dubins import dubins_shortest
    truth = dubins_shortest((0.5, 0.25, 0.0), (0.0, 0.0, 0.0))
    assert abs(c.total_time - truth.length) < 1e-3


def test_small_map_no_unsolved(dubins, small_map):
    assert all(c.word is not None for row in small_map.cells for c in row)


def test_small_map_curves_separate_distinct_words(dubins, small_map):
    for curve in extract_boundaries(small_map):
        a, b = curve.words
        assert a != b


def test_map_exports(tmp_path, small_map):
    csv_path = tmp_path / "m.csv"
    write_csv(small_map, csv_path)
    first = csv_path.read_bytes()
    write_csv(small_map, csv_path)
    assert csv_path.read_bytes() == first
    svg_path = tmp_path / "m.svg"
    write_svg(small_map, svg_path)
    assert svg_path.stat().st_size > 0
    png_path = tmp_path / "m.png"
    render_png(small_map, png_path)
    assert png_path.stat().st_size > 0


def test_cross_check_small_sample(dubins, small_map):
    rep = cross_check_with_switch_test(small_map, 6)
    assert 0.0 <= rep.agreement <= 1.0
    assert rep.interior_checked + rep.boundary_checked == len(rep.samples)
    assert rep.agreement >= 0.5
