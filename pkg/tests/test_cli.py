import json
import math
import os

import pytest

from kinosynth.cli import main

DATA = os.path.join(os.path.dirname(__file__), "..", "src", "kinosynth", "data")


def run(capsys, *argv, env=None):
    old = {}
    env = env or {}
    for k, v in env.items():
        old[k] = os.environ.get(k)
        if v is None:
            os.environ.pop(k, None)
        else:
            os.environ[k] = v
    try:
        code = main(list(argv))
    finally:
        for k, v in old.items():
            if v is None:
                os.environ.pop(k, None)
            else:
                os.environ[k] = v
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_demo_problem(capsys):
    code, out, _ = run(capsys, "solve", os.path.join(DATA, "demo_problem.json"))
    assert code == 0
    data = json.loads(out)
    assert data["word"] == [0]
    assert math.isclose(data["total_time"], 4.0, abs_tol=1e-6)
    assert data["certificate"]["H"] == 1.0


def test_solve_writes_output_file(capsys, tmp_path):
    dest = tmp_path / "out.json"
    code, out, _ = run(capsys, "solve", os.path.join(DATA, "demo_problem.json"),
                       "-o", str(dest))
    assert code == 0
    assert out == ""
    data = json.loads(dest.read_text())
    assert data["word"] == [0]


def test_solve_no_path_exit_code(capsys, tmp_path):
    prob = tmp_path / "p.json"
    prob.write_text(json.dumps({
        "start": [0, 0, 0], "goal": [0, 1, 0],
        "control_set": {"controls": [
            {"type": "translation", "v": [1, 0, 0]}]},
    }))
    code, _, err = run(capsys, "solve", str(prob))
    assert code == 2
    assert "no path" in err


def test_malformed_json_is_input_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"start\": [0, 0, 0],}")
    code, _, err = run(capsys, "solve", str(bad))
    assert code == 1
    assert "line" in err and "column" in err


def test_missing_file_is_input_error(capsys, tmp_path):
    code, _, err = run(capsys, "solve", str(tmp_path / "nope.json"))
    assert code == 1


def test_oracle_reports_tie(capsys):
    code, out, _ = run(capsys, "oracle", "1", "1", "0", "0", "0", "0",
                       "--tie-tol", "1e-6")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[-1].startswith("tie: ")
    types = {ln.split()[0] for ln in lines[:-1]}
    assert types == {"LSL", "RSR"}
    for ln in lines[:-1]:
        assert "length=" in ln


def test_oracle_straight(capsys):
    code, out, _ = run(capsys, "oracle", "0", "0", "0", "4", "0", "0")
    assert code == 0
    assert "length=4.000000000" in out


def test_switch_test_on_curve(capsys):
    code, out, _ = run(capsys, "switch-test", "--pose", "1", "1", "0",
                       "--hypothesis", "1", "2", "1")
    assert code == 0
    data = json.loads(out)
    assert data["verdict"] == "OnCurve"
    k = data["k"]
    assert math.isclose(k[1] / k[0], 1.0, abs_tol=1e-9)
    assert data["tangent"] is not None


def test_switch_test_no_feasible_k(capsys):
    code, out, _ = run(capsys, "switch-test", "--pose", "0", "1", "0",
                       "--hypothesis", "1", "2", "2")
    assert code == 0
    data = json.loads(out)
    assert data["verdict"] == "NoFeasibleK"
    assert data["k"] is None


def test_switch_test_bad_hypothesis_index(capsys):
    code, _, err = run(capsys, "switch-test", "--pose", "1", "1", "0",
                       "--hypothesis", "0", "1", "9")
    assert code == 1


def test_synth_map_outputs(capsys, tmp_path):
    cfg = tmp_path / "map.json"
    cfg.write_text(json.dumps({
        "bounds": [-0.5, 0.5, -0.5, 0.5],
        "resolution": 0.25,
        "orientation": 0.0,
        "params": {"eps_goal": 1e-4, "coarse_grid": 21, "refine_budget": 40,
                   "dedup_time_tol": 3e-2},
    }))
    csv = tmp_path / "m.csv"
    code, _, _ = run(capsys, "synth-map", str(cfg), "-o", str(csv),
                     "--svg", str(tmp_path / "m.svg"))
    assert code == 0
    text = csv.read_text()
    assert text.splitlines()[0] == "x,y,word,total_time,boundary"
    assert (tmp_path / "m.svg").stat().st_size > 0
    assert (tmp_path / "m.png").stat().st_size > 0  # rendered by default
    # determinism: a second run reproduces the CSV byte for byte
    code, _, _ = run(capsys, "synth-map", str(cfg), "-o", str(csv), "--no-png")
    assert code == 0
    assert csv.read_text() == text


def test_synth_map_rejects_bad_resolution(capsys, tmp_path):
    cfg = tmp_path / "map.json"
    cfg.write_text(json.dumps({"bounds": [-1, 1, -1, 1], "resolution": 0}))
    code, _, err = run(capsys, "synth-map", str(cfg), "-o",
                       str(tmp_path / "m.csv"))
    assert code == 1
    assert "resolution" in err


def test_check_round_trip(capsys, tmp_path):
    dest = tmp_path / "out.json"
    code, _, _ = run(capsys, "solve", os.path.join(DATA, "demo_problem.json"),
                     "-o", str(dest))
    assert code == 0
    code, out, _ = run(capsys, "check", str(dest))
    assert code == 0
    assert json.loads(out)["constant"] is True


def test_check_flags_perturbed_certificate(capsys, tmp_path):
    dest = tmp_path / "out.json"
    run(capsys, "solve", os.path.join(DATA, "demo_problem.json"),
        "-o", str(dest))
    code, out, _ = run(capsys, "check", str(dest),
                       "--perturb-k", "0", "0.3", "0")
    assert code == 3
    assert json.loads(out)["constant"] is False


def test_threads_env_override(capsys):
    code, _, err = run(capsys, "oracle", "0", "0", "0", "4", "0", "0",
                       env={"KINOSYNTH_THREADS": "zero"})
    # oracle does not consult threads; solve does
    assert code == 0
    code, _, err = run(capsys, "solve", os.path.join(DATA, "demo_problem.json"),
                       env={"KINOSYNTH_THREADS": "zero"})
    assert code == 1
    assert "threads" in err
    code, _, err = run(capsys, "solve", os.path.join(DATA, "demo_problem.json"),
                       env={"KINOSYNTH_THREADS": "0"})
    assert code == 1
