import json

import numpy as np
import pytest

from plr_curves import cli


def run(*argv):
    return cli.main(list(argv))


def test_params_check_sine_gordon(capsys):
    assert run("params", "check", "--preset", "E") == 0
    report = json.loads(capsys.readouterr().out)
    assert report["valid"] and report["sine_gordon"]
    assert report["sigma"] == [2, 1]


def test_params_check_sg4_and_note(capsys):
    assert run("params", "check", "--preset", "sg4") == 0
    assert json.loads(capsys.readouterr().out)["sine_gordon"]
    assert run("params", "check", "--preset", "D") == 0
    assert "note" in json.loads(capsys.readouterr().out)


@pytest.mark.parametrize("alpha, c", [
    ([{"re": 0, "im": 1}, {"re": 0, "im": 1}], [1, 1]),
    ([{"re": 0, "im": 1}, {"re": 0, "im": -1}], [1, 1]),
    ([{"re": 0, "im": 1}], [1, 2]),
])
def test_invalid_params_exit_1(tmp_path, capsys, alpha, c):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alpha": alpha, "c": c}))
    assert run("params", "check", "--config", str(cfg)) == 1
    assert "error" in capsys.readouterr().err


def test_usage_errors(tmp_path):
    assert run("solve", "--out", str(tmp_path)) == 1
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"preset": "A", "nS": 1}))
    assert run("solve", "--config", str(cfg), "--out", str(tmp_path)) == 1
    cfg.write_text(json.dumps({"preset": "A", "s_range": [1, 1]}))
    assert run("solve", "--config", str(cfg), "--out", str(tmp_path)) == 1
    assert run("curve", "--preset", "A", "--t", "0", "--lambda", "-1", "--out", str(tmp_path)) == 1
    assert run("verify", "--preset", "A", "--h", "0", "--out", str(tmp_path)) == 1
    cfg.write_text("{not json")
    assert run("solve", "--config", str(cfg), "--out", str(tmp_path)) == 1


def test_io_error_exit_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run("solve", "--preset", "A", "--out", str(blocker / "sub")) == 3


def test_solve_rows_and_golden_origin(tmp_path):
    assert run("solve", "--preset", "A", "--out", str(tmp_path)) == 0
    lines = (tmp_path / "solve.csv").read_text().splitlines()
    assert lines[0] == "s,t,re_a,im_a,u,v,re_q,im_q,gap"
    assert len(lines) == 101 * 101 + 1
    cfg = tmp_path / "n1.json"
    cfg.write_text(json.dumps({"alpha": [{"re": 0, "im": 1}], "c": [1],
                               "s_range": [-1, 1], "t_range": [-1, 1], "nS": 3, "nT": 3}))
    assert run("solve", "--config", str(cfg), "--out", str(tmp_path)) == 0
    rows = np.loadtxt(tmp_path / "solve.csv", delimiter=",", skiprows=1)
    origin = rows[(rows[:, 0] == 0) & (rows[:, 1] == 0)][0]
    assert origin[4] == pytest.approx(np.pi, abs=1e-12)
    assert origin[2] == pytest.approx(1, abs=1e-12)


def test_solve_sine_gordon_v_constant(tmp_path):
    assert run("solve", "--preset", "E", "--out", str(tmp_path)) == 0
    rows = np.loadtxt(tmp_path / "solve.csv", delimiter=",", skiprows=1)
    v = rows[:, 5]
    assert np.abs(np.angle(np.exp(1j * (v - v[0])))).max() < 1e-9


def test_curve_unit_speed_column(tmp_path):
    assert run("curve", "--preset", "plr4", "--t", "0", "--out", str(tmp_path)) == 0
    text = (tmp_path / "curve_t0.csv").read_text()
    assert text.splitlines()[0] == "s,x,y,z,kappa,tau,gap"
    rows = np.loadtxt(text.splitlines()[1:], delimiter=",")
    assert rows.shape == (1001, 7)
    assert rows[0, 0] == -25 and rows[-1, 0] == 25
    step = np.linalg.norm(np.diff(rows[:, 1:4], axis=0), axis=1) / np.diff(rows[:, 0])
    # chord / arc = 1 - kappa^2 h^2 / 24 at h = 0.05
    np.testing.assert_allclose(step, 1, atol=5e-3)
    assert np.isfinite(rows).all()


def test_curve_at_other_lambda(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"preset": "B", "s_range": [-3, 3], "nS": 301}))
    assert run("curve", "--config", str(cfg), "--t", "0.5", "--lambda", "2", "--out", str(tmp_path)) == 0
    rows = np.loadtxt(tmp_path / "curve_t0.5.csv", delimiter=",", skiprows=1)
    step = np.linalg.norm(np.diff(rows[:, 1:4], axis=0), axis=1) / np.diff(rows[:, 0])
    np.testing.assert_allclose(step, 2, rtol=1e-3)


def test_surface_counts(tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"preset": "B", "nS": 21, "nT": 11}))
    assert run("surface", "--config", str(cfg), "--out", str(tmp_path)) == 0
    obj = (tmp_path / "surface.obj").read_text().splitlines()
    assert sum(line.startswith("v ") for line in obj) == 21 * 11
    assert sum(line.startswith("f ") for line in obj) == 20 * 10
    assert len((tmp_path / "surface.csv").read_text().splitlines()) == 21 * 11 + 1


def test_outputs_are_byte_identical(tmp_path):
    for d in ("one", "two"):
        out = tmp_path / d
        assert run("solve", "--preset", "C", "--out", str(out)) == 0
        assert run("surface", "--preset", "B", "--out", str(out)) == 0
        assert run("curve", "--preset", "sg4", "--t", "1", "--out", str(out)) == 0
    for name in ("solve.csv", "surface.obj", "surface.csv", "curve_t1.csv"):
        a = (tmp_path / "one" / name).read_bytes()
        assert a == (tmp_path / "two" / name).read_bytes()
        assert b"\r\n" not in a


def test_verify_exit_codes(tmp_path, capsys):
    assert run("verify", "--preset", "A", "--out", str(tmp_path)) == 0
    data = json.loads((tmp_path / "verify.json").read_text())
    assert all(r["status"] == "pass" for r in data)
    assert "lund_regge" in capsys.readouterr().out
    assert run("verify", "--preset", "A", "--perturb", "0.1", "--out", str(tmp_path)) == 2
    data = json.loads((tmp_path / "verify.json").read_text())
    assert any(r["status"] == "fail" for r in data)


def test_no_temp_files_left(tmp_path):
    assert run("solve", "--preset", "A", "--out", str(tmp_path)) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["solve.csv"]
