import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plr_curves import algebra, curves, date
from plr_curves.presets import PRESETS


def helix(s, r, c):
    w = 1 / np.hypot(r, c)
    return np.stack([r * np.cos(w * s), r * np.sin(w * s), c * w * s], axis=-1)


def test_circle_frenet():
    s = np.linspace(0, 6, 601)
    pts = np.stack([np.cos(s), np.sin(s), 0 * s], axis=-1)
    fr = curves.frenet_from_points(pts, s[1] - s[0], s)
    np.testing.assert_allclose(fr.kappa, 1, atol=1e-4)
    np.testing.assert_allclose(fr.tau, 0, atol=1e-6)
    assert fr.s[0] == s[2] and len(fr.s) == len(s) - 4


@settings(max_examples=20, deadline=None)
@given(st.floats(0.3, 3), st.floats(-2, 2))
def test_helix_frenet(r, c):
    s = np.linspace(0, 4, 401)
    fr = curves.frenet_from_points(helix(s, r, c), s[1] - s[0])
    den = r * r + c * c
    np.testing.assert_allclose(fr.kappa, r / den, rtol=1e-3)
    np.testing.assert_allclose(fr.tau, c / den, atol=1e-3)


def test_straight_line_is_masked():
    s = np.linspace(0, 1, 21)
    pts = np.stack([s, 2 * s, 0 * s], axis=-1)
    fr = curves.frenet_from_points(pts, s[1] - s[0])
    assert fr.tau.mask.all()


def test_frenet_needs_samples():
    with pytest.raises(ValueError, match="7 samples"):
        curves.frenet_from_points(np.zeros((6, 3)), 0.1)


def test_hasimoto_constant_invariants():
    s = np.linspace(-1, 1, 201)
    h = s[1] - s[0]
    q = curves.hasimoto_q(np.full_like(s, 2.0), np.full_like(s, 1.5), h, anchor=100)
    np.testing.assert_allclose(q, 2 * np.exp(0.5j * s), atol=1e-12)


def test_coefficient_fields_static_curve():
    ns, nt, h = 41, 5, 0.1
    s = h * np.arange(ns)
    kappa = np.tile((1 + 0.5 * np.sin(s))[:, None], (1, nt))
    tau = np.tile(np.cos(s)[:, None], (1, nt))
    co = curves.coefficient_fields(kappa, tau, h, 0, a_anchor=0.3, tau_dot_anchor=0.2)
    assert co.a.shape == (ns, nt - 2)
    np.testing.assert_allclose(co.b, 0, atol=1e-14)
    np.testing.assert_allclose(co.a, 0.3, atol=1e-14)
    np.testing.assert_allclose(co.c, -0.2 * kappa[:, 1:-1], atol=1e-14)


def test_curve_golden_and_shape():
    pts = curves.nsoliton_curve(date.SolitonParams([1j], [1]), 0.0, 0.0)
    np.testing.assert_allclose(pts, [0, -1, 0], atol=1e-12)
    grid = curves.curve_grid(PRESETS["A"], np.linspace(-1, 1, 5), [0, 1], with_invariants=True)
    assert grid.points.shape == (5, 2, 3) and grid.kappa.shape == (5, 2)
    assert grid.h_s == pytest.approx(0.5)


@pytest.mark.parametrize("name", ["A", "B", "C", "E"])
def test_sym_matches_closed_form(name):
    s = np.linspace(-3, 3, 61)
    t = np.full_like(s, 0.4)
    np.testing.assert_allclose(curves.sym_numeric(PRESETS[name], s, t),
                               curves.nsoliton_curve(PRESETS[name], s, t), atol=1e-6)


@pytest.mark.parametrize("name", list(PRESETS))
def test_closed_form_unit_speed(name):
    s = np.linspace(-5, 5, 2001)
    pts = curves.nsoliton_curve(PRESETS[name], s, np.full_like(s, 0.7))
    speed = np.linalg.norm(np.gradient(pts, s[1] - s[0], axis=0), axis=1)[2:-2]
    np.testing.assert_allclose(speed, 1, atol=1e-3)
    np.testing.assert_allclose(curves.unit_speed_trace(PRESETS[name], s, 0.7 + 0 * s), 1, atol=1e-12)


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_sym_speed_scales_with_lambda(lam):
    s = np.linspace(-3, 3, 601)
    g = curves.sym_numeric(PRESETS["B"], s, np.full_like(s, 0.4), lam0=lam)
    speed = np.linalg.norm(np.gradient(g, s[1] - s[0], axis=0), axis=1)[2:-2]
    np.testing.assert_allclose(speed, lam, rtol=1e-3)


def test_sym_rejects_bad_step():
    with pytest.raises(ValueError):
        curves.sym_numeric(PRESETS["A"], 0.0, 0.0, lam0=1.0, h_lam=2.0)


def test_curve_invariants_match_frenet():
    p = PRESETS["B"]
    s = np.linspace(-4, 4, 1601)
    t = np.full_like(s, -0.3)
    fr = curves.frenet_from_points(curves.nsoliton_curve(p, s, t), s[1] - s[0])
    kappa, tau = date.curve_invariants(p, s[2:-2], t[2:-2])
    np.testing.assert_allclose(fr.kappa, kappa, atol=1e-3)
    ok = kappa > 0.1
    np.testing.assert_allclose(fr.tau[ok], tau[ok], atol=1e-3)


def test_kabsch_recovers_motion():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(50, 3))
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    target = pts @ q.T + np.array([1.0, -2.0, 0.5])
    aligned, R, x0 = curves.kabsch(pts, target)
    np.testing.assert_allclose(aligned, target, atol=1e-12)
    np.testing.assert_allclose(R, q, atol=1e-12)


def test_mesh_counts_and_writers():
    mesh = curves.swept_surface(PRESETS["A"], (-10, 10), (-10, 10), 201, 201, with_invariants=True)
    assert mesh.vertices.shape == (201 * 201, 3)
    assert mesh.faces.shape == (40000, 4)
    assert mesh.meta["dropped_faces"] == 0
    obj = mesh.obj_text().splitlines()
    assert sum(line.startswith("v ") for line in obj) == 201 * 201
    assert sum(line.startswith("f ") for line in obj) == 40000
    face = [int(x) for x in next(line for line in obj if line.startswith("f ")).split()[1:]]
    assert min(face) >= 1
    csv = mesh.csv_text().splitlines()
    assert csv[0] == "s,t,x,y,z,kappa,tau"
    assert len(csv) == 201 * 201 + 1


def test_mesh_text_is_deterministic():
    m1 = curves.swept_surface(PRESETS["B"], (-2, 2), (-1, 1), 11, 7)
    m2 = curves.swept_surface(PRESETS["B"], (-2, 2), (-1, 1), 11, 7)
    assert m1.obj_text() == m2.obj_text()
    assert "nan" not in m1.csv_text()


def test_fmt_round_trips():
    x = 0.1 + 1e-17
    assert float(curves._fmt(x)) == x
    assert curves._fmt(float("inf")) == "nan"


def test_sym_defect_guard():
    assert algebra.su2_defect(algebra.su2_embed([1, 2, 3])) < 1e-15
