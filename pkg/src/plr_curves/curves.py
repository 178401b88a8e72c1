"""Soliton space curves: closed form, Sym formula, Frenet data and meshes."""

from dataclasses import dataclass, field

import numpy as np

from . import algebra, date, fd, frame

SYM_DEFECT_TOL = 1e-6
GAP_TOL = 1e-8


@dataclass(frozen=True)
class CurveGrid:
    s_values: np.ndarray
    t_values: np.ndarray
    points: np.ndarray  # (ns, nt, 3)
    kappa: np.ndarray | None = None
    tau: np.ndarray | None = None
    q: np.ndarray | None = None

    def __post_init__(self):
        if self.points.shape[:2] != (len(self.s_values), len(self.t_values)):
            raise ValueError("points do not match the (s, t) lattice")

    @property
    def h_s(self):
        return float(self.s_values[1] - self.s_values[0])

    @property
    def h_t(self):
        return float(self.t_values[1] - self.t_values[0])


def _curve_from_bundle(bundle):
    pp = date.fg_polynomials(bundle)
    f, g = pp.f, pp.g
    fb, gb = f.conj(), g.conj()
    F, G, FB, GB = f(1.0), g(1.0), fb(1.0), gb(1.0)
    dF, dG, dFB, dGB = f.deriv()(1.0), g.deriv()(1.0), fb.deriv()(1.0), gb.deriv()(1.0)
    den = (F * FB + G * GB).real
    e = date.phase_e(bundle.s, bundle.t, 1.0)
    # conj(e)^2 keeps the curve unit-speed; see the notes in README
    X = (FB * dG - G * dFB) / den * np.conj(e) ** 2
    g3 = bundle.s - bundle.t + 2 * np.imag((FB * dF + G * dGB) / den)
    return np.stack([2 * X.real, -2 * X.imag, g3 * np.ones_like(X.real)], axis=-1)


def nsoliton_curve(p, s, t, strict=True):
    """Closed-form N-soliton curve gamma(s, t) at lam = 1, shape (..., 3).

    With ``strict=False`` points where T0 is singular come back as NaN.
    """
    s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
    bundle = date.determinants(p, s, t, strict=strict)
    if strict:
        return _curve_from_bundle(bundle)
    with np.errstate(all="ignore"):
        out = _curve_from_bundle(bundle)
    out[bundle.singular()] = np.nan
    return out


def curve_grid(p, s_values, t_values, with_invariants=False):
    s_values = np.asarray(s_values, float)
    t_values = np.asarray(t_values, float)
    S, T = np.meshgrid(s_values, t_values, indexing="ij")
    pts = nsoliton_curve(p, S, T)
    kappa = tau = q = None
    if with_invariants:
        kappa, tau = date.curve_invariants(p, S, T)
        q = date.solution_fields(p, S, T).q
    return CurveGrid(s_values, t_values, pts, kappa, tau, q)


def sym_numeric(p, s, t, lam0=1.0, h_lam=1e-4):
    """lam0 (dF/dlam) F^-1 by a central difference in lam."""
    if not lam0 > h_lam > 0:
        raise ValueError("need lam0 > h_lam > 0")
    bundle = date.determinants(p, s, t)
    Fp = frame.wave_function(p, s, t, lam0 + h_lam, bundle).F
    Fm = frame.wave_function(p, s, t, lam0 - h_lam, bundle).F
    F0 = frame.wave_function(p, s, t, lam0, bundle).F
    m = lam0 * (Fp - Fm) / (2 * h_lam) @ algebra.dagger(F0)
    defect = algebra.su2_defect(m)
    if defect > SYM_DEFECT_TOL:
        raise algebra.NotSu2Error(f"Sym matrix leaves su(2) by {defect:.3e}")
    return algebra.su2_extract(algebra.su2_project(m), tol=np.inf)


def unit_speed_trace(p, s, t):
    """-2 tr(g' g') with g' = F (lam dL/dlam) F^-1 at lam = 1."""
    F = frame.wave_function(p, s, t, 1.0).F
    dL = np.array([[0.5j, 0], [0, -0.5j]])
    gp = F @ dL @ algebra.dagger(F)
    return (-2 * np.trace(gp @ gp, axis1=-2, axis2=-1)).real


@dataclass(frozen=True)
class Frenet:
    s: np.ndarray
    kappa: np.ma.MaskedArray
    tau: np.ma.MaskedArray


def frenet_from_points(points, h, s=None, gap_tol=GAP_TOL):
    """Curvature and torsion of an s-sampled curve (axis 0), 5-point stencils.

    The two end samples on each side are dropped.  Points where the curve
    is locally straight are masked instead of divided by zero.
    """
    points = np.asarray(points, float)
    if points.shape[0] < 7:
        raise ValueError(f"need at least 7 samples along s, got {points.shape[0]}")
    d1 = fd.d_s(points, h)[1:-1]
    d2 = fd.d_ss(points, h)[1:-1]
    d3 = fd.d_sss(points, h)
    cr = np.cross(d1, d2)
    ncr = np.linalg.norm(cr, axis=-1)
    gap = ncr < gap_tol
    safe = np.where(gap, 1.0, ncr)
    kappa = ncr / np.linalg.norm(d1, axis=-1) ** 3
    tau = np.einsum("...i,...i->...", cr, d3) / safe**2
    if s is not None:
        s = np.asarray(s)[2:-2]
    return Frenet(s, np.ma.masked_array(kappa, gap), np.ma.masked_array(tau, gap))


def frenet_apparatus(grid, t_index):
    pts = grid.points[:, t_index]
    return frenet_from_points(pts, grid.h_s, grid.s_values)


def hasimoto_q(kappa, tau, h, anchor=0):
    """kappa exp(i int_{s0}^s (tau - 1) ds), trapezoid along axis 0."""
    kappa = np.asarray(kappa, float)
    phase = fd.cumtrapz_s(np.asarray(tau, float) - 1, h, anchor)
    return kappa * np.exp(1j * phase)


@dataclass(frozen=True)
class Coefficients:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray


def coefficient_fields(kappa, tau, h, anchor=0, a_anchor=0.0, tau_dot_anchor=0.0):
    """(a, b, c) of a unit-speed Lund-Regge flow from kappa, tau on a lattice.

    t-derivatives are central, so the first and last t-slices are dropped.
    ``a_anchor`` and ``tau_dot_anchor`` are the values of a and of
    int tau_t ds at the anchor row, per t; zero is the plain normalization.
    """
    kappa = np.asarray(kappa, float)
    tau = np.asarray(tau, float)
    k_t = fd.d_t(kappa, h)
    tau_t = fd.d_t(tau, h)
    kc = fd.crop(kappa, 0, 1)
    a = np.asarray(a_anchor) - fd.cumtrapz_s(k_t * kc, h, anchor)
    b = -k_t
    c = -kc * (np.asarray(tau_dot_anchor) + fd.cumtrapz_s(tau_t, h, anchor))
    return Coefficients(a, b, c)


def kabsch(points, target):
    """Rigid motion (R, x0) minimizing |R p + x0 - target|; returns (aligned, R, x0)."""
    P = np.asarray(points, float).reshape(-1, 3)
    Q = np.asarray(target, float).reshape(-1, 3)
    pc, qc = P.mean(axis=0), Q.mean(axis=0)
    H = (P - pc).T @ (Q - qc)
    U, _, Vt = np.linalg.svd(H)
    sgn = np.sign(np.linalg.det(Vt.T @ U.T))
    R = Vt.T @ np.diag([1, 1, sgn]) @ U.T
    x0 = qc - R @ pc
    aligned = (P @ R.T + x0).reshape(np.shape(points))
    return aligned, R, x0


def _fmt(x):
    return "nan" if not np.isfinite(x) else f"{x:.17g}"


@dataclass(frozen=True)
class MeshExport:
    vertices: np.ndarray  # (nS * nT, 3), s-major
    faces: np.ndarray  # (k, 4), 0-based
    s: np.ndarray
    t: np.ndarray
    kappa: np.ndarray | None = None
    tau: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def obj_text(self):
        lines = [f"# {k}: {v}" for k, v in sorted(self.meta.items())]
        lines += ["v " + " ".join(_fmt(x) for x in v) for v in self.vertices]
        lines += ["f " + " ".join(str(i + 1) for i in f) for f in self.faces]
        return "\n".join(lines) + "\n"

    def csv_text(self):
        cols = ["s", "t", "x", "y", "z"]
        extra = self.kappa is not None
        if extra:
            cols += ["kappa", "tau"]
        lines = [",".join(cols)]
        for i, v in enumerate(self.vertices):
            row = [self.s[i], self.t[i], *v]
            if extra:
                row += [self.kappa[i], self.tau[i]]
            lines.append(",".join(_fmt(x) for x in row))
        return "\n".join(lines) + "\n"


def swept_surface(p, s_range, t_range, nS, nT, with_invariants=False):
    """Quad mesh of the curve family over an (s, t) rectangle.

    Faces touching a non-finite vertex are dropped and counted in ``meta``.
    """
    if nS < 2 or nT < 2:
        raise ValueError("need nS, nT >= 2")
    s = np.linspace(*s_range, nS)
    t = np.linspace(*t_range, nT)
    S, T = np.meshgrid(s, t, indexing="ij")
    pts = nsoliton_curve(p, S, T, strict=False)
    ok = np.isfinite(pts).all(axis=-1)
    idx = np.arange(nS * nT).reshape(nS, nT)
    quads = np.stack([idx[:-1, :-1], idx[1:, :-1], idx[1:, 1:], idx[:-1, 1:]], axis=-1).reshape(-1, 4)
    keep = ok.reshape(-1)[quads].all(axis=1)
    kappa = tau = None
    if with_invariants:
        kappa = np.full(S.shape, np.nan)
        tau = np.full(S.shape, np.nan)
        with np.errstate(all="ignore"):
            k, tt = date.curve_invariants(p, S[ok], T[ok])
        kappa[ok], tau[ok] = k, tt
        kappa, tau = kappa.reshape(-1), tau.reshape(-1)
    meta = {"params": p.name or "custom", "nS": nS, "nT": nT,
            "dropped_faces": int((~keep).sum()), "bad_vertices": int((~ok).sum())}
    return MeshExport(pts.reshape(-1, 3), quads[keep], S.reshape(-1), T.reshape(-1), kappa, tau, meta)
