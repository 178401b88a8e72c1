"""Finite-difference residuals of the governing equations with h-halving.

Every check is a function ``h -> (max_residual, skipped_fraction)``.  A
report evaluates it at h and h/2; second-order stencils on smooth data
give a ratio near 4.

Local checks sample small patches around a lattice of centers, so a fine
step never requires a fine global grid.  Checks that integrate along s
sample full s-lines through a few t-centers instead.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import curves, date, fd, frame

RATIO_LO, RATIO_HI = 3.0, 5.0
FLOOR = 1e-9  # residuals below this count as exact
CEILING = 1e-3  # absolute bound at h = 1e-3; scales with h^2 above that
MAX_SKIPPED = 0.5
GUARD = 0.1
COMPAT_GUARD = 0.15
COMPAT_STEP = 2


@dataclass(frozen=True)
class GridSpec:
    s_range: tuple = (-5.0, 5.0)
    t_range: tuple = (-5.0, 5.0)
    n_centers: int = 21
    n_lines: int = 11
    h: float = 1e-3

    def centers(self):
        return (np.linspace(*self.s_range, self.n_centers),
                np.linspace(*self.t_range, self.n_centers))

    def line_centers(self):
        return np.linspace(*self.t_range, self.n_lines)

    def describe(self, lines=False):
        (s0, s1), (t0, t1) = self.s_range, self.t_range
        if lines:
            return f"{self.n_lines} s-lines on [{s0:g},{s1:g}]x[{t0:g},{t1:g}]"
        return f"{self.n_centers}x{self.n_centers} centers on [{s0:g},{s1:g}]x[{t0:g},{t1:g}]"


@dataclass
class ResidualReport:
    name: str
    grid: str
    h: float | None
    max_residual: float
    convergence_ratio: float | None
    skipped_fraction: float
    status: str
    detail: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status == "pass"

    def as_json(self):
        d = asdict(self)
        d.pop("detail")
        return d


def judge(r_h, r_h2, h, skipped=0.0):
    """Pass/fail from residuals at h and h/2.

    Pass when the residual is below the ceiling (1e-3 at h = 1e-3, scaling
    with h^2) or when halving h shrinks it by a factor in [3, 5].  More
    than half the points skipped is a failure whatever the numbers say.
    """
    if skipped >= 1.0:
        return "skipped: no admissible points", None
    if not (np.isfinite(r_h) and np.isfinite(r_h2)):
        return "fail", None
    ratio = r_h / r_h2 if r_h2 > 0 else None
    if skipped > MAX_SKIPPED:
        return "fail", ratio
    ceiling = max(CEILING, CEILING * (h / 1e-3) ** 2)
    if r_h2 <= FLOOR or r_h <= ceiling:
        return "pass", ratio
    if ratio is not None and RATIO_LO <= ratio <= RATIO_HI:
        return "pass", ratio
    return "fail", ratio


def convergence_report(name, check, h, grid=""):
    """Run ``check`` at h and h/2.

    A check returns (residual, skipped_fraction) or, for equations whose
    terms are large, (residual, skipped_fraction, term_scale).
    """
    out1, out2 = check(h), check(h / 2)
    r1, sk1, r2, sk2 = out1[0], out1[1], out2[0], out2[1]
    scale = max(out1[2], out2[2]) if len(out1) > 2 else 1.0
    skipped = max(sk1, sk2)
    status, ratio = judge(r1, r2, h, skipped)
    return ResidualReport(name, grid, h, float(r1), None if ratio is None else float(ratio),
                          float(skipped), status, {"residual_half": float(r2), "term_scale": scale})


def threshold_report(name, value, tol, grid="", skipped_reason=None):
    if skipped_reason:
        return ResidualReport(name, grid, None, float("nan"), None, 1.0, f"skipped: {skipped_reason}")
    status = "pass" if value < tol else "fail"
    return ResidualReport(name, grid, None, float(value), None, 0.0, status, {"tolerance": tol})


# ---------------------------------------------------------------- sources

class Source:
    """Exact fields of a soliton solution, optionally with q perturbed.

    The perturbation multiplies q by w = 1 + eps sin(s) cos(t); derivatives
    follow by the product rule, so the perturbed data is a smooth field
    that simply does not solve the equations.
    """

    def __init__(self, p, perturb=0.0):
        self.p = p
        self.eps = float(perturb)

    def curve(self, S, T):
        return curves.nsoliton_curve(self.p, S, T)

    def _w(self, S, T):
        e = self.eps
        return (1 + e * np.sin(S) * np.cos(T), e * np.cos(S) * np.cos(T),
                -e * np.sin(S) * np.sin(T), -e * np.cos(S) * np.sin(T))

    def q(self, S, T):
        q = date.q_field(self.p, S, T)
        return q * self._w(S, T)[0] if self.eps else q

    def q_all(self, S, T):
        qd = date.q_derivatives(self.p, S, T)
        if not self.eps:
            return qd.q, qd.q_s, qd.q_t, qd.q_st
        w, ws, wt, wst = self._w(S, T)
        q_st = qd.q_st * w + qd.q_s * wt + qd.q_t * ws + qd.q * wst
        return qd.q * w, qd.q_s * w + qd.q * ws, qd.q_t * w + qd.q * wt, q_st

    def uv(self, S, T):
        f = date.solution_fields(self.p, S, T)
        return f.u, f.v

    def frenet_coefficients(self, S, T):
        """(kappa, tau, a, b, c) of the unit-speed flow from q and its derivatives."""
        q, q_s, q_t, q_st = self.q_all(S, T)
        kappa = np.abs(q)
        tau = 1 + np.imag(q_s / q)
        a = np.real(q_st / q)
        b = -np.real(np.conj(q) * q_t) / kappa
        c = -kappa * np.imag(q_t / q)
        return kappa, tau, a, b, c


# ---------------------------------------------------------------- checks

def _guarded_max(r, kappa):
    """Max residual over patches whose curvature stays above GUARD."""
    ok = kappa.min(axis=(0, 1)) > GUARD
    if not ok.any():
        return np.nan, 1.0
    return np.abs(r[..., ok]).max(), 1 - ok.mean()


def lund_regge_check(curve_fn, spec):
    sc, tc = spec.centers()

    def check(h):
        S, T = fd.patch_lattice(sc, tc, h)
        g = curve_fn(S, T)
        gs = fd.d_s(g, h)[0, 1]
        gt = fd.d_t(g, h)[1, 0]
        gst = fd.d_st(g, h)[0, 0]
        r = np.linalg.norm(gst - np.cross(gs, gt), axis=-1)
        return r.max(), 0.0
    return check


def arclength_check(curve_fn, spec):
    sc, tc = spec.centers()

    def check(h):
        S, T = fd.patch_lattice(sc, tc, h)
        g = curve_fn(S, T)
        ls = np.linalg.norm(fd.d_s(g, h), axis=-1)  # (1, 3, ...)
        lt = np.linalg.norm(fd.d_t(g, h), axis=-1)  # (3, 1, ...)
        r1 = np.abs(fd.d_t(ls, h)[0, 0])
        r2 = np.abs(fd.d_s(lt, h)[0, 0])
        return max(r1.max(), r2.max()), 0.0
    return check


def unit_speed_check(curve_fn, spec):
    sc, tc = spec.centers()

    def check(h):
        S, T = fd.patch_lattice(sc, tc, h)
        g = curve_fn(S, T)
        return np.abs(np.linalg.norm(fd.d_s(g, h)[0, 1], axis=-1) - 1).max(), 0.0
    return check


def lax_check(p, spec, lam, which):
    sc, tc = spec.centers()
    key = {"s": "maxS", "t": "maxT"}[which]
    return lambda h: (frame.lax_residual(p, lam, sc, tc, h)[key], 0.0)


def zero_curvature_check(source, spec, lam=1.0):
    sc, tc = spec.centers()

    def check(h):
        S, T = fd.patch_lattice(sc, tc, h)
        q, _, q_t, q_st = source.q_all(S, T)
        lp = frame.lax_matrices(q, q_t, q_st, lam, im_tol=np.inf)
        return frame.zero_curvature_residual(lp.L, lp.M, h), 0.0
    return check


def plr_complex_check(q_fn, spec, anchor_fn=None, s0_index=0):
    """q_st + q/2 * (C(t) + int_{s0}^s (|q|^2)_t ds) on s-lines.

    ``anchor_fn(s0, t)`` gives C(t).  Without it C is fitted per line by
    least squares, which is the most favourable constant.
    """
    s0, s1 = spec.s_range
    tc = spec.line_centers()

    def check(h):
        S, T = fd.line_lattice(s0, s1, tc, h)
        q = q_fn(S, T)
        q_st = fd.d_st(q, h)[:, 0]  # (ns-2, nct)
        m2_t = fd.d_t(np.abs(q) ** 2, h)[:, 0]  # (ns, nct)
        integral = fd.cumtrapz_s(m2_t, h, s0_index)[1:-1]
        qc = q[1:-1, 1]
        if anchor_fn is not None:
            C = anchor_fn(S[s0_index, 1], T[s0_index, 1])
        else:
            # minimize |q_st + q/2 (C + I)| over real C per line
            rhs = -(q_st + 0.5 * qc * integral)
            basis = 0.5 * qc
            C = np.sum(np.real(np.conj(basis) * rhs), axis=0) / np.sum(np.abs(basis) ** 2, axis=0)
        r = np.abs(q_st + 0.5 * qc * (C + integral))
        return r.max(), 0.0
    return check


def plr_imag_ratio(q_fn, spec, h):
    """max |Im(q_st / q)| where |q| > 0.1."""
    sc, tc = spec.centers()
    S, T = fd.patch_lattice(sc, tc, h)
    q = q_fn(S, T)
    qc = q[1, 1]
    ratio = fd.d_st(q, h)[0, 0] / qc
    ok = np.abs(qc) > 0.1
    return float(np.abs(ratio.imag[ok]).max()) if ok.any() else 0.0


def _admissible(u):
    return (np.abs(np.cos(u / 2)) > GUARD) & (np.abs(np.sin(u)) > GUARD)


def plr_real_check(uv_fn, spec):
    sc, tc = spec.centers()

    def check(h):
        S, T = fd.patch_lattice(sc, tc, h)
        u, v = uv_fn(S, T)
        gap = np.ma.getmaskarray(v).any(axis=(0, 1))
        v = np.ma.filled(v, 0.0)
        uc = u[1, 1]
        ok = _admissible(uc) & ~gap
        skipped = 1 - ok.mean()
        if not ok.any():
            return np.nan, 1.0
        us, ut, ust = fd.d_s(u, h)[0, 1], fd.d_t(u, h)[1, 0], fd.d_st(u, h)[0, 0]
        vs, vt = fd.wrapped_d1(v, h, 0)[0, 1], fd.wrapped_d1(v, h, 1)[1, 0]
        vst = fd.wrapped_d_st(v, h)[0, 0]
        with np.errstate(all="ignore"):
            r1 = ust - vs * vt * np.sin(uc / 2) / (2 * np.cos(uc / 2) ** 3) + np.sin(uc)
            r2 = vst + (us * vt + ut * vs) / np.sin(uc)
        return max(np.abs(r1[ok]).max(), np.abs(r2[ok]).max()), skipped
    return check


def sine_gordon_check(u_fn, spec):
    sc, tc = spec.centers()

    def check(h):
        S, T = fd.patch_lattice(sc, tc, h)
        u = u_fn(S, T)
        uc = u[1, 1]
        # arccos folds u into [0, pi]; the equation is symmetric under the
        # fold but the stencil straddling it is not
        ok = _admissible(uc)
        if not ok.any():
            return np.nan, 1.0
        r = np.abs(fd.d_st(u, h)[0, 0] + np.sin(uc))
        return r[ok].max(), 1 - ok.mean()
    return check


def lr_coefficient_residual_field(a, b, c, kappa, tau, h):
    """Pointwise max of |a' - b k|, |b' + a k - c tau + c|, |c' + b tau - b|.

    s runs along axis 0; one sample is lost at each end.
    """
    return _combine(lr_coefficient_terms(a, b, c, kappa, tau, h))[0]


def lr_coefficient_terms(a, b, c, kappa, tau, h):
    k, tt = kappa[1:-1], tau[1:-1]
    ac, bc, cc = a[1:-1], b[1:-1], c[1:-1]
    return [[fd.d_s(a, h), -bc * k],
            [fd.d_s(b, h), ac * k, -cc * tt, cc],
            [fd.d_s(c, h), bc * tt, -bc]]


def lr_coefficient_residual(a, b, c, kappa, tau, h):
    return float(lr_coefficient_residual_field(a, b, c, kappa, tau, h).max())


def kappa_segments(kappa_line, guard=GUARD):
    """(start, stop) index pairs of maximal runs with kappa > guard."""
    ok = np.concatenate([[False], np.asarray(kappa_line) > guard, [False]])
    edges = np.flatnonzero(np.diff(ok.astype(int)))
    return list(zip(edges[::2], edges[1::2]))


def lr_coefficient_check(p, spec, perturb_c=0.0, min_len=5):
    """Coefficients by integration in s with the soliton's own constants.

    The Frenet frame only exists where kappa > 0, so every stretch of an
    s-line with kappa > GUARD is integrated separately from its own
    curvature maximum.
    """
    s0, s1 = spec.s_range
    tc = spec.line_centers()

    def check(h):
        S, T = fd.line_lattice(s0, s1, tc, h)
        with np.errstate(all="ignore"):
            kappa, tau = date.curve_invariants(p, S, T)
        worst, scale, used, total = 0.0, 1.0, 0, 0
        for j in range(tc.size):
            total += S.shape[0] - 2
            for lo, hi in kappa_segments(kappa[:, 1, j]):
                if hi - lo < min_len:
                    continue
                k, ta, Sj = kappa[lo:hi, :, j], tau[lo:hi, :, j], S[lo:hi, :, j]
                anchor = int(np.argmax(k[:, 1]))
                a0, td0 = date.coefficient_anchors(p, Sj[anchor, 1], tc[j])
                co = curves.coefficient_fields(k, ta, h, anchor, a0, td0)
                c = co.c * (1 + perturb_c * np.sin(Sj[:, 1:2]))
                r, sc = _combine(lr_coefficient_terms(co.a, co.b, c, k[:, 1:2], ta[:, 1:2], h))
                worst = max(worst, float(r.max()))
                scale = max(scale, float(sc.max()))
                used += r.shape[0]
        if used == 0:
            return np.nan, 1.0
        return worst, 1 - used / total, scale
    return check


def _combine(equations):
    """Pointwise max |sum of terms| and max |term| over a list of equations."""
    res = scale = 0
    for terms in equations:
        res = np.maximum(res, np.abs(sum(terms)))
        for term in terms:
            scale = np.maximum(scale, np.abs(term))
    return res, scale


def compatibility_terms(a, b, c, kappa, tau, ell, h):
    """Terms of the three frame compatibility equations, each summing to 0.

    Needs 7 samples in s and 3 in t around each evaluation point; every
    term is trimmed by 3 in s and 1 in t.
    """
    sl = slice(1, -1)
    m21, m31 = frame.explicit_m(ell[sl], kappa[sl], tau[sl], a[sl], b[sl], c[sl],
                                fd.d_s(b, h), fd.d_s(c, h))
    m31_s = fd.d_s(m31, h)
    inner = slice(2, -2)
    k2, t2, l2 = kappa[inner], tau[inner], ell[inner]
    m32 = m31_s / (l2 * k2) + m21[1:-1] * t2 / k2
    # l_t = a' - b l k
    eq1 = [fd.crop(fd.d_t(ell, h), 3, 0), -fd.crop(fd.d_s(a, h), 2, 1),
           fd.crop(b * ell * kappa, 3, 1)]
    # (l k)_t = m21' - m31 l tau
    eq2 = [fd.crop(fd.d_t(ell * kappa, h), 3, 0), -fd.crop(fd.d_s(m21, h), 1, 1),
           fd.crop(m31 * ell[sl] * tau[sl], 2, 1)]
    # (l tau)_t = m31 l k + m32'
    eq3 = [fd.crop(fd.d_t(ell * tau, h), 3, 0), -fd.crop(m31 * ell[sl] * kappa[sl], 2, 1),
           -fd.crop(fd.d_s(m32, h), 0, 1)]
    return [eq1, eq2, eq3]


def compatibility_residual(a, b, c, kappa, tau, ell, h):
    return _combine(compatibility_terms(a, b, c, kappa, tau, ell, h))[0]


def general_compatibility_check(source, spec, perturb_kappa=0.0, guard=COMPAT_GUARD):
    """Frame compatibility with ell = 1 and exact (kappa, tau, a, b, c).

    Nested third s-derivatives make rounding (about eps / h^3) visible at
    h = 1e-3, so the stencil step is twice the nominal one.
    """
    sc, tc = spec.centers()

    def check(h):
        H = COMPAT_STEP * h
        S, T = fd.patch_lattice(sc, tc, H, k=3)
        with np.errstate(all="ignore"):
            kappa, tau, a, b, c = source.frenet_coefficients(S, T)
            kappa = kappa * (1 + perturb_kappa * np.sin(S) * np.cos(T))
            ell = np.ones_like(kappa)
            r, scale = _combine(compatibility_terms(a, b, c, kappa, tau, ell, H))
        ok = kappa.min(axis=(0, 1)) > guard
        if not ok.any():
            return np.nan, 1.0
        return np.abs(r[..., ok]).max(), 1 - ok.mean(), max(1.0, float(scale[..., ok].max()))
    return check


def gauge_check(source, spec):
    """Frenet-form matrices gauged by D must equal the q-form Lax pair."""
    sc, tc = spec.centers()

    def check(h):
        S, T = fd.patch_lattice(sc, tc, h, k=2)
        q, q_s, q_t, q_st = source.q_all(S, T)
        with np.errstate(all="ignore"):
            kappa, tau, a, b, c = source.frenet_coefficients(S, T)
        ok = kappa.min(axis=(0, 1)) > GUARD
        if not ok.any():
            return np.nan, 1.0
        kappa, tau, a, b, c, q, q_t, q_st, S = (x[..., ok] for x in (kappa, tau, a, b, c, q, q_t, q_st, S))
        m21, m31 = -c, b
        m31_s = fd.d_s(m31, h)
        L, M = frame.general_frame_matrices(1.0, kappa[1:-1], tau[1:-1], m21[1:-1], m31[1:-1], m31_s)
        qc = q[2, 2]
        theta = np.angle(qc) + np.angle(q[1:-1] / qc)
        D = frame.gauge_matrix(theta)
        Lg, Mg = frame.gauge_transform(L, M, D, h)
        lp = frame.lax_matrices(q[1:-1], q_t[1:-1], q_st[1:-1], im_tol=np.inf)
        Lq, Mq = fd.crop(lp.L, 1, 1), fd.crop(lp.M, 1, 1)
        r = max(np.abs(Lg - Lq).max(), np.abs(Mg - Mq).max())
        return r, 1 - ok.mean()
    return check


# ---------------------------------------------------------------- suite

def sine_gordon_applicable(p, spec):
    """Literal parameter symmetry, or v measured constant on the grid."""
    if date.is_sine_gordon(p).holds:
        return True
    S, T = np.meshgrid(*spec.centers(), indexing="ij")
    return date.v_spread(date.solution_fields(p, S, T).v) < 1e-9


def run_suite(p, spec=None, perturb=0.0):
    """All residual checks for one parameter set, in a fixed order."""
    spec = spec or GridSpec()
    h = spec.h
    src = Source(p, perturb)
    pts, lines = spec.describe(), spec.describe(lines=True)
    anchor = None if perturb else (lambda s0, t: 2 * date.q_derivatives(p, s0, t).cos_u)

    reports = [
        convergence_report("lund_regge", lund_regge_check(src.curve, spec), h, pts),
        convergence_report("arclength_invariance", arclength_check(src.curve, spec), h, pts),
        convergence_report("unit_speed", unit_speed_check(src.curve, spec), h, pts),
        convergence_report("lax_s_lambda1", lax_check(p, spec, 1.0, "s"), h, pts),
        convergence_report("lax_t_lambda1", lax_check(p, spec, 1.0, "t"), h, pts),
        convergence_report("lax_s_lambda2", lax_check(p, spec, 2.0, "s"), h, pts),
        convergence_report("lax_t_lambda2", lax_check(p, spec, 2.0, "t"), h, pts),
        convergence_report("zero_curvature", zero_curvature_check(src, spec), h, pts),
        convergence_report("gauge_frenet_to_lax", gauge_check(src, spec), h, pts),
        convergence_report("general_compatibility", general_compatibility_check(src, spec), h, pts),
        convergence_report("lr_coefficients", lr_coefficient_check(p, spec), h, lines),
        convergence_report("plr_complex", plr_complex_check(src.q, spec, anchor), h, lines),
        convergence_report("plr_real", plr_real_check(src.uv, spec), h, pts),
    ]
    if sine_gordon_applicable(p, spec):
        S, T = np.meshgrid(*spec.centers(), indexing="ij")
        reports.append(convergence_report(
            "sine_gordon", sine_gordon_check(lambda S, T: src.uv(S, T)[0], spec), h, pts))
        reports.append(threshold_report(
            "v_constant_mod_2pi", date.v_spread(date.solution_fields(p, S, T).v), 1e-9, pts))
        pr = date.phase_reality_check(p, S, T)
        reports.append(threshold_report("reality_up_to_phase", pr.value or 0.0, 1e-9, pts,
                                        pr.reason if pr.skipped else None))
    return reports


def reports_json(reports):
    return json.dumps([r.as_json() for r in reports], indent=2, sort_keys=True, allow_nan=True) + "\n"
