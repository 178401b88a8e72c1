"""Date's direct method for N-soliton solutions of the PLR equation.

For spectral points alpha_1..alpha_N and constants c_1..c_N the wave
function is fixed by a 2N x 2N linear system T0 psi = b whose Cramer
determinants d_0..d_2N give everything else: the polynomials f, g of the
normalized frame and the solution fields (a, u, v).

Conventions that differ from a naive reading of the defining formulas
(all checked numerically, see tests/test_date.py):

* The off-diagonal of Psi^{-1} Psi' is i conj(d_2N/d_0) itself, so the
  potential q of the Lax matrix L = 1/2 [[i lam, q], [-conj q, -i lam]]
  is ``q = 2 a`` with ``a = i conj(d_2N/d_0)``.  Curvature is |q|.
* Under the sine-Gordon symmetry the ratios d_k/d_0 are real only after
  removing a power of i: psi_{1j} is in i^(N-j) R and psi_{2j} in
  i^(N-j-1) R.  :func:`reality_check` reports the literal imaginary parts,
  :func:`phase_reality_check` the corrected ones.
* The symmetry of the second column is Psi_12(lam) = -conj(Psi_21(conj lam)).
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import algebra

SG_TOL = 1e-10
CLAMP_TOL = 1e-12
SINGULAR_RTOL = 1e-14
MAX_PERMUTATION_N = 8


class ParamsError(ValueError):
    pass


class SingularSystemError(ArithmeticError):
    pass


class DegeneratePointError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SolitonParams:
    alpha: tuple
    c: tuple
    v0: float = 0.0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(complex(x) for x in self.alpha))
        object.__setattr__(self, "c", tuple(complex(x) for x in self.c))
        object.__setattr__(self, "v0", float(self.v0))
        problems = self.problems()
        if problems:
            raise ParamsError("; ".join(problems))

    @property
    def N(self):
        return len(self.alpha)

    def problems(self):
        out = []
        al, c = self.alpha, self.c
        if len(al) == 0:
            out.append("need at least one spectral point")
        if len(al) != len(c):
            out.append(f"{len(al)} spectral points but {len(c)} constants")
        for j, a in enumerate(al, 1):
            if not (math.isfinite(a.real) and math.isfinite(a.imag)):
                out.append(f"alpha_{j} not finite")
            elif a == 0:
                out.append(f"alpha_{j} = 0")
            elif a.imag == 0:
                out.append(f"alpha_{j} = {a} is real (Im alpha must be nonzero)")
        for j, cj in enumerate(c, 1):
            if not (math.isfinite(cj.real) and math.isfinite(cj.imag)):
                out.append(f"c_{j} not finite")
        signs = {np.sign(a.imag) for a in al if a.imag != 0}
        if len(signs) > 1:
            out.append("Im alpha_j must share one sign: "
                       + ", ".join(f"alpha_{j}={a:.6g}" for j, a in enumerate(al, 1)))
        for j, k in itertools.combinations(range(len(al)), 2):
            if abs(al[j] - al[k]) <= 1e-12:
                out.append(f"alpha_{j + 1} and alpha_{k + 1} coincide")
        if not math.isfinite(self.v0):
            out.append("v0 not finite")
        return out


def phase_e(s, t, lam):
    """exp((i/2)(lam s + t/lam))."""
    lam = np.asarray(lam, dtype=complex)
    if np.any(lam == 0):
        raise ValueError("spectral parameter must be nonzero")
    return np.exp(0.5j * (lam * np.asarray(s, dtype=float) + np.asarray(t, dtype=float) / lam))


def build_system(p, s, t):
    """T0 and b of the Date linear system.

    ``s`` and ``t`` broadcast; the result has shapes (..., 2N, 2N) and
    (..., 2N).
    """
    al = np.array(p.alpha)
    c = np.array(p.c)
    n = p.N
    s = np.asarray(s, dtype=float)[..., None]
    t = np.asarray(t, dtype=float)[..., None]
    A = np.vander(al, n, increasing=True)
    ea = phase_e(s, t, al)
    ea_bar = phase_e(s, t, np.conj(al))
    EA = ea[..., :, None] * A
    CEiA = (c / ea)[..., :, None] * A
    top = np.concatenate([EA, -CEiA], axis=-1)
    bottom = np.concatenate([np.conj(CEiA), np.conj(EA)], axis=-1)
    T0 = np.concatenate([top, bottom], axis=-2)
    b = -np.concatenate([al**n * ea, np.conj(al) ** n * np.conj(c) * ea_bar], axis=-1)
    return T0, b


def _rates(p, var):
    """Per-row log-derivative rates of T0 and b with respect to s or t."""
    al = np.array(p.alpha)
    if var == "s":
        rows = np.concatenate([al, np.conj(al)])
    elif var == "t":
        rows = np.concatenate([1 / al, 1 / np.conj(al)])
    else:
        raise ValueError(var)
    cols = np.concatenate([np.ones(p.N), -np.ones(p.N)])
    return 0.5j * rows, cols


@dataclass(frozen=True)
class DeterminantBundle:
    s: np.ndarray
    t: np.ndarray
    d: np.ndarray  # (..., 2N+1)

    @property
    def N(self):
        return (self.d.shape[-1] - 1) // 2

    def singular(self):
        scale = np.abs(self.d).max(axis=-1)
        return ~(np.abs(self.d[..., 0]) > SINGULAR_RTOL * scale)

    def ratios(self):
        return self.d[..., 1:] / self.d[..., :1]


def determinants(p, s, t, strict=True):
    """d_0 = det T0 and d_k = det of T0 with column k replaced by b.

    With ``strict=False`` singular points are left in place (callers mask
    them with :meth:`DeterminantBundle.singular`).
    """
    T0, b = build_system(p, s, t)
    d = [algebra.det(T0)]
    for k in range(1, 2 * p.N + 1):
        d.append(algebra.det(algebra.replace_column(T0, k, b)))
    d = np.stack(d, axis=-1)
    scale = np.abs(d).max(axis=-1)
    bad = ~(np.abs(d[..., 0]) > SINGULAR_RTOL * scale)
    if strict and np.any(bad):
        where = np.argwhere(np.atleast_1d(bad))[0]
        raise SingularSystemError(
            f"det T0 vanishes relative to the Cramer numerators (first at index {tuple(where)})")
    return DeterminantBundle(np.asarray(s, dtype=float), np.asarray(t, dtype=float), d)


@dataclass(frozen=True)
class Poly:
    """Polynomial in lam with ascending coefficients along the last axis."""

    coeffs: np.ndarray

    def __call__(self, lam):
        out = np.zeros(self.coeffs.shape[:-1], dtype=complex)
        for k in range(self.coeffs.shape[-1] - 1, -1, -1):
            out = out * lam + self.coeffs[..., k]
        return out

    def deriv(self):
        n = self.coeffs.shape[-1]
        if n <= 1:
            return Poly(np.zeros(self.coeffs.shape[:-1] + (1,), dtype=complex))
        return Poly(self.coeffs[..., 1:] * np.arange(1, n))

    def conj(self):
        # conjugated coefficients: evaluation at real lam is the conjugate value
        return Poly(np.conj(self.coeffs))


@dataclass(frozen=True)
class PolyPair:
    f: Poly
    g: Poly

    @property
    def f_coeffs(self):
        return self.f.coeffs

    @property
    def g_coeffs(self):
        return self.g.coeffs


def fg_polynomials(bundle):
    n = bundle.N
    d = bundle.d
    r = d[..., 1:] / d[..., :1]
    f = np.concatenate([r[..., :n], np.ones(d.shape[:-1] + (1,), dtype=complex)], axis=-1)
    g = -r[..., n:]
    return PolyPair(Poly(f), Poly(g))


@dataclass(frozen=True)
class PlrFields:
    a: np.ndarray
    u: np.ndarray
    v: np.ma.MaskedArray
    q: np.ndarray
    gap: np.ndarray


def solution_fields(p, s, t, bundle=None):
    """PLR solution (a, u, v) and the Lax potential q = 2a on (s, t).

    ``v`` is principal-valued and masked where d_{N+1} vanishes.  Points
    with |d_1|^2 + |d_{N+1}|^2 == 0 raise.
    """
    if bundle is None:
        bundle = determinants(p, s, t)
    n = p.N
    d = bundle.d
    d0, d1, dn1, d2n = d[..., 0], d[..., 1], d[..., n + 1], d[..., 2 * n]
    a = 1j * np.conj(d2n / d0)
    n1 = np.abs(d1) ** 2
    n2 = np.abs(dn1) ** 2
    den = n1 + n2
    if np.any(den == 0):
        raise DegeneratePointError("|d_1|^2 + |d_{N+1}|^2 vanishes")
    ratio = (n1 - n2) / den
    over = np.abs(ratio) - 1
    if np.any(over > CLAMP_TOL):
        raise DegeneratePointError(f"arccos argument exceeds 1 by {over.max():.3e}")
    u = np.arccos(np.clip(ratio, -1.0, 1.0))
    w = np.conj(dn1 / d0)
    gap = w == 0
    v = np.ma.masked_array(2 * np.angle(w) + p.v0, mask=gap)
    return PlrFields(a=a, u=u, v=v, q=2 * a, gap=np.asarray(gap))


@dataclass(frozen=True)
class QDerivatives:
    q: np.ndarray
    q_s: np.ndarray
    q_t: np.ndarray
    q_st: np.ndarray
    cos_u: np.ndarray


def solve_psi(p, s, t):
    """psi = T0^-1 b by one LU solve per point.

    Same values as the Cramer ratios d_k/d_0 at a fraction of the cost; used
    for long sweeps.
    """
    T0, b = build_system(p, s, t)
    return np.linalg.solve(T0, b[..., None])[..., 0], T0, b


def q_field(p, s, t):
    """q = 2i conj(psi_2N) from a linear solve."""
    return 2j * np.conj(solve_psi(p, s, t)[0][..., -1])


def q_derivatives(p, s, t):
    """Exact first derivatives of q and the mixed one.

    q_s and q_t come from differentiating T0 psi = b; the mixed derivative
    uses the Lax-pair identity q_st = -q cos u.
    """
    psi, T0, b = solve_psi(p, s, t)
    out = {}
    for var in ("s", "t"):
        rows, cols = _rates(p, var)
        dT = T0 * rows[:, None] * cols[None, :]
        db = b * rows
        dpsi = np.linalg.solve(T0, (db - (dT @ psi[..., None])[..., 0])[..., None])[..., 0]
        out[var] = 2j * np.conj(dpsi[..., -1])
    q = 2j * np.conj(psi[..., -1])
    n1 = np.abs(psi[..., 0]) ** 2
    n2 = np.abs(psi[..., p.N]) ** 2
    cos_u = np.clip((n1 - n2) / (n1 + n2), -1.0, 1.0)
    return QDerivatives(q=q, q_s=out["s"], q_t=out["t"], q_st=-q * cos_u, cos_u=cos_u)


def q_dot_from_determinants(bundle):
    """q_t read off the t-equation of the Lax pair: -2 conj(d_1 d_{N+1}) / S."""
    n = bundle.N
    d1, dn1 = bundle.d[..., 1], bundle.d[..., n + 1]
    return -2 * np.conj(d1 * dn1) / (np.abs(d1) ** 2 + np.abs(dn1) ** 2)


def curve_invariants(p, s, t):
    """Exact curvature |q| and torsion 1 + d/ds arg q of the soliton curve."""
    qd = q_derivatives(p, s, t)
    kappa = np.abs(qd.q)
    tau = 1 + np.imag(qd.q_s / qd.q)
    return kappa, tau


def coefficient_anchors(p, s0, t):
    """Integration constants of the (a, b, c) coefficient fields at s = s0.

    Returns (a(s0, t), int tau_t ds evaluated at s0).  For soliton curves
    a = -cos u and the tau_t integral is d/dt arg q.
    """
    qd = q_derivatives(p, np.full_like(np.asarray(t, float), s0), t)
    return -qd.cos_u, np.imag(qd.q_t / qd.q)


@dataclass(frozen=True)
class SineGordonCheck:
    holds: bool
    sigma: tuple | None


def is_sine_gordon(p, tol=SG_TOL):
    """Search for sigma with conj(alpha_j) = -alpha_sigma(j), conj(c_j) = -c_sigma(j)."""
    n = p.N
    if n > MAX_PERMUTATION_N:
        raise ValueError(f"permutation search refused for N = {n} > {MAX_PERMUTATION_N}")
    al, c = p.alpha, p.c
    for sigma in itertools.permutations(range(n)):
        if all(abs(al[j].conjugate() + al[sigma[j]]) <= tol
               and abs(c[j].conjugate() + c[sigma[j]]) <= tol for j in range(n)):
            return SineGordonCheck(True, tuple(k + 1 for k in sigma))
    return SineGordonCheck(False, None)


@dataclass(frozen=True)
class RealityReport:
    value: float | None
    skipped: bool = False
    reason: str = ""


def reality_check(p, s, t):
    """max |Im(d_k/d_0)| over the sampled points (literal reality)."""
    if not is_sine_gordon(p).holds:
        return RealityReport(None, True, "parameters do not satisfy the sine-Gordon condition")
    r = determinants(p, s, t).ratios()
    return RealityReport(float(np.abs(r.imag).max()))


def reality_phases(n):
    """Powers m_k with d_k/d_0 in i^m_k R under the sine-Gordon symmetry."""
    return np.array([n - j for j in range(n)] + [n - j - 1 for j in range(n)])


def phase_reality_check(p, s, t):
    """max |Im(i^-m_k d_k/d_0)|: reality after removing the i-power phases."""
    if not is_sine_gordon(p).holds:
        return RealityReport(None, True, "parameters do not satisfy the sine-Gordon condition")
    r = determinants(p, s, t).ratios() * (1j) ** (-reality_phases(p.N))
    return RealityReport(float(np.abs(r.imag).max()))


def wrap_angle(x):
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


def v_spread(v):
    """Largest deviation of v from its first sample, modulo 2 pi."""
    vals = np.ma.compressed(np.ma.asarray(v))
    if vals.size == 0:
        return 0.0
    return float(np.abs(wrap_angle(vals - vals[0])).max())
