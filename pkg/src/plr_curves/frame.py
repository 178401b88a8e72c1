"""Normalized frames, Lax matrices, gauges and the 4x4 frame reconstruction."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import algebra, date, fd

IM_TOL = 1e-6


class ConsistencyError(ArithmeticError):
    pass


class SingularPointError(ArithmeticError):
    pass


class PathDependenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FrameSample:
    s: np.ndarray
    t: np.ndarray
    lam: float
    Psi: np.ndarray
    F: np.ndarray

    @property
    def det_psi(self):
        return algebra.det(self.Psi)


def _check_lambda(lam):
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"spectral parameter must be positive, got {lam}")
    return lam


def assemble_psi(polys, e):
    """[[f e, -conj(g) e], [g conj(e), conj(f e)]] at a real lam already applied."""
    f, g = polys
    psi = np.empty(np.shape(f) + (2, 2), dtype=complex)
    psi[..., 0, 0] = f * e
    psi[..., 0, 1] = -np.conj(g) * e
    psi[..., 1, 0] = g * np.conj(e)
    psi[..., 1, 1] = np.conj(f * e)
    return psi


def wave_function(p, s, t, lam=1.0, bundle=None):
    """Wave function Psi and its SU(2) normalization F = Psi / sqrt(det Psi)."""
    lam = _check_lambda(lam)
    if bundle is None:
        bundle = date.determinants(p, s, t)
    pp = date.fg_polynomials(bundle)
    f, g = pp.f(lam), pp.g(lam)
    e = date.phase_e(bundle.s, bundle.t, lam)
    psi = assemble_psi((f, g), e)
    dpsi = algebra.det(psi)
    scale = np.abs(f) ** 2 + np.abs(g) ** 2
    if np.any(np.abs(dpsi.imag) > 1e-10 * scale) or np.any(dpsi.real <= 0):
        raise ConsistencyError("det Psi is not real and positive")
    F = psi / np.sqrt(dpsi.real)[..., None, None]
    return FrameSample(bundle.s, bundle.t, lam, psi, F)


@dataclass(frozen=True)
class LaxPairSample:
    L: np.ndarray
    M: np.ndarray
    lam: float
    source: str = "analytic"
    notes: tuple = field(default=())


def lax_L(q, lam=1.0):
    q = np.asarray(q, dtype=complex)
    L = np.empty(q.shape + (2, 2), dtype=complex)
    L[..., 0, 0] = 0.5j * lam
    L[..., 1, 1] = -0.5j * lam
    L[..., 0, 1] = 0.5 * q
    L[..., 1, 0] = -0.5 * np.conj(q)
    return L


def lax_matrices(q, qdot, qdotprime, lam=1.0, source="analytic", im_tol=IM_TOL):
    """L^lam and M^lam of the q-form Lax pair."""
    lam = _check_lambda(lam)
    q = np.asarray(q, dtype=complex)
    qdot = np.asarray(qdot, dtype=complex)
    if np.any(q == 0):
        raise SingularPointError("q vanishes; M is undefined there")
    ratio = np.asarray(qdotprime, dtype=complex) / q
    notes = []
    im = float(np.abs(ratio.imag).max()) if ratio.size else 0.0
    if im > im_tol:
        msg = f"Im(q_st / q) = {im:.3e} exceeds {im_tol:g}"
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    re = ratio.real
    M = np.empty(q.shape + (2, 2), dtype=complex)
    k = 0.5j / lam
    M[..., 0, 0] = -k * re
    M[..., 1, 1] = k * re
    M[..., 0, 1] = -k * qdot
    M[..., 1, 0] = -k * np.conj(qdot)
    return LaxPairSample(lax_L(q, lam), M, lam, source, tuple(notes))


def date_lax_rhs(p, s, t, lam=1.0, bundle=None):
    """Right-hand sides of Psi^-1 Psi_s and Psi^-1 Psi_t from the determinants.

    The s-matrix carries i conj(d_2N/d_0) off the diagonal without a factor
    1/2; this is what the wave function actually satisfies.
    """
    lam = _check_lambda(lam)
    if bundle is None:
        bundle = date.determinants(p, s, t)
    n = bundle.N
    d = bundle.d
    r = d[..., 2 * n] / d[..., 0]
    Us = np.empty(r.shape + (2, 2), dtype=complex)
    Us[..., 0, 0] = 0.5j * lam
    Us[..., 1, 1] = -0.5j * lam
    Us[..., 0, 1] = 1j * np.conj(r)
    Us[..., 1, 0] = 1j * r
    n1 = np.abs(d[..., 1]) ** 2
    n2 = np.abs(d[..., n + 1]) ** 2
    prod = d[..., 1] * d[..., n + 1]
    k = 0.5j / (lam * (n1 + n2))
    Ut = np.empty_like(Us)
    Ut[..., 0, 0] = k * (n1 - n2)
    Ut[..., 1, 1] = -k * (n1 - n2)
    Ut[..., 0, 1] = 2 * k * np.conj(prod)
    Ut[..., 1, 0] = 2 * k * prod
    return Us, Ut


def lax_residual(p, lam, s_centers, t_centers, h):
    """Max Frobenius mismatch of Psi^-1 dPsi against the determinant forms."""
    S, T = fd.patch_lattice(s_centers, t_centers, h)
    psi = wave_function(p, S, T, lam).Psi
    centre = psi[1, 1]
    inv = algebra.inv2(centre)
    dS = fd.d_s(psi, h)[0, 1]
    dT = fd.d_t(psi, h)[1, 0]
    Us, Ut = date_lax_rhs(p, S[1, 1], T[1, 1], lam)
    rs = np.linalg.norm(inv @ dS - Us, axis=(-2, -1))
    rt = np.linalg.norm(inv @ dT - Ut, axis=(-2, -1))
    return {"maxS": float(rs.max()), "maxT": float(rt.max())}


def zero_curvature(L, M, h):
    """[L, M] + M_s - L_t on the interior of a lattice of matrices."""
    Lc = fd.crop(L, 1, 1)
    Mc = fd.crop(M, 1, 1)
    return algebra.commutator(Lc, Mc) + fd.crop(fd.d_s(M, h), 0, 1) - fd.crop(fd.d_t(L, h), 1, 0)


def zero_curvature_residual(L, M, h):
    r = zero_curvature(L, M, h)
    return float(np.linalg.norm(r, axis=(-2, -1)).max())


def gauge_matrix(theta):
    """diag(i exp(-i theta/2), -i exp(i theta/2))."""
    theta = np.asarray(theta, dtype=float)
    D = np.zeros(theta.shape + (2, 2), dtype=complex)
    D[..., 0, 0] = 1j * np.exp(-0.5j * theta)
    D[..., 1, 1] = -1j * np.exp(0.5j * theta)
    return D


def gauge_transform(L, M, D, h):
    """D^-1 L D + D^-1 D_s and D^-1 M D + D^-1 D_t on the lattice interior."""
    D = np.asarray(D, dtype=complex)
    off = np.abs(D[..., 0, 1]).max() + np.abs(D[..., 1, 0]).max()
    if off > algebra.ALG_EPS or np.abs(np.abs(D[..., 0, 0]) - 1).max() > algebra.ALG_EPS \
            or np.abs(np.abs(D[..., 1, 1]) - 1).max() > algebra.ALG_EPS:
        raise ValueError("gauge must be diagonal unitary")
    Di = algebra.dagger(D)
    Dc, Dic = fd.crop(D, 1, 1), fd.crop(Di, 1, 1)
    Lt = Dic @ fd.crop(L, 1, 1) @ Dc + Dic @ fd.crop(fd.d_s(D, h), 0, 1)
    Mt = Dic @ fd.crop(M, 1, 1) @ Dc + Dic @ fd.crop(fd.d_t(D, h), 1, 0)
    return Lt, Mt


def general_frame_matrices(ell, kappa, tau, m21, m31, m31_prime):
    """Frenet-frame matrices in su(2) for a general curve evolution.

    ``m21``, ``m31`` are the (2,1) and (3,1) entries of the so(3) evolution
    matrix and ``m31_prime`` the s-derivative of m31.
    """
    ell, kappa, tau = (np.asarray(x, dtype=float) for x in (ell, kappa, tau))
    m21, m31, m31_prime = (np.asarray(x, dtype=float) for x in (m21, m31, m31_prime))
    if np.any(kappa <= 0):
        raise ValueError("curvature must be positive")
    shape = np.broadcast(ell, kappa, tau, m21, m31, m31_prime).shape
    L = np.empty(shape + (2, 2), dtype=complex)
    L[..., 0, 0] = 0.5j * ell * tau
    L[..., 1, 1] = -0.5j * ell * tau
    L[..., 0, 1] = -0.5 * ell * kappa
    L[..., 1, 0] = 0.5 * ell * kappa
    diag = (m31_prime / ell + m21 * tau) / kappa
    M = np.empty(shape + (2, 2), dtype=complex)
    M[..., 0, 0] = 0.5j * diag
    M[..., 1, 1] = -0.5j * diag
    M[..., 0, 1] = 0.5 * (-m21 - 1j * m31)
    M[..., 1, 0] = 0.5 * (m21 - 1j * m31)
    return L, M


def explicit_m(ell, kappa, tau, a, b, c, b_prime, c_prime):
    """(m21, m31) of the so(3) evolution matrix."""
    m21 = b_prime / ell + a * kappa - c * tau
    m31 = c_prime / ell + b * tau
    return m21, m31


def _generators(a, b, c, kappa, tau, ell, h):
    """4x4 generators on the lattice interior (two samples trimmed along s)."""
    b_s = fd.d_s(b, h)
    c_s = fd.d_s(c, h)
    inner = (slice(1, -1),)
    m21, m31 = explicit_m(ell[inner], kappa[inner], tau[inner], a[inner], b[inner], c[inner], b_s, c_s)
    m31_s = fd.d_s(m31, h)
    m21, m31 = m21[1:-1], m31[1:-1]
    k2 = (slice(2, -2),)
    ell2, kap2, tau2 = ell[k2], kappa[k2], tau[k2]
    m32 = m31_s / (ell2 * kap2) + m21 * tau2 / kap2
    shape = m21.shape
    Lt = np.zeros(shape + (4, 4))
    Lt[..., 1, 0] = ell2 * kap2
    Lt[..., 0, 1] = -ell2 * kap2
    Lt[..., 2, 1] = ell2 * tau2
    Lt[..., 1, 2] = -ell2 * tau2
    Lt[..., 0, 3] = ell2
    Mt = np.zeros(shape + (4, 4))
    Mt[..., 1, 0], Mt[..., 0, 1] = m21, -m21
    Mt[..., 2, 0], Mt[..., 0, 2] = m31, -m31
    Mt[..., 2, 1], Mt[..., 1, 2] = m32, -m32
    Mt[..., 0, 3] = a[k2]
    Mt[..., 1, 3] = b[k2]
    Mt[..., 2, 3] = c[k2]
    return Lt, Mt


def _rk4_line(F0, G, h):
    """Integrate F' = F G along axis 0 of G, step 2h with midpoints on nodes.

    Returns F at even nodes.
    """
    n = (G.shape[0] - 1) // 2
    out = np.empty((n + 1,) + F0.shape)
    out[0] = F = F0
    H = 2 * h
    for j in range(n):
        g0, g1, g2 = G[2 * j], G[2 * j + 1], G[2 * j + 2]
        k1 = F @ g0
        k2 = (F + 0.5 * H * k1) @ g1
        k3 = (F + 0.5 * H * k2) @ g1
        k4 = (F + H * k3) @ g2
        F = F + H / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[j + 1] = F
    return out


@dataclass(frozen=True)
class Reconstruction:
    s: np.ndarray
    t: np.ndarray
    frames: np.ndarray  # (ns, nt, 4, 4)
    path_gap: float

    @property
    def points(self):
        return self.frames[..., :3, 3]


def reconstruct_from_data(a, b, c, kappa, tau, ell, h, s=None, t=None, path_tol=None):
    """Rebuild the curve family from its coefficient fields.

    Fields are sampled on a common lattice of spacing ``h``.  Two samples
    are lost at each s-end to the s-derivatives inside M; the remaining
    lattice must have an odd number of nodes in each direction.  The frame
    starts at the identity, is carried along t at the first s-node, then
    along s for every t.  The opposite order is run to the far corner and
    the difference reported as ``path_gap``; by default it may not exceed
    10 (2h)^2, the order of the discretization error.
    """
    a, b, c, kappa, tau, ell = (np.asarray(x, dtype=float) for x in (a, b, c, kappa, tau, ell))
    if np.any(kappa <= 0):
        raise ValueError("curvature must be positive")
    Lt, Mt = _generators(a, b, c, kappa, tau, ell, h)
    ns, nt = Lt.shape[:2]
    if ns % 2 == 0 or nt % 2 == 0 or ns < 3 or nt < 3:
        raise ValueError(f"need odd node counts >= 3 after trimming, got {ns} x {nt}")
    I = np.eye(4)
    seed = _rk4_line(I, Mt[0], h)  # along t at the first s node
    frames = _rk4_line(seed, Lt[:, ::2], h)  # along s, all t lines at once
    alt = _rk4_line(I, Lt[:, 0], h)[-1]
    alt = _rk4_line(alt, Mt[-1], h)[-1]
    gap = float(np.abs(alt - frames[-1, -1]).max())
    if path_tol is None:
        path_tol = 10 * (2 * h) ** 2
    if gap > path_tol:
        raise PathDependenceError(f"s-then-t and t-then-s frames differ by {gap:.3e}")
    if s is None:
        s = h * np.arange(ns + 4)
    if t is None:
        t = h * np.arange(nt)
    s = np.asarray(s)[2:-2][::2]
    t = np.asarray(t)[::2]
    return Reconstruction(s, t, frames, gap)
