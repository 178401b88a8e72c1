"""Central finite differences on (s, t) lattices.

Arrays are lattice-first: axis 0 is s, axis 1 is t, anything after that
is a batch or component axis.  Each stencil trims only the axes it
differentiates, so ``d_s(f, h)`` has shape (ns - 2, nt, ...).
"""

import numpy as np


def _ax(f, axis, lo, hi):
    idx = [slice(None)] * f.ndim
    idx[axis] = slice(lo, f.shape[axis] + hi if hi <= 0 else hi)
    return f[tuple(idx)]


def d1(f, h, axis):
    f = np.asarray(f)
    return (_ax(f, axis, 2, 0) - _ax(f, axis, 0, -2)) / (2 * h)


def d_s(f, h):
    return d1(f, h, 0)


def d_t(f, h):
    return d1(f, h, 1)


def d_st(f, h):
    """4-point cross stencil for the mixed derivative."""
    f = np.asarray(f)
    pp, pm = f[2:, 2:], f[2:, :-2]
    mp, mm = f[:-2, 2:], f[:-2, :-2]
    return (pp - pm - mp + mm) / (4 * h * h)


def d_ss(f, h):
    f = np.asarray(f)
    return (f[2:] - 2 * f[1:-1] + f[:-2]) / (h * h)


def d_sss(f, h):
    f = np.asarray(f)
    return (f[4:] - 2 * f[3:-1] + 2 * f[1:-3] - f[:-4]) / (2 * h**3)


def crop(f, ks=0, kt=0):
    """Drop ``ks`` samples from both ends of axis 0 and ``kt`` from axis 1."""
    f = np.asarray(f)
    f = _ax(f, 0, ks, -ks) if ks else f
    return _ax(f, 1, kt, -kt) if kt else f


def wrap(x):
    """Map angles into [-pi, pi)."""
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


def unwrap_s(phase):
    """Cumulative 2 pi corrections along each s-line."""
    return np.unwrap(np.asarray(phase), axis=0)


def wrapped_d1(phase, h, axis):
    """Central difference of a principal-valued angle.

    The difference itself is wrapped, so branch jumps between stencil
    points cancel as long as the true increment over 2h is below pi.
    """
    phase = np.asarray(phase)
    return wrap(_ax(phase, axis, 2, 0) - _ax(phase, axis, 0, -2)) / (2 * h)


def wrapped_d_st(phase, h):
    phase = np.asarray(phase)
    up = wrap(phase[2:, 2:] - phase[:-2, 2:])
    dn = wrap(phase[2:, :-2] - phase[:-2, :-2])
    return (up - dn) / (4 * h * h)


def cumtrapz_s(f, h, anchor=0):
    """Trapezoid integral along axis 0, zero at index ``anchor``.

    ``anchor`` may be an integer array broadcasting against ``f[0]`` to
    anchor each line separately.
    """
    f = np.asarray(f)
    out = np.zeros_like(f)
    if f.shape[0] > 1:
        out[1:] = np.cumsum(0.5 * h * (f[1:] + f[:-1]), axis=0)
    anchor = np.asarray(anchor)
    if anchor.ndim == 0:
        return out - out[int(anchor)]
    idx = np.broadcast_to(anchor, f.shape[1:])[None]
    return out - np.take_along_axis(out, idx, axis=0)


def segment_mask(ok, anchor):
    """Connected run of True along axis 0 containing index ``anchor`` (per line)."""
    ok = np.asarray(ok, bool)
    n = ok.shape[0]
    idx = np.arange(n).reshape((n,) + (1,) * (ok.ndim - 1))
    anchor = np.broadcast_to(anchor, ok.shape[1:])[None]
    bad = ~ok
    # nearest bad index below and above the anchor
    below = np.where(bad & (idx < anchor), idx, -1).max(axis=0)
    above = np.where(bad & (idx > anchor), idx, n).min(axis=0)
    seg = (idx > below[None]) & (idx < above[None])
    return seg & np.take_along_axis(ok, anchor, axis=0)


def patch_lattice(s_centers, t_centers, h, k=1):
    """Sample points of (2k+1) x (2k+1) patches around each center.

    Returns S, T with shape (2k+1, 2k+1, ncs, nct); the leading two axes
    are the stencil offsets, so ``d_s``/``d_t``/``d_st`` apply directly and
    leave per-center values at offset index k - 1 after trimming.
    """
    off = h * np.arange(-k, k + 1)
    sc, tc = np.meshgrid(np.asarray(s_centers, float), np.asarray(t_centers, float), indexing="ij")
    S = sc[None, None] + off[:, None, None, None]
    T = tc[None, None] + off[None, :, None, None]
    S, T = np.broadcast_arrays(S, T)
    return S.copy(), T.copy()


def line_lattice(s_start, s_stop, t_centers, h, kt=1):
    """s-lines at step h through each t-center, with 2kt+1 neighbouring t-lines.

    Shape (ns, 2kt+1, nct).  Used for checks that integrate along s.
    """
    ns = int(round((s_stop - s_start) / h)) + 1
    s = s_start + h * np.arange(ns)
    t_off = h * np.arange(-kt, kt + 1)
    tc = np.asarray(t_centers, float)
    S = np.broadcast_to(s[:, None, None], (ns, 2 * kt + 1, tc.size))
    T = np.broadcast_to(t_off[None, :, None] + tc[None, None, :], S.shape)
    return np.array(S), np.array(T)
