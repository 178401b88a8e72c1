"""Small dense complex matrices and the R^3 <-> su(2) dictionary.

Matrices are plain numpy arrays; every function returns a fresh array and
never mutates its inputs.  Leading axes are treated as batch axes so the
same calls work on a single matrix or on a whole (s, t) lattice of them.

The su(2) embedding is

    (p, q, r)  ->  1/2 [[ i r,     -p - i q],
                        [ p - i q, -i r    ]]

under which the matrix commutator is the cross product and -2 tr(ab) is
the Euclidean inner product.
"""

import numpy as np

# structural checks (anti-Hermitian, unitary, trace-free)
ALG_EPS = 1e-10


class DimensionError(ValueError):
    pass


class NotSu2Error(ValueError):
    pass


def _square(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2] or m.shape[-1] < 1:
        raise DimensionError(f"expected square matrix, got shape {m.shape}")
    return m


def det(m):
    """Determinant of a square matrix (or a stack of them).

    Sizes 1 and 2 use the closed form.  Larger sizes use LAPACK's LU
    factorization with partial pivoting.
    """
    m = _square(m)
    n = m.shape[-1]
    if n == 1:
        return m[..., 0, 0].copy()
    if n == 2:
        return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return np.linalg.det(m)


def det_cofactor(m):
    """Laplace expansion along the first row.  O(n!); test oracle only."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected square matrix, got shape {m.shape}")
    n = m.shape[0]
    if n == 1:
        return complex(m[0, 0])
    total = 0j
    for j in range(n):
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        total += (-1) ** j * m[0, j] * det_cofactor(minor)
    return total


def replace_column(m, k, v):
    """Copy of ``m`` with column ``k`` (1-based) replaced by ``v``."""
    m = np.asarray(m, dtype=complex)
    cols = m.shape[-1]
    if not 1 <= k <= cols:
        raise IndexError(f"column {k} out of range 1..{cols}")
    v = np.asarray(v, dtype=complex)
    if v.shape[-1] != m.shape[-2]:
        raise DimensionError(f"column length {v.shape[-1]} != rows {m.shape[-2]}")
    out = m.copy()
    out[..., :, k - 1] = v
    return out


def inv2(m):
    """Inverse of 2x2 matrices via the adjugate."""
    m = np.asarray(m, dtype=complex)
    d = det(m)
    adj = np.empty_like(m)
    adj[..., 0, 0] = m[..., 1, 1]
    adj[..., 1, 1] = m[..., 0, 0]
    adj[..., 0, 1] = -m[..., 0, 1]
    adj[..., 1, 0] = -m[..., 1, 0]
    return adj / d[..., None, None]


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def commutator(a, b):
    return a @ b - b @ a


def su2_embed(v):
    """Map vectors (..., 3) to su(2) matrices (..., 2, 2)."""
    v = np.asarray(v, dtype=float)
    p, q, r = v[..., 0], v[..., 1], v[..., 2]
    m = np.empty(v.shape[:-1] + (2, 2), dtype=complex)
    m[..., 0, 0] = 0.5j * r
    m[..., 0, 1] = 0.5 * (-p - 1j * q)
    m[..., 1, 0] = 0.5 * (p - 1j * q)
    m[..., 1, 1] = -0.5j * r
    return m


def su2_defect(m):
    """Max of the anti-Hermitian defect |m + m*| and the trace |tr m|."""
    m = np.asarray(m, dtype=complex)
    herm = np.abs(m + dagger(m)).max() if m.size else 0.0
    tr = np.abs(np.trace(m, axis1=-2, axis2=-1)).max() if m.size else 0.0
    return float(max(herm, tr))


def su2_project(m):
    """Trace-free anti-Hermitian part of ``m``."""
    m = np.asarray(m, dtype=complex)
    ah = 0.5 * (m - dagger(m))
    tr = np.trace(ah, axis1=-2, axis2=-1) / 2
    return ah - tr[..., None, None] * np.eye(2)


def su2_extract(m, tol=ALG_EPS):
    """Inverse of :func:`su2_embed`; refuses matrices outside su(2)."""
    m = np.asarray(m, dtype=complex)
    if m.shape[-2:] != (2, 2):
        raise DimensionError(f"expected 2x2 matrices, got shape {m.shape}")
    defect = su2_defect(m)
    scale = max(1.0, float(np.abs(m).max()) if m.size else 1.0)
    if defect > tol * scale:
        raise NotSu2Error(f"not in su(2): Hermitian/trace defect {defect:.3e}")
    m21 = m[..., 1, 0]
    return np.stack([2 * m21.real, -2 * m21.imag, 2 * m[..., 0, 0].imag], axis=-1)


def cross_via_bracket(a, b):
    return su2_extract(commutator(su2_embed(a), su2_embed(b)))


def inner_via_trace(a, b):
    prod = su2_embed(a) @ su2_embed(b)
    return (-2 * np.trace(prod, axis1=-2, axis2=-1)).real
