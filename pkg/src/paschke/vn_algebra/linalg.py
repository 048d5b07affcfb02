"""Dense complex linear algebra used throughout the package.

Everything here works on plain ``numpy`` arrays. Hermitian inputs are
symmetrized before any eigendecomposition, and every rank decision is made
against :func:`paschke.settings.tau` scaled by the norm of the input.
"""
import numpy as np

from .. import settings


def hermitize(x):
    x = np.asarray(x, dtype=complex)
    return 0.5 * (x + x.conj().T)


def opnorm(x):
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    return float(np.linalg.norm(x, 2))


def eigh(x):
    """Eigendecomposition of the Hermitian part of ``x`` (ascending)."""
    w, v = np.linalg.eigh(hermitize(x))
    return w, v


def min_eigenvalue(x):
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(hermitize(x))[0])


def is_hermitian(x, tol=None):
    x = np.asarray(x, dtype=complex)
    if tol is None:
        tol = settings.tau(opnorm(x))
    return bool(np.abs(x - x.conj().T).max(initial=0.0) <= tol)


def is_psd(x, tol=None):
    x = np.asarray(x, dtype=complex)
    if x.size == 0:
        return True
    if tol is None:
        tol = settings.tau(opnorm(x))
    return is_hermitian(x, tol) and min_eigenvalue(x) >= -tol


def psd_sqrt(x):
    w, v = eigh(x)
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def pinv_sqrt(x, tol=None):
    """Pseudo-inverse square root; eigenvalues at or below ``tol`` map to 0."""
    w, v = eigh(x)
    if tol is None:
        tol = settings.tau(np.abs(w).max(initial=0.0))
    inv = np.zeros_like(w)
    keep = w > tol
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return (v * inv) @ v.conj().T


def support(x, tol=None):
    """Projection onto the eigenvectors of a Hermitian ``x`` with eigenvalue > tol."""
    w, v = eigh(x)
    if tol is None:
        tol = settings.tau(np.abs(w).max(initial=0.0))
    vk = v[:, w > tol]
    return vk @ vk.conj().T


def rank(x, tol=None):
    x = np.asarray(x)
    if x.size == 0:
        return 0
    s = np.linalg.svd(x, compute_uv=False)
    if tol is None:
        tol = settings.tau(s[0] if s.size else 0.0)
    return int((s > tol).sum())


def null_space(a, tol=None):
    """Orthonormal basis (columns) of the kernel of ``a``."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    if tol is None:
        tol = settings.tau(s[0] if s.size else 0.0)
    r = int((s > tol).sum())
    return vh[r:].conj().T


def canonical_isometry(m, r):
    """Orthonormal basis of the range of the projection ``m``, read off its columns in order.

    Column ``k`` is kept when its component orthogonal to the columns already
    kept has norm above ``1/sqrt(2n)``; a rank-``r`` projection always yields
    ``r`` columns this way, and ``m = 1`` gives the identity exactly.
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    q = np.zeros((n, 0), dtype=complex)
    if r == 0:
        return q
    floor_norm = 1.0 / np.sqrt(2.0 * n)
    for k in range(n):
        v = m[:, k] - q @ (q.conj().T @ m[:, k])
        v = v - q @ (q.conj().T @ v)
        nv = np.linalg.norm(v)
        if nv > floor_norm:
            q = np.column_stack([q, v / nv])
            if q.shape[1] == r:
                return q
    # only reachable when m is far from a projection of rank r
    w, u = eigh(m)
    return u[:, ::-1][:, :r]


def projection_isometry(p):
    """Canonical isometry whose range is the range of the projection ``p``."""
    p = hermitize(p)
    r = int((np.linalg.eigvalsh(p) > 0.5).sum()) if p.size else 0
    return canonical_isometry(p, r)


def cluster(values, gap):
    """Group sorted ``values`` into runs whose consecutive spacing is <= gap."""
    values = np.asarray(values)
    groups, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > gap:
            groups.append(np.arange(start, i))
            start = i
    return groups


def polar_isometry(x, tol=None):
    """Partial isometry ``u`` of the polar decomposition ``x = u |x|``."""
    x = np.asarray(x, dtype=complex)
    if x.size == 0:
        return x.copy()
    u, s, vh = np.linalg.svd(x)
    if tol is None:
        tol = settings.tau(s[0] if s.size else 0.0)
    r = int((s > tol).sum())
    return u[:, :r] @ vh[:r]


def random_unitary(n, rng):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_complex(shape, rng):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
