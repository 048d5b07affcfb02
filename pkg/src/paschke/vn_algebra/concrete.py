"""Concrete unital *-subalgebras of ``M_d``, commutants and Wedderburn data.

A :class:`ConcreteStarAlgebra` is given either by a spanning set of ``d x d``
matrices or *spatially*, by a unitary ``U`` and integers ``(n_k, m_k)`` with

    S = U ( (+)_k  M_{n_k} (x) 1_{m_k} ) U*.

The spatial form is what :func:`wedderburn` produces, and it lets commutants
of large representations be handled without ever materialising a dense basis.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .. import settings
from ..errors import NumericalDegeneracyError, StructuralError
from . import linalg
from .algebra import Element, FdVnAlgebra

# Above this ambient dimension the commutant is read off a Wedderburn
# decomposition instead of solving d^2 commutation constraints.
NULLSPACE_MAX_DIM = 24


@dataclass(frozen=True)
class Spatial:
    unitary: np.ndarray
    factor_dims: tuple
    multiplicities: tuple

    @property
    def offsets(self):
        sizes = [n * m for n, m in zip(self.factor_dims, self.multiplicities)]
        return tuple(np.cumsum([0] + sizes[:-1]).tolist())

    def columns(self, k):
        o = self.offsets[k]
        return self.unitary[:, o:o + self.factor_dims[k] * self.multiplicities[k]]


class ConcreteStarAlgebra:
    def __init__(self, basis=None, ambient_dim=None, spatial=None):
        if spatial is not None:
            self.spatial = spatial
            self.ambient_dim = spatial.unitary.shape[0]
            self._basis = None
            return
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim == 2:
            basis = basis[None]
        if ambient_dim is None:
            ambient_dim = basis.shape[-1]
        if basis.shape[1:] != (ambient_dim, ambient_dim):
            raise StructuralError("basis matrices must be square of the ambient dimension")
        self.ambient_dim = ambient_dim
        self.spatial = None
        self._basis = _orthonormal_span(basis)

    def __repr__(self):
        return f"ConcreteStarAlgebra(d={self.ambient_dim}, dim={self.dim})"

    @classmethod
    def full(cls, d):
        return cls(spatial=Spatial(np.eye(d, dtype=complex), (d,), (1,)))

    @classmethod
    def scalars(cls, d):
        return cls(spatial=Spatial(np.eye(d, dtype=complex), (1,), (d,)))

    @classmethod
    def generated_by(cls, generators, d=None):
        """The unital *-algebra generated by ``generators`` (closure by products)."""
        gens = [np.asarray(g, dtype=complex) for g in generators]
        d = gens[0].shape[0] if d is None else d
        span = _orthonormal_span(np.array([np.eye(d)] + gens + [g.conj().T for g in gens]))
        while True:
            prods = np.einsum("aij,bjk->abik", span, span).reshape(-1, d, d)
            new = _orthonormal_span(np.concatenate([span, prods]))
            if len(new) == len(span):
                return cls(new, d)
            span = new

    @property
    def dim(self):
        if self.spatial is not None:
            return sum(n * n for n in self.spatial.factor_dims)
        return len(self._basis)

    @property
    def basis(self):
        """Frobenius-orthonormal basis, shape ``(dim, d, d)``."""
        if self._basis is None:
            mats = []
            for k, (n, m) in enumerate(zip(self.spatial.factor_dims, self.spatial.multiplicities)):
                cols = self.spatial.columns(k).reshape(-1, n, m)
                mats.append(np.einsum("xia,yja->ijxy", cols, cols.conj()).reshape(n * n, self.ambient_dim,
                                                                                   self.ambient_dim) / np.sqrt(m))
            self._basis = np.concatenate(mats)
        return self._basis

    def project(self, t):
        """Frobenius-orthogonal projection of ``t`` (batched over leading axes) onto the span."""
        t = np.asarray(t, dtype=complex)
        if self.spatial is not None:
            wd = WedderburnData(self, self.spatial)
            return wd.from_abstract_vecs(wd.to_abstract_vecs(t))
        b = self._basis.reshape(len(self._basis), -1)
        flat = t.reshape(t.shape[:-2] + (-1,))
        return ((flat @ b.conj().T) @ b).reshape(t.shape)

    def contains(self, t, tol=None):
        t = np.asarray(t, dtype=complex)
        if tol is None:
            tol = settings.tau(linalg.opnorm(t))
        return linalg.opnorm(t - self.project(t)) <= tol

    def same_span(self, other, tol=None):
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        return all(other.contains(b, tol) for b in self.basis)

    def validate(self):
        """Check unit, *-closure and product closure on all basis pairs."""
        d = self.ambient_dim
        if not self.contains(np.eye(d)):
            raise StructuralError("span does not contain the identity")
        b = self.basis
        if not all(self.contains(x.conj().T) for x in b):
            raise StructuralError("span is not closed under adjoints")
        prods = np.einsum("aij,bjk->abik", b, b).reshape(-1, d, d)
        if not all(self.contains(p) for p in prods):
            raise StructuralError("span is not closed under products")
        return True


def _orthonormal_span(mats):
    mats = np.asarray(mats, dtype=complex)
    flat = mats.reshape(len(mats), -1)
    u, s, vh = np.linalg.svd(flat, full_matrices=False)
    r = int((s > settings.tau(s[0] if s.size else 0.0)).sum())
    return vh[:r].reshape((r,) + mats.shape[1:])


class WedderburnData:
    """Structure of a concrete *-algebra: ``source = U ((+) M_{n_k} (x) 1_{m_k}) U*``.

    Columns of ``U`` are ordered ``(k, i, a)`` with ``i`` the matrix index of
    factor ``k`` and ``a`` the multiplicity index, so the matrix units are
    ``e^(k)_ij = sum_a u_{k,i,a} u_{k,j,a}^*``.
    """

    def __init__(self, source, spatial, seed=None):
        self.source = source
        self.spatial = spatial
        self.seed = seed
        self.algebra = FdVnAlgebra(spatial.factor_dims)

    @property
    def factor_dims(self):
        return self.spatial.factor_dims

    @property
    def multiplicities(self):
        return self.spatial.multiplicities

    @cached_property
    def central_projections(self):
        out = []
        for k in range(len(self.factor_dims)):
            c = self.spatial.columns(k)
            out.append(c @ c.conj().T)
        return out

    def matrix_units(self, k):
        n, m = self.factor_dims[k], self.multiplicities[k]
        cols = self.spatial.columns(k).reshape(-1, n, m)
        return np.einsum("xia,yja->ijxy", cols, cols.conj())

    def to_abstract_vecs(self, t):
        """Abstract vec coordinates of concrete operators ``t`` (shape ``(..., d, d)``)."""
        t = np.asarray(t, dtype=complex)
        u = self.spatial.unitary
        tt = u.conj().T @ t @ u
        parts = []
        for o, n, m in zip(self.spatial.offsets, self.factor_dims, self.multiplicities):
            slab = tt[..., o:o + n * m, o:o + n * m].reshape(t.shape[:-2] + (n, m, n, m))
            parts.append(np.einsum("...iaja->...ij", slab).reshape(t.shape[:-2] + (n * n,)) / m)
        return np.concatenate(parts, axis=-1)

    def from_abstract_vecs(self, v):
        v = np.asarray(v, dtype=complex)
        d = self.spatial.unitary.shape[0]
        out = np.zeros(v.shape[:-1] + (d, d), dtype=complex)
        for o, vo, n, m in zip(self.spatial.offsets, self.algebra.offsets, self.factor_dims, self.multiplicities):
            x = v[..., vo:vo + n * n].reshape(v.shape[:-1] + (n, n))
            out[..., o:o + n * m, o:o + n * m] = np.einsum("...ij,ab->...iajb", x, np.eye(m)).reshape(
                v.shape[:-1] + (n * m, n * m))
        u = self.spatial.unitary
        return u @ out @ u.conj().T

    def to_abstract(self, t):
        return self.algebra.unvec(self.to_abstract_vecs(t))

    def from_abstract(self, x):
        if x.algebra != self.algebra:
            raise StructuralError("element is not in the abstract algebra of this decomposition")
        return self.from_abstract_vecs(x.vec())

    def iso_to_abstract(self, t):
        return self.to_abstract(t)

    def iso_from_abstract(self, x):
        return self.from_abstract(x)


def commutant(s):
    """The commutant ``S'`` of a concrete *-algebra inside ``M_d``."""
    d = s.ambient_dim
    if s.spatial is None and d <= NULLSPACE_MAX_DIM:
        return _commutant_nullspace(s)
    sp = s.spatial if s.spatial is not None else _recover(s, np.random.default_rng(0))
    cols = []
    for k, (n, m) in enumerate(zip(sp.factor_dims, sp.multiplicities)):
        cols.append(sp.columns(k).reshape(d, n, m).transpose(0, 2, 1).reshape(d, n * m))
    return ConcreteStarAlgebra(spatial=Spatial(np.concatenate(cols, axis=1), sp.multiplicities, sp.factor_dims))


def _commutant_nullspace(s):
    d = s.ambient_dim
    eye = np.eye(d)
    rows = [np.kron(eye, b.T) - np.kron(b, eye) for b in s.basis]
    ns = linalg.null_space(np.concatenate(rows))
    return ConcreteStarAlgebra(ns.T.reshape(-1, d, d), d)


def wedderburn(s, seed=0):
    """Minimal central projections, matrix units and the abstract isomorphism of ``s``.

    The output is canonical whenever the fixed reference elements used to
    choose matrix units are non-degenerate; otherwise seeded random elements
    are used. Blocks are sorted by factor dimension, ties by the rounded
    diagonal of the central projection (descending lexicographic).
    """
    rng = np.random.default_rng(seed)
    sp = s.spatial if s.spatial is not None else _recover(s, rng)
    sp = _canonicalize(sp, rng)
    return WedderburnData(s, sp, seed)


def _recover(s, rng):
    """Randomized recovery of a spatial form from an explicit basis."""
    d = s.ambient_dim
    basis = s.basis
    nb = len(basis)
    gap = settings.current().gap
    comm = np.einsum("kij,ljm->klim", basis, basis) - np.einsum("lij,kjm->klim", basis, basis)
    a = comm.transpose(1, 2, 3, 0).reshape(nb * d * d, nb)
    zc = linalg.null_space(a, settings.tau(max(1.0, linalg.opnorm(a))))
    center = np.einsum("kz,kij->zij", zc, basis)
    nz = center.shape[0]
    # null vectors carry arbitrary phases, so sample over the Hermitian parts of z and iz
    herm = [linalg.hermitize(z) for z in center] + [linalg.hermitize(1j * z) for z in center]

    for _ in range(settings.current().max_attempts):
        h = sum(c * z for c, z in zip(rng.standard_normal(len(herm)), herm))
        h = h / linalg.opnorm(h)
        w, v = linalg.eigh(h)
        groups = linalg.cluster(w, gap)
        if len(groups) != nz:
            continue
        cols, dims, mults, ok = [], [], [], True
        for g in groups:
            vz = v[:, g]
            z = vz @ vz.conj().T
            fac = _orthonormal_span(z @ basis @ z)
            n = int(round(np.sqrt(len(fac))))
            if n * n != len(fac) or len(g) % n:
                ok = False
                break
            m = len(g) // n
            found = _factor_units(fac, vz, n, m, rng, gap)
            if found is None:
                ok = False
                break
            cols.append(found)
            dims.append(n)
            mults.append(m)
        if not ok:
            continue
        u = np.concatenate(cols, axis=1)
        if linalg.opnorm(u.conj().T @ u - np.eye(d)) > 1e-8:
            continue
        return Spatial(u, tuple(dims), tuple(mults))
    raise NumericalDegeneracyError("Wedderburn recovery kept hitting degenerate samples",
                                   attempts=settings.current().max_attempts)


def _factor_units(fac, vz, n, m, rng, gap):
    """Columns ``u_{i,a} = e_i1 w_a`` for one factor, or None if the sample degenerates."""
    x = linalg.hermitize(np.einsum("k,kij->ij", linalg.random_complex(len(fac), rng), fac))
    xr = vz.conj().T @ x @ vz
    w, y = linalg.eigh(xr / max(linalg.opnorm(xr), 1e-300))
    groups = linalg.cluster(w, gap)
    if len(groups) != n or any(len(g) != m for g in groups):
        return None
    diag = [vz @ y[:, g] for g in groups]
    e11 = diag[0] @ diag[0].conj().T
    yrand = np.einsum("k,kij->ij", linalg.random_complex(len(fac), rng), fac)
    units = [e11]
    for di in diag[1:]:
        wi = (di @ di.conj().T) @ yrand @ e11
        ei1 = linalg.polar_isometry(wi, settings.tau(1.0) * 1e3)
        if linalg.opnorm(ei1.conj().T @ ei1 - e11) > 1e-8:
            return None
        units.append(ei1)
    w1 = diag[0]
    cols = np.stack([e @ w1 for e in units], axis=1)  # (d, n, m)
    return cols.reshape(len(vz), n * m)


def _canonicalize(sp, rng):
    d = sp.unitary.shape[0]
    gap = settings.current().gap
    ref_diag = np.diag(np.arange(1, d + 1, dtype=complex))
    ref_phase = np.ones((d, d), dtype=complex)
    blocks = []
    for k, (n, m) in enumerate(zip(sp.factor_dims, sp.multiplicities)):
        cols = sp.columns(k)
        x = _abstract(cols, ref_diag, n, m)
        y = _abstract(cols, ref_phase, n, m)
        for _ in range(settings.current().max_attempts + 1):
            basis = _diagonalizing_unitary(x, gap)
            if basis is not None:
                yy = basis.conj().T @ y @ basis
                col0 = yy[:, 0]
                if n == 1 or np.all(np.abs(col0[1:]) > gap * max(1.0, linalg.opnorm(yy))):
                    theta = np.ones(n, dtype=complex)
                    theta[1:] = col0[1:] / np.abs(col0[1:])
                    basis = basis * theta
                    break
            x = linalg.hermitize(linalg.random_complex((n, n), rng))
            y = linalg.random_complex((n, n), rng)
        else:
            raise NumericalDegeneracyError("could not fix canonical matrix units", factor=k)
        c = cols.reshape(d, n, m)
        c = np.einsum("xja,ji->xia", c, basis).reshape(d, n * m)
        z = c @ c.conj().T
        key = (n, tuple(-np.round(np.diag(z).real, 6)))
        blocks.append((key, c, n, m))
    blocks.sort(key=lambda b: b[0])
    return Spatial(np.concatenate([b[1] for b in blocks], axis=1),
                   tuple(b[2] for b in blocks), tuple(b[3] for b in blocks))


def _abstract(cols, t, n, m):
    d = cols.shape[0]
    slab = (cols.conj().T @ t @ cols).reshape(n, m, n, m)
    return np.einsum("iaja->ij", slab) / m


def _diagonalizing_unitary(x, gap):
    n = len(x)
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    scale = max(linalg.opnorm(x), 1e-300)
    w, v = linalg.eigh(x / scale)
    if len(linalg.cluster(w, gap)) != n:
        return None
    return v


def algebra_of(elements):
    """Concrete algebra spanned by a list of ``d x d`` matrices (must be *-closed and unital)."""
    return ConcreteStarAlgebra(np.asarray(elements))


def abstract_wedderburn(fd):
    """Wedderburn data of an FdVnAlgebra embedded block-diagonally in ``M_{sum n}``."""
    d = fd.ambient_dim
    s = ConcreteStarAlgebra(spatial=Spatial(np.eye(d, dtype=complex), fd.blocks, (1,) * len(fd.blocks)))
    return WedderburnData(s, s.spatial)


__all__ = [
    "ConcreteStarAlgebra", "Spatial", "WedderburnData", "commutant", "wedderburn",
    "algebra_of", "abstract_wedderburn", "Element",
]
