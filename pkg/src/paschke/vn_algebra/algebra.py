"""Finite-dimensional von Neumann algebras ``M_{n_1} (+) ... (+) M_{n_k}``.

An element is stored block by block. For bulk linear algebra the package
uses *vec coordinates*: the blocks flattened row-major and concatenated, so
the matrix unit ``(i, r, s)`` of block ``i`` sits at ``offset[i] + r*n_i + s``.
"""
from dataclasses import dataclass
from functools import cached_property
from numbers import Number

import numpy as np

from .. import settings
from ..errors import DomainError, StructuralError
from . import linalg


@dataclass(frozen=True)
class FdVnAlgebra:
    blocks: tuple

    def __init__(self, blocks):
        blocks = tuple(int(n) for n in blocks)
        if not blocks or any(n < 1 for n in blocks):
            raise StructuralError(f"block dimensions must be positive, got {blocks}")
        object.__setattr__(self, "blocks", blocks)

    def __repr__(self):
        return "FdVnAlgebra(" + " (+) ".join(f"M{n}" for n in self.blocks) + ")"

    @cached_property
    def dim(self):
        return sum(n * n for n in self.blocks)

    @cached_property
    def ambient_dim(self):
        return sum(self.blocks)

    @cached_property
    def offsets(self):
        return tuple(np.cumsum((0,) + tuple(n * n for n in self.blocks[:-1])).tolist())

    @cached_property
    def ambient_offsets(self):
        return tuple(np.cumsum((0,) + self.blocks[:-1]).tolist())

    @cached_property
    def units(self):
        """Matrix-unit labels ``(block, row, col)`` in vec order."""
        return tuple((i, r, s) for i, n in enumerate(self.blocks) for r in range(n) for s in range(n))

    @cached_property
    def unit_ambient_index(self):
        """(rows, cols) of every matrix unit inside the ambient block-diagonal matrix."""
        rows = np.array([self.ambient_offsets[i] + r for i, r, _ in self.units])
        cols = np.array([self.ambient_offsets[i] + s for i, _, s in self.units])
        return rows, cols

    @cached_property
    def unit_block(self):
        return np.array([i for i, _, _ in self.units])

    # construction ------------------------------------------------------
    def element(self, blocks):
        return Element(self, blocks)

    def zero(self):
        return Element(self, [np.zeros((n, n), dtype=complex) for n in self.blocks])

    def one(self):
        return Element(self, [np.eye(n, dtype=complex) for n in self.blocks])

    def unit(self, i, r, s):
        out = [np.zeros((n, n), dtype=complex) for n in self.blocks]
        out[i][r, s] = 1.0
        return Element(self, out)

    def basis(self):
        return [self.unit(*u) for u in self.units]

    def unvec(self, v):
        v = np.asarray(v, dtype=complex)
        if v.shape != (self.dim,):
            raise StructuralError(f"vector of length {self.dim} expected, got {v.shape}")
        return Element(self, [v[o:o + n * n].reshape(n, n) for o, n in zip(self.offsets, self.blocks)],
                       _trusted=True)

    def from_ambient(self, m):
        m = np.asarray(m, dtype=complex)
        return Element(self, [m[o:o + n, o:o + n] for o, n in zip(self.ambient_offsets, self.blocks)])

    def vec_to_ambient(self, v):
        """Batch version of ``unvec(v).ambient()``; ``v`` has shape (..., dim)."""
        v = np.asarray(v, dtype=complex)
        out = np.zeros(v.shape[:-1] + (self.ambient_dim, self.ambient_dim), dtype=complex)
        rows, cols = self.unit_ambient_index
        out[..., rows, cols] = v
        return out

    def ambient_to_vec(self, m):
        rows, cols = self.unit_ambient_index
        return np.asarray(m)[..., rows, cols]

    def central_projection(self, mask):
        return Element(self, [np.eye(n, dtype=complex) * float(bool(b)) for n, b in zip(self.blocks, mask)])

    def left_mult_matrix(self, a):
        """Matrix of ``x -> a x`` in vec coordinates."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for o, n, ab in zip(self.offsets, self.blocks, a.data):
            out[o:o + n * n, o:o + n * n] = np.kron(ab, np.eye(n))
        return out

    def right_mult_matrix(self, b):
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for o, n, bb in zip(self.offsets, self.blocks, b.data):
            out[o:o + n * n, o:o + n * n] = np.kron(np.eye(n), bb.T)
        return out

    def adjoint_permutation(self):
        """Index permutation realising ``vec(x*) = conj(vec(x)[perm])``."""
        perm = np.empty(self.dim, dtype=int)
        for o, n in zip(self.offsets, self.blocks):
            idx = np.arange(n * n).reshape(n, n)
            perm[o:o + n * n] = o + idx.T.ravel()
        return perm

    # random elements (seeded by the caller) ---------------------------
    def random(self, rng):
        return Element(self, [linalg.random_complex((n, n), rng) for n in self.blocks])

    def random_hermitian(self, rng):
        return Element(self, [linalg.hermitize(linalg.random_complex((n, n), rng)) for n in self.blocks])

    def random_effect(self, rng):
        out = []
        for n in self.blocks:
            u = linalg.random_unitary(n, rng)
            out.append((u * rng.uniform(0, 1, n)) @ u.conj().T)
        return Element(self, [linalg.hermitize(b) for b in out])

    def random_projection(self, rng, ranks=None):
        out = []
        for i, n in enumerate(self.blocks):
            r = rng.integers(0, n + 1) if ranks is None else ranks[i]
            u = linalg.random_unitary(n, rng)[:, :r]
            out.append(u @ u.conj().T)
        return Element(self, [linalg.hermitize(b) for b in out])

    def random_unitary(self, rng):
        return Element(self, [linalg.random_unitary(n, rng) for n in self.blocks])


class Element:
    """An element of an :class:`FdVnAlgebra`; immutable."""

    __slots__ = ("algebra", "data")
    __array_priority__ = 100

    def __init__(self, algebra, blocks, _trusted=False):
        blocks = tuple(np.array(b, dtype=complex) for b in blocks)
        if not _trusted:
            if len(blocks) != len(algebra.blocks):
                raise StructuralError(f"{algebra} has {len(algebra.blocks)} blocks, got {len(blocks)}")
            for b, n in zip(blocks, algebra.blocks):
                if b.shape != (n, n):
                    raise StructuralError(f"block of shape {(n, n)} expected, got {b.shape}")
                if not np.all(np.isfinite(b)):
                    raise StructuralError("non-finite entry in element")
        for b in blocks:
            b.setflags(write=False)
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "data", blocks)

    def __setattr__(self, *_):
        raise AttributeError("Element is immutable")

    def __repr__(self):
        return f"Element({self.algebra}, {[b.round(6).tolist() for b in self.data]})"

    def _check(self, other):
        if not isinstance(other, Element) or other.algebra != self.algebra:
            raise StructuralError("elements live in different algebras")

    def vec(self):
        return np.concatenate([b.ravel() for b in self.data])

    def ambient(self):
        return self.algebra.vec_to_ambient(self.vec())

    def __add__(self, other):
        self._check(other)
        return Element(self.algebra, [a + b for a, b in zip(self.data, other.data)], _trusted=True)

    def __sub__(self, other):
        self._check(other)
        return Element(self.algebra, [a - b for a, b in zip(self.data, other.data)], _trusted=True)

    def __neg__(self):
        return Element(self.algebra, [-a for a in self.data], _trusted=True)

    def __mul__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return Element(self.algebra, [scalar * a for a in self.data], _trusted=True)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        self._check(other)
        return Element(self.algebra, [a @ b for a, b in zip(self.data, other.data)], _trusted=True)

    def adjoint(self):
        return Element(self.algebra, [a.conj().T for a in self.data], _trusted=True)

    @property
    def H(self):
        return self.adjoint()

    def norm(self):
        return max(linalg.opnorm(b) for b in self.data)

    def trace(self):
        return complex(sum(np.trace(b) for b in self.data))

    def distance(self, other):
        return (self - other).norm()

    def allclose(self, other, tol=None):
        if tol is None:
            tol = settings.tau(max(self.norm(), other.norm()))
        return self.distance(other) <= tol

    def is_hermitian(self, tol=None):
        tol = settings.tau(self.norm()) if tol is None else tol
        return all(linalg.is_hermitian(b, tol) for b in self.data)

    def is_positive(self, tol=None):
        tol = settings.tau(self.norm()) if tol is None else tol
        return all(linalg.is_psd(b, tol) for b in self.data)

    def is_effect(self, tol=None):
        tol = settings.tau(self.norm()) if tol is None else tol
        return self.is_positive(tol) and (self.algebra.one() - self).is_positive(tol)

    def is_projection(self, tol=None):
        tol = settings.tau(self.norm()) if tol is None else tol
        return self.is_hermitian(tol) and (self @ self).distance(self) <= tol

    def is_central(self, tol=None):
        tol = settings.tau(self.norm()) if tol is None else tol
        return all(np.abs(b - b[0, 0] * np.eye(len(b))).max() <= tol for b in self.data)

    def sqrt(self):
        """PSD square root; the input is symmetrized first."""
        if not self.is_positive():
            raise DomainError("square root of a non-positive element")
        return Element(self.algebra, [linalg.psd_sqrt(b) for b in self.data], _trusted=True)

    def pinv_sqrt(self):
        if not self.is_positive():
            raise DomainError("inverse square root of a non-positive element")
        tol = settings.tau(self.norm())
        return Element(self.algebra, [linalg.pinv_sqrt(b, tol) for b in self.data], _trusted=True)

    def hermitian_part(self):
        return Element(self.algebra, [linalg.hermitize(b) for b in self.data], _trusted=True)

    def spectrum(self):
        return np.sort(np.concatenate([np.linalg.eigvalsh(linalg.hermitize(b)) for b in self.data]))

    def rank(self):
        tol = settings.tau(self.norm())
        return sum(linalg.rank(b, tol) for b in self.data)


def _require_effect(a):
    if not a.is_effect():
        raise DomainError("element is not an effect (0 <= a <= 1 fails)",
                          spectrum=[float(x) for x in a.spectrum()])


def _require_projection(p):
    if not p.is_projection():
        raise DomainError("element is not a projection")


def ceil(a):
    """Support projection: the least projection above the effect ``a``."""
    _require_effect(a)
    tol = settings.tau(a.norm())
    return Element(a.algebra, [linalg.support(b, tol) for b in a.data], _trusted=True)


def floor(a):
    """Greatest projection below the effect ``a``, i.e. ``1 - ceil(1 - a)``."""
    _require_effect(a)
    one = a.algebra.one()
    return one - ceil(one - a)


def support_projections(a):
    return ceil(a), floor(a)


def range_projection(b):
    """Projection onto the range of an arbitrary element, ``ceil(b b*)`` up to scale."""
    bb = b @ b.adjoint()
    tol = settings.tau(bb.norm())
    return Element(b.algebra, [linalg.support(x, tol) for x in bb.data], _trusted=True)


def central_carrier(p):
    """Least central projection above the projection ``p``."""
    _require_projection(p)
    tol = settings.tau(1.0)
    return p.algebra.central_projection([linalg.opnorm(b) > tol for b in p.data])


def polar_partial_isometry(a, p):
    """The partial isometry ``u`` with ``sqrt(a) p = u sqrt(p a p)``."""
    _require_effect(a)
    _require_projection(p)
    a._check(p)
    x = a.sqrt() @ p
    tol = settings.tau(x.norm())
    return Element(a.algebra, [linalg.polar_isometry(b, tol) for b in x.data], _trusted=True)


class Corner:
    """The corner ``pAp`` of ``A`` presented as an abstract algebra.

    ``isometries[i]`` maps the coordinates of the ``i``-th corner block onto
    the range of the corresponding nonzero block of ``p``.
    """

    def __init__(self, algebra, p):
        _require_projection(p)
        if p.algebra != algebra:
            raise StructuralError("projection is not in the algebra")
        self.parent = algebra
        self.projection = p
        self.source_blocks = []
        self.isometries = []
        for i, b in enumerate(p.data):
            q = linalg.projection_isometry(b)
            if q.shape[1]:
                self.source_blocks.append(i)
                self.isometries.append(q)
        if not self.isometries:
            raise DomainError("the corner of the zero projection is the zero algebra")
        self.algebra = FdVnAlgebra([q.shape[1] for q in self.isometries])

    def compress(self, b):
        """``b -> p b p`` read in corner coordinates."""
        return Element(self.algebra, [q.conj().T @ b.data[i] @ q
                                      for i, q in zip(self.source_blocks, self.isometries)], _trusted=True)

    def embed(self, x):
        out = [np.zeros((n, n), dtype=complex) for n in self.parent.blocks]
        for i, q, xb in zip(self.source_blocks, self.isometries, x.data):
            out[i] = q @ xb @ q.conj().T
        return Element(self.parent, out, _trusted=True)

    def compress_matrix(self):
        """Vec-coordinate matrix of :meth:`compress` (corner.dim x parent.dim)."""
        out = np.zeros((self.algebra.dim, self.parent.dim), dtype=complex)
        for ci, (i, q) in enumerate(zip(self.source_blocks, self.isometries)):
            o, oc = self.parent.offsets[i], self.algebra.offsets[ci]
            n, r = self.parent.blocks[i], q.shape[1]
            out[oc:oc + r * r, o:o + n * n] = np.kron(q.conj().T, q.T)
        return out

    def embed_matrix(self):
        out = np.zeros((self.parent.dim, self.algebra.dim), dtype=complex)
        for ci, (i, q) in enumerate(zip(self.source_blocks, self.isometries)):
            o, oc = self.parent.offsets[i], self.algebra.offsets[ci]
            n, r = self.parent.blocks[i], q.shape[1]
            out[o:o + n * n, oc:oc + r * r] = np.kron(q, q.conj())
        return out


def corner_subalgebra(algebra, p):
    """Return ``(pAp as FdVnAlgebra, Corner)``."""
    c = Corner(algebra, p)
    return c.algebra, c
