"""Completely positive maps between finite-dimensional von Neumann algebras.

A :class:`CpMap` ``A -> B`` stores, for every domain block ``i`` (size ``n``)
and codomain block ``j`` (size ``m``), the Choi matrix of the component
``M_n -> M_m``::

    C_ji[(k, r), (l, s)] = phi(E_kl)_rs

so the map is CP exactly when every ``C_ji`` is PSD. Kraus operators follow
``phi(x) = sum K* x K`` with ``K`` of shape ``n x m``.

For bulk work a map is also available as its *superoperator*: the
``(B.dim x A.dim)`` matrix acting on vec coordinates.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import settings
from .errors import DomainError, StructuralError
from .vn_algebra import linalg
from .vn_algebra.algebra import Corner, Element, FdVnAlgebra, ceil, floor


def _as_algebra(a):
    return a if isinstance(a, FdVnAlgebra) else FdVnAlgebra(a)


class CpMap:
    """A linear map between FdVnAlgebras in Choi form (CP or not; see :func:`analyze`)."""

    def __init__(self, domain, codomain, choi):
        self.domain = _as_algebra(domain)
        self.codomain = _as_algebra(codomain)
        blocks = {}
        for i, n in enumerate(self.domain.blocks):
            for j, m in enumerate(self.codomain.blocks):
                c = choi.get((i, j))
                c = np.zeros((n * m, n * m), dtype=complex) if c is None else np.array(c, dtype=complex)
                if c.shape != (n * m, n * m):
                    raise StructuralError(f"Choi block ({i},{j}) must be {(n * m, n * m)}, got {c.shape}")
                if not np.all(np.isfinite(c)):
                    raise StructuralError("non-finite Choi entry")
                c.setflags(write=False)
                blocks[(i, j)] = c
        unknown = set(choi) - set(blocks)
        if unknown:
            raise StructuralError(f"Choi keys out of range: {sorted(unknown)}")
        self.choi = blocks

    def __repr__(self):
        return f"CpMap({self.domain} -> {self.codomain})"

    # superoperator ----------------------------------------------------
    @cached_property
    def matrix(self):
        """Superoperator in vec coordinates, shape ``(codomain.dim, domain.dim)``."""
        a, b = self.domain, self.codomain
        out = np.zeros((b.dim, a.dim), dtype=complex)
        for (i, j), c in self.choi.items():
            n, m = a.blocks[i], b.blocks[j]
            blk = c.reshape(n, m, n, m).transpose(1, 3, 0, 2).reshape(m * m, n * n)
            out[b.offsets[j]:b.offsets[j] + m * m, a.offsets[i]:a.offsets[i] + n * n] = blk
        out.setflags(write=False)
        return out

    def __call__(self, x):
        if x.algebra != self.domain:
            raise StructuralError(f"{self} applied to an element of {x.algebra}")
        return self.codomain.unvec(self.matrix @ x.vec())

    def apply_vecs(self, v):
        """Apply to a batch of vec coordinates (shape ``(..., domain.dim)``)."""
        return np.asarray(v) @ self.matrix.T

    def one_image(self):
        return self(self.domain.one())

    def choi_min_eigenvalue(self):
        return min(linalg.min_eigenvalue(c) for c in self.choi.values())

    def is_cp(self, tol=None):
        for c in self.choi.values():
            t = settings.tau(linalg.opnorm(c)) if tol is None else tol
            if not linalg.is_psd(c, t):
                return False
        return True

    def require_cp(self):
        if not self.is_cp():
            raise DomainError("map is not completely positive",
                              min_choi_eigenvalue=self.choi_min_eigenvalue())
        return self

    def norm(self):
        """``||phi(1)||``; for a CP map this is its (completely bounded) norm."""
        return self.one_image().norm()

    def kraus(self):
        """Kraus operators per block pair: ``{(i, j): [K, ...]}`` with ``K`` of shape ``n_i x m_j``."""
        out = {}
        for (i, j), c in self.choi.items():
            n, m = self.domain.blocks[i], self.codomain.blocks[j]
            w, u = linalg.eigh(c)
            keep = w > settings.tau(np.abs(w).max(initial=0.0))
            out[(i, j)] = [np.conj(np.sqrt(lam) * u[:, k]).reshape(n, m)
                           for k, lam in zip(np.flatnonzero(keep), w[keep])]
        return out

    def choi_ranks(self):
        return {k: linalg.rank(c, settings.tau(linalg.opnorm(c))) if c.size else 0
                for k, c in self.choi.items()}

    # comparisons and arithmetic --------------------------------------
    def distance(self, other):
        """Operator-norm distance of the superoperators (Hilbert-Schmidt on both sides)."""
        _same_shape(self, other)
        return linalg.opnorm(self.matrix - other.matrix)

    def allclose(self, other, tol=1e-8):
        return self.distance(other) <= tol

    def __add__(self, other):
        _same_shape(self, other)
        return CpMap(self.domain, self.codomain, {k: c + other.choi[k] for k, c in self.choi.items()})

    def __sub__(self, other):
        _same_shape(self, other)
        return CpMap(self.domain, self.codomain, {k: c - other.choi[k] for k, c in self.choi.items()})

    def __mul__(self, lam):
        return CpMap(self.domain, self.codomain, {k: lam * c for k, c in self.choi.items()})

    __rmul__ = __mul__

    def __matmul__(self, other):
        return compose(self, other)


def _same_shape(f, g):
    if f.domain != g.domain or f.codomain != g.codomain:
        raise StructuralError(f"maps {f} and {g} have different shapes")


# constructors --------------------------------------------------------------
def from_matrix(domain, codomain, mat):
    a, b = _as_algebra(domain), _as_algebra(codomain)
    mat = np.asarray(mat, dtype=complex)
    if mat.shape != (b.dim, a.dim):
        raise StructuralError(f"superoperator must be {(b.dim, a.dim)}, got {mat.shape}")
    choi = {}
    for i, n in enumerate(a.blocks):
        for j, m in enumerate(b.blocks):
            blk = mat[b.offsets[j]:b.offsets[j] + m * m, a.offsets[i]:a.offsets[i] + n * n]
            choi[(i, j)] = blk.reshape(m, m, n, n).transpose(2, 0, 3, 1).reshape(n * m, n * m)
    out = CpMap(a, b, choi)
    m = mat.copy()
    m.setflags(write=False)
    out.__dict__["matrix"] = m
    return out


def from_function(domain, codomain, fn):
    """Tabulate a linear ``fn: Element -> Element`` on the matrix-unit basis."""
    a, b = _as_algebra(domain), _as_algebra(codomain)
    cols = [fn(e).vec() for e in a.basis()]
    return from_matrix(a, b, np.stack(cols, axis=1))


def from_kraus(domain, codomain, kraus):
    """``kraus`` maps a block pair ``(i, j)`` to a list of ``n_i x m_j`` matrices."""
    a, b = _as_algebra(domain), _as_algebra(codomain)
    choi = {}
    for (i, j), ks in kraus.items():
        n, m = a.blocks[i], b.blocks[j]
        c = np.zeros((n * m, n * m), dtype=complex)
        for k in ks:
            k = np.asarray(k, dtype=complex)
            if k.shape != (n, m):
                raise StructuralError(f"Kraus operator for ({i},{j}) must be {(n, m)}, got {k.shape}")
            v = np.conj(k).ravel()
            c += np.outer(v, v.conj())
        choi[(i, j)] = c
    return CpMap(a, b, choi)


def ad(v):
    """``Ad_V: M_n -> M_m, x -> V* x V`` for ``V`` of shape ``n x m``."""
    v = np.atleast_2d(np.asarray(v, dtype=complex))
    n, m = v.shape
    return from_kraus((n,), (m,), {(0, 0): [v]})


def identity(algebra):
    a = _as_algebra(algebra)
    return from_matrix(a, a, np.eye(a.dim))


def zero(domain, codomain):
    return CpMap(domain, codomain, {})


def transpose_map(n):
    a = FdVnAlgebra((n,))
    return from_function(a, a, lambda x: a.element([x.data[0].T]))


def state(algebra, density):
    """The functional ``a -> tr(density a)`` as a map into ``C``."""
    a = _as_algebra(algebra)
    if isinstance(density, Element):
        dens = density
    elif len(a.blocks) == 1 and np.ndim(density) == 2:
        dens = a.element([density])
    else:
        dens = a.element(density)
    row = np.concatenate([b.T.ravel() for b in dens.data])
    return from_matrix(a, (1,), row[None, :])


def trace_functional(algebra):
    a = _as_algebra(algebra)
    return state(a, a.one())


# analysis -----------------------------------------------------------------
@dataclass(frozen=True)
class CpReport:
    is_cp: bool
    is_unital: bool
    is_contractive: bool
    is_miu: bool
    cp_norm: float
    choi_ranks: dict
    min_choi_eigenvalue: float


def _is_star_preserving(phi, tol):
    a = phi.domain
    perm = a.adjoint_permutation()
    mat = phi.matrix
    # phi(x*) = phi(x)* for every matrix unit
    lhs = mat[:, perm]
    rhs = np.conj(mat[phi.codomain.adjoint_permutation(), :])
    return np.abs(lhs - rhs).max(initial=0.0) <= tol


def is_multiplicative(phi, tol=None):
    """``phi(e_u e_v) = phi(e_u) phi(e_v)`` on all matrix-unit pairs.

    With ``y_rs = phi(E_rs)`` inside one block this is equivalent to
    ``y_rs = y_r0 y_0s`` and ``y_0s y_t0 = delta_st y_00`` (then
    ``y_rs y_tu = y_r0 (y_0s y_t0) y_0u = delta_st y_ru``); across blocks it
    reduces to orthogonality of the block units ``z_i = sum_s y_ss``. This
    costs ``O(n^2)`` products instead of ``O(n^4)``.
    """
    a, b = phi.domain, phi.codomain
    imgs = b.vec_to_ambient(phi.matrix.T)  # (dimA, D, D)
    if tol is None:
        tol = settings.tau(max(1.0, linalg.opnorm(phi.matrix)) ** 2)
    units = []
    for i, n in enumerate(a.blocks):
        o = a.offsets[i]
        y = imgs[o:o + n * n].reshape(n, n, *imgs.shape[1:])
        col, row = y[:, 0], y[0]  # y_r0, y_0s
        if np.abs(np.einsum("rab,sbc->rsac", col, row) - y).max(initial=0.0) > tol:
            return False
        inner = np.einsum("sab,tbc->stac", row, col)
        want = np.einsum("st,ac->stac", np.eye(n), y[0, 0])
        if np.abs(inner - want).max(initial=0.0) > tol:
            return False
        units.append(np.einsum("ssab->ab", y))
    for i, zi in enumerate(units):
        for zj in units[i + 1:]:
            if np.abs(zi @ zj).max(initial=0.0) > tol:
                return False
    return True


def analyze(phi):
    one = phi.one_image()
    norm = one.norm()
    tol = settings.tau(max(1.0, norm))
    is_cp = phi.is_cp()
    unital = one.allclose(phi.codomain.one(), tol)
    miu = bool(is_cp and unital and _is_star_preserving(phi, tol) and is_multiplicative(phi))
    return CpReport(is_cp=is_cp, is_unital=unital, is_contractive=norm <= 1.0 + tol, is_miu=miu,
                    cp_norm=norm, choi_ranks=phi.choi_ranks(), min_choi_eigenvalue=phi.choi_min_eigenvalue())


def is_miu(phi):
    return analyze(phi).is_miu


def is_injective(phi):
    return linalg.rank(phi.matrix) == phi.domain.dim


def is_surjective(phi):
    return linalg.rank(phi.matrix) == phi.codomain.dim


def is_faithful(phi):
    c = carrier(phi)
    return c.allclose(phi.domain.one())


def amplify(phi, n):
    """``M_n(phi)``: the map ``M_n(A) -> M_n(B)`` applied entrywise."""
    if n < 1:
        raise StructuralError("amplification order must be >= 1")
    a, b = phi.domain, phi.codomain
    a_n = FdVnAlgebra([n * k for k in a.blocks])
    b_n = FdVnAlgebra([n * k for k in b.blocks])
    eye = np.eye(n)
    out = np.zeros((b_n.dim, a_n.dim), dtype=complex)
    mat = phi.matrix
    for i, ni in enumerate(a.blocks):
        for j, mj in enumerate(b.blocks):
            blk = mat[b.offsets[j]:b.offsets[j] + mj * mj, a.offsets[i]:a.offsets[i] + ni * ni]
            blk = blk.reshape(mj, mj, ni, ni)
            big = np.einsum("rskl,ab,cd->arcsbkdl", blk, eye, eye).reshape((n * mj) ** 2, (n * ni) ** 2)
            out[b_n.offsets[j]:b_n.offsets[j] + (n * mj) ** 2, a_n.offsets[i]:a_n.offsets[i] + (n * ni) ** 2] = big
    return from_matrix(a_n, b_n, out)


def trace_dual(phi):
    """The map ``phi_*`` with ``tr(phi(a) b) = tr(a phi_*(b))``."""
    choi = {}
    for (i, j), c in phi.choi.items():
        n, m = phi.domain.blocks[i], phi.codomain.blocks[j]
        choi[(j, i)] = c.reshape(n, m, n, m).transpose(3, 2, 1, 0).reshape(m * n, m * n)
    return CpMap(phi.codomain, phi.domain, choi)


def carrier(phi):
    """``car phi = ceil(phi_*(1))``: the least projection ``p`` with ``phi(p) = phi(1)``."""
    phi.require_cp()
    d = trace_dual(phi).one_image()
    tol = settings.tau(d.norm())
    return phi.domain.element([linalg.support(x, tol) for x in d.data])


# corners and compressions -------------------------------------------------
def corner_map(corner):
    """``b -> p b p`` onto the abstract corner algebra."""
    return from_matrix(corner.parent, corner.algebra, corner.compress_matrix())


def corner_embedding(corner):
    """The (non-unital) inclusion of the abstract corner back into the parent."""
    return from_matrix(corner.algebra, corner.parent, corner.embed_matrix())


def standard_corner(a, return_corner=False):
    """``h_a: A -> floor(a) A floor(a)``; raises DomainError when ``floor(a) = 0``."""
    c = Corner(a.algebra, floor(a))
    h = corner_map(c)
    return (h, c) if return_corner else h


def standard_compression(a, return_corner=False):
    """``c_a: ceil(a) A ceil(a) -> A, b -> sqrt(a) b sqrt(a)``."""
    c = Corner(a.algebra, ceil(a))
    s = a.sqrt()
    alg = a.algebra
    mat = alg.left_mult_matrix(s) @ alg.right_mult_matrix(s) @ c.embed_matrix()
    comp = from_matrix(c.algebra, alg, mat)
    return (comp, c) if return_corner else comp


@dataclass(frozen=True)
class AngleDecomposition:
    c: CpMap
    angle: CpMap
    h: CpMap
    carrier: Element
    scale: float

    def __iter__(self):
        return iter((self.c, self.angle, self.h))

    def composite(self):
        return compose(self.c, compose(self.angle, self.h))


def angle_decomposition(phi):
    """``phi = c o phi_angle o h`` with ``h = h_{car phi}``, ``c = ||phi|| c_{psi(1)}``, ``psi = phi/||phi||``."""
    phi.require_cp()
    norm = phi.norm()
    if norm <= settings.tau(1.0):
        raise DomainError("the zero map has no carrier normalization")
    psi = phi * (1.0 / norm)
    p = carrier(psi)
    h, pc = standard_corner(p, return_corner=True)
    e = psi.one_image().hermitian_part()
    comp, qc = standard_compression(e, return_corner=True)
    gp = e.pinv_sqrt()
    b = phi.codomain
    inner = qc.compress_matrix() @ b.left_mult_matrix(gp) @ b.right_mult_matrix(gp) @ psi.matrix @ pc.embed_matrix()
    angle = from_matrix(pc.algebra, qc.algebra, inner)
    return AngleDecomposition(c=comp * norm, angle=angle, h=h, carrier=p, scale=norm)


# combinators --------------------------------------------------------------
def compose(g, f):
    """``g o f``."""
    if f.codomain != g.domain:
        raise StructuralError(f"cannot compose {g} after {f}")
    return from_matrix(f.domain, g.codomain, g.matrix @ f.matrix)


def scale(lam, phi):
    if lam < 0:
        raise DomainError("scaling factor must be nonnegative")
    return phi * float(lam)


def convex(weights, maps):
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > settings.tau(1.0):
        raise DomainError("convex weights must be nonnegative and sum to 1")
    out = maps[0] * weights[0]
    for w, m in zip(weights[1:], maps[1:]):
        out = out + m * w
    return out


def _block_embed(parts):
    """Offsets for the concatenated algebra of ``parts``."""
    blocks = [n for p in parts for n in p.blocks]
    alg = FdVnAlgebra(blocks)
    shifts = np.cumsum([0] + [len(p.blocks) for p in parts[:-1]])
    return alg, shifts


def pairing(f1, f2):
    """``<f1, f2>: A -> B1 (+) B2, a -> (f1(a), f2(a))``."""
    if f1.domain != f2.domain:
        raise StructuralError("pairing needs a common domain")
    b, (s1, s2) = _block_embed([f1.codomain, f2.codomain])
    choi = {(i, j + s1): c for (i, j), c in f1.choi.items()}
    choi.update({(i, j + s2): c for (i, j), c in f2.choi.items()})
    return CpMap(f1.domain, b, choi)


def direct_sum(f1, f2):
    """``f1 (+) f2: A1 (+) A2 -> B1 (+) B2``."""
    a, (r1, r2) = _block_embed([f1.domain, f2.domain])
    b, (s1, s2) = _block_embed([f1.codomain, f2.codomain])
    choi = {(i + r1, j + s1): c for (i, j), c in f1.choi.items()}
    choi.update({(i + r2, j + s2): c for (i, j), c in f2.choi.items()})
    return CpMap(a, b, choi)


def copairing(f1, f2):
    """``[f1, f2]: A1 (+) A2 -> B, (a1, a2) -> f1(a1) + f2(a2)``."""
    if f1.codomain != f2.codomain:
        raise StructuralError("copairing needs a common codomain")
    a, (r1, r2) = _block_embed([f1.domain, f2.domain])
    choi = {(i + r1, j): c for (i, j), c in f1.choi.items()}
    choi.update({(i + r2, j): c for (i, j), c in f2.choi.items()})
    return CpMap(a, f1.codomain, choi)


def block_projection(algebra, i):
    """The NMIU projection ``pi_i`` of a direct sum onto its ``i``-th block."""
    a = _as_algebra(algebra)
    n = a.blocks[i]
    return from_matrix(a, (n,), np.eye(a.dim)[a.offsets[i]:a.offsets[i] + n * n])


def conjugate(phi, u):
    """``x -> u phi(x) u*`` for a unitary Element ``u`` of the codomain."""
    b = phi.codomain
    return from_matrix(phi.domain, b, b.left_mult_matrix(u) @ b.right_mult_matrix(u.adjoint()) @ phi.matrix)


__all__ = [
    "CpMap", "CpReport", "AngleDecomposition", "analyze", "amplify", "trace_dual", "carrier",
    "standard_corner", "standard_compression", "angle_decomposition", "corner_map", "corner_embedding",
    "compose", "scale", "convex", "pairing", "direct_sum", "copairing", "block_projection", "conjugate",
    "from_matrix", "from_function", "from_kraus", "ad", "identity", "zero", "transpose_map", "state",
    "trace_functional", "is_miu", "is_multiplicative", "is_injective", "is_surjective", "is_faithful",
]
