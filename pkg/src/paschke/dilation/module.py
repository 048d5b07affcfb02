"""The Hilbert module ``A (x)_phi B`` in trace-orthonormal coordinates.

Raw vectors live in ``A (.) B`` with basis ``E_u (x) e_v`` (matrix units of
``A`` and ``B``). The ``B``-valued semi-inner product is

    [a (x) b, a' (x) b'] = b* phi(a* a') b'

and its trace Gram restricted to the codomain block ``j`` only involves the
Choi blocks ``C_ji``. For ``u = (i, k, l)`` and ``e_v = e_pq`` in block ``j``,
the class of ``E_u (x) e_pq`` has coordinates ``(j, q, a)`` with
``a = (i, k, s)`` running over ``i``, ``k < n_i`` and ``s < rank C_ji``, via

    Omega_j[(i, k, s), ((i, k, l), p)] = W_ij[s, (l, p)],   W_ij = Q* C_ji^(1/2).

So every operator in the commutant of the right action has the form
``(+)_j 1_{m_j} (x) T_j``; :class:`HilbertModule` keeps the small matrices
``Omega_j`` and their right inverses ``Lambda_j`` and derives the dense
``d x d`` objects only on request.
"""
from functools import cached_property

import numpy as np

from .. import settings
from ..errors import DomainError
from ..vn_algebra import linalg
from ..vn_algebra.algebra import FdVnAlgebra
from ..vn_algebra.concrete import ConcreteStarAlgebra, Spatial, commutant


def raw_products(algebra):
    """``E_u* E_u'`` for all matrix-unit pairs, as vec coordinates ``(dim, dim, dim)``."""
    amb = algebra.vec_to_ambient(np.eye(algebra.dim))
    prods = np.einsum("uba,vbc->uvac", amb.conj(), amb)
    return algebra.ambient_to_vec(prods)


def left_mult_tensor(algebra):
    """``Lt[w, x, y]``: matrix of left multiplication by ``E_w`` in vec coordinates."""
    return np.stack([algebra.left_mult_matrix(e) for e in algebra.basis()])


def unit_left_action(algebra, left, right):
    """``out[w] = left (L_{E_w} (x) 1) right`` without forming the ``dim^3`` tensor.

    ``left`` has shape ``(N1, dim, m)`` and ``right`` ``(dim, m, N2)``. Left
    multiplication by ``E_ij`` sends ``E_jk`` to ``E_ik``, so each block
    reduces to one contraction over ``(k, p)``.
    """
    out = []
    for o, n in zip(algebra.offsets, algebra.blocks):
        lb = left[:, o:o + n * n, :].reshape(left.shape[0], n, n, left.shape[2])
        rb = right[o:o + n * n].reshape(n, n, right.shape[1], right.shape[2])
        out.append(np.einsum("aikp,jkpb->ijab", lb, rb, optimize=True).reshape(n * n, left.shape[0], -1))
    return np.concatenate(out, axis=0)


def block_slice(algebra, j):
    o = algebra.ambient_offsets[j]
    return slice(o, o + algebra.blocks[j])


class HilbertModule:
    """Coordinates, inner products and actions on ``A (x)_phi B``."""

    def __init__(self, phi):
        phi.require_cp()
        self.phi = phi
        self.domain = a = phi.domain
        self.base = b = phi.codomain
        self.pieces = {}
        sizes = []
        self.Omega, self.Lambda = [], []
        for j, m in enumerate(b.blocks):
            n_total = 0
            for i, n in enumerate(a.blocks):
                w_ij, l_ij = _orthonormalizer(phi.choi[(i, j)])
                r = w_ij.shape[0]
                self.pieces[(i, j)] = (n_total, r, w_ij, l_ij)
                n_total += n * r
            big_o = np.zeros((n_total, a.dim * m), dtype=complex)
            big_l = np.zeros((a.dim * m, n_total), dtype=complex)
            for i, n in enumerate(a.blocks):
                off, r, w_ij, l_ij = self.pieces[(i, j)]
                for k in range(n):
                    rows = slice(off + k * r, off + (k + 1) * r)
                    start = (a.offsets[i] + k * n) * m
                    cols = slice(start, start + n * m)
                    big_o[rows, cols] = w_ij
                    big_l[cols, rows] = l_ij
            self.Omega.append(big_o)
            self.Lambda.append(big_l)
            sizes.append(n_total)
        self.block_sizes = tuple(sizes)
        self.coord_offsets = tuple(np.cumsum([0] + [m * n for m, n in zip(b.blocks, sizes)][:-1]).tolist())
        self.dim = int(sum(m * n for m, n in zip(b.blocks, sizes)))
        self.active_blocks = tuple(j for j, n in enumerate(sizes) if n > 0)

    def __repr__(self):
        return f"HilbertModule({self.phi}, dim={self.dim})"

    # layout ----------------------------------------------------------------
    def coord(self, j, q, a):
        return self.coord_offsets[j] + q * self.block_sizes[j] + a

    @cached_property
    def coordinate_algebra(self):
        """``(+)_j M_{N_j}`` over the active codomain blocks; the commutant of the right action."""
        if not self.active_blocks:
            return None
        return FdVnAlgebra([self.block_sizes[j] for j in self.active_blocks])

    def reduced_gram(self, j):
        """``Lambda_j* G_j Lambda_j``, the identity up to rounding."""
        g = self.trace_gram_block(j)
        lam = self.Lambda[j]
        return lam.conj().T @ g @ lam

    def trace_gram_block(self, j):
        """``G_j[(u, p), (u', p')] = phi(E_u* E_u')_j[p, p']`` over raw indices of block ``j``."""
        a, b = self.domain, self.base
        imgs = b.vec_to_ambient(self.phi.apply_vecs(self._raw_products))[..., block_slice(b, j), block_slice(b, j)]
        m = b.blocks[j]
        return imgs.transpose(0, 2, 1, 3).reshape(a.dim * m, a.dim * m)

    @cached_property
    def _raw_products(self):
        return raw_products(self.domain)

    @cached_property
    def unit_blocks(self):
        """``c_j[a, q]``: coordinates of the class of ``1 (x) 1`` in block ``j``."""
        a = self.domain
        diag = np.zeros(a.dim)
        for idx, (i, r, s) in enumerate(a.units):
            if r == s:
                diag[idx] = 1.0
        out = []
        for j, m in enumerate(self.base.blocks):
            om = self.Omega[j].reshape(-1, a.dim, m)
            out.append(np.einsum("axq,x->aq", om, diag))
        return out

    @cached_property
    def unit_vector(self):
        c = np.zeros(self.dim, dtype=complex)
        for j, m in enumerate(self.base.blocks):
            n = self.block_sizes[j]
            o = self.coord_offsets[j]
            c[o:o + m * n] = self.unit_blocks[j].T.ravel()
        return c

    # reduced operators --------------------------------------------------
    def left_action_reduced(self, mats):
        """``rho_j(a0) = Omega_j (L_a0 (x) 1) Lambda_j`` for a batch of left-multiplication matrices."""
        a = self.domain
        out = []
        for j in self.active_blocks:
            m = self.base.blocks[j]
            om = self.Omega[j].reshape(-1, a.dim, m)
            lam = self.Lambda[j].reshape(a.dim, m, -1)
            out.append(np.einsum("axp,wxy,ypb->wab", om, mats, lam, optimize=True))
        return out

    def unit_action_reduced(self):
        """:meth:`left_action_reduced` at every matrix unit of the domain, by the structured route."""
        a = self.domain
        out = []
        for j in self.active_blocks:
            m = self.base.blocks[j]
            om, lam = self.Omega[j].reshape(-1, a.dim, m), self.Lambda[j].reshape(a.dim, m, -1)
            out.append(unit_left_action(a, om, lam))
        return out

    def operator_from_raw_form(self, forms):
        """Operators with prescribed trace pairings on raw vectors.

        ``forms[j]`` (keyed by codomain block) has shape ``(..., dimA*m_j, dimA*m_j)`` and holds
        ``tr( e_pq* X(u, u') e_p'q )`` summed over ``q``-independent entries,
        i.e. ``X(u, u')_j[p, p']``. Returns per active block ``Lambda_j* X Lambda_j``.
        """
        out = []
        for j in self.active_blocks:
            lam = self.Lambda[j]
            out.append(np.einsum("xa,...xy,yb->...ab", lam.conj(), forms[j], lam, optimize=True))
        return out

    def coupling_reduced(self, j, tmat):
        """``f(T)_j = c_j* g_j T_j c_j`` for ``T_j`` of shape ``(..., N_j, N_j)``."""
        c = self.unit_blocks[j]
        g = self.reduced_gram(j)
        return np.einsum("aq,ab,...bc,cr->...qr", c.conj(), g, tmat, c, optimize=True)

    # dense objects (for checks on small instances) --------------------------
    @cached_property
    def presentation(self):
        """Dense map from raw coordinates ``(u, v)`` (v a vec index of B) onto module coordinates."""
        a, b = self.domain, self.base
        out = np.zeros((self.dim, a.dim, b.dim), dtype=complex)
        for j, m in enumerate(b.blocks):
            n = self.block_sizes[j]
            om = self.Omega[j].reshape(n, a.dim, m)
            for q in range(m):
                for p in range(m):
                    v = b.offsets[j] + p * m + q
                    out[self.coord_offsets[j] + q * n:self.coord_offsets[j] + (q + 1) * n, :, v] = om[:, :, p]
        return out.reshape(self.dim, a.dim * b.dim)

    @cached_property
    def lift(self):
        """Right inverse of :attr:`presentation` with range orthogonal to the kernel N."""
        a, b = self.domain, self.base
        out = np.zeros((a.dim, b.dim, self.dim), dtype=complex)
        for j, m in enumerate(b.blocks):
            n = self.block_sizes[j]
            lam = self.Lambda[j].reshape(a.dim, m, n)
            for q in range(m):
                for p in range(m):
                    v = b.offsets[j] + p * m + q
                    out[:, v, self.coord_offsets[j] + q * n:self.coord_offsets[j] + (q + 1) * n] = lam[:, p, :]
        return out.reshape(a.dim * b.dim, self.dim)

    def dense_trace_gram(self):
        """Trace Gram on all of ``A (.) B`` (only for small instances)."""
        a, b = self.domain, self.base
        y = b.vec_to_ambient(self.phi.apply_vecs(self._raw_products))  # (u, u', M, M)
        e = b.vec_to_ambient(np.eye(b.dim))  # (v, M, M)
        # tr(e_v* Y e_v') = sum conj(e_v)[p, q] Y[p, p'] e_v'[p', q]
        g = np.einsum("vpq,xypr,wrq->xvyw", e.conj(), y, e, optimize=True)
        return g.reshape(a.dim * b.dim, a.dim * b.dim)

    @cached_property
    def gram(self):
        """``gram[x, y]`` = vec coordinates in B of <e_x, e_y>, shape ``(d, d, dim B)``."""
        a, b = self.domain, self.base
        y = b.vec_to_ambient(self.phi.apply_vecs(self._raw_products))
        e = b.vec_to_ambient(np.eye(b.dim))
        lift = self.lift.reshape(a.dim, b.dim, self.dim)
        # <x, y> = sum conj(L[u, v, x]) L[u', v', y] e_v* phi(E_u* E_u') e_v'
        left = np.einsum("uvx,vpq->uxpq", lift.conj(), e.conj())  # e_v* = conj(e_v)^T
        right = np.einsum("wvy,vrs->wyrs", lift, e)
        out = np.einsum("uxpq,uwpr,wyrs->xyqs", left, y, right, optimize=True)
        return b.ambient_to_vec(out)

    def inner(self, x, y):
        """<x, y> in B for coordinate vectors."""
        v = np.einsum("x,xyk,y->k", np.conj(x), self.gram, y)
        return self.base.unvec(v)

    def raw_right_action(self, bel):
        return np.kron(np.eye(self.domain.dim), self.base.right_mult_matrix(bel))

    def raw_left_action(self, ael):
        return np.kron(self.domain.left_mult_matrix(ael), np.eye(self.base.dim))

    def right_action(self, bel):
        return self.presentation @ self.raw_right_action(bel) @ self.lift

    def left_action(self, ael):
        return self.presentation @ self.raw_left_action(ael) @ self.lift

    @cached_property
    def right_action_matrices(self):
        return np.stack([self.right_action(e) for e in self.base.basis()])

    def act(self, x, bel):
        return self.right_action(bel) @ x

    def right_action_algebra(self):
        """The concrete algebra of right multiplications, in its known spatial form."""
        if self.dim == 0:
            raise DomainError("the zero module has no operators")
        act = self.active_blocks
        return ConcreteStarAlgebra(spatial=Spatial(np.eye(self.dim, dtype=complex),
                                                   tuple(self.base.blocks[j] for j in act),
                                                   tuple(self.block_sizes[j] for j in act)))

    def adjointables(self):
        """``B^a(X)`` as the commutant of the right action."""
        return commutant(self.right_action_algebra())

    def reduced_to_dense(self, blocks):
        """``(+)_j 1_{m_j} (x) T_j`` as a ``d x d`` matrix."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for j, t in zip(self.active_blocks, blocks):
            m, n, o = self.base.blocks[j], self.block_sizes[j], self.coord_offsets[j]
            out[o:o + m * n, o:o + m * n] = np.kron(np.eye(m), t)
        return out

    def dense_to_reduced(self, t):
        out = []
        for j in self.active_blocks:
            m, n, o = self.base.blocks[j], self.block_sizes[j], self.coord_offsets[j]
            blk = t[o:o + m * n, o:o + m * n].reshape(m, n, m, n)
            out.append(np.einsum("qaqb->ab", blk) / m)
        return out

    # checks -----------------------------------------------------------------
    def orthonormality_residual(self):
        return max((linalg.opnorm(self.reduced_gram(j) - np.eye(self.block_sizes[j]))
                    for j in self.active_blocks), default=0.0)

    def presentation_residual(self):
        """``||Omega_j Lambda_j - 1||`` over all blocks."""
        return max((linalg.opnorm(self.Omega[j] @ self.Lambda[j] - np.eye(self.block_sizes[j]))
                    for j in self.active_blocks), default=0.0)

    def self_duality(self, max_unknowns=2000):
        """Dimension of the space of module maps ``X -> B`` against ``dim X``.

        Returns ``(ok, n_maps, rank_of_inner_functionals)`` or ``None`` when
        the instance is too large for the dense check.
        """
        d, b = self.dim, self.base
        nb = b.dim
        if d * nb > max_unknowns:
            return None
        # unknown tau[y, k]: vec coords of tau(e_y); constraint tau(e_y b) = tau(e_y) b
        rows = []
        right = self.right_action_matrices  # (nb, d, d)
        for w, e in enumerate(b.basis()):
            rb = b.right_mult_matrix(e)  # acts on vec(B) from the left: vec(x e)
            # tau(R(e) e_y) = sum_z R[z, y] tau(e_z);  tau(e_y) e = rb @ tau(e_y)
            lhs = np.kron(right[w].T, np.eye(nb))
            rhs = np.kron(np.eye(d), rb)
            rows.append(lhs - rhs)
        ns = linalg.null_space(np.concatenate(rows))
        n_maps = ns.shape[1]
        # functionals y -> <e_x, e_y>, flattened as tau[y, k]
        funcs = self.gram.reshape(d, d * nb)
        inside = np.allclose(funcs.T - ns @ (ns.conj().T @ funcs.T), 0, atol=1e-8)
        rank = linalg.rank(funcs)
        return bool(inside and n_maps == d and rank == d), n_maps, rank


def _orthonormalizer(c):
    """``(W, Lambda)`` with ``W* W = C`` on the range, ``W Lambda = 1``."""
    w, v = linalg.eigh(c)
    keep = w > settings.tau(np.abs(w).max(initial=0.0))
    r = int(keep.sum())
    if r == 0:
        return np.zeros((0, len(c)), dtype=complex), np.zeros((len(c), 0), dtype=complex)
    vk, wk = v[:, keep], w[keep]
    q = linalg.canonical_isometry(vk @ vk.conj().T, r)
    sq = (vk * np.sqrt(wk)) @ vk.conj().T
    isq = (vk / np.sqrt(wk)) @ vk.conj().T
    return q.conj().T @ sq, isq @ q


def gns_module(phi):
    """The quotient of ``A (.) B`` by the null vectors of the trace Gram."""
    return HilbertModule(phi)


__all__ = ["HilbertModule", "gns_module", "raw_products", "left_mult_tensor", "unit_left_action"]
