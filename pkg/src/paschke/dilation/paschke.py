"""Paschke dilations ``phi = f o rho`` with ``rho`` NMIU, and their verification."""
from dataclasses import dataclass, field

import numpy as np

from .. import cp_map as cm
from .. import settings
from ..errors import DomainError, StructuralError
from ..vn_algebra import linalg
from ..vn_algebra.algebra import FdVnAlgebra
from ..vn_algebra.concrete import wedderburn
from .module import gns_module

FACTOR_TOL = 1e-8


@dataclass(frozen=True)
class DilationTriple:
    """A factorization ``phi = f o rho`` through ``P`` (not certified universal)."""

    phi: cm.CpMap
    P: FdVnAlgebra
    rho: cm.CpMap
    f: cm.CpMap
    module: object = None


@dataclass(frozen=True, eq=False)
class PaschkeDilation:
    phi: cm.CpMap
    module: object
    P_concrete: object
    wedderburn: object
    P: FdVnAlgebra
    rho: cm.CpMap
    f: cm.CpMap
    theta: cm.CpMap
    seed: int
    residuals: dict = field(default_factory=dict)

    def triple(self):
        return DilationTriple(self.phi, self.P, self.rho, self.f, self.module)

    def reduced_to_P(self, blocks):
        """Abstract ``P`` vec coordinates of ``(+)_j T_j`` given over the module's active blocks."""
        v = np.concatenate([np.asarray(t).reshape(t.shape[:-2] + (-1,)) for t in blocks], axis=-1)
        return self.theta.apply_vecs(v)

    def P_to_reduced(self, v):
        w = np.asarray(v) @ self._theta_inv.T
        alg = self.module.coordinate_algebra
        return [w[..., o:o + n * n].reshape(w.shape[:-1] + (n, n)) for o, n in zip(alg.offsets, alg.blocks)]

    @property
    def _theta_inv(self):
        return np.linalg.inv(self.theta.matrix)


def _reduced_maps(mod):
    """``rho`` into and ``f`` out of the coordinate algebra ``(+)_j M_{N_j}``."""
    a, b = mod.domain, mod.base
    r_alg = mod.coordinate_algebra
    blocks = mod.unit_action_reduced()
    rho = np.concatenate([x.reshape(a.dim, -1) for x in blocks], axis=1).T
    f = np.zeros((b.dim, r_alg.dim), dtype=complex)
    for t, j in enumerate(mod.active_blocks):
        n, m = mod.block_sizes[j], b.blocks[j]
        units = np.eye(n * n).reshape(n * n, n, n)
        vals = mod.coupling_reduced(j, units).reshape(n * n, m * m)
        f[b.offsets[j]:b.offsets[j] + m * m, r_alg.offsets[t]:r_alg.offsets[t] + n * n] = vals.T
    return cm.from_matrix(a, r_alg, rho), cm.from_matrix(r_alg, b, f)


def _transport(mod, wd):
    """The isomorphism coordinate algebra -> abstract P read off the Wedderburn columns."""
    r_alg = mod.coordinate_algebra
    p_alg = wd.algebra
    mat = np.zeros((p_alg.dim, r_alg.dim), dtype=complex)
    for k, (n, m) in enumerate(zip(wd.factor_dims, wd.multiplicities)):
        cols = wd.spatial.columns(k).reshape(mod.dim, n, m)
        hits = []
        for t, j in enumerate(mod.active_blocks):
            o = mod.coord_offsets[j]
            if mod.block_sizes[j] == n and mod.base.blocks[j] == m and \
                    np.abs(cols[o:o + m * n]).max() > 0.5 / np.sqrt(n * m):
                hits.append((t, j, o))
        if len(hits) != 1:
            raise StructuralError("Wedderburn factor does not match a single module block")
        t, j, o = hits[0]
        x = cols[o:o + n, :, 0]
        if linalg.opnorm(x.conj().T @ x - np.eye(n)) > 1e-8:
            raise StructuralError("Wedderburn columns are not a block basis change")
        blk = np.kron(x.conj().T, x.T)
        mat[p_alg.offsets[k]:p_alg.offsets[k] + n * n, r_alg.offsets[t]:r_alg.offsets[t] + n * n] = blk
    return cm.from_matrix(r_alg, p_alg, mat)


def paschke_dilate(phi, seed=0):
    """Paschke dilation ``(P, rho, f)`` of a nonzero CP map."""
    phi.require_cp()
    if phi.norm() <= settings.tau(1.0):
        raise DomainError("the zero map is not dilated (carrier normalization breaks)")
    mod = gns_module(phi)
    rho_r, f_r = _reduced_maps(mod)
    p_concrete = mod.adjointables()
    wd = wedderburn(p_concrete, seed=seed)
    theta = _transport(mod, wd)
    theta_inv = cm.from_matrix(wd.algebra, mod.coordinate_algebra, np.linalg.inv(theta.matrix))
    rho = cm.compose(theta, rho_r)
    f = cm.compose(f_r, theta_inv)
    residuals = {
        "factorization": cm.compose(f, rho).distance(phi),
        "orthonormality": mod.orthonormality_residual(),
        "presentation": mod.presentation_residual(),
    }
    return PaschkeDilation(phi=phi, module=mod, P_concrete=p_concrete, wedderburn=wd, P=wd.algebra,
                           rho=rho, f=f, theta=theta, seed=seed, residuals=residuals)


def as_triple(d):
    if isinstance(d, PaschkeDilation):
        return d.triple()
    if isinstance(d, DilationTriple):
        return d
    to_triple = getattr(d, "to_triple", None)
    if to_triple is not None:
        return to_triple()
    raise StructuralError(f"cannot read a dilation triple from {type(d).__name__}")


def inflate(triple, k, omega):
    """``(P (x) M_k, rho (x) 1_k, f o (id (x) omega))``: another factorization of the same map.

    ``omega`` is a density matrix on ``C^k``. The result is a valid but, for
    ``k > 1``, non-universal factorization used to exercise mediating maps.
    """
    p = triple.P
    pk = FdVnAlgebra([n * k for n in p.blocks])
    omega = np.asarray(omega, dtype=complex)
    emb = np.zeros((pk.dim, p.dim), dtype=complex)
    red = np.zeros((p.dim, pk.dim), dtype=complex)
    eye = np.eye(k)
    for i, n in enumerate(p.blocks):
        # x -> x (x) 1 with row index (a, s)
        e = np.einsum("ac,bd,st->asbtcd", np.eye(n), np.eye(n), eye).reshape((n * k) ** 2, n * n)
        # X -> sum_{s,t} X[(a,s),(b,t)] omega[t,s]
        r = np.einsum("ac,bd,ts->cdasbt", np.eye(n), np.eye(n), omega).reshape(n * n, (n * k) ** 2)
        emb[pk.offsets[i]:pk.offsets[i] + (n * k) ** 2, p.offsets[i]:p.offsets[i] + n * n] = e
        red[p.offsets[i]:p.offsets[i] + n * n, pk.offsets[i]:pk.offsets[i] + (n * k) ** 2] = r
    rho = cm.compose(cm.from_matrix(p, pk, emb), triple.rho)
    f = cm.compose(triple.f, cm.from_matrix(pk, p, red))
    return DilationTriple(triple.phi, pk, rho, f)


def conjugated(triple, u):
    """``(P, Ad-conjugated rho, f o conjugation^-1)`` for a unitary Element ``u`` of ``P``."""
    th = cm.conjugate(cm.identity(triple.P), u)
    th_inv = cm.conjugate(cm.identity(triple.P), u.adjoint())
    return DilationTriple(triple.phi, triple.P, cm.compose(th, triple.rho), cm.compose(triple.f, th_inv))


def permuted(triple, order):
    """Reorder the blocks of ``P`` (an NMIU isomorphism) and transport ``rho`` and ``f``."""
    p = triple.P
    q = FdVnAlgebra([p.blocks[i] for i in order])
    mat = np.zeros((q.dim, p.dim))
    for new, old in enumerate(order):
        n = p.blocks[old]
        mat[q.offsets[new]:q.offsets[new] + n * n, p.offsets[old]:p.offsets[old] + n * n] = np.eye(n * n)
    th = cm.from_matrix(p, q, mat)
    th_inv = cm.from_matrix(q, p, mat.T)
    return DilationTriple(triple.phi, q, cm.compose(th, triple.rho), cm.compose(triple.f, th_inv))


def verify_dilation(dil, seed=0, samples=3, check_purity=True):
    """Run the invariant suite on a dilation; returns ``{"ok": bool, "checks": {...}}``."""
    from .mediate import mediating_map
    rng = np.random.default_rng(seed)
    tri = as_triple(dil)
    checks = {}

    def record(name, ok, residual=None, **extra):
        checks[name] = {"ok": bool(ok), "residual": None if residual is None else float(residual), **extra}

    rho_report = cm.analyze(tri.rho)
    record("rho_nmiu", rho_report.is_miu)
    f_report = cm.analyze(tri.f)
    record("f_cp", f_report.is_cp, min(0.0, f_report.min_choi_eigenvalue))
    res = cm.compose(tri.f, tri.rho).distance(tri.phi)
    record("factorization", res <= FACTOR_TOL, res)

    mod = getattr(dil, "module", None)
    if mod is not None:
        res = max(mod.orthonormality_residual(), mod.presentation_residual())
        record("module_orthonormal", res <= FACTOR_TOL, res)
        sd = mod.self_duality()
        if sd is None:
            record("self_duality", True, skipped="instance too large for the dense check")
        else:
            record("self_duality", sd[0], n_module_maps=sd[1], inner_rank=sd[2])
        if isinstance(dil, PaschkeDilation) and (f_report.is_cp and res <= FACTOR_TOL):
            worst = 0.0
            for _ in range(max(1, samples // 2)):
                g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
                omega = g @ g.conj().T
                omega /= np.trace(omega).real
                alt = inflate(tri, 2, omega)
                sigma = mediating_map(dil, alt.rho, alt.f, check=False)
                worst = max(worst, choi_lemma_residual(sigma, alt.rho, tri.rho, rng, samples))
            record("multiplicative_domain", worst <= FACTOR_TOL, worst)
    if check_purity:
        from ..purity import is_pure
        try:
            record("f_pure", is_pure(tri.f))
        except DomainError as exc:
            record("f_pure", False, error=exc.message)
    return {"ok": all(c["ok"] for c in checks.values()), "checks": checks}


def choi_lemma_residual(sigma, rho2, rho, rng, samples=3):
    """``max || sigma(rho2(a1) c rho2(a2)) - rho(a1) sigma(c) rho(a2) ||`` over random samples."""
    a = rho.domain
    worst = 0.0
    for _ in range(samples):
        a1, a2 = a.random(rng), a.random(rng)
        c = sigma.domain.random(rng)
        lhs = sigma(rho2(a1) @ c @ rho2(a2))
        rhs = rho(a1) @ sigma(c) @ rho(a2)
        worst = max(worst, lhs.distance(rhs) / max(1.0, a1.norm() * a2.norm() * c.norm()))
    return worst


__all__ = ["PaschkeDilation", "DilationTriple", "paschke_dilate", "verify_dilation", "as_triple", "inflate",
           "conjugated", "permuted", "choi_lemma_residual"]
