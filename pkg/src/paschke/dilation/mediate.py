"""Mediating maps out of alternative factorizations, by two independent routes.

Given a Paschke dilation ``(P, rho, f)`` of ``phi`` and another factorization
``phi = f' o rho'`` through ``P'`` with ``rho'`` NMIU, the mediating map
``sigma: P' -> P`` is the unique CP map with ``sigma o rho' = rho`` and
``f o sigma = f'``.

* :func:`mediating_map` reconstructs ``sigma(c)`` from its trace pairings on
  raw vectors, ``tr<a (x) b, sigma(c) a' (x) b'> = tr(b* f'(rho'(a)* c rho'(a')) b')``.
* :func:`mediating_map_via_isometry` builds the module of ``f'``, the isometry
  ``S(a (x) b) = rho'(a) (x) b`` and sets ``sigma(c) = S* (c acting on the left) S``.
"""
import numpy as np

from .. import cp_map as cm
from ..errors import DomainError, VerificationError
from ..vn_algebra import linalg
from .module import block_slice, gns_module
from .paschke import FACTOR_TOL, PaschkeDilation, as_triple


def _check_factorization(dil, rho2, f2):
    if rho2.domain != dil.phi.domain or f2.codomain != dil.phi.codomain or rho2.codomain != f2.domain:
        raise DomainError("alternative factorization has the wrong shape")
    res = cm.compose(f2, rho2).distance(dil.phi)
    if res > FACTOR_TOL * max(1.0, dil.phi.norm()):
        raise DomainError("f' o rho' differs from phi", residual=res)
    if not cm.is_miu(rho2):
        raise DomainError("rho' is not a unital *-homomorphism")


def _from_reduced(dil, p2, blocks, n_cols):
    """Assemble ``sigma: P' -> P`` from per-block reduced images of the units of P'."""
    v = np.concatenate([b.reshape(n_cols, -1) for b in blocks], axis=1)
    return cm.from_matrix(p2, dil.P, dil.theta.matrix @ v.T)


def mediating_map(dil, rho2, f2, check=True):
    """Mediating map ``P' -> P`` from the trace-pairing identity."""
    if check:
        _check_factorization(dil, rho2, f2)
    mod = dil.module
    a, b, p2 = mod.domain, mod.base, rho2.codomain
    r2 = p2.vec_to_ambient(rho2.matrix.T)  # rho'(E_u) as ambient matrices
    famb = p2.vec_to_ambient(f2.matrix)  # (dimB, D', D')
    rows, cols = p2.unit_ambient_index
    blocks = []
    for j in mod.active_blocks:
        m = b.blocks[j]
        fj = b.vec_to_ambient(famb.transpose(1, 2, 0))[..., block_slice(b, j), block_slice(b, j)]
        fj = fj.transpose(2, 3, 0, 1)  # [p, p', gamma, delta]
        lam = mod.Lambda[j].reshape(a.dim, m, -1)
        # sigma(E_{alpha beta})[x, y] = sum conj(L[u,p,x]) f'(rho'(E_u)* E_ab rho'(E_v))[p,p'] L[v,p',y]
        s = np.einsum("upx,uAg,pPgd,vPy,vBd->ABxy", lam.conj(), r2.conj(), fj, lam, r2, optimize=True)
        blocks.append(s[rows, cols])
    sigma = _from_reduced(dil, p2, blocks, p2.dim)
    if check:
        _check_mediator(dil, sigma, rho2, f2)
    return sigma


def mediating_map_via_isometry(dil, rho2, f2, check=True, return_residual=False):
    """Mediating map via the module of ``f'`` and the isometry ``S``."""
    if check:
        _check_factorization(dil, rho2, f2)
    mod = dil.module
    a, b, p2 = mod.domain, mod.base, rho2.codomain
    mod2 = gns_module(f2)
    left2 = mod2.unit_action_reduced()
    left2 = dict(zip(mod2.active_blocks, left2))
    worst = 0.0
    blocks = []
    for j in mod.active_blocks:
        m = b.blocks[j]
        if mod2.block_sizes[j] == 0:
            raise VerificationError("isometry S cannot reach an empty block of the second module")
        om2 = mod2.Omega[j].reshape(-1, p2.dim, m)
        lam = mod.Lambda[j].reshape(a.dim, m, -1)
        s = np.einsum("xwp,wu,upy->xy", om2, rho2.matrix, lam, optimize=True)
        worst = max(worst, linalg.opnorm(s.conj().T @ s - np.eye(s.shape[1])))
        blocks.append(np.einsum("xa,cxy,yb->cab", s.conj(), left2[j], s, optimize=True))
    if check and worst > FACTOR_TOL:
        raise VerificationError("S*S differs from the identity", residual=worst)
    sigma = _from_reduced(dil, p2, blocks, p2.dim)
    if check:
        _check_mediator(dil, sigma, rho2, f2)
    return (sigma, worst) if return_residual else sigma


def mediator_residuals(dil, sigma, rho2, f2):
    return {
        "sigma_rho": cm.compose(sigma, rho2).distance(dil.rho),
        "f_sigma": cm.compose(dil.f, sigma).distance(f2),
        "sigma_cp": min(0.0, sigma.choi_min_eigenvalue()),
    }


def _check_mediator(dil, sigma, rho2, f2):
    res = mediator_residuals(dil, sigma, rho2, f2)
    scale = max(1.0, dil.phi.norm())
    bad = {k: v for k, v in res.items() if abs(v) > FACTOR_TOL * scale}
    if bad:
        raise VerificationError("mediating map fails its postconditions", **bad)


def _is_bijective_miu(theta):
    rep = cm.analyze(theta)
    return rep.is_miu and theta.domain.dim == theta.codomain.dim and cm.is_injective(theta)


def mediating_isomorphism(d1, d2, return_report=False):
    """The NMIU isomorphism ``theta: P1 -> P2`` with ``theta o rho1 = rho2`` and ``f2 o theta = f1``."""
    t1, t2 = as_triple(d1), as_triple(d2)
    if t1.phi.domain != t2.phi.domain or t1.phi.codomain != t2.phi.codomain:
        raise DomainError("dilations of maps with different shapes")
    res = t1.phi.distance(t2.phi)
    if res > FACTOR_TOL * max(1.0, t1.phi.norm()):
        raise DomainError("dilations of different maps", residual=res)
    report = {}
    if isinstance(d2, PaschkeDilation):
        theta = mediating_map(d2, t1.rho, t1.f)
        if isinstance(d1, PaschkeDilation):
            back = mediating_map(d1, t2.rho, t2.f)
            report["inverse"] = cm.compose(back, theta).distance(cm.identity(t1.P))
    elif isinstance(d1, PaschkeDilation):
        back = mediating_map(d1, t2.rho, t2.f)
        if back.domain.dim != back.codomain.dim or not cm.is_injective(back):
            raise VerificationError("reverse mediating map is not invertible")
        theta = cm.from_matrix(t1.P, t2.P, np.linalg.inv(back.matrix))
        report["inverse"] = 0.0
    else:
        raise DomainError("at least one side must be a computed Paschke dilation")
    report["theta_rho"] = cm.compose(theta, t1.rho).distance(t2.rho)
    report["f_theta"] = cm.compose(t2.f, theta).distance(t1.f)
    nmiu = _is_bijective_miu(theta)
    bad = {k: v for k, v in report.items() if v > FACTOR_TOL * max(1.0, t1.phi.norm())}
    if bad or not nmiu:
        raise VerificationError("mediating isomorphism fails verification", nmiu=nmiu, **bad)
    return (theta, report) if return_report else theta


__all__ = ["mediating_map", "mediating_map_via_isometry", "mediating_isomorphism", "mediator_residuals"]
