"""Purity, Stormer purity, NCP-extremality and the subchannel correspondence.

For a Paschke dilation ``(P, rho, f)`` of ``phi``, effects ``t`` of the
relative commutant ``rho(A)' (in P)`` correspond to the maps below ``phi``
via ``phi_t(a) = f(sqrt(t) rho(a) sqrt(t))``. Extremality and Stormer purity
are decided on that commutant; plain purity is decided on ``phi_angle``.
"""
from dataclasses import dataclass

import numpy as np

from . import cp_map as cm
from . import settings
from .dilation.module import block_slice
from .dilation.paschke import FACTOR_TOL, DilationTriple, PaschkeDilation, paschke_dilate
from .errors import DomainError
from .vn_algebra import linalg
from .vn_algebra.algebra import Corner, Element, central_carrier
from .vn_algebra.concrete import ConcreteStarAlgebra, commutant


def _require_nonzero(phi):
    phi.require_cp()
    if phi.norm() <= settings.tau(1.0):
        raise DomainError("the zero map")


def _check_dilates(phi, dil):
    if dil.phi.domain != phi.domain or dil.phi.codomain != phi.codomain or dil.phi.distance(phi) > FACTOR_TOL:
        raise DomainError("dilation does not belong to this map")


def _dilation(phi, dil, seed=0):
    if dil is None:
        return paschke_dilate(phi, seed=seed)
    _check_dilates(phi, dil)
    return dil


def is_isomorphism(theta):
    """NMIU bijection test: equal dimensions, invertible linear map, multiplicative and unital."""
    if sorted(theta.domain.blocks) != sorted(theta.codomain.blocks):
        return False
    if not cm.is_injective(theta):
        return False
    return cm.analyze(theta).is_miu


def is_pure(phi):
    """``phi`` is pure when ``phi_angle`` is an isomorphism."""
    _require_nonzero(phi)
    return is_isomorphism(cm.angle_decomposition(phi).angle)


def is_pure_via_dilation(phi, dil=None, seed=0):
    """``phi`` is pure iff ``rho`` is surjective onto ``P``."""
    _require_nonzero(phi)
    dil = _dilation(phi, dil, seed)
    return linalg.rank(dil.rho.matrix) == dil.P.dim


def relative_commutant(dil):
    """Basis (rows, vec coordinates of ``P``) of ``rho(A)'`` inside ``P``, one factor at a time."""
    p = dil.P
    rho = dil.rho
    imgs = p.vec_to_ambient(rho.matrix.T)
    rows = []
    for k, n in enumerate(p.blocks):
        sl = block_slice(p, k)
        gens = imgs[:, sl, sl]
        comm = commutant(ConcreteStarAlgebra(gens, n))
        for bmat in comm.basis:
            full = np.zeros((p.ambient_dim, p.ambient_dim), dtype=complex)
            full[sl, sl] = bmat
            rows.append(p.ambient_to_vec(full))
    return np.array(rows)


def is_stormer_pure(phi, dil=None, seed=0):
    """``rho(A)'`` is one-dimensional; only defined for maps into a full matrix algebra."""
    if len(phi.codomain.blocks) != 1:
        raise DomainError("Stormer purity needs a single full block as codomain")
    _require_nonzero(phi)
    dil = _dilation(phi, dil, seed)
    return len(relative_commutant(dil)) == 1


def is_ncp_extreme(phi, dil=None, seed=0):
    """``t -> f(t)`` has trivial kernel on ``rho(A)'``."""
    _require_nonzero(phi)
    dil = _dilation(phi, dil, seed)
    basis = relative_commutant(dil)
    vals = dil.f.matrix @ basis.T
    return linalg.rank(vals) == len(basis)


# subchannels -----------------------------------------------------------------
@dataclass(frozen=True)
class SubchannelWitness:
    dilation: object
    t: Element
    psi: cm.CpMap


def commutes_with_rho(dil, t, tol=None):
    p = dil.P
    tm = p.left_mult_matrix(t) - p.right_mult_matrix(t)
    tol = settings.tau(max(1.0, t.norm())) if tol is None else tol
    return np.abs(tm @ dil.rho.matrix).max(initial=0.0) <= tol


def subchannel_from_t(dil, t):
    """``phi_t(a) = f(sqrt(t) rho(a) sqrt(t))`` for an effect ``t`` commuting with ``rho(A)``."""
    if t.algebra != dil.P:
        raise DomainError("t is not an element of the dilation algebra")
    if not t.is_effect():
        raise DomainError("t is not an effect")
    if not commutes_with_rho(dil, t):
        raise DomainError("t does not commute with rho(A)")
    s = t.sqrt()
    p = dil.P
    mat = dil.f.matrix @ p.left_mult_matrix(s) @ p.right_mult_matrix(s) @ dil.rho.matrix
    return cm.from_matrix(dil.phi.domain, dil.phi.codomain, mat)


def _raw_forms(dil, psi):
    """``psi(E_u* E_u')`` restricted to each active codomain block, as ``(dimA*m, dimA*m)`` matrices."""
    mod = dil.module
    a, b = mod.domain, mod.base
    y = b.vec_to_ambient(psi.apply_vecs(mod._raw_products))
    out = {}
    for j in mod.active_blocks:
        m = b.blocks[j]
        out[j] = y[..., block_slice(b, j), block_slice(b, j)].transpose(0, 2, 1, 3).reshape(a.dim * m, a.dim * m)
    return out


def t_from_subchannel(dil, psi, return_residual=False):
    """Recover ``t`` with ``phi_t = psi`` from the pairing ``tr<x, t y> = tr[x, y]_psi``."""
    if not isinstance(dil, PaschkeDilation):
        raise DomainError("t_from_subchannel needs a computed Paschke dilation")
    if psi.domain != dil.phi.domain or psi.codomain != dil.phi.codomain:
        raise DomainError("psi has the wrong shape")
    if not psi.is_cp() or not (dil.phi - psi).is_cp():
        raise DomainError("psi is not between 0 and phi")
    # a block of psi can be nonzero only where phi is
    mod = dil.module
    for j, m in enumerate(mod.base.blocks):
        if j not in mod.active_blocks:
            blk = mod.base.vec_to_ambient(psi.matrix.T)[:, block_slice(mod.base, j), block_slice(mod.base, j)]
            if np.abs(blk).max(initial=0.0) > settings.tau(1.0):
                raise DomainError("psi is not between 0 and phi")
    forms = _raw_forms(dil, psi)
    reduced = mod.operator_from_raw_form(forms)
    t = dil.P.unvec(dil.reduced_to_P(reduced))
    t = t.hermitian_part()
    if not commutes_with_rho(dil, t, tol=1e-8 * max(1.0, t.norm())):
        raise DomainError("reconstructed t does not commute with rho(A)")
    if not t.is_effect(tol=1e-8):
        raise DomainError("reconstructed t is not an effect", spectrum=[float(x) for x in t.spectrum()])
    tc = _clip_effect(t)
    back = subchannel_from_t(dil, tc)
    residual = back.distance(psi)
    if residual > 1e-8 * max(1.0, dil.phi.norm()):
        raise DomainError("round trip psi -> t -> phi_t failed", residual=residual)
    return (tc, residual) if return_residual else tc


def _clip_effect(t):
    out = []
    for b in t.data:
        w, v = linalg.eigh(b)
        out.append((v * np.clip(w, 0.0, 1.0)) @ v.conj().T)
    return Element(t.algebra, out)


def subchannel_witness(dil, t):
    return SubchannelWitness(dilation=dil, t=t, psi=subchannel_from_t(dil, t))


def random_commutant_effect(dil, rng):
    """A random effect of ``rho(A)'``: a normalized random positive element of the commutant."""
    basis = relative_commutant(dil)
    coeff = linalg.random_complex(len(basis), rng)
    x = dil.P.unvec(coeff @ basis)
    h = x @ x.adjoint()
    h = h / max(h.norm(), 1e-300)
    return h.hermitian_part()


# special dilations ---------------------------------------------------------
def corner_dilation(algebra, p):
    """``(C_p A, h_{C_p}, h_p restricted)`` as a dilation of the standard corner ``h_p``."""
    z = central_carrier(p)
    hp = cm.standard_corner(p)
    cz = Corner(algebra, z)
    rho = cm.corner_map(cz)
    f = cm.compose(hp, cm.corner_embedding(cz))
    return DilationTriple(phi=hp, P=cz.algebra, rho=rho, f=f)


def compression_data(c, tol=1e-8):
    """Recognize ``c = c_b o theta`` for an isomorphism ``theta``; returns ``(b, theta)`` or raises."""
    if not c.is_cp():
        raise DomainError("compression must be CP")
    b = c.one_image().hermitian_part()
    if not b.is_effect(tol=tol):
        raise DomainError("c(1) is not an effect")
    if not cm.is_injective(c):
        raise DomainError("a compression is injective")
    cb = cm.standard_compression(b)
    # c and c_b must have the same range; theta = c_b^{-1} c
    theta_mat = np.linalg.pinv(cb.matrix, rcond=1e-12) @ c.matrix
    if linalg.opnorm(cb.matrix @ theta_mat - c.matrix) > tol * max(1.0, linalg.opnorm(c.matrix)):
        raise DomainError("c does not factor through the standard compression of c(1)")
    theta = cm.from_matrix(c.domain, cb.domain, theta_mat)
    if not is_isomorphism(theta):
        raise DomainError("c is not an isomorphism followed by the standard compression")
    return b, theta


def dilation_after_compression(dil, c):
    """``(P, rho, c o f)`` as a dilation of ``c o phi`` for a compression ``c``."""
    compression_data(c)
    tri = dil.triple() if isinstance(dil, PaschkeDilation) else dil
    if c.domain != tri.phi.codomain:
        raise DomainError("compression does not start at the codomain of phi")
    return DilationTriple(phi=cm.compose(c, tri.phi), P=tri.P, rho=tri.rho, f=cm.compose(c, tri.f))


def injectivity_criterion(phi, dil=None, seed=0):
    """``(predicted, actual)``: ``C_{car phi} = 1`` against ``rho`` having trivial kernel."""
    dil = _dilation(phi, dil, seed)
    car = cm.carrier(phi)
    predicted = central_carrier(car).allclose(phi.domain.one())
    actual = linalg.rank(dil.rho.matrix) == phi.domain.dim
    return bool(predicted), bool(actual)


# brute-force extremality oracle ----------------------------------------------
def perturbation_space(phi):
    """Hermitian ``Delta`` with Choi support in ``ran Choi(phi)`` and ``Delta(1) = 0``.

    ``phi +- eps Delta`` is then CP for small ``eps`` and agrees with ``phi`` at 1,
    so a nonzero element witnesses non-extremality. Rows are superoperators.
    """
    a, b = phi.domain, phi.codomain
    cols = []
    keys = sorted(phi.choi)
    spans = {}
    for key in keys:
        c = phi.choi[key]
        w, v = linalg.eigh(c)
        keep = w > settings.tau(np.abs(w).max(initial=0.0))
        spans[key] = v[:, keep]
    # real parametrization of Hermitian X_key (r x r): Delta_key = Q X Q*
    params = []
    for key in keys:
        q = spans[key]
        r = q.shape[1]
        for s in range(r):
            for t in range(s, r):
                for part in ((1.0,) if s == t else (1.0, 1j)):
                    x = np.zeros((r, r), dtype=complex)
                    x[s, t] = part
                    x[t, s] = np.conj(part)
                    params.append((key, q @ x @ q.conj().T))
    if not params:
        return np.zeros((0, b.dim, a.dim), dtype=complex)
    mats = []
    for key, delta in params:
        mats.append(cm.CpMap(a, b, {key: delta}).matrix)
    mats = np.array(mats)
    one = a.one().vec()
    vals = mats @ one  # (P, dimB) complex; real-linear constraint on real coefficients
    cons = np.concatenate([vals.real, vals.imag], axis=1).T
    coeffs = _real_null_space(cons)
    return np.einsum("pk,pxy->kxy", coeffs, mats)


def _real_null_space(m):
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    r = int((s > settings.tau(s[0] if s.size else 0.0)).sum())
    return vh[r:].T


def find_extremality_witness(phi, rng, trials=8):
    """Search for ``phi = (psi1 + psi2)/2`` with ``psi_i`` CP, ``psi_i(1) = phi(1)``, ``psi1 != psi2``.

    Returns ``(psi1, psi2)`` or ``None``. Directions come from
    :func:`perturbation_space`; the step is found by bisection on CP-ness.
    """
    space = perturbation_space(phi)
    if len(space) == 0:
        return None
    for _ in range(trials):
        c = rng.standard_normal(len(space))
        delta = np.einsum("k,kxy->xy", c, space)
        if linalg.opnorm(delta) <= 1e-10:
            continue
        d = cm.from_matrix(phi.domain, phi.codomain, delta / linalg.opnorm(delta))
        lo, hi = 0.0, 1.0
        while (phi + d * hi).is_cp() and (phi - d * hi).is_cp() and hi < 1e6:
            hi *= 2.0
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if (phi + d * mid).is_cp() and (phi - d * mid).is_cp():
                lo = mid
            else:
                hi = mid
        eps = 0.5 * lo
        if eps <= 1e-8:
            continue
        psi1, psi2 = phi + d * eps, phi - d * eps
        if psi1.is_cp() and psi2.is_cp() and psi1.distance(psi2) > 1e-8:
            return psi1, psi2
    return None


# report ------------------------------------------------------------------------
def purity_report(phi, seed=0):
    """The purity analysis bundle emitted by the CLI."""
    _require_nonzero(phi)
    dil = paschke_dilate(phi, seed=seed)
    car = cm.carrier(phi)
    predicted, actual = injectivity_criterion(phi, dil)
    pure = is_pure(phi)
    via = is_pure_via_dilation(phi, dil)
    stormer = is_stormer_pure(phi, dil) if len(phi.codomain.blocks) == 1 else None
    return {
        "pure": pure,
        "stormer_pure": stormer,
        "ncp_extreme": is_ncp_extreme(phi, dil),
        "carrier": car,
        "central_carrier_of_carrier": central_carrier(car),
        "rho_injective": actual,
        "rho_surjective": via,
        "residuals": {
            "factorization": float(dil.residuals["factorization"]),
            "pure_agrees_with_dilation": bool(pure == via),
            "injectivity_predicted": predicted,
        },
        "seed": seed,
    }


__all__ = [
    "is_pure", "is_pure_via_dilation", "is_stormer_pure", "is_ncp_extreme", "is_isomorphism",
    "relative_commutant", "subchannel_from_t", "t_from_subchannel", "SubchannelWitness", "subchannel_witness",
    "random_commutant_effect", "corner_dilation", "compression_data", "dilation_after_compression",
    "injectivity_criterion", "perturbation_space", "find_extremality_witness", "purity_report",
    "commutes_with_rho",
]
