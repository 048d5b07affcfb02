"""Minimal Stinespring dilations ``phi = V* pi(.) V`` of maps into a full matrix algebra."""
from dataclasses import dataclass

import numpy as np

from .. import cp_map as cm
from .. import settings
from ..errors import DomainError
from ..vn_algebra import linalg
from ..vn_algebra.algebra import FdVnAlgebra
from .module import raw_products, unit_left_action
from .paschke import DilationTriple

STINESPRING_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class StinespringDilation:
    phi: cm.CpMap
    K_dim: int
    pi: object  # CpMap A -> M_K, or None when K_dim == 0
    V: np.ndarray  # K x m
    minimal: bool

    def to_triple(self):
        """``(B(K), pi, Ad_V)`` as a factorization of ``phi``."""
        if self.K_dim == 0:
            raise DomainError("the zero dilation has no middle algebra")
        return DilationTriple(self.phi, FdVnAlgebra((self.K_dim,)), self.pi, cm.ad(self.V))

    def spanning_vectors(self):
        """Columns ``pi(E_u) V e_p`` over all matrix units ``E_u`` and basis vectors ``e_p``."""
        a = self.phi.domain
        if self.K_dim == 0:
            return np.zeros((0, a.dim * self.V.shape[1]), dtype=complex)
        imgs = self.pi.matrix.T.reshape(a.dim, self.K_dim, self.K_dim)
        return np.einsum("uab,bp->aup", imgs, self.V).reshape(self.K_dim, -1)

    def residual(self):
        """``max_u ||V* pi(E_u) V - phi(E_u)||``."""
        a = self.phi.domain
        want = self.phi.matrix.T.reshape(a.dim, *(self.phi.codomain.blocks * 2))
        if self.K_dim == 0:
            return float(np.abs(want).max(initial=0.0))
        imgs = self.pi.matrix.T.reshape(a.dim, self.K_dim, self.K_dim)
        got = np.einsum("ap,uab,bq->upq", self.V.conj(), imgs, self.V)
        return float(np.abs(got - want).max(initial=0.0))


def _require_factor(phi):
    if len(phi.codomain.blocks) != 1:
        raise DomainError("Stinespring dilation needs a single full block as codomain; use paschke_dilate")


def minimal_stinespring(phi):
    """GNS construction on ``A (x) C^m`` with ``<a (x) x, a' (x) y> = <x, phi(a* a') y>``."""
    phi.require_cp()
    _require_factor(phi)
    a = phi.domain
    m = phi.codomain.blocks[0]
    prods = phi.apply_vecs(raw_products(a)).reshape(a.dim, a.dim, m, m)
    gram = prods.transpose(0, 2, 1, 3).reshape(a.dim * m, a.dim * m)
    w, u = linalg.eigh(gram)
    keep = w > settings.tau(np.abs(w).max(initial=0.0))
    k = int(keep.sum())
    if k == 0:
        return StinespringDilation(phi=phi, K_dim=0, pi=None, V=np.zeros((0, m), dtype=complex), minimal=True)
    uk, wk = u[:, keep], w[keep]
    present = (uk * np.sqrt(wk)).conj().T  # K x (dimA m), present^* present = gram on the range
    lift = uk / np.sqrt(wk)
    pi_imgs = unit_left_action(a, present.reshape(k, a.dim, m), lift.reshape(a.dim, m, k))
    one = a.one().vec()
    v = np.einsum("kxp,x->kp", present.reshape(k, a.dim, m), one)
    pi = cm.from_matrix(a, (k,), pi_imgs.reshape(a.dim, k * k).T)
    out = StinespringDilation(phi=phi, K_dim=k, pi=pi, V=v, minimal=True)
    return out


def is_minimal(dil):
    if dil.K_dim == 0:
        return True
    return linalg.rank(dil.spanning_vectors()) == dil.K_dim


def from_kraus_stinespring(phi, kraus):
    """The (possibly non-minimal) dilation ``K = C^n (x) C^r``, ``pi = id (x) 1``, ``V = sum K_s (x) e_s``."""
    _require_factor(phi)
    if len(phi.domain.blocks) != 1:
        raise DomainError("Kraus style dilation is implemented for a single domain block")
    n = phi.domain.blocks[0]
    ks = [np.asarray(x, dtype=complex) for x in kraus]
    r = len(ks)
    v = np.stack(ks, axis=1).reshape(n * r, -1)  # rows (row of K, s)
    pi = cm.from_function(phi.domain, (n * r,), lambda x: FdVnAlgebra((n * r,)).element(
        [np.kron(x.data[0], np.eye(r))]))
    dil = StinespringDilation(phi=phi, K_dim=n * r, pi=pi, V=v, minimal=False)
    return StinespringDilation(phi=phi, K_dim=n * r, pi=pi, V=v, minimal=is_minimal(dil))


def padded(dil, extra, rng):
    """Append an orthogonal summand: ``pi' = pi (+) pi_extra``, ``V' = [V; 0]``.

    ``pi_extra`` is ``extra`` copies of a random block-selection representation
    of the domain, so the padding is a genuine (non-minimal) dilation.
    """
    a = dil.phi.domain
    i = int(rng.integers(len(a.blocks)))
    n = a.blocks[i]
    k2 = dil.K_dim + extra * n
    big = FdVnAlgebra((k2,))

    def pi2(x):
        out = np.zeros((k2, k2), dtype=complex)
        out[:dil.K_dim, :dil.K_dim] = dil.pi(x).data[0]
        out[dil.K_dim:, dil.K_dim:] = np.kron(np.eye(extra), x.data[i])
        return big.element([out])

    v = np.vstack([dil.V, np.zeros((extra * n, dil.V.shape[1]))])
    return StinespringDilation(phi=dil.phi, K_dim=k2, pi=cm.from_function(a, big, pi2), V=v, minimal=False)


def conjugated_stinespring(dil, u):
    """``(K, Ad_{u*} o pi, u V)``: the same dilation in a rotated basis."""
    k = FdVnAlgebra((dil.K_dim,))
    ue = k.element([u])
    pi = cm.conjugate(dil.pi, ue)
    return StinespringDilation(phi=dil.phi, K_dim=dil.K_dim, pi=pi, V=u @ dil.V, minimal=dil.minimal)


def stinespring_isometry(minimal, other):
    """The isometry ``S`` with ``S pi(a) V x = pi'(a) V' x``."""
    if minimal.phi.distance(other.phi) > 1e-8 * max(1.0, minimal.phi.norm()):
        raise DomainError("the two dilations dilate different maps")
    if not minimal.minimal:
        raise DomainError("the first dilation must be minimal")
    a_span = minimal.spanning_vectors()
    b_span = other.spanning_vectors()
    s = b_span @ np.linalg.pinv(a_span, rcond=1e-12)
    residual = linalg.opnorm(s @ a_span - b_span) / max(1.0, linalg.opnorm(b_span))
    return s, residual


def isometry_residuals(minimal, other, s):
    k = minimal.K_dim
    a = minimal.phi.domain
    out = {
        "isometry": linalg.opnorm(s.conj().T @ s - np.eye(k)),
        "SV": linalg.opnorm(s @ minimal.V - other.V),
    }
    p1 = minimal.pi.matrix.T.reshape(a.dim, k, k)
    p2 = other.pi.matrix.T.reshape(a.dim, other.K_dim, other.K_dim)
    out["intertwine"] = float(np.abs(np.einsum("ai,uab,bj->uij", s.conj(), p2, s) - p1).max(initial=0.0))
    return out


def proportionality_check(s, t, tol=1e-9):
    """``lambda`` with ``S = lambda T`` when ``Ad_S = Ad_T``; else ``None``. ``S = T = 0`` gives 1."""
    s, t = np.atleast_2d(np.asarray(s, dtype=complex)), np.atleast_2d(np.asarray(t, dtype=complex))
    if s.shape != t.shape:
        raise DomainError("matrices of different shapes")
    # Ad_S(E_ab) = S* E_ab S = conj(S[a, :])^T S[b, :]
    ad_s = np.einsum("ai,bj->abij", s.conj(), s)
    ad_t = np.einsum("ai,bj->abij", t.conj(), t)
    scale = max(1.0, np.abs(ad_s).max(initial=0.0), np.abs(ad_t).max(initial=0.0))
    if np.abs(ad_s - ad_t).max(initial=0.0) > tol * scale:
        return None
    nt = np.vdot(t, t).real
    if nt <= tol ** 2:
        return 1.0 + 0j
    return complex(np.vdot(t, s) / nt)


__all__ = ["StinespringDilation", "minimal_stinespring", "stinespring_isometry", "proportionality_check",
           "is_minimal", "padded", "conjugated_stinespring", "from_kraus_stinespring", "isometry_residuals"]
