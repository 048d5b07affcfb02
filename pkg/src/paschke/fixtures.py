"""Named channels: the worked examples plus a few utility maps.

``EXAMPLES`` lists the eight worked-example channels, in order. Every
fixture is a zero-argument function returning a fresh :class:`CpMap`.
"""
import numpy as np

from . import cp_map as cm
from .vn_algebra.algebra import FdVnAlgebra

C = FdVnAlgebra((1,))
C2 = FdVnAlgebra((1, 1))
M2 = FdVnAlgebra((2,))


def _half():
    return cm.state(C, [[0.5]])


def half_sum():
    """``C^2 -> C, (l, m) -> (l + m)/2``."""
    return cm.copairing(_half(), _half())


def diagonal_embedding():
    """``C^2 -> M_2``, the NMIU map ``(l, m) -> diag(l, m)``."""
    return cm.from_kraus(C2, M2, {(0, 0): [np.array([[1.0, 0.0]])], (1, 0): [np.array([[0.0, 1.0]])]})


def ad_isometry():
    """``Ad_V: M_3 -> M_2`` for a fixed isometry ``V`` (``V* V = 1``), the minimal-Stinespring shape."""
    s = 1.0 / np.sqrt(2.0)
    v = np.array([[1.0, 0.0], [0.0, s], [0.0, 1j * s]])
    return cm.ad(v)


def vector_state():
    """``M_2 -> C, x -> <e_1, x e_1>``: a GNS state with one-dimensional carrier."""
    return cm.state(M2, np.diag([1.0, 0.0]))


def scaled_half_sum(lam=3.0):
    """``lam`` times the half-sum."""
    return cm.scale(lam, half_sum())


def state_pairing():
    """``<omega_1, omega_2>: M_2 -> C (+) C`` for a vector state and the normalized trace."""
    return cm.pairing(vector_state(), cm.state(M2, np.eye(2) / 2))


def half_sum_factor():
    """``M_2 -> C, [[a, b], [c, d]] -> (a + b + c + d)/2``: the second leg of the half-sum dilation."""
    return cm.state(M2, np.full((2, 2), 0.5))


def conjugated_embedding():
    """``Ad_{u*} o diag``: the diagonal embedding moved along a fixed isomorphism of ``M_2``."""
    u = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    return cm.conjugate(diagonal_embedding(), M2.element([u]))


def transpose2():
    """The transpose on ``M_2``: positive but not completely positive."""
    return cm.transpose_map(2)


def identity2():
    return cm.identity(M2)


def mixed_unitary():
    """``id/2 + Ad_u/2`` with ``u = diag(1, -1)``: unital, CP and not extreme."""
    u = np.diag([1.0, -1.0])
    return cm.convex([0.5, 0.5], [identity2(), cm.ad(u)])


EXAMPLES = (
    "half_sum", "diagonal_embedding", "ad_isometry", "vector_state", "scaled_half_sum", "state_pairing",
    "half_sum_factor", "conjugated_embedding",
)

FIXTURES = {
    "half_sum": half_sum,
    "diagonal_embedding": diagonal_embedding,
    "ad_isometry": ad_isometry,
    "vector_state": vector_state,
    "scaled_half_sum": scaled_half_sum,
    "state_pairing": state_pairing,
    "half_sum_factor": half_sum_factor,
    "conjugated_embedding": conjugated_embedding,
    "transpose": transpose2,
    "identity": identity2,
    "mixed_unitary": mixed_unitary,
}


def get(name):
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(sorted(FIXTURES))}") from None


__all__ = ["EXAMPLES", "FIXTURES", "get"]
