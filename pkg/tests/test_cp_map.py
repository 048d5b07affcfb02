import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paschke import cp_map as cm
from paschke.errors import DomainError, StructuralError
from paschke.vn_algebra import FdVnAlgebra, ceil, linalg

from .strategies import algebras, random_density, random_map, seeds

M2 = FdVnAlgebra((2,))
M3 = FdVnAlgebra((3,))
C = FdVnAlgebra((1,))


def _kraus_apply(ks, x):
    return sum(k.conj().T @ x @ k for k in ks)


@given(seeds, st.integers(1, 3), st.integers(1, 3), st.integers(1, 3))
def test_kraus_constructor_matches_direct_application(seed, n, m, r):
    rng = np.random.default_rng(seed)
    ks = [linalg.random_complex((n, m), rng) for _ in range(r)]
    phi = cm.from_kraus((n,), (m,), {(0, 0): ks})
    x = FdVnAlgebra((n,)).random(rng)
    np.testing.assert_allclose(phi(x).data[0], _kraus_apply(ks, x.data[0]), atol=1e-10)
    # derived Kraus operators reproduce the map and their number is the Choi rank
    derived = phi.kraus()[(0, 0)]
    assert len(derived) == phi.choi_ranks()[(0, 0)] == np.linalg.matrix_rank(np.stack([k.ravel() for k in ks]))
    np.testing.assert_allclose(_kraus_apply(derived, x.data[0]), phi(x).data[0], atol=1e-9)


@given(algebras(), algebras(), seeds)
def test_from_matrix_round_trip(a, b, seed):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, a, b)
    psi = cm.from_matrix(a, b, phi.matrix)
    for key, c in phi.choi.items():
        np.testing.assert_allclose(psi.choi[key], c, atol=1e-12)
    x = a.random(rng)
    assert psi(x).allclose(phi(x))


def test_analyze_identity():
    rep = cm.analyze(cm.identity(M2))
    assert rep.is_miu and rep.is_unital and rep.is_cp
    assert rep.cp_norm == pytest.approx(1.0)


def test_analyze_isometric_ad_is_unital_but_not_multiplicative():
    v = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    v = np.array([[1.0, 0.0], [0.0, 1 / np.sqrt(2)], [0.0, 1 / np.sqrt(2)]])
    rep = cm.analyze(cm.ad(v))
    assert rep.is_cp and rep.is_unital and not rep.is_miu


def test_transpose_is_not_cp():
    t = cm.transpose_map(2)
    rep = cm.analyze(t)
    assert not rep.is_cp
    assert rep.min_choi_eigenvalue == pytest.approx(-1.0)
    with pytest.raises(DomainError, match="not completely positive") as info:
        t.require_cp()
    assert info.value.details["min_choi_eigenvalue"] == pytest.approx(-1.0)


def test_amplify_order_one_is_identity_operation(rng):
    phi = random_map(rng, M2, M3)
    assert cm.amplify(phi, 1).allclose(phi)


def test_amplified_transpose_on_maximally_entangled_projection():
    omega = np.zeros(4)
    omega[[0, 3]] = 1 / np.sqrt(2)
    proj = np.outer(omega, omega)
    t2 = cm.amplify(cm.transpose_map(2), 2)
    # M_2(M_2) block (a, c) holds the 2x2 block row a, column c
    blocks = proj.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3)
    big = np.einsum("acij->aicj", blocks).reshape(4, 4)
    out = t2(FdVnAlgebra((4,)).element([big])).data[0]
    assert np.linalg.eigvalsh(out).min() == pytest.approx(-0.5)


@given(seeds, st.integers(1, 3))
def test_cp_iff_amplification_positive(seed, n):
    rng = np.random.default_rng(seed)
    a = FdVnAlgebra((n,))
    maps = [random_map(rng, a, M2), cm.transpose_map(n) if n > 1 else random_map(rng, a, a)]
    for phi in maps:
        amp = cm.amplify(phi, n)
        worst = np.inf
        for _ in range(6):
            g = linalg.random_complex((n * n, 1), rng)
            out = amp(amp.domain.element([g @ g.conj().T]))
            worst = min(worst, min(np.linalg.eigvalsh(b).min() for b in out.data))
        # the maximally entangled input decides it exactly
        omega = np.eye(n).reshape(-1)
        out = amp(amp.domain.element([np.outer(omega, omega)]))
        worst = min(worst, min(np.linalg.eigvalsh(b).min() for b in out.data))
        assert (worst >= -1e-9) == phi.is_cp()


def test_trace_dual_examples(rng):
    assert cm.trace_dual(cm.identity(M2)).allclose(cm.identity(M2))
    v = linalg.random_complex((3, 2), rng)
    dual = cm.trace_dual(cm.ad(v))
    y = M2.random(rng)
    np.testing.assert_allclose(dual(y).data[0], v @ y.data[0] @ v.conj().T, atol=1e-10)


@given(algebras(), algebras(), seeds)
def test_trace_dual_pairing_and_involution(a, b, seed):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, a, b)
    dual = cm.trace_dual(phi)
    x, y = a.random(rng), b.random(rng)
    assert (phi(x) @ y).trace() == pytest.approx((x @ dual(y)).trace(), abs=1e-9 * max(1.0, phi.norm() * 30))
    assert cm.trace_dual(dual).distance(phi) <= 1e-10
    assert dual.is_cp()


def test_carrier_examples():
    corner = cm.state(M2, np.diag([1.0, 0.0]))
    assert cm.carrier(corner).allclose(M2.element([np.diag([1.0, 0.0])]))
    assert cm.carrier(cm.trace_functional(M2)).allclose(M2.one())
    with pytest.raises(DomainError):
        cm.carrier(cm.transpose_map(2))


@given(seeds, st.integers(1, 2))
def test_carrier_against_spectral_projection_oracle(seed, r):
    rng = np.random.default_rng(seed)
    # a map on M3 whose Kraus operators share a common (3 - r)-dimensional left kernel
    basis = linalg.random_unitary(3, rng)
    rows = basis[:, :r]
    ks = [rows @ linalg.random_complex((r, 2), rng) for _ in range(2)]
    phi = cm.from_kraus(M3, M2, {(0, 0): ks})
    car = cm.carrier(phi)
    assert car.rank() == r
    # brute force: phi(q) = 0 exactly for spectral projections q of 1 - car and q <= 1 - car
    comp = M3.one() - car
    assert phi(comp).norm() <= 1e-9
    w, v = np.linalg.eigh(car.data[0])
    for k in range(3):
        q = M3.element([np.outer(v[:, k], v[:, k].conj())])
        killed = phi(q).norm() <= 1e-9
        assert killed == (w[k] < 0.5)
    assert phi(car).allclose(phi.one_image(), tol=1e-9)


@given(seeds)
def test_carrier_minimality(seed):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, FdVnAlgebra((2, 2)), M2, drop=0.5)
    car = cm.carrier(phi)
    for _ in range(4):
        q = phi.domain.random_projection(rng)
        q = ((q + car) @ (q + car)).hermitian_part()
        q = ceil(q / q.norm())
        if phi(q).allclose(phi.one_image(), tol=1e-9):
            assert (q - car).is_positive(tol=1e-9)


def test_standard_corner_examples():
    assert cm.standard_corner(M2.one()).allclose(cm.identity(M2))
    h = cm.standard_corner(M2.element([np.diag([1.0, 0.0])]))
    assert h.codomain.blocks == (1,)
    b = np.array([[2.0, 3.0], [5.0, 7.0]])
    assert h(M2.element([b])).data[0][0, 0] == pytest.approx(2.0)


@given(algebras(), seeds)
def test_standard_corner_properties(a, seed):
    rng = np.random.default_rng(seed)
    e = a.random_effect(rng)
    p = a.random_projection(rng)
    e = (e @ (a.one() - p) @ e + p).hermitian_part()
    e = e / max(1.0, e.norm())
    try:
        h = cm.standard_corner(e)
    except DomainError:
        return  # floor(e) = 0
    rep = cm.analyze(h)
    assert rep.is_cp and rep.is_contractive
    assert linalg.rank(h.matrix) == h.codomain.dim
    assert h(e).allclose(h.one_image(), tol=1e-8)


def test_standard_compression_examples():
    assert cm.standard_compression(M2.one()).allclose(cm.identity(M2))
    half = cm.standard_compression(M2.one() * 0.5)
    assert half.allclose(cm.identity(M2) * 0.5)


@given(algebras(), seeds)
def test_standard_compression_properties(a, seed):
    rng = np.random.default_rng(seed)
    e = a.random_effect(rng)
    c = cm.standard_compression(e)
    assert c.one_image().allclose(e, tol=1e-10)
    assert linalg.rank(c.matrix) == c.domain.dim
    # order embedding on self-adjoints: c(x) >= 0 iff x >= 0
    x = c.domain.random_hermitian(rng)
    assert c(x).is_positive(tol=1e-9) == x.is_positive(tol=1e-9)


@given(algebras(), seeds)
def test_corner_after_compression_is_identity_for_projections(a, seed):
    rng = np.random.default_rng(seed)
    p = a.random_projection(rng)
    if p.norm() < 0.5:
        return
    h, c = cm.standard_corner(p), cm.standard_compression(p)
    assert cm.compose(h, c).distance(cm.identity(c.domain)) <= 1e-9


def test_angle_of_unital_faithful_map_is_itself(rng):
    phi = cm.convex([0.5, 0.5], [cm.identity(M2), cm.ad(linalg.random_unitary(2, rng))])
    dec = cm.angle_decomposition(phi)
    assert dec.angle.allclose(phi, tol=1e-9)


def test_angle_of_invertible_compression_is_identity(rng):
    w = rng.uniform(0.2, 0.9, 3)
    u = linalg.random_unitary(3, rng)
    a = M3.element([(u * w) @ u.conj().T])
    dec = cm.angle_decomposition(cm.standard_compression(a))
    assert dec.angle.allclose(cm.identity(M3), tol=1e-9)


@given(algebras(), algebras(), seeds)
def test_angle_decomposition_recomposes(a, b, seed):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, a, b, drop=0.4)
    dec = cm.angle_decomposition(phi)
    assert dec.composite().distance(phi) <= 1e-9 * max(1.0, phi.norm())
    assert cm.analyze(dec.angle).is_unital
    assert cm.is_faithful(dec.angle)


def test_angle_decomposition_rejects_zero_map():
    with pytest.raises(DomainError):
        cm.angle_decomposition(cm.zero(M2, M2))


def test_combinator_examples(rng):
    phi = random_map(rng, M2, M3)
    assert cm.scale(1, phi).allclose(phi)
    s1, s2 = cm.state(M2, random_density(rng, 2)), cm.state(M2, random_density(rng, 2))
    assert cm.direct_sum(s1, s2).codomain.blocks == (1, 1)
    assert cm.pairing(s1, s2).codomain.blocks == (1, 1)
    u = linalg.random_unitary(2, rng)
    mix = cm.convex([0.5, 0.5], [cm.identity(M2), cm.ad(u)])
    rep = cm.analyze(mix)
    assert rep.is_cp and rep.is_unital


def test_combinators_reject_bad_inputs(rng):
    phi = random_map(rng, M2, M3)
    with pytest.raises(DomainError):
        cm.scale(-1.0, phi)
    with pytest.raises(DomainError):
        cm.convex([0.7, 0.7], [phi, phi])
    with pytest.raises(StructuralError):
        cm.compose(phi, phi)
    with pytest.raises(StructuralError):
        cm.pairing(phi, cm.identity(M3))


@given(algebras(), algebras(), seeds)
def test_combinators_preserve_cp_and_act_blockwise(a, b, seed):
    rng = np.random.default_rng(seed)
    f1, f2 = random_map(rng, a, b), random_map(rng, a, b)
    x = a.random(rng)
    pair = cm.pairing(f1, f2)
    assert pair.is_cp()
    assert cm.compose(cm.block_projection(pair.codomain, 0), pair).allclose(
        cm.compose(cm.block_projection(b, 0), f1)) if len(b.blocks) == 1 else True
    px = pair(x)
    nb = len(b.blocks)
    for k in range(nb):
        np.testing.assert_allclose(px.data[k], f1(x).data[k], atol=1e-9)
        np.testing.assert_allclose(px.data[nb + k], f2(x).data[k], atol=1e-9)
    ds = cm.direct_sum(f1, f2)
    assert ds.is_cp()
    y = a.random(rng)
    both = ds(ds.domain.element(list(x.data) + list(y.data)))
    for k in range(nb):
        np.testing.assert_allclose(both.data[k], f1(x).data[k], atol=1e-9)
        np.testing.assert_allclose(both.data[nb + k], f2(y).data[k], atol=1e-9)
    assert cm.convex([0.3, 0.7], [f1, f2]).is_cp()


@given(algebras(), algebras(), seeds)
def test_cp_norm_matches_norm_on_positive_inputs(a, b, seed):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, a, b)
    best = 0.0
    for _ in range(200):
        e = a.random_effect(rng)
        best = max(best, phi(e).norm())
    # Russo-Dye: the supremum over effects is attained at 1
    assert best <= phi.norm() + 1e-9
    assert phi(a.one()).norm() == pytest.approx(phi.norm(), rel=1e-12)
    assert phi.norm() - best >= -1e-6


def test_multiplicativity_tester():
    diag = cm.from_kraus((1, 1), (2,), {(0, 0): [np.array([[1.0, 0.0]])], (1, 0): [np.array([[0.0, 1.0]])]})
    assert cm.is_miu(diag)
    assert not cm.is_miu(cm.trace_functional(M2) * 0.5)


def _multiplicative_exhaustive(phi, tol=1e-9):
    """Oracle: check ``phi(e_u e_v) = phi(e_u) phi(e_v)`` on every pair of matrix units."""
    a = phi.domain
    basis = a.basis()
    for x in basis:
        for y in basis:
            if phi(x @ y).distance(phi(x) @ phi(y)) > tol:
                return False
    return True


@given(seeds)
def test_reduced_multiplicativity_matches_exhaustive_oracle(seed):
    from paschke.corpus import random_nmiu
    rng = np.random.default_rng(seed)
    nmiu = random_nmiu(rng)
    bump = linalg.random_complex(nmiu.matrix.shape, rng) * 1e-4
    perturbed = cm.from_matrix(nmiu.domain, nmiu.codomain, nmiu.matrix + bump)
    a, b = nmiu.domain, nmiu.codomain
    other = random_map(rng, a, b)
    for phi in (nmiu, perturbed, other, cm.identity(a), cm.ad(linalg.random_unitary(3, rng))):
        assert cm.is_multiplicative(phi) == _multiplicative_exhaustive(phi)
    assert cm.is_multiplicative(nmiu)
    assert not cm.is_multiplicative(perturbed)


def test_overlapping_block_units_are_not_multiplicative():
    # (l, m) -> diag(l, l + m): each block alone is a character image, but the units overlap
    bad = cm.from_kraus((1, 1), (2,), {(0, 0): [np.array([[1.0, 0.0]])], (1, 0): [np.array([[0.0, 1.0]])]})
    both = bad + cm.from_kraus((1, 1), (2,), {(0, 0): [np.array([[0.0, 1.0]])]})
    assert not cm.is_multiplicative(both)
    assert not _multiplicative_exhaustive(both)
