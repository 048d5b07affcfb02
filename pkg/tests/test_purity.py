import numpy as np
import pytest
from hypothesis import given

from paschke import cp_map as cm
from paschke import fixtures
from paschke.dilation import mediating_isomorphism, paschke_dilate
from paschke.errors import DomainError
from paschke.purity import (compression_data, corner_dilation, dilation_after_compression, find_extremality_witness,
                            injectivity_criterion, is_ncp_extreme, is_pure, is_pure_via_dilation, is_stormer_pure,
                            perturbation_space, purity_report, random_commutant_effect, relative_commutant,
                            subchannel_from_t, t_from_subchannel)
from paschke.vn_algebra import FdVnAlgebra, linalg

from .strategies import algebras, factors, random_density, random_map, seeds

M2 = FdVnAlgebra((2,))


def _pure_examples():
    return [fixtures.ad_isometry(), fixtures.vector_state(), fixtures.identity2(), fixtures.half_sum_factor(),
            cm.identity(FdVnAlgebra((1, 2)))]


def test_pure_examples():
    for phi in _pure_examples():
        assert is_pure(phi)
        assert is_pure_via_dilation(phi)
        assert is_ncp_extreme(phi)


def test_impure_examples():
    for phi in (fixtures.half_sum(), fixtures.mixed_unitary(), fixtures.diagonal_embedding(),
                fixtures.state_pairing()):
        assert not is_pure(phi)
        assert not is_pure_via_dilation(phi)


def test_half_sum_rho_rank_is_below_dim_p():
    dil = paschke_dilate(fixtures.half_sum())
    assert linalg.rank(dil.rho.matrix) == 2 < dil.P.dim == 4


def test_faithful_state_on_m2_is_not_pure():
    # the normalized trace is faithful, yet phi_angle = phi is not multiplicative
    tr = cm.state(M2, np.eye(2) / 2)
    assert cm.is_faithful(tr)
    assert not is_pure(tr)
    assert not is_pure_via_dilation(tr)
    # a faithful state on C is pure
    assert is_pure(cm.state(FdVnAlgebra((1,)), [[1.0]]))


def test_vector_states_are_pure(rng):
    for _ in range(5):
        v = linalg.random_complex(3, rng)
        v = v / np.linalg.norm(v)
        assert is_pure(cm.state(FdVnAlgebra((3,)), np.outer(v, v.conj())))


def test_impure_density_states(rng):
    for r in (2, 3):
        assert not is_pure(cm.state(FdVnAlgebra((3,)), random_density(rng, 3, r)))


def test_zero_map_is_rejected():
    with pytest.raises(DomainError):
        is_pure(cm.zero(M2, M2))


def test_stormer_examples():
    assert is_stormer_pure(fixtures.ad_isometry())
    assert is_stormer_pure(fixtures.vector_state())
    assert not is_stormer_pure(fixtures.mixed_unitary())
    assert not is_stormer_pure(fixtures.half_sum())
    with pytest.raises(DomainError):
        is_stormer_pure(fixtures.state_pairing())


@given(algebras(6), factors(3), seeds)
def test_stormer_purity_equals_purity(a, b, seed):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, a, b, max_rank=1, drop=0.5)
    assert is_stormer_pure(phi) == is_pure(phi)


def test_extremality_examples(rng):
    assert not is_ncp_extreme(fixtures.mixed_unitary())
    assert find_extremality_witness(fixtures.mixed_unitary(), rng) is not None
    for phi in (fixtures.diagonal_embedding(), fixtures.conjugated_embedding(), cm.identity(FdVnAlgebra((1, 2)))):
        assert cm.is_miu(phi)
        assert is_ncp_extreme(phi)
        assert find_extremality_witness(phi, rng) is None
    # the half-sum is the average of the two (distinct) unital characters
    assert not is_ncp_extreme(fixtures.half_sum())


@given(algebras(4), algebras(4), seeds)
def test_brute_force_never_contradicts_rank_test(a, b, seed):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, a, b, max_rank=1, drop=0.3)
    extreme = is_ncp_extreme(phi)
    witness = find_extremality_witness(phi, rng)
    if extreme:
        assert witness is None
        assert len(perturbation_space(phi)) == 0
    else:
        assert len(perturbation_space(phi)) > 0
    if witness is not None:
        p1, p2 = witness
        assert p1.is_cp() and p2.is_cp()
        assert p1.one_image().allclose(phi.one_image(), tol=1e-9)
        assert ((p1 + p2) * 0.5).distance(phi) <= 1e-9


@given(algebras(6), algebras(6), seeds)
def test_pure_maps_are_extreme(a, b, seed):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, a, b, max_rank=1, drop=0.5)
    if is_pure(phi):
        assert is_ncp_extreme(phi)


# subchannels -----------------------------------------------------------------
def test_subchannel_scalar_examples(rng):
    phi = random_map(rng, FdVnAlgebra((1, 2)), M2)
    dil = paschke_dilate(phi)
    p = dil.P
    assert subchannel_from_t(dil, p.one()).distance(phi) <= 1e-9
    assert subchannel_from_t(dil, p.zero()).norm() <= 1e-12
    assert subchannel_from_t(dil, p.one() * 0.5).distance(phi * 0.5) <= 1e-9


def test_t_from_subchannel_scalar_examples(rng):
    phi = random_map(rng, FdVnAlgebra((1, 2)), M2)
    dil = paschke_dilate(phi)
    assert t_from_subchannel(dil, phi).allclose(dil.P.one(), tol=1e-8)
    assert t_from_subchannel(dil, phi * 0.3).allclose(dil.P.one() * 0.3, tol=1e-8)
    with pytest.raises(DomainError):
        t_from_subchannel(dil, phi * 2.0)


def test_subchannel_preconditions(rng):
    dil = paschke_dilate(fixtures.mixed_unitary())
    with pytest.raises(DomainError):
        subchannel_from_t(dil, dil.P.one() * 2.0)
    # a generic effect of P does not commute with rho(A)
    assert len(relative_commutant(dil)) < dil.P.dim
    with pytest.raises(DomainError):
        subchannel_from_t(dil, dil.P.random_effect(rng))
    with pytest.raises(DomainError):
        subchannel_from_t(dil, M2.one())


@given(algebras(6), algebras(6), seeds)
def test_subchannel_round_trip(a, b, seed):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, a, b, drop=0.3)
    dil = paschke_dilate(phi)
    t = random_commutant_effect(dil, rng)
    psi = subchannel_from_t(dil, t)
    assert psi.is_cp() and (phi - psi).is_cp()
    back, res = t_from_subchannel(dil, psi, return_residual=True)
    assert back.distance(t) <= 1e-8
    assert res <= 1e-8


@given(algebras(6), algebras(6), seeds)
def test_subchannel_affinity_and_order(a, b, seed):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, a, b, drop=0.3)
    dil = paschke_dilate(phi)
    t1, t2 = random_commutant_effect(dil, rng), random_commutant_effect(dil, rng)
    lam = float(rng.uniform())
    mix = (t1 * lam + t2 * (1 - lam)).hermitian_part()
    want = subchannel_from_t(dil, t1) * lam + subchannel_from_t(dil, t2) * (1 - lam)
    assert subchannel_from_t(dil, mix).distance(want) <= 1e-9 * max(1.0, phi.norm())
    # t below 1 gives a map below phi; t*s <= t gives phi_{t s} <= phi_t when they commute
    smaller = (t1 * 0.5).hermitian_part()
    assert (subchannel_from_t(dil, t1) - subchannel_from_t(dil, smaller)).is_cp()


# special dilations ---------------------------------------------------------
def test_corner_dilation_of_one_is_trivial():
    a = FdVnAlgebra((1, 2))
    tri = corner_dilation(a, a.one())
    assert tri.P == a
    assert tri.rho.distance(cm.identity(a)) <= 1e-12
    assert tri.f.distance(cm.identity(a)) <= 1e-12
    mediating_isomorphism(paschke_dilate(tri.phi), tri)


def test_corner_dilation_in_a_factor():
    p = M2.element([np.diag([1.0, 0.0])])
    tri = corner_dilation(M2, p)
    assert tri.P == M2 and tri.rho.distance(cm.identity(M2)) <= 1e-12
    x = M2.element([np.array([[1.0, 2.0], [3.0, 4.0]])])
    assert tri.f(x).data[0][0, 0] == pytest.approx(1.0)
    mediating_isomorphism(paschke_dilate(tri.phi), tri)


def test_corner_dilation_in_two_blocks():
    a = FdVnAlgebra((2, 3))
    p = a.element([np.diag([1.0, 0.0]), np.zeros((3, 3))])
    tri = corner_dilation(a, p)
    assert tri.P.blocks == (2,)
    assert tri.rho.distance(cm.block_projection(a, 0)) <= 1e-12
    mediating_isomorphism(paschke_dilate(tri.phi), tri)


@given(algebras(9), seeds)
def test_corner_dilation_against_general_construction(a, seed):
    rng = np.random.default_rng(seed)
    p = a.random_projection(rng)
    if p.rank() == 0:
        return
    tri = corner_dilation(a, p)
    mediating_isomorphism(paschke_dilate(tri.phi), tri)


def test_compression_data_recognizes_standard_compressions(rng):
    b = M2.random_effect(rng)
    c = cm.standard_compression(b)
    bb, theta = compression_data(c)
    assert bb.allclose(b, tol=1e-9)
    assert theta.distance(cm.identity(theta.domain)) <= 1e-8
    u = M2.random_unitary(rng)
    bb, theta = compression_data(cm.compose(c, cm.conjugate(cm.identity(M2), u)))
    assert bb.allclose(b, tol=1e-9)
    with pytest.raises(DomainError):
        compression_data(fixtures.mixed_unitary())


def test_dilation_after_identity_compression_is_unchanged(rng):
    phi = random_map(rng, FdVnAlgebra((1, 2)), M2)
    dil = paschke_dilate(phi)
    tri = dilation_after_compression(dil, cm.identity(M2))
    assert tri.f.distance(dil.f) <= 1e-12
    mediating_isomorphism(dil, tri)


def test_dilation_after_compression_recovers_phi_from_unitalized(rng):
    phi = random_map(rng, FdVnAlgebra((1, 2)), M2)
    phi = phi * (1.0 / phi.norm())
    one = phi.one_image()
    gp = one.pinv_sqrt()
    unital = cm.from_matrix(phi.domain, M2, M2.left_mult_matrix(gp) @ M2.right_mult_matrix(gp) @ phi.matrix)
    tri = dilation_after_compression(paschke_dilate(unital), cm.standard_compression(one))
    assert tri.phi.distance(phi) <= 1e-9
    mediating_isomorphism(paschke_dilate(phi), tri)


@given(algebras(6), factors(2), seeds)
def test_dilation_after_random_compression(a, b, seed):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, a, b, drop=0.3)
    e = b.random_effect(rng)
    e = (e * 0.9 + b.one() * 0.1).hermitian_part()
    c = cm.standard_compression(e)
    tri = dilation_after_compression(paschke_dilate(phi), c)
    mediating_isomorphism(paschke_dilate(tri.phi), tri)


def test_dilation_after_non_compression_is_rejected(rng):
    dil = paschke_dilate(fixtures.identity2())
    with pytest.raises(DomainError):
        dilation_after_compression(dil, fixtures.mixed_unitary())


# injectivity -------------------------------------------------------------------
def test_injectivity_examples(rng):
    assert injectivity_criterion(cm.state(M2, random_density(rng, 2))) == (True, True)
    a = FdVnAlgebra((2, 2))
    kill = cm.compose(cm.identity(M2), cm.block_projection(a, 0))
    assert injectivity_criterion(kill) == (False, False)


@given(algebras(6), algebras(6), seeds)
def test_injectivity_criterion_agrees(a, b, seed):
    rng = np.random.default_rng(seed)
    phi = random_map(rng, a, b, drop=0.4)
    predicted, actual = injectivity_criterion(phi)
    assert predicted == actual


# composition -------------------------------------------------------------------
@given(factors(2), seeds)
def test_corners_and_compressions_are_pure_and_compose(a, seed):
    rng = np.random.default_rng(seed)
    p = a.random_projection(rng)
    if p.rank() == 0:
        p = a.one()
    h = cm.standard_corner(p)
    e = (a.random_effect(rng) * 0.9 + a.one() * 0.1).hermitian_part()
    c = cm.standard_compression(e)
    assert is_pure(h) and is_pure(c)
    assert is_pure(cm.compose(h, c))
    e2 = h.codomain.random_effect(rng)
    if e2.norm() > 1e-6:
        assert is_pure(cm.compose(cm.standard_compression(e2), h))


def test_composites_of_pure_examples_are_pure():
    v = fixtures.ad_isometry()
    assert is_pure(cm.compose(fixtures.vector_state(), v))
    assert is_pure(cm.compose(v, cm.identity(v.domain)))
    assert is_pure(cm.compose(fixtures.half_sum_factor(), fixtures.identity2()))


def test_purity_report_shape():
    rep = purity_report(fixtures.half_sum())
    assert rep["pure"] is False and rep["rho_surjective"] is False
    assert rep["ncp_extreme"] is False
    assert rep["stormer_pure"] is False
    assert rep["residuals"]["pure_agrees_with_dilation"]
    assert purity_report(fixtures.state_pairing())["stormer_pure"] is None
