import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paschke import settings
from paschke.vn_algebra import linalg

from .strategies import seeds


def _psd(rng, n, r):
    g = linalg.random_complex((n, r), rng)
    return g @ g.conj().T


def test_opnorm_of_half_all_ones_is_one():
    assert linalg.opnorm(np.full((2, 2), 0.5)) == pytest.approx(1.0)


def test_psd_sqrt_of_diagonal():
    np.testing.assert_allclose(linalg.psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)


def test_pinv_sqrt_drops_kernel():
    np.testing.assert_allclose(linalg.pinv_sqrt(np.diag([4.0, 0.0])), np.diag([0.5, 0.0]), atol=1e-14)


def test_pinv_sqrt_sub_tolerance_eigenvalue_mapped_to_zero():
    out = linalg.pinv_sqrt(np.diag([1.0, 1e-12]))
    np.testing.assert_allclose(out, np.diag([1.0, 0.0]), atol=1e-14)


def test_eigh_symmetrizes_input():
    x = np.array([[1.0, 1e-13], [0.0, 2.0]])
    w, v = linalg.eigh(x)
    np.testing.assert_allclose(w, [1.0, 2.0], atol=1e-12)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(2), atol=1e-14)


@given(seeds, st.integers(1, 5), st.data())
def test_psd_sqrt_squares_back(seed, n, data):
    rng = np.random.default_rng(seed)
    r = data.draw(st.integers(0, n))
    x = _psd(rng, n, r) if r else np.zeros((n, n), dtype=complex)
    s = linalg.psd_sqrt(x)
    assert linalg.is_psd(s)
    np.testing.assert_allclose(s @ s, x, atol=1e-9 * max(1.0, linalg.opnorm(x)))


@given(seeds, st.integers(1, 5), st.data())
def test_rank_and_support_agree_with_construction(seed, n, data):
    rng = np.random.default_rng(seed)
    r = data.draw(st.integers(0, n))
    x = _psd(rng, n, r) if r else np.zeros((n, n), dtype=complex)
    assert linalg.rank(x) == r
    p = linalg.support(x, settings.tau(linalg.opnorm(x)))
    np.testing.assert_allclose(p @ p, p, atol=1e-10)
    assert round(np.trace(p).real) == r
    # the support fixes the range
    np.testing.assert_allclose(p @ x, x, atol=1e-9 * max(1.0, linalg.opnorm(x)))


@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_null_space_is_kernel(seed, m, n):
    rng = np.random.default_rng(seed)
    a = linalg.random_complex((m, n), rng)
    a = np.vstack([a, a[:1]])  # a repeated row keeps the rank below the row count
    k = linalg.null_space(a)
    assert k.shape[1] == n - np.linalg.matrix_rank(a)
    np.testing.assert_allclose(a @ k, 0, atol=1e-9)


@given(seeds, st.integers(1, 4))
def test_polar_isometry_identities(seed, n):
    rng = np.random.default_rng(seed)
    x = linalg.random_complex((n, n), rng) @ np.diag(rng.integers(0, 2, n).astype(float))
    u = linalg.polar_isometry(x)
    # x = u |x| with u a partial isometry
    abs_x = linalg.psd_sqrt(x.conj().T @ x)
    np.testing.assert_allclose(u @ abs_x, x, atol=1e-9)
    np.testing.assert_allclose(u @ u.conj().T @ u, u, atol=1e-9)


def test_cluster_groups_close_values():
    groups = linalg.cluster(np.array([0.0, 1e-9, 1.0, 1.0 + 1e-8, 3.0]), 1e-6)
    assert [len(g) for g in groups] == [2, 2, 1]


def test_random_unitary_is_unitary(rng):
    u = linalg.random_unitary(4, rng)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-13)


def test_tolerance_override_is_scoped():
    assert settings.tau() == 1e-9
    with settings.tolerances(tau=1e-6):
        assert settings.tau(10.0) == pytest.approx(1e-5)
        assert linalg.rank(np.diag([1.0, 1e-7])) == 1
    assert linalg.rank(np.diag([1.0, 1e-7])) == 2
