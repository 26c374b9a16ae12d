import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from gdrop.exceptions import DimensionMismatch, SingularK
from gdrop.linalg import factorize, orth_append, principal_angles, svd


@pytest.mark.parametrize('sparse', [False, True])
def test_identity_solve(sparse):
    K = sp.identity(4, format='csc') if sparse else np.eye(4)
    b = np.arange(4.0)
    np.testing.assert_allclose(factorize(K).solve(b), b)


def test_diagonal_solve():
    x = factorize(np.diag([1.0, 2.0, 3.0])).solve(np.array([2.0, 2.0, 3.0]))
    np.testing.assert_allclose(x, [2, 1, 1])


@pytest.mark.parametrize('sparse', [False, True])
def test_random_complex_residual(rng, sparse):
    K = (rng.standard_normal((50, 50)) + 1j * rng.standard_normal((50, 50))
         + 20 * np.eye(50))
    b = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    h = factorize(sp.csc_matrix(K) if sparse else K)
    x = h.solve(b)
    assert np.linalg.norm(K @ x - b) <= 1e-12 * np.linalg.norm(b)
    y = h.solve(b, trans=True)
    assert np.linalg.norm(K.T @ y - b) <= 1e-12 * np.linalg.norm(b)


@pytest.mark.parametrize('sparse', [False, True])
def test_singular_matrix_raises(sparse):
    K = np.diag([1.0, 0.0, 2.0])
    with pytest.raises(SingularK) as info:
        factorize(sp.csc_matrix(K) if sparse else K, sigma=3j)
    assert info.value.sigma == 3j


def test_orth_append_examples():
    e1, e2 = np.eye(3)[:, :1], np.eye(3)[:, 1:2]
    np.testing.assert_allclose(orth_append(e1, e2), np.eye(3)[:, :2])
    np.testing.assert_array_equal(orth_append(e1, 2 * e1), e1)


def test_orth_append_gram(rng):
    S = orth_append(None, rng.standard_normal((100, 2)))
    assert np.abs(S.T @ S - np.eye(2)).max() <= 1e-12
    S2 = orth_append(S, rng.standard_normal((100, 3)))
    np.testing.assert_array_equal(S2[:, :2], S)
    assert np.abs(S2.T @ S2 - np.eye(5)).max() <= 1e-12


def test_orth_append_mismatch():
    with pytest.raises(DimensionMismatch):
        orth_append(np.eye(3), np.ones((4, 1)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_orth_append_idempotent(q, seed):
    r = np.random.default_rng(seed)
    S = orth_append(None, r.standard_normal((20, q)))
    again = orth_append(S, S @ r.standard_normal((S.shape[1], 3)))
    assert again.shape == S.shape


def test_svd_examples():
    np.testing.assert_allclose(svd(np.diag([3.0, 1.0])).S, [3, 1])
    u, v = np.array([1.0, 2.0, 2.0]), np.array([3.0, 4.0])
    s = svd(np.outer(u, v)).S
    assert s[0] == pytest.approx(15.0)
    assert s[1] <= 1e-14


def test_svd_reconstruction(rng):
    M = rng.standard_normal((20, 60))
    b = svd(M)
    assert np.abs(b.U @ np.diag(b.S) @ b.Vt - M).max() <= 1e-10
    np.testing.assert_allclose(b.V, b.Vt.T)


def test_principal_angles_examples(rng):
    X = rng.standard_normal((10, 3))
    assert np.all(principal_angles(X, X) <= 1e-12)
    assert principal_angles(np.array([1.0, 0]), np.array([0, 1.0]))[0] == \
        pytest.approx(np.pi / 2)
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    assert np.all(principal_angles(X, X @ Q) <= 1e-10)


def test_principal_angles_small_angle_resolved():
    X = np.array([[1.0], [0.0]])
    Y = np.array([[1.0], [1e-12]])
    assert principal_angles(X, Y)[0] == pytest.approx(1e-12, rel=1e-6)
