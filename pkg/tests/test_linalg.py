import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinequiv.linalg import (
    DimensionError,
    as_cmatrix,
    commutator,
    expm_skew,
    gram_schmidt,
    hs_inner,
    is_hermitian,
    is_real,
    is_skew_hermitian,
    is_unitary,
    kron,
    kron_all,
    orthonormal_projection,
)
from scipy.linalg import expm


def _skew(N, seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    return 0.5 * (g - g.conj().T)


def test_as_cmatrix_rejects_non_square():
    with pytest.raises(DimensionError):
        as_cmatrix(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        as_cmatrix(np.zeros(3))


def test_predicates():
    h = np.array([[1, 1j], [-1j, 2]])
    assert is_hermitian(h) and not is_skew_hermitian(h)
    assert is_skew_hermitian(1j * h)
    assert is_unitary(np.array([[0, 1], [1, 0]]))
    assert is_real(np.eye(2)) and not is_real(1j * np.eye(2))


def test_commutator_shape_mismatch():
    with pytest.raises(DimensionError):
        commutator(np.eye(2), np.eye(3))


def test_hs_inner_is_trace_form():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.isclose(hs_inner(a, b), np.trace(a @ b.conj().T))


def test_kron_order():
    a, b = np.diag([1, 2]), np.diag([1, 10])
    assert np.allclose(np.diag(kron(a, b)), [1, 10, 2, 20])
    assert np.array_equal(kron_all([]), np.ones((1, 1)))
    assert np.allclose(kron_all([a, b, np.eye(2)]), np.kron(np.kron(a, b), np.eye(2)))


@settings(max_examples=25, deadline=None)
@given(N=st.integers(1, 6), seed=st.integers(0, 2**31))
def test_expm_skew_matches_scipy(N, seed):
    a = _skew(N, seed)
    u = expm_skew(a)
    assert np.abs(u - expm(a)).max() < 1e-10
    assert is_unitary(u, 1e-12)


def test_expm_skew_rejects_hermitian():
    with pytest.raises(ValueError):
        expm_skew(np.eye(2))


def test_projection():
    basis = [np.diag([1, 0]), np.diag([0, 2])]
    m = np.array([[3, 1], [1, 5]])
    assert np.allclose(orthonormal_projection(m, basis), np.diag([3, 5]))
    with pytest.raises(ValueError):
        orthonormal_projection(m, [np.zeros((2, 2))])


def test_gram_schmidt_drops_dependent_and_tiny_rows():
    v = np.array([[1.0, 0, 0], [2.0, 0, 0], [0, 1, 1], [1e-14, 0, 0]])
    q = gram_schmidt(v)
    assert q.shape == (2, 3)
    assert np.allclose(q @ q.T, np.eye(2))


def test_gram_schmidt_respects_start():
    start = np.array([[1.0, 0, 0]])
    q = gram_schmidt(np.array([[1.0, 1, 0]]), start=start)
    assert np.allclose(q, [[0, 1, 0]])
