import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinequiv.cartan import (
    Involution,
    NotInAlgebraError,
    VerificationError,
    c_matrix,
    closure_residuals,
    involution_apply,
    involution_properties,
    is_in_so,
    is_in_sp,
    local_split,
    odd_even_split,
    random_skew_hermitian,
    site_conjugator,
    sp_residual,
    symplectic_form,
    t_matrix,
    theorem3_spectral_premises,
    verify_theorem_1_2,
)
from spinequiv.linalg import hs_inner, orthonormal_projection
from spinequiv.network import build
from spinequiv.spin import HalfInt, site_operator, spin_matrices

R = 1 / np.sqrt(2)


def local_counts(N):
    """(dim K, dim P) for the AII (even N) or AI (odd N) split of u(N)."""
    k = N * (N + 1) // 2 if N % 2 == 0 else N * (N - 1) // 2
    return k, N * N - k


def odd_count_oracle(dims):
    # generating function: odd-K-count monomials = (prod(p + k) - prod(p - k)) / 2
    ks = [local_counts(d) for d in dims]
    return (np.prod([k + p for k, p in ks]) - np.prod([p - k for k, p in ks])) // 2


def test_elementary_matrices():
    assert np.array_equal(c_matrix(2), np.diag([-1, 1]))
    assert np.array_equal(t_matrix(2), [[0, 1], [1, 0]])
    for k in range(1, 6):
        C, T = c_matrix(k), t_matrix(k)
        assert np.array_equal(C @ C, np.eye(k)) and np.array_equal(T @ T, np.eye(k))
        assert np.array_equal(T, T.T)
        D = np.diag(np.arange(1.0, k + 1))
        assert np.array_equal(T @ D @ T, np.diag(np.arange(k, 0.0, -1)))
    with pytest.raises(ValueError):
        c_matrix(0)
    with pytest.raises(ValueError):
        t_matrix(0)


def test_site_conjugator_small_cases():
    assert np.allclose(site_conjugator(2), np.diag([-1, 1]))
    expected3 = np.array([[-1j * R, 0, -1j * R], [0, 1, 0], [R, 0, -R]])
    assert np.allclose(site_conjugator(3), expected3)
    with pytest.raises(ValueError):
        site_conjugator(1)


def test_alternative_n3_matrix_does_not_realify():
    """With C_1 read as +1 the N = 3 conjugator fails to make the spin-1 triple real."""
    alt = np.array([[1j * R, 0, -1j * R], [0, 1, 0], [R, 0, R]])
    residual = max(np.abs((alt @ (1j * s) @ alt.conj().T).imag).max() for s in spin_matrices(1))
    assert residual > 0.1


@pytest.mark.parametrize("N", range(2, 10))
def test_site_conjugator_unitary(N):
    U = site_conjugator(N)
    assert np.abs(U @ U.conj().T - np.eye(N)).max() <= 1e-12
    if N % 2 == 0:
        assert np.abs(U.imag).max() == 0  # orthogonal


def test_membership_examples():
    sy = spin_matrices("1/2")[1]
    assert is_in_so(1j * sy)
    assert is_in_so(np.zeros((4, 4))) and is_in_sp(np.zeros((4, 4)))
    U = site_conjugator(4)
    assert is_in_sp(U @ (1j * spin_matrices("3/2")[2]) @ U.conj().T)
    assert not is_in_so(1j * np.eye(2))
    with pytest.raises(ValueError):
        sp_residual(np.zeros((3, 3)))


def test_symplectic_form():
    J = symplectic_form(2)
    assert np.array_equal(J, [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])


@pytest.mark.parametrize("N", range(2, 10))
def test_verify_theorem_1_2(N):
    rep = verify_theorem_1_2(HalfInt(N - 1))
    assert rep.passed and rep.algebra == ("sp" if N % 2 == 0 else "so")
    assert max(rep.residuals.values()) <= 1e-12


def test_verify_theorem_1_2_raises_on_impossible_tolerance():
    with pytest.raises(VerificationError):
        verify_theorem_1_2("1", tol=-1.0)


@pytest.mark.parametrize("l,expected", [("1/2", [-0.5, 0.5]), ("3/2", [-1.5, -0.5, 0.5, 1.5])])
def test_spectral_premises(l, expected):
    rep = theorem3_spectral_premises(l)
    assert rep.passed and rep.coincide
    assert np.allclose(rep.spectra["z"], expected, atol=1e-10)


def test_spectral_premises_reject_integer_spin():
    with pytest.raises(ValueError):
        theorem3_spectral_premises(1)


@pytest.mark.parametrize("N", range(2, 7))
def test_local_split(N):
    loc = local_split(N)
    k, p = local_counts(N)
    assert (len(loc.k_basis), len(loc.p_basis)) == (k, p)
    basis = loc.basis
    gram = np.array([[hs_inner(a, b) for b in basis] for a in basis])
    assert np.abs(gram - np.eye(N * N)).max() < 1e-12
    for s in spin_matrices(HalfInt(N - 1)):
        kpart = orthonormal_projection(1j * s, loc.k_basis)
        assert np.abs(kpart - 1j * s).max() < 1e-12
    # K is fixed by theta, P is negated
    for e in loc.k_basis:
        assert np.abs(loc.theta(e) - e).max() < 1e-12
    for e in loc.p_basis:
        assert np.abs(loc.theta(e) + e).max() < 1e-12


@pytest.mark.parametrize("dims", [(2,), (3,), (2, 2), (2, 3), (3, 3), (2, 2, 2), (2, 3, 4)])
def test_odd_even_counts_match_oracle(dims):
    split = odd_even_split(dims)
    assert split.odd_count == odd_count_oracle(dims)
    assert split.odd_count + split.even_count == split.dim**2


def test_single_site_split_is_local_split():
    split = odd_even_split((3,))
    loc = local_split(3)
    assert np.allclose(split.odd_basis(), loc.k_basis)
    assert np.allclose(split.even_basis(), loc.p_basis)


def test_basis_orthonormal_small():
    elems, tags = odd_even_split((2, 3)).basis()
    flat = elems.reshape(len(elems), -1)
    assert np.abs(flat.conj() @ flat.T - np.eye(36)).max() < 1e-12
    assert tags.sum() == 21


def test_classification_examples():
    split = odd_even_split((2, 2))
    xx = 1j * site_operator((2, 2), [(1, "x"), (2, "x")])
    x1 = 1j * site_operator((2, 2), [(1, "x")])
    assert split.even_residual(xx) < 1e-12 and split.odd_residual(xx) > 0.1
    assert split.odd_residual(x1) < 1e-12
    m = build(["1/2", "1"], {(1, 2): 1.0}, [1.0, 2.0])
    s23 = odd_even_split((2, 3))
    assert s23.odd_residual(m.B[2]) <= 1e-12
    assert s23.even_residual(m.A) <= 1e-12


def test_coefficients_roundtrip():
    split = odd_even_split((2, 3, 2))
    rng = np.random.default_rng(5)
    m = random_skew_hermitian(12, rng)
    assert np.abs(split.reconstruct(split.coefficients(m)) - m).max() < 1e-12
    assert np.abs(split.project_odd(m) + split.project_even(m) - m).max() < 1e-12
    with pytest.raises(ValueError):
        split.coefficients(np.eye(4))


def test_tag_strings():
    split = odd_even_split((2, 2))
    tags = split.tag_strings()
    assert len(tags) == 16 and tags[0] == "KK"
    odd = split.parity_grid.reshape(-1)
    for t, o in zip(tags, odd):
        assert (t.count("K") % 2 == 1) == o


def test_dimension_cap():
    with pytest.raises(ValueError):
        odd_even_split((2,) * 9)
    with pytest.raises(ValueError):
        odd_even_split((1, 2))


def test_involution_examples():
    inv = Involution.for_dims((2, 2))
    x1 = 1j * site_operator((2, 2), [(1, "x")])
    assert np.abs(involution_apply(inv, x1) - x1).max() < 1e-12
    a = build(["1/2", "1/2"], {(1, 2): 1.0}, [1.0, 2.0]).A
    assert np.abs(inv(a) + a).max() < 1e-12
    assert np.abs(inv(1j * np.eye(4)) + 1j * np.eye(4)).max() < 1e-12
    with pytest.raises(NotInAlgebraError):
        inv(np.eye(4))


@settings(max_examples=20, deadline=None)
@given(dims=st.sampled_from([(2, 2), (2, 3), (3, 2), (2, 2, 2)]), seed=st.integers(0, 2**31))
def test_involution_is_involutive_and_matches_closed_form(dims, seed):
    inv = Involution.for_dims(dims)
    m = random_skew_hermitian(inv.dim, np.random.default_rng(seed))
    assert np.abs(inv(inv(m)) - m).max() < 1e-10
    assert np.abs(inv(m) - inv.closed_form(m)).max() < 1e-10


@pytest.mark.parametrize("dims", [(2, 2), (2, 3)])
def test_closure_and_properties(dims):
    split = odd_even_split(dims)
    assert max(closure_residuals(split).values()) <= 1e-10
    assert max(involution_properties(Involution(split), pairs=30).values()) <= 1e-10
