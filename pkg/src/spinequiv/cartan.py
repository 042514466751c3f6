"""Cartan decompositions of u(N) adapted to spin networks.

Single site.  For a spin of dimension ``N`` the conjugator ``U`` of
:func:`site_conjugator` maps ``i sx, i sy, i sz`` into ``sp(N/2)`` (``N``
even, type AII) or into ``so(N)`` (``N`` odd, type AI).  Pulling the whole
subalgebra back with ``U^dagger . U`` gives a Cartan decomposition
``u(N) = K + P`` with the spin triple inside ``K``.  The associated local
involution is ``theta(X) = -W X^T W^dagger`` with ``W = U^dagger Ubar`` (AI)
or ``W = U^dagger J Ubar`` (AII).

Network.  Tensor monomials of local basis elements are graded by the parity
of the number of ``K``-type factors: odd monomials span ``i I_o``, even ones
``i I_e``.  The involution ``phi`` is ``+1`` on the odd part and ``-1`` on
the even part.  It is applied here by expanding a matrix in the monomial
basis (a sequence of per-site contractions, never materializing the basis)
and flipping the sign of the even coefficients.  The same map has the
closed form ``phi(X) = -W X^T W^dagger`` with ``W`` the Kronecker product of
the local ``W_j``; :meth:`Involution.closed_form` exposes it as an
independent check of the projection route.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from .linalg import DEFAULT_TOL, as_cmatrix, dagger, gram_schmidt, kron_all, max_abs
from .spin import HalfInt, spin_matrices

DEFAULT_MAX_DIM = 256


class VerificationError(AssertionError):
    """A constructive check failed; this points at an implementation bug."""


# -- elementary matrices -------------------------------------------------------


def c_matrix(k: int) -> np.ndarray:
    """``C_k = diag(-1, 1, -1, ..., (-1)^k)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return np.diag([(-1.0) ** (i + 1) for i in range(k)])


def t_matrix(k: int) -> np.ndarray:
    """``T_k``: ones on the anti-diagonal."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return np.fliplr(np.eye(k))


def symplectic_form(k: int) -> np.ndarray:
    """``J = [[0, I_k], [-I_k, 0]]``."""
    z = np.zeros((k, k))
    return np.block([[z, np.eye(k)], [-np.eye(k), z]])


def site_conjugator(N: int) -> np.ndarray:
    """Unitary taking the spin triple of dimension ``N`` into ``sp(N/2)`` or ``so(N)``.

    Even ``N``: ``[[C_k, 0], [0, T_k]]`` with ``k = N/2``.
    Odd ``N``: the three-block matrix

        [[ i C_k / sqrt2, 0, (-1)^k i T_k / sqrt2 ],
         [ 0,             1, 0                    ],
         [ T_k / sqrt2,   0, C_k / sqrt2          ]]

    with ``k = (N - 1)/2``.
    """
    if N < 2:
        raise ValueError("site dimension must be >= 2")
    if N % 2 == 0:
        k = N // 2
        z = np.zeros((k, k))
        return np.block([[c_matrix(k), z], [z, t_matrix(k)]]).astype(complex)
    k = (N - 1) // 2
    r = np.sqrt(2.0)
    zc = np.zeros((k, 1))
    ck, tk = c_matrix(k), t_matrix(k)
    return np.block(
        [
            [1j / r * ck, zc, (-1) ** k * 1j / r * tk],
            [zc.T, np.ones((1, 1)), zc.T],
            [tk / r, zc, ck / r],
        ]
    ).astype(complex)


# -- membership ------------------------------------------------------------------


def skew_residual(m) -> float:
    m = as_cmatrix(m)
    return max_abs(m + dagger(m))


def so_residual(m) -> float:
    """Distance (max-entry) from the real antisymmetric matrices."""
    m = as_cmatrix(m)
    return max(skew_residual(m), max_abs(m.imag))


def sp_residual(m) -> float:
    """Residual of the skew-Hermitian and ``m^T J + J m = 0`` conditions."""
    m = as_cmatrix(m)
    if m.shape[0] % 2:
        raise ValueError("sp membership needs an even dimension")
    J = symplectic_form(m.shape[0] // 2)
    return max(skew_residual(m), max_abs(m.T @ J + J @ m))


def is_in_so(m, tol: float = DEFAULT_TOL) -> bool:
    return so_residual(m) <= tol


def is_in_sp(m, tol: float = DEFAULT_TOL) -> bool:
    return sp_residual(m) <= tol


# -- conjugation checks ----------------------------------------------------------


@dataclass(frozen=True)
class ConjugationReport:
    spin: str
    dim: int
    algebra: str  # "sp" or "so"
    residuals: dict
    passed: bool

    def as_dict(self) -> dict:
        return {
            "spin": self.spin,
            "dim": self.dim,
            "algebra": self.algebra,
            "residuals": dict(self.residuals),
            "passed": self.passed,
        }


def verify_theorem_1_2(l, tol: float = 1e-12) -> ConjugationReport:
    """Conjugate the spin triple by :func:`site_conjugator` and test membership.

    Half-integer spins must land in ``sp(N/2)``, integer spins in ``so(N)``.
    Raises :class:`VerificationError` if any residual exceeds ``tol``.
    """
    l = HalfInt.parse(l)
    N = l.dim
    U = site_conjugator(N)
    algebra = "sp" if N % 2 == 0 else "so"
    residual = sp_residual if algebra == "sp" else so_residual
    residuals = {}
    for axis, s in zip("xyz", spin_matrices(l)):
        residuals[axis] = residual(U @ (1j * s) @ dagger(U))
    residuals["unitarity"] = max_abs(U @ dagger(U) - np.eye(N))
    passed = all(r <= tol for r in residuals.values())
    report = ConjugationReport(str(l), N, algebra, residuals, passed)
    if not passed:
        raise VerificationError(f"spin {l}: conjugated triple not in {algebra}: {residuals}")
    return report


@dataclass(frozen=True)
class SpectrumReport:
    spin: str
    spectra: dict  # axis -> sorted imaginary parts of eig(i s_v)
    expected: list
    max_deviation: float
    min_gap: float
    coincide: bool
    passed: bool

    def as_dict(self) -> dict:
        return {
            "spin": self.spin,
            "spectra": {k: list(v) for k, v in self.spectra.items()},
            "expected": list(self.expected),
            "max_deviation": self.max_deviation,
            "min_gap": self.min_gap,
            "coincide": self.coincide,
            "passed": self.passed,
        }


def theorem3_spectral_premises(l, tol: float = 1e-10) -> SpectrumReport:
    """Spectral facts used by the half-integer non-existence argument.

    Each ``i s_v`` must have the simple spectrum ``{+-i l, ..., +-i/2}`` and
    the three spectra must coincide.
    """
    l = HalfInt.parse(l)
    if not l.is_half_integer:
        raise ValueError("spectral premises concern half-integer spins only")
    expected = sorted(float(l) - j for j in range(l.dim))
    spectra = {}
    for axis, s in zip("xyz", spin_matrices(l)):
        # eig(i s) = i * eig(s), s Hermitian
        spectra[axis] = np.sort(np.linalg.eigvalsh(s)).tolist()
    dev = max(max(abs(a - b) for a, b in zip(spec, expected)) for spec in spectra.values())
    gaps = [min(np.diff(spec)) if len(spec) > 1 else np.inf for spec in spectra.values()]
    min_gap = float(min(gaps))
    coincide = max(
        max(abs(a - b) for a, b in zip(spectra["x"], spectra[v])) for v in "yz"
    ) <= tol
    passed = dev <= tol and min_gap > tol and coincide
    return SpectrumReport(str(l), spectra, expected, float(dev), min_gap, coincide, passed)


# -- local split ----------------------------------------------------------------


def _standard_u_basis(N: int) -> np.ndarray:
    """Orthonormal basis of u(N): ``i E_jj`` then, for ``j < k``, real and imaginary off-diagonal pairs."""
    out = []
    for j in range(N):
        e = np.zeros((N, N), dtype=complex)
        e[j, j] = 1j
        out.append(e)
    s = 1.0 / np.sqrt(2.0)
    for j in range(N):
        for k in range(j + 1, N):
            a = np.zeros((N, N), dtype=complex)
            a[j, k], a[k, j] = s, -s
            b = np.zeros((N, N), dtype=complex)
            b[j, k] = b[k, j] = 1j * s
            out.extend([a, b])
    return np.array(out)


@dataclass(frozen=True, eq=False)
class LocalSplit:
    """Cartan decomposition ``u(N) = K + P`` for one spin site.

    ``k_basis`` and ``p_basis`` are stacked orthonormal skew-Hermitian
    matrices.  The first three ``k_basis`` elements are the normalized
    ``i sx, i sy, i sz``; the first ``p_basis`` element is ``i 1/sqrt(N)``.
    """

    dim: int
    algebra: str
    conjugator: np.ndarray
    twist: np.ndarray  # W in theta(X) = -W X^T W^dagger
    k_basis: np.ndarray
    p_basis: np.ndarray

    def theta(self, m) -> np.ndarray:
        m = np.asarray(m)
        return -self.twist @ m.T @ dagger(self.twist)

    @property
    def basis(self) -> np.ndarray:
        """K elements followed by P elements."""
        return np.concatenate([self.k_basis, self.p_basis])

    @property
    def kinds(self) -> np.ndarray:
        """``True`` for K-type entries of :attr:`basis`."""
        return np.array([True] * len(self.k_basis) + [False] * len(self.p_basis))


@lru_cache(maxsize=None)
def local_split(N: int) -> LocalSplit:
    """AII (``N`` even) or AI (``N`` odd) split of u(N) containing the spin triple in ``K``."""
    if N < 2:
        raise ValueError("site dimension must be >= 2")
    U = site_conjugator(N)
    if N % 2 == 0:
        algebra = "sp"
        W = dagger(U) @ symplectic_form(N // 2) @ U.conj()
    else:
        algebra = "so"
        W = dagger(U) @ U.conj()

    def theta(m):
        return -W @ m.T @ dagger(W)

    std = _standard_u_basis(N)
    spin = [1j * s for s in spin_matrices(HalfInt(N - 1))]
    k_cands = spin + [0.5 * (e + theta(e)) for e in std]
    p_cands = [1j * np.eye(N)] + [0.5 * (e - theta(e)) for e in std]
    flat = lambda ms: np.array([m.reshape(-1) for m in ms])
    k_basis = gram_schmidt(flat(k_cands), tol=1e-8).reshape(-1, N, N)
    p_basis = gram_schmidt(flat(p_cands), tol=1e-8).reshape(-1, N, N)
    expected_k = N * (N + 1) // 2 if algebra == "sp" else N * (N - 1) // 2
    if len(k_basis) != expected_k or len(p_basis) != N * N - expected_k:
        raise VerificationError(f"local split of u({N}) has wrong dimensions")
    for a in (k_basis, p_basis, U, W):
        a.setflags(write=False)
    return LocalSplit(N, algebra, U, W, k_basis, p_basis)


# -- odd-even split ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CartanSplit:
    """Odd-even decomposition ``u(N) = i I_o + i I_e`` for the given site dimensions.

    The monomial basis is indexed by one local-basis index per site, the
    local order being K elements then P elements; multi-indices are ordered
    lexicographically with site 1 most significant.
    """

    site_dims: tuple[int, ...]
    locals: tuple[LocalSplit, ...] = field(repr=False)

    @property
    def dim(self) -> int:
        return int(np.prod(self.site_dims))

    @property
    def n_sites(self) -> int:
        return len(self.site_dims)

    @cached_property
    def parity_grid(self) -> np.ndarray:
        """Boolean tensor of shape ``(N_1^2, ..., N_n^2)``: ``True`` on odd monomials."""
        count = np.zeros([d * d for d in self.site_dims], dtype=int)
        for j, loc in enumerate(self.locals):
            shape = [1] * self.n_sites
            shape[j] = -1
            count = count + loc.kinds.astype(int).reshape(shape)
        return count % 2 == 1

    @property
    def odd_count(self) -> int:
        return int(self.parity_grid.sum())

    @property
    def even_count(self) -> int:
        return self.dim**2 - self.odd_count

    @cached_property
    def _phase(self) -> complex:
        # i * (h_1 x ... x h_n) = i^(1-n) * (k_1 x ... x k_n) with k_j = i h_j
        return 1j ** (1 - self.n_sites)

    def coefficients(self, m) -> np.ndarray:
        """Coefficients ``<m, e_a>`` of ``m`` in the monomial basis, as an ``(N_j^2, ...)`` tensor."""
        m = as_cmatrix(m)
        if m.shape[0] != self.dim:
            raise ValueError(f"matrix dimension {m.shape[0]} does not match split dimension {self.dim}")
        n = self.n_sites
        dims = self.site_dims
        t = m.reshape(dims + dims)
        order = [ax for j in range(n) for ax in (j, n + j)]
        t = t.transpose(order).reshape([d * d for d in dims])
        for j, loc in enumerate(self.locals):
            b = loc.basis.reshape(len(loc.basis), -1).conj()
            t = np.moveaxis(np.tensordot(b, t, axes=([1], [j])), 0, j)
        return np.conj(self._phase) * t

    def reconstruct(self, coeffs: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`coefficients`."""
        n = self.n_sites
        dims = self.site_dims
        t = np.asarray(coeffs, dtype=complex)
        for j, loc in enumerate(self.locals):
            b = loc.basis.reshape(len(loc.basis), -1)
            t = np.moveaxis(np.tensordot(b.T, t, axes=([1], [j])), 0, j)
        t = t.reshape([x for d in dims for x in (d, d)])
        inverse = [2 * j for j in range(n)] + [2 * j + 1 for j in range(n)]
        return self._phase * t.transpose(inverse).reshape(self.dim, self.dim)

    def project_odd(self, m) -> np.ndarray:
        c = self.coefficients(m)
        return self.reconstruct(np.where(self.parity_grid, c, 0.0))

    def project_even(self, m) -> np.ndarray:
        c = self.coefficients(m)
        return self.reconstruct(np.where(self.parity_grid, 0.0, c))

    def odd_residual(self, m) -> float:
        """Max-entry size of the even component of ``m``."""
        return max_abs(self.project_even(m))

    def even_residual(self, m) -> float:
        return max_abs(self.project_odd(m))

    # materialized bases, for small dimensions only

    def _indices(self):
        return product(*[range(d * d) for d in self.site_dims])

    def monomial(self, index: Sequence[int]) -> np.ndarray:
        return self._phase * kron_all(loc.basis[a] for loc, a in zip(self.locals, index))

    def basis(self) -> tuple[np.ndarray, np.ndarray]:
        """All monomials, shape ``(N^2, N, N)``, with a boolean odd-parity tag per element."""
        elems = [self.monomial(ix) for ix in self._indices()]
        tags = [bool(self.parity_grid[ix]) for ix in self._indices()]
        return np.array(elems), np.array(tags)

    def odd_basis(self) -> np.ndarray:
        elems, tags = self.basis()
        return elems[tags]

    def even_basis(self) -> np.ndarray:
        elems, tags = self.basis()
        return elems[~tags]

    def tag_strings(self) -> list[str]:
        """Per-monomial ``K``/``P`` factor pattern, e.g. ``"KP"``, in basis order."""
        out = []
        for ix in self._indices():
            out.append("".join("K" if loc.kinds[a] else "P" for loc, a in zip(self.locals, ix)))
        return out


def odd_even_split(site_dims: Sequence[int], max_dim: int = DEFAULT_MAX_DIM) -> CartanSplit:
    dims = tuple(int(d) for d in site_dims)
    if not dims:
        raise ValueError("need at least one site")
    if any(d < 2 for d in dims):
        raise ValueError("site dimensions must be >= 2")
    N = int(np.prod(dims))
    if N > max_dim:
        raise ValueError(f"total dimension {N} exceeds the cap of {max_dim}")
    return CartanSplit(dims, tuple(local_split(d) for d in dims))


class NotInAlgebraError(ValueError):
    """Input to the involution is not skew-Hermitian."""


@dataclass(frozen=True, eq=False)
class Involution:
    """Cartan involution of an odd-even split: ``+1`` on ``i I_o``, ``-1`` on ``i I_e``."""

    split: CartanSplit
    tol: float = DEFAULT_TOL

    @classmethod
    def for_dims(cls, site_dims: Sequence[int], **kw) -> "Involution":
        return cls(odd_even_split(site_dims, **kw))

    @property
    def dim(self) -> int:
        return self.split.dim

    def apply(self, m, check: bool = True) -> np.ndarray:
        m = as_cmatrix(m)
        if check and skew_residual(m) > self.tol * max(1.0, max_abs(m)):
            raise NotInAlgebraError("involution is defined on u(N); input is not skew-Hermitian")
        c = self.split.coefficients(m)
        return self.split.reconstruct(np.where(self.split.parity_grid, c, -c))

    __call__ = apply

    @cached_property
    def twist(self) -> np.ndarray:
        return kron_all(loc.twist for loc in self.split.locals)

    def closed_form(self, m) -> np.ndarray:
        """``-W m^T W^dagger``; agrees with :meth:`apply` on all of u(N)."""
        m = as_cmatrix(m)
        W = self.twist
        return -W @ m.T @ dagger(W)


def involution_apply(inv: Involution, m) -> np.ndarray:
    return inv.apply(m)


# -- closure verification -----------------------------------------------------------


def closure_residuals(split: CartanSplit, chunk: int = 64) -> dict:
    """Max norm of the forbidden component of ``[e_a, e_b]`` over all basis pairs.

    Keys: ``"oo"`` (even part of odd-odd brackets), ``"oe"`` (odd part of
    odd-even brackets), ``"ee"`` (even part of even-even brackets).
    """
    elems, tags = split.basis()
    N = split.dim
    odd, even = elems[tags], elems[~tags]
    odd_flat = odd.reshape(len(odd), -1)
    even_flat = even.reshape(len(even), -1)

    def worst(a_set, b_set, forbidden_flat):
        out = 0.0
        for s in range(0, len(a_set), chunk):
            a = a_set[s : s + chunk]
            ab = np.einsum("aij,bjk->abik", a, b_set)
            ba = np.einsum("bij,ajk->abik", b_set, a)
            comm = (ab - ba).reshape(-1, N * N)
            proj = comm @ forbidden_flat.conj().T
            out = max(out, float(np.max(np.linalg.norm(proj, axis=1))) if proj.size else 0.0)
        return out

    return {
        "oo": worst(odd, odd, even_flat),
        "oe": worst(odd, even, odd_flat),
        "ee": worst(even, even, even_flat),
    }


def random_skew_hermitian(N: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    return 0.5 * (g - dagger(g))


def involution_properties(inv: Involution, pairs: int = 100, seed: int = 0) -> dict:
    """Homomorphism, involutivity, self-adjointness and closed-form agreement on random pairs."""
    rng = np.random.default_rng(seed)
    N = inv.dim
    res = {"homomorphism": 0.0, "involutive": 0.0, "self_adjoint": 0.0, "closed_form": 0.0}
    for _ in range(pairs):
        a = random_skew_hermitian(N, rng)
        b = random_skew_hermitian(N, rng)
        pa, pb = inv(a), inv(b)
        res["homomorphism"] = max(res["homomorphism"], max_abs(inv(a @ b - b @ a) - (pa @ pb - pb @ pa)))
        res["involutive"] = max(res["involutive"], max_abs(inv(pa) - a))
        res["self_adjoint"] = max(res["self_adjoint"], abs(np.vdot(b, pa) - np.vdot(pb, a)))
        res["closed_form"] = max(res["closed_form"], max_abs(pa - inv.closed_form(a)))
    return res
