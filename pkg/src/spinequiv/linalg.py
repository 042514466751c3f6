"""Dense complex linear-algebra primitives.

All operators in the package are plain ``numpy.ndarray`` objects of complex
dtype.  The helpers here validate shapes and implement the handful of
operations every other module relies on: commutators, the Hilbert-Schmidt
inner product ``<A, B> = tr(A B^dagger)``, Kronecker products and the
exponential of skew-Hermitian generators.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-10


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


def as_cmatrix(m) -> np.ndarray:
    """Return ``m`` as a square complex matrix, raising on anything else."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def _check_same(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


def max_abs(m) -> float:
    """Max-entry norm, the norm used by every structural predicate."""
    a = np.asarray(m)
    return float(np.max(np.abs(a))) if a.size else 0.0


def dagger(m) -> np.ndarray:
    return np.asarray(m).conj().T


# -- structural predicates ---------------------------------------------------


def is_hermitian(m, tol: float = DEFAULT_TOL) -> bool:
    a = as_cmatrix(m)
    return max_abs(a - dagger(a)) <= tol


def is_skew_hermitian(m, tol: float = DEFAULT_TOL) -> bool:
    a = as_cmatrix(m)
    return max_abs(a + dagger(a)) <= tol


def is_unitary(m, tol: float = DEFAULT_TOL) -> bool:
    a = as_cmatrix(m)
    return max_abs(a @ dagger(a) - np.eye(a.shape[0])) <= tol


def is_real(m, tol: float = DEFAULT_TOL) -> bool:
    return max_abs(np.asarray(m).imag) <= tol


# -- operations ----------------------------------------------------------------


def commutator(a, b) -> np.ndarray:
    """``[a, b] = a b - b a``."""
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    _check_same(a, b)
    return a @ b - b @ a


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``tr(a b^dagger)``."""
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    _check_same(a, b)
    # tr(a b^dagger) = sum_ij a_ij conj(b_ij)
    return complex(np.vdot(b, a))


def kron(a, b) -> np.ndarray:
    """Kronecker product with ``out[i*nb + k, j*nb + l] = a[i, j] * b[k, l]``."""
    return np.kron(as_cmatrix(a), as_cmatrix(b))


def kron_all(factors: Iterable) -> np.ndarray:
    """Left-to-right Kronecker product of ``factors``; ``[[1]]`` when empty."""
    return reduce(np.kron, (as_cmatrix(f) for f in factors), np.ones((1, 1), dtype=complex))


def expm_skew(a, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Exponential of a skew-Hermitian matrix.

    Uses the eigendecomposition of the Hermitian matrix ``i a``, so the result
    is unitary by construction.

    Raises
    ------
    ValueError
        If ``a`` is not skew-Hermitian within ``tol`` (relative to its size
        for large inputs).
    """
    a = as_cmatrix(a)
    scale = max(1.0, max_abs(a))
    if max_abs(a + dagger(a)) > tol * scale:
        raise ValueError("expm_skew requires a skew-Hermitian argument")
    h = 1j * a
    h = 0.5 * (h + dagger(h))
    evals, vecs = np.linalg.eigh(h)
    # a = -i h  =>  exp(a) = V exp(-i lambda) V^dagger
    return (vecs * np.exp(-1j * evals)) @ dagger(vecs)


def orthonormal_projection(m, basis: Sequence) -> np.ndarray:
    """Orthogonal projection of ``m`` onto ``span(basis)``.

    ``basis`` must be pairwise orthogonal under :func:`hs_inner`; the elements
    need not be normalized.
    """
    m = as_cmatrix(m)
    out = np.zeros_like(m)
    for e in basis:
        e = as_cmatrix(e)
        _check_same(m, e)
        nrm = hs_inner(e, e).real
        if nrm <= 0.0:
            raise ValueError("zero element in projection basis")
        out = out + (hs_inner(m, e) / nrm) * e
    return out


def gram_schmidt(vectors: np.ndarray, tol: float = 1e-10, start: np.ndarray | None = None) -> np.ndarray:
    """Modified Gram-Schmidt on the rows of ``vectors``.

    Rows are processed in order; a row whose residual norm falls below
    ``tol`` times ``max(its own norm, largest row norm)`` is dropped, so
    numerically-zero input rows never survive.  When ``start`` is given its
    rows (assumed orthonormal) are projected out first and are not part of
    the returned array.  Works for complex rows with the inner product
    ``vdot``.
    """
    vectors = np.atleast_2d(np.asarray(vectors))
    dtype = np.result_type(vectors.dtype, float)
    width = vectors.shape[1]
    prior = np.zeros((0, width), dtype=dtype) if start is None else np.asarray(start, dtype=dtype)
    kept: list[np.ndarray] = []
    floor = float(np.max(np.linalg.norm(vectors, axis=1))) if len(vectors) else 0.0
    for v in vectors:
        v = np.array(v, dtype=dtype)
        n0 = np.linalg.norm(v)
        if n0 == 0.0:
            continue
        # two passes keep the result orthogonal to working precision
        for _ in range(2):
            if prior.shape[0]:
                v = v - prior.T @ (prior.conj() @ v)
            for q in kept:
                v = v - q * np.vdot(q, v)
        n = np.linalg.norm(v)
        if n > tol * max(n0, floor):
            kept.append(v / n)
    if not kept:
        return np.zeros((0, width), dtype=dtype)
    return np.array(kept)
