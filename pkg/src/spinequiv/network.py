"""Heisenberg spin-network models and their structural analysis.

A model holds the spins ``l_j``, the symmetric exchange matrix ``J``, the
gyromagnetic ratios ``gamma`` and the initial density matrix, plus the
derived skew-Hermitian generators

    A   = -i sum_{k<l} J_kl (I_kx,lx + I_ky,ly + I_kz,lz)
    B_v = -i sum_k gamma_k I_kv

and the total-magnetization observables ``S_v = sum_k I_kv``.  The state
evolves as ``d rho/dt = [A + sum_v B_v u_v(t), rho]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .cartan import DEFAULT_MAX_DIM
from .linalg import dagger, max_abs
from .spin import AXES, HalfInt, site_operator

STATE_HERMITIAN_TOL = 1e-10
STATE_PSD_TOL = 1e-10
STATE_TRACE_TOL = 1e-12
LIE_RANK_TOL = 1e-8


class ModelError(ValueError):
    """Invalid model parameters."""


class ClosureError(RuntimeError):
    """Lie-closure iteration budget exhausted."""


@dataclass(frozen=True, eq=False)
class SpinNetworkModel:
    spins: tuple[HalfInt, ...]
    exchange: np.ndarray
    gyros: np.ndarray
    rho0: np.ndarray
    A: np.ndarray = field(repr=False)
    B: tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False)
    S: tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False)
    rho0_spec: object = field(default=None, repr=False)

    labels = ("y_x", "y_y", "y_z")

    @property
    def n(self) -> int:
        return len(self.spins)

    @property
    def site_dims(self) -> tuple[int, ...]:
        return tuple(l.dim for l in self.spins)

    @property
    def dim(self) -> int:
        return int(np.prod(self.site_dims))

    # dynamics protocol
    @property
    def drift(self) -> np.ndarray:
        return self.A

    @property
    def controls(self) -> tuple[np.ndarray, ...]:
        return self.B

    @property
    def observables(self) -> tuple[np.ndarray, ...]:
        return self.S

    def with_state(self, rho0) -> "SpinNetworkModel":
        return build(self.spins, self.exchange, self.gyros, rho0, max_dim=max(self.dim, DEFAULT_MAX_DIM))

    def with_exchange(self, exchange) -> "SpinNetworkModel":
        return build(self.spins, exchange, self.gyros, self.rho0, max_dim=max(self.dim, DEFAULT_MAX_DIM))

    def params(self) -> dict:
        """Plain-data description, suitable for reports."""
        n = self.n
        return {
            "spins": [str(l) for l in self.spins],
            "J": [
                {"k": k + 1, "l": l + 1, "value": float(self.exchange[k, l])}
                for k in range(n)
                for l in range(k + 1, n)
                if self.exchange[k, l] != 0
            ],
            "gamma": [float(g) for g in self.gyros],
        }


# -- construction ----------------------------------------------------------------


def _exchange_matrix(exchange, n: int) -> np.ndarray:
    if isinstance(exchange, Mapping):
        J = np.zeros((n, n))
        for (k, l), v in exchange.items():
            if not (1 <= k <= n and 1 <= l <= n) or k == l:
                raise ModelError(f"bad exchange pair ({k}, {l}) for {n} sites")
            J[k - 1, l - 1] = J[l - 1, k - 1] = float(v)
        return J
    J = np.array(exchange, dtype=float).reshape(n, n) if n else np.zeros((0, 0))
    if not np.array_equal(J, J.T):
        raise ModelError("exchange matrix must be symmetric")
    if np.any(np.diag(J) != 0):
        raise ModelError("exchange matrix must have zero diagonal")
    return J


def validate_density(rho, dim: int) -> np.ndarray:
    rho = np.array(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise ModelError(f"rho0 has shape {rho.shape}, expected {(dim, dim)}")
    if max_abs(rho - dagger(rho)) > STATE_HERMITIAN_TOL:
        raise ModelError("rho0 is not Hermitian")
    if abs(np.trace(rho) - 1.0) > STATE_TRACE_TOL:
        raise ModelError(f"rho0 has trace {np.trace(rho).real!r}, expected 1")
    lo = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0]
    if lo < -STATE_PSD_TOL:
        raise ModelError(f"rho0 is not positive semidefinite (min eigenvalue {lo:.3e})")
    return rho


def preset_state(spec, A: np.ndarray, Sz: np.ndarray) -> np.ndarray:
    """Resolve a named initial state.

    ``spec`` is a preset name or a mapping with a ``"preset"`` key:

    * ``"maximally-mixed"``: ``I/N``.
    * ``"ground-z"``: projector on the lowest eigenvector of total ``S_z``.
    * ``{"preset": "thermal", "beta": b}``: ``exp(-b H0)/Z`` with ``H0 = iA``.
    * ``{"preset": "pseudo-pure", "p": p, "seed": s}``: ``(1-p) I/N + p |psi><psi|``
      for a seeded random pure state ``psi``.
    """
    if isinstance(spec, str):
        spec = {"preset": spec}
    name = spec.get("preset")
    N = A.shape[0]
    if name == "maximally-mixed":
        return np.eye(N, dtype=complex) / N
    if name == "ground-z":
        evals, vecs = np.linalg.eigh(Sz)
        v = vecs[:, 0]
        return np.outer(v, v.conj())
    if name == "thermal":
        beta = float(spec.get("beta", 1.0))
        evals, vecs = np.linalg.eigh(1j * A)
        w = np.exp(-beta * (evals - evals.min()))
        rho = (vecs * (w / w.sum())) @ dagger(vecs)
        return 0.5 * (rho + dagger(rho))
    if name == "pseudo-pure":
        p = float(spec["p"])
        if not 0.0 <= p <= 1.0:
            raise ModelError("pseudo-pure weight p must lie in [0, 1]")
        rng = np.random.default_rng(int(spec.get("seed", 0)))
        psi = rng.normal(size=N) + 1j * rng.normal(size=N)
        psi /= np.linalg.norm(psi)
        return (1 - p) * np.eye(N) / N + p * np.outer(psi, psi.conj())
    raise ModelError(f"unknown rho0 preset {name!r}")


def build(
    spins: Sequence,
    exchange,
    gyros: Sequence[float],
    rho0="maximally-mixed",
    max_dim: int = DEFAULT_MAX_DIM,
) -> SpinNetworkModel:
    """Build a validated :class:`SpinNetworkModel`.

    ``exchange`` is an ``n x n`` symmetric array with zero diagonal or a
    mapping ``{(k, l): J_kl}`` with 1-based sites.  ``rho0`` is a density
    matrix or a preset accepted by :func:`preset_state`.
    """
    spins = tuple(HalfInt.parse(l) for l in spins)
    n = len(spins)
    if n < 1:
        raise ModelError("a model needs at least one site")
    if any(l.twice < 1 for l in spins):
        raise ModelError("every site needs spin >= 1/2")
    dims = tuple(l.dim for l in spins)
    N = int(np.prod(dims))
    if N > max_dim:
        raise ModelError(f"Hilbert-space dimension {N} exceeds the cap of {max_dim}")
    J = _exchange_matrix(exchange, n)
    gamma = np.array(gyros, dtype=float).reshape(-1)
    if gamma.shape != (n,):
        raise ModelError(f"expected {n} gyromagnetic ratios, got {gamma.size}")
    if not (np.all(np.isfinite(J)) and np.all(np.isfinite(gamma))):
        raise ModelError("parameters must be finite")

    singles = {(k, v): site_operator(dims, [(k, v)]) for k in range(1, n + 1) for v in AXES}
    A = np.zeros((N, N), dtype=complex)
    for k in range(n):
        for l in range(k + 1, n):
            if J[k, l] != 0:
                pair = sum(singles[(k + 1, v)] @ singles[(l + 1, v)] for v in AXES)
                A += -1j * J[k, l] * pair
    B = tuple(-1j * sum(gamma[k] * singles[(k + 1, v)] for k in range(n)) for v in AXES)
    S = tuple(sum(singles[(k + 1, v)] for k in range(n)) for v in AXES)

    spec = None
    if isinstance(rho0, (str, Mapping)):
        spec = rho0
        rho0 = preset_state(rho0, A, S[2])
    rho0 = validate_density(rho0, N)
    for m in (A, *B, *S, rho0, J, gamma):
        m.setflags(write=False)
    return SpinNetworkModel(spins, J, gamma, rho0, A, B, S, spec)


def permute_operator(m: np.ndarray, site_dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: new site ``i`` is old site ``perm[i]`` (0-based)."""
    n = len(site_dims)
    dims = tuple(site_dims)
    t = np.asarray(m).reshape(dims + dims)
    axes = list(perm) + [n + p for p in perm]
    N = int(np.prod(dims))
    return t.transpose(axes).reshape(N, N)


def permute_sites(model: SpinNetworkModel, perm: Sequence[int]) -> SpinNetworkModel:
    """Relabel sites so that new site ``i`` is old site ``perm[i]`` (0-based)."""
    perm = list(perm)
    if sorted(perm) != list(range(model.n)):
        raise ModelError(f"{perm} is not a permutation of {model.n} sites")
    J = model.exchange[np.ix_(perm, perm)]
    rho = permute_operator(model.rho0, model.site_dims, perm)
    return build(
        [model.spins[p] for p in perm],
        J,
        model.gyros[perm],
        rho,
        max_dim=max(model.dim, DEFAULT_MAX_DIM),
    )


# -- structure --------------------------------------------------------------------


def interaction_graph(model: SpinNetworkModel) -> np.ndarray:
    """Boolean adjacency matrix: edge ``(k, l)`` iff ``J_kl != 0`` exactly."""
    return model.exchange != 0


def is_connected(model: SpinNetworkModel) -> bool:
    if model.n == 1:
        return True
    ncomp, _ = connected_components(interaction_graph(model).astype(int), directed=False)
    return ncomp == 1


def _realvec(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    return np.concatenate([m.real.ravel(), m.imag.ravel()])


def lie_closure_dim(generators: Sequence[np.ndarray], tol: float = LIE_RANK_TOL, max_elements: int | None = None) -> int:
    """Real dimension of the Lie algebra generated by skew-Hermitian ``generators``.

    New elements are brackets of already-found basis elements with the
    (normalized) generators; a bracket counts when its component orthogonal
    to the current basis exceeds ``tol`` relative to the unit scale of the
    normalized elements.
    """
    gens = [np.asarray(g, dtype=complex) for g in generators]
    if not gens:
        return 0
    N = gens[0].shape[0]
    cap = N * N if max_elements is None else max_elements
    # brackets are traceless, so traceless generators stay inside su(N)
    full = N * N - 1 if all(abs(np.trace(g)) <= tol * max(1.0, np.linalg.norm(g)) for g in gens) else N * N
    basis: list[np.ndarray] = []   # real vectors
    mats: list[np.ndarray] = []

    def add(m) -> bool:
        v = _realvec(m)
        for _ in range(2):
            if basis:
                Q = np.array(basis)
                v = v - Q.T @ (Q @ v)
        nrm = np.linalg.norm(v)
        if nrm <= tol:
            return False
        if len(basis) >= cap:
            raise ClosureError(f"Lie closure exceeded {cap} elements")
        v = v / nrm
        basis.append(v)
        mats.append((v[: N * N] + 1j * v[N * N :]).reshape(N, N))
        return True

    normed = []
    for g in gens:
        s = np.linalg.norm(g)
        if s > 0:
            g = g / s
            if add(g):
                normed.append(g)
    i = 0
    while i < len(mats):
        q = mats[i]
        for g in normed:
            add(g @ q - q @ g)
            if len(basis) >= full:
                return len(basis)
        i += 1
    return len(basis)


def dynamical_lie_algebra_dim(model, tol: float = LIE_RANK_TOL) -> int:
    return lie_closure_dim([model.drift, *model.controls], tol=tol)


def is_controllable(model, tol: float = LIE_RANK_TOL) -> bool:
    """Lie-rank test: the generated algebra must contain all of su(N)."""
    return dynamical_lie_algebra_dim(model, tol) >= model.dim**2 - 1


def is_scalar_state(rho: np.ndarray, tol: float = 1e-10) -> bool:
    N = rho.shape[0]
    return max_abs(rho - np.eye(N) * np.trace(rho) / N) <= tol


def warn_if_both_mixed(m1: SpinNetworkModel, m2: SpinNetworkModel) -> bool:
    if is_scalar_state(m1.rho0) and is_scalar_state(m2.rho0):
        warnings.warn("both initial states are scalar; every pair of such models is equivalent", stacklevel=2)
        return True
    return False
