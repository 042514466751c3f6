"""Spin angular-momentum matrices and their embedding into a spin network.

Conventions: hbar = 1, basis ordered by magnetic quantum number
``m = l, l-1, ..., -l`` and the component matrices satisfy

    [i sx, i sy] = i sz,   [i sy, i sz] = i sx,   [i sz, i sx] = i sy.

For spin 1/2 this gives ``sx = X/2``, ``sy = -Y/2``, ``sz = Z/2`` in terms of
the usual Pauli matrices; note the sign of ``sy``, which is the opposite of
the textbook ``(J+ - J-)/(2i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .linalg import kron_all

AXES = ("x", "y", "z")


@dataclass(frozen=True, order=True)
class HalfInt:
    """Exact non-negative half-integer, stored as twice its value."""

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, (int, np.integer)) or isinstance(self.twice, bool):
            raise TypeError("HalfInt.twice must be an integer")
        if self.twice < 0:
            raise ValueError("spin must be non-negative")
        object.__setattr__(self, "twice", int(self.twice))

    @classmethod
    def parse(cls, value) -> "HalfInt":
        """Build from ``"3/2"``, ``"1"``, ``Fraction(1, 2)``, ``1`` or a HalfInt.

        Floats are rejected so half-integers never pass through a float parse.
        """
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, float):
            raise TypeError("spin values must be given as strings or integers, not floats")
        if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
            return cls(2 * int(value))
        try:
            frac = Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse spin value {value!r}") from exc
        twice = 2 * frac
        if twice.denominator != 1:
            raise ValueError(f"spin {value!r} is not a half-integer")
        return cls(int(twice))

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice, 2)

    @property
    def dim(self) -> int:
        return self.twice + 1

    @property
    def casimir(self) -> float:
        """``l (l + 1)``."""
        return float(self.value * (self.value + 1))

    @property
    def is_half_integer(self) -> bool:
        return self.twice % 2 == 1

    def __float__(self) -> float:
        return self.twice / 2

    def __str__(self) -> str:
        return str(self.twice // 2) if self.twice % 2 == 0 else f"{self.twice}/2"


def _as_halfint(l) -> HalfInt:
    l = HalfInt.parse(l)
    if l.twice < 1:
        raise ValueError("a spin site needs l >= 1/2")
    return l


@lru_cache(maxsize=None)
def _spin_matrices_cached(twice: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    l = twice / 2
    m = l - np.arange(twice + 1)
    jp = np.zeros((twice + 1, twice + 1))
    # <m+1| J+ |m> sits one row above the column of m
    for col in range(1, twice + 1):
        jp[col - 1, col] = np.sqrt(l * (l + 1) - m[col] * (m[col] + 1))
    jm = jp.T
    sx = (0.5 * (jp + jm)).astype(complex)
    sy = (0.5j * (jp - jm)).astype(complex)
    sz = np.diag(m).astype(complex)
    for a in (sx, sy, sz):
        a.setflags(write=False)
    return sx, sy, sz


def spin_matrices(l) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(sx, sy, sz)`` for spin ``l`` (read-only, memoized)."""
    return _spin_matrices_cached(_as_halfint(l).twice)


def spin_component(l, axis: str) -> np.ndarray:
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    return spin_matrices(l)[AXES.index(axis)]


def dim_to_spin(dim: int) -> HalfInt:
    if dim < 2:
        raise ValueError("a spin site has dimension >= 2")
    return HalfInt(dim - 1)


@dataclass(frozen=True)
class SiteOperatorSpec:
    """Multi-site operator ``I_{k1 v1, ..., kr vr}`` on a network.

    ``sites`` holds ``(k, v)`` pairs with 1-based site index ``k`` and axis
    ``v`` in ``{"x", "y", "z"}``; the indices must be strictly increasing.
    """

    sites: tuple[tuple[int, str], ...]
    network_dims: tuple[int, ...]

    def __post_init__(self):
        sites = tuple((int(k), str(v)) for k, v in self.sites)
        dims = tuple(int(d) for d in self.network_dims)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "network_dims", dims)
        n = len(dims)
        if any(d < 2 for d in dims):
            raise ValueError("site dimensions must be >= 2")
        seen = set()
        prev = 0
        for k, v in sites:
            if not 1 <= k <= n:
                raise IndexError(f"site index {k} out of range 1..{n}")
            if k in seen:
                raise ValueError(f"duplicate site {k}")
            if k < prev:
                raise ValueError("site indices must be strictly increasing")
            if v not in AXES:
                raise ValueError(f"axis must be one of {AXES}, got {v!r}")
            seen.add(k)
            prev = k


def embed_local(network_dims: Sequence[int], local: Mapping[int, np.ndarray]) -> np.ndarray:
    """Kronecker product with ``local[k]`` at (1-based) site ``k``, identity elsewhere."""
    n = len(network_dims)
    for k, m in local.items():
        if not 1 <= k <= n:
            raise IndexError(f"site index {k} out of range 1..{n}")
        if np.shape(m) != (network_dims[k - 1],) * 2:
            raise ValueError(f"operator at site {k} has shape {np.shape(m)}, expected dim {network_dims[k - 1]}")
    return kron_all(local.get(k, np.eye(d)) for k, d in enumerate(network_dims, start=1))


def embed(spec: SiteOperatorSpec) -> np.ndarray:
    """Embedded multi-site spin operator; site 1 is the leftmost Kronecker factor."""
    dims = spec.network_dims
    return embed_local(dims, {k: spin_component(dim_to_spin(dims[k - 1]), v) for k, v in spec.sites})


def site_operator(network_dims: Sequence[int], sites: Iterable[tuple[int, str]]) -> np.ndarray:
    """Shorthand for ``embed(SiteOperatorSpec(sites, dims))``."""
    return embed(SiteOperatorSpec(tuple(sites), tuple(network_dims)))
