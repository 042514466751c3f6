"""Liouville dynamics under piecewise-constant controls.

Within a segment the generator ``G = A + sum_v u_v B_v`` is constant and the
state is propagated exactly, ``rho(t + tau) = exp(G tau) rho exp(-G tau)``,
using the eigendecomposition of the Hermitian matrix ``iG``.  Any object
with ``drift``, ``controls`` (three generators, one per axis), ``observables``
and ``rho0`` attributes can be propagated; :class:`TwoLevelModel` is the
single-control spin-1/2 case.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .linalg import dagger, max_abs
from .network import ModelError, validate_density
from .spin import spin_matrices

DEFAULT_SAMPLES_PER_SEGMENT = 9  # segment endpoint plus 8 interior points


@dataclass(frozen=True)
class ControlSchedule:
    """Piecewise-constant controls: rows of ``(duration, u_x, u_y, u_z)``."""

    segments: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self):
        rows = []
        for row in self.segments:
            if len(row) != 4:
                raise ValueError(f"schedule rows are (duration, u_x, u_y, u_z); got {row!r}")
            d, ux, uy, uz = (float(x) for x in row)
            if not all(math.isfinite(x) for x in (d, ux, uy, uz)):
                raise ValueError("schedule values must be finite")
            if d <= 0:
                raise ValueError("segment durations must be positive")
            rows.append((d, ux, uy, uz))
        if not rows:
            raise ValueError("schedule must have at least one segment")
        object.__setattr__(self, "segments", tuple(rows))

    @property
    def horizon(self) -> float:
        return float(sum(s[0] for s in self.segments))

    def __add__(self, other: "ControlSchedule") -> "ControlSchedule":
        return ControlSchedule(self.segments + other.segments)

    def truncated(self, horizon: float) -> "ControlSchedule":
        """Cut the schedule at total time ``horizon``."""
        rows, t = [], 0.0
        for d, ux, uy, uz in self.segments:
            if t >= horizon:
                break
            rows.append((min(d, horizon - t), ux, uy, uz))
            t += d
        return ControlSchedule(tuple(rows))

    def as_rows(self) -> list[list[float]]:
        return [list(s) for s in self.segments]

    @classmethod
    def constant(cls, duration: float, ux: float = 0.0, uy: float = 0.0, uz: float = 0.0) -> "ControlSchedule":
        return cls(((duration, ux, uy, uz),))


def random_schedule(
    rng: np.random.Generator,
    segments: tuple[int, int] = (4, 16),
    amplitude: float = 2.0,
    durations: tuple[float, float] = (0.1, 1.0),
    horizon: float | None = None,
) -> ControlSchedule:
    """Random schedule: segment count uniform in ``segments`` (inclusive),
    amplitudes uniform in ``[-amplitude, amplitude]``, durations uniform in
    ``durations``; optionally truncated at ``horizon``."""
    count = int(rng.integers(segments[0], segments[1] + 1))
    d = rng.uniform(durations[0], durations[1], size=count)
    u = rng.uniform(-amplitude, amplitude, size=(count, 3))
    sched = ControlSchedule(tuple((d[i], *u[i]) for i in range(count)))
    return sched.truncated(horizon) if horizon is not None else sched


@dataclass(frozen=True, eq=False)
class OutputTrace:
    times: np.ndarray
    y: np.ndarray  # (len(times), len(labels))
    labels: tuple[str, ...]
    states: np.ndarray | None = None

    def max_gap(self, other: "OutputTrace") -> float:
        """``max_{t, v} |y_v(t) - y'_v(t)|`` for traces on the same time grid."""
        if self.y.shape != other.y.shape or max_abs(self.times - other.times) > 1e-12:
            raise ValueError("traces are sampled on different grids")
        return max_abs(self.y - other.y)

    def to_csv(self, out=None) -> str:
        """Write ``t,<labels>`` rows at 17 significant digits; returns the text."""
        buf = io.StringIO()
        buf.write(",".join(("t",) + self.labels) + "\n")
        for t, row in zip(self.times, self.y):
            buf.write(",".join(f"{x:.17g}" for x in (t, *row)) + "\n")
        text = buf.getvalue()
        if out is not None:
            with open(out, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "OutputTrace":
        lines = [ln for ln in text.strip().splitlines() if ln]
        header = lines[0].split(",")
        data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
        return cls(data[:, 0], data[:, 1:], tuple(header[1:]))


def _expectations(observables, rho) -> list[float]:
    # Tr(S rho) = sum_ij S_ji rho_ij; real for Hermitian S, rho
    return [float(np.vdot(s.conj().T, rho).real) for s in observables]


def propagate(
    model,
    schedule: ControlSchedule,
    samples_per_segment: int = DEFAULT_SAMPLES_PER_SEGMENT,
    keep_states: bool = False,
    rho0: np.ndarray | None = None,
) -> OutputTrace:
    """Exact propagation of ``model`` under ``schedule``.

    Samples are taken at ``t = 0`` and at ``samples_per_segment`` evenly
    spaced instants in each segment, the last being the segment endpoint.
    ``rho0`` overrides the model's initial state.
    """
    if samples_per_segment < 1:
        raise ValueError("samples_per_segment must be >= 1")
    rho = np.array(model.rho0 if rho0 is None else rho0, dtype=complex)
    drift = model.drift
    controls = model.controls
    obs = model.observables
    times = [0.0]
    ys = [_expectations(obs, rho)]
    states = [rho.copy()] if keep_states else None
    t0 = 0.0
    frac = np.arange(1, samples_per_segment + 1) / samples_per_segment
    for d, *u in schedule.segments:
        G = drift + sum(uv * b for uv, b in zip(u, controls))
        # G = -i H with H = i G Hermitian
        H = 1j * G
        evals, V = np.linalg.eigh(0.5 * (H + dagger(H)))
        rt = dagger(V) @ rho @ V
        obs_t = [dagger(V) @ s @ V for s in obs]
        diff = evals[:, None] - evals[None, :]
        for f in frac:
            tau = f * d
            r = rt * np.exp(-1j * diff * tau)
            times.append(t0 + tau)
            ys.append(_expectations(obs_t, r))
            if keep_states:
                states.append(V @ r @ dagger(V))
        rho = V @ r @ dagger(V)
        t0 += d
    return OutputTrace(
        np.array(times),
        np.array(ys),
        tuple(model.labels),
        np.array(states) if keep_states else None,
    )


# -- two-level model ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TwoLevelModel:
    """``d rho/dt = [x i sx + y i sy + u(t) i sz, rho]``, output ``Tr(sz rho)``.

    The single control ``u`` is read from the ``u_z`` column of a schedule.
    """

    x: float
    y: float
    rho0: np.ndarray

    labels = ("y",)

    @property
    def dim(self) -> int:
        return 2

    @property
    def drift(self) -> np.ndarray:
        sx, sy, _ = spin_matrices("1/2")
        return self.x * 1j * sx + self.y * 1j * sy

    @property
    def controls(self) -> tuple[np.ndarray, ...]:
        _, _, sz = spin_matrices("1/2")
        z = np.zeros((2, 2), dtype=complex)
        return (z, z, 1j * sz)

    @property
    def observables(self) -> tuple[np.ndarray, ...]:
        return (np.array(spin_matrices("1/2")[2]),)

    @property
    def controllable(self) -> bool:
        return self.x**2 + self.y**2 != 0


def two_level_model(x: float, y: float, rho0) -> TwoLevelModel:
    x, y = float(x), float(y)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ModelError("x and y must be finite")
    rho = validate_density(rho0, 2)
    rho.setflags(write=False)
    return TwoLevelModel(x, y, rho)


def bloch_state(rx: float, ry: float, rz: float) -> np.ndarray:
    """``rho = 1/2 + rx sx + ry sy + rz sz`` in the package's spin-1/2 matrices."""
    sx, sy, sz = spin_matrices("1/2")
    return 0.5 * np.eye(2) + rx * sx + ry * sy + rz * sz
