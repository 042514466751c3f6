"""Input-output equivalence of spin-network and two-level models.

The structural decision (:func:`condition_star_decide`) is exact: two
controllable networks with distinct, non-zero gyromagnetic ratios are
equivalent iff, after matching sites by their gyromagnetic ratios, the spins
agree and either every parameter and the initial state agree, or ``J' = -J``
and the initial states are related by the odd-even Cartan involution.
Simulation (:func:`falsify_by_simulation`) can only refute equivalence.

Throughout, the initial-state relation ``i rho0' = phi(i rho0)`` is applied
to the traceless parts of the states; the identity component is common to
every density matrix and is invisible to traceless observables.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Sequence

import numpy as np

from .cartan import Involution, odd_even_split
from .dynamics import ControlSchedule, propagate, random_schedule, two_level_model
from .linalg import expm_skew, hs_inner, max_abs
from .network import (
    SpinNetworkModel,
    build,
    dynamical_lie_algebra_dim,
    is_scalar_state,
    permute_sites,
)
from .spin import AXES, embed_local, site_operator, spin_matrices

PARAM_REL_TOL = 1e-9
STATE_TOL = 1e-10

# distribution of the falsifier's random schedules; recorded in every report
SCHEDULE_SEGMENTS = (4, 16)
SCHEDULE_AMPLITUDE = 2.0
SCHEDULE_DURATIONS = (0.1, 1.0)


class Verdict(str, enum.Enum):
    IDENTICAL = "IdenticalUpToPermutation"
    CARTAN = "CartanRelated"
    DISTINCT = "StructurallyDistinct"
    UNDECIDED = "Undecided"


def _close(a, b, rel: float = PARAM_REL_TOL) -> bool:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool(np.all(np.abs(a - b) <= rel * np.maximum(np.abs(a), np.abs(b))))


def traceless(m: np.ndarray) -> np.ndarray:
    N = m.shape[0]
    return m - np.trace(m) / N * np.eye(N)


def partner_state(inv: Involution, rho: np.ndarray) -> np.ndarray:
    """State ``rho'`` with ``i rho' = phi(i rho)`` on traceless parts and unit trace."""
    N = rho.shape[0]
    image = inv(1j * traceless(rho))
    out = np.eye(N) / N - 1j * image
    return 0.5 * (out + out.conj().T)


def cartan_partner(model: SpinNetworkModel, inv: Involution | None = None) -> SpinNetworkModel:
    """The model with ``J' = -J`` and the involution image of the initial state.

    Raises ``ModelError`` when the image is not a density matrix; this
    happens for strongly polarized states, whose partner has negative
    eigenvalues.
    """
    inv = inv or Involution(odd_even_split(model.site_dims))
    return build(model.spins, -model.exchange, model.gyros, partner_state(inv, model.rho0), max_dim=max(model.dim, 256))


# -- homomorphism check ------------------------------------------------------------------


def _u_basis(N: int):
    s = 1.0 / math.sqrt(2.0)
    for j in range(N):
        e = np.zeros((N, N), dtype=complex)
        e[j, j] = 1j
        yield e
    for j in range(N):
        for k in range(j + 1, N):
            a = np.zeros((N, N), dtype=complex)
            a[j, k], a[k, j] = s, -s
            yield a
            b = np.zeros((N, N), dtype=complex)
            b[j, k] = b[k, j] = 1j * s
            yield b


def adjoint_apply(phi: Callable, x: np.ndarray, dim: int) -> np.ndarray:
    """``phi^*(x)`` for a real-linear map on u(N), w.r.t. ``Re tr(A B^dagger)``."""
    if isinstance(phi, Involution):
        return phi(x)
    out = np.zeros((dim, dim), dtype=complex)
    for e in _u_basis(dim):
        out += hs_inner(x, phi(e)).real * e
    return out


@dataclass
class HomomorphismReport:
    residuals: dict
    tol: float

    @property
    def passed(self) -> bool:
        return all(r <= self.tol for r in self.residuals.values())

    def as_dict(self) -> dict:
        return {"residuals": dict(self.residuals), "tol": self.tol, "passed": self.passed}


def homomorphism_check(phi: Callable, m1, m2, tol: float = STATE_TOL) -> HomomorphismReport:
    """Residuals of the conditions under which ``phi`` maps model ``m1`` onto ``m2``.

    Checks ``A' = phi(A)``, ``B'_v = phi(B_v)``, ``phi^*(i S'_v) = i S_v`` and
    ``i rho0' = phi(i rho0)`` (traceless parts).
    """
    if m1.dim != m2.dim or (isinstance(phi, Involution) and phi.dim != m1.dim):
        raise ValueError("model dimensions do not match the homomorphism's carrier")
    N = m1.dim
    res = {"drift": max_abs(m2.drift - phi(m1.drift))}
    for v, b1, b2 in zip(AXES, m1.controls, m2.controls):
        res[f"control_{v}"] = max_abs(b2 - phi(b1))
    for v, s1, s2 in zip(AXES, m1.observables, m2.observables):
        res[f"observable_{v}"] = max_abs(adjoint_apply(phi, 1j * s2, N) - 1j * s1)
    res["state"] = max_abs(1j * traceless(m2.rho0) - phi(1j * traceless(m1.rho0)))
    return HomomorphismReport(res, tol)


# -- structural decision -----------------------------------------------------------------


@dataclass
class Witness:
    schedule: ControlSchedule
    gap: float
    trial: int

    def as_dict(self) -> dict:
        return {"trial": self.trial, "gap": self.gap, "schedule": self.schedule.as_rows()}


@dataclass
class EquivalenceVerdict:
    verdict: Verdict
    permutation: tuple[int, ...] | None = None  # 0-based: site k of model 1 <-> site permutation[k] of model 2
    witness: Witness | None = None
    residuals: dict = field(default_factory=dict)
    reasons: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def equivalent(self) -> bool | None:
        if self.verdict in (Verdict.IDENTICAL, Verdict.CARTAN):
            return True
        if self.verdict is Verdict.DISTINCT:
            return False
        return None

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "permutation": None if self.permutation is None else [p + 1 for p in self.permutation],
            "residuals": dict(self.residuals),
            "reasons": list(self.reasons),
            "diagnostics": dict(self.diagnostics),
            "witness": None if self.witness is None else self.witness.as_dict(),
        }


def hypothesis_violations(model: SpinNetworkModel, label: str, check_controllability: bool = True) -> list[str]:
    out = []
    g = model.gyros
    if np.any(g == 0):
        out.append(f"{label}: a gyromagnetic ratio is zero")
    for a, b in combinations(range(model.n), 2):
        if _close(g[a], g[b]):
            out.append(f"{label}: gyromagnetic ratios of sites {a + 1} and {b + 1} coincide")
    if check_controllability:
        d = dynamical_lie_algebra_dim(model)
        if d < model.dim**2 - 1:
            out.append(f"{label}: not controllable (Lie algebra dimension {d} < {model.dim**2 - 1})")
    return out


def match_sites(g1: Sequence[float], g2: Sequence[float]) -> tuple[int, ...] | None:
    """Permutation ``p`` with ``g2[p[k]] == g1[k]`` (relative tolerance), or None."""
    if len(g1) != len(g2):
        return None
    perm = []
    for a in g1:
        hits = [k for k, b in enumerate(g2) if _close(a, b)]
        if len(hits) != 1 or hits[0] in perm:
            return None
        perm.append(hits[0])
    return tuple(perm)


def _proportionality_diagnostic(m1: SpinNetworkModel, m2: SpinNetworkModel) -> dict:
    """Could ``J^2 = a^2 J'^2`` and ``l(l+1) = l'(l'+1)/a^2`` hold with a common ``a``?"""
    ratios = [l2.casimir / l1.casimir for l1, l2 in zip(m1.spins, m2.spins)]
    a2 = ratios[0]
    spins_ok = all(abs(r - a2) <= PARAM_REL_TOL * a2 for r in ratios)
    J1, J2 = m1.exchange, m2.exchange
    j_ok = _close(J1**2, a2 * J2**2)
    return {"alpha_squared": a2 if spins_ok else None, "proportional": bool(spins_ok and j_ok)}


def condition_star_decide(
    m1: SpinNetworkModel,
    m2: SpinNetworkModel,
    tol: float = STATE_TOL,
    check_controllability: bool = True,
) -> EquivalenceVerdict:
    """Exact equivalence decision for two spin-network models."""
    reasons = hypothesis_violations(m1, "model 1", check_controllability)
    reasons += hypothesis_violations(m2, "model 2", check_controllability)
    if is_scalar_state(m1.rho0) and is_scalar_state(m2.rho0):
        reasons.append("both initial states are scalar matrices")
    if reasons:
        return EquivalenceVerdict(Verdict.UNDECIDED, reasons=reasons)

    if m1.n != m2.n:
        return EquivalenceVerdict(Verdict.DISTINCT, reasons=[f"site counts differ ({m1.n} vs {m2.n})"])
    perm = match_sites(m1.gyros, m2.gyros)
    if perm is None:
        return EquivalenceVerdict(Verdict.DISTINCT, reasons=["no permutation aligns the gyromagnetic ratios"])
    p2 = permute_sites(m2, perm)

    if p2.spins != m1.spins:
        return EquivalenceVerdict(
            Verdict.DISTINCT,
            permutation=perm,
            reasons=["spins differ after site matching"],
            diagnostics={"proportionality": _proportionality_diagnostic(m1, p2)},
        )

    inv = Involution(odd_even_split(m1.site_dims))
    residuals = {
        "drift_equal": max_abs(p2.A - m1.A),
        "state_equal": max_abs(p2.rho0 - m1.rho0),
        "drift_involution": max_abs(p2.A - inv(m1.A)),
        "state_involution": max_abs(1j * traceless(p2.rho0) - inv(1j * traceless(m1.rho0))),
    }
    J1, J2 = m1.exchange, p2.exchange
    if _close(J1, J2):
        if residuals["state_equal"] <= tol:
            return EquivalenceVerdict(Verdict.IDENTICAL, perm, residuals=residuals)
        return EquivalenceVerdict(
            Verdict.DISTINCT,
            perm,
            residuals=residuals,
            reasons=["exchange constants agree but the initial states differ"],
        )
    if _close(J1, -J2):
        if residuals["state_involution"] <= tol and residuals["drift_involution"] <= tol:
            return EquivalenceVerdict(Verdict.CARTAN, perm, residuals=residuals)
        return EquivalenceVerdict(
            Verdict.DISTINCT,
            perm,
            residuals=residuals,
            reasons=["exchange constants are opposite but the initial states are not related by the involution"],
        )
    return EquivalenceVerdict(
        Verdict.DISTINCT,
        perm,
        residuals=residuals,
        reasons=["exchange constants agree neither up to a common sign nor exactly"],
    )


# -- falsification -------------------------------------------------------------------------


@dataclass
class FalsificationResult:
    witness: Witness | None
    trials_run: int
    max_gap: float
    gaps: list
    settings: dict

    @property
    def found(self) -> bool:
        return self.witness is not None

    def as_dict(self) -> dict:
        return {
            "witness": None if self.witness is None else self.witness.as_dict(),
            "trials_run": self.trials_run,
            "max_gap": self.max_gap,
            "gaps": list(self.gaps),
            "settings": dict(self.settings),
        }


def trial_rngs(seed: int, trials: int) -> list[np.random.Generator]:
    """Independent per-trial generators derived from the master seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def falsify_by_simulation(
    m1,
    m2,
    trials: int = 50,
    horizon: float = 8.0,
    seed: int = 0,
    tol: float = 1e-8,
    samples_per_segment: int = 9,
) -> FalsificationResult:
    """Search random piecewise-constant schedules for an output discrepancy above ``tol``."""
    if tuple(m1.labels) != tuple(m2.labels):
        raise ValueError("models expose different outputs")
    settings = {
        "trials": trials,
        "horizon": horizon,
        "seed": seed,
        "tol": tol,
        "samples_per_segment": samples_per_segment,
        "segments": list(SCHEDULE_SEGMENTS),
        "amplitude": SCHEDULE_AMPLITUDE,
        "durations": list(SCHEDULE_DURATIONS),
    }
    gaps = []
    for i, rng in enumerate(trial_rngs(seed, trials)):
        sched = random_schedule(rng, SCHEDULE_SEGMENTS, SCHEDULE_AMPLITUDE, SCHEDULE_DURATIONS, horizon)
        gap = propagate(m1, sched, samples_per_segment).max_gap(propagate(m2, sched, samples_per_segment))
        gaps.append(gap)
        if gap > tol:
            return FalsificationResult(Witness(sched, gap, i), i + 1, max(gaps), gaps, settings)
    return FalsificationResult(None, trials, max(gaps) if gaps else 0.0, gaps, settings)


# -- two-level systems ---------------------------------------------------------------------


def rotation(alpha: float) -> np.ndarray:
    """``K_alpha = [[cos a, sin a], [-sin a, cos a]]``."""
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, s], [-s, c]])


def bloch_components(rho) -> np.ndarray:
    """``(rho_x, rho_y, rho_z)`` with ``rho = 1/2 + sum_v rho_v s_v``."""
    return np.array([hs_inner(rho, s).real / hs_inner(s, s).real for s in spin_matrices("1/2")])


def z_rotation_automorphism(alpha: float) -> Callable[[np.ndarray], np.ndarray]:
    """``L -> exp(-i a sz) L exp(i a sz)``."""
    sz = spin_matrices("1/2")[2]
    U = expm_skew(-1j * alpha * sz)
    return lambda m: U @ np.asarray(m) @ U.conj().T


@dataclass
class TwoLevelVerdict:
    equivalent: bool | None
    alpha: float | None
    residuals: dict = field(default_factory=dict)
    reasons: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "alpha": self.alpha,
            "residuals": dict(self.residuals),
            "reasons": list(self.reasons),
        }


def two_level_decide(x, y, rho0, x2, y2, rho02, tol: float = 1e-9) -> TwoLevelVerdict:
    """Closed-form equivalence test for two single-control two-level models."""
    m1 = two_level_model(x, y, rho0)
    m2 = two_level_model(x2, y2, rho02)
    reasons = []
    if not m1.controllable:
        reasons.append("model 1: x^2 + y^2 = 0")
    if not m2.controllable:
        reasons.append("model 2: x'^2 + y'^2 = 0")
    if is_scalar_state(m1.rho0) and is_scalar_state(m2.rho0):
        reasons.append("both initial states are scalar matrices")
    if reasons:
        return TwoLevelVerdict(None, None, reasons=reasons)

    r1 = bloch_components(m1.rho0)
    r2 = bloch_components(m2.rho0)
    n1, n2 = m1.x**2 + m1.y**2, m2.x**2 + m2.y**2
    alpha = (math.atan2(m1.y, m1.x) - math.atan2(m2.y, m2.x)) % (2 * math.pi)
    K = rotation(alpha)
    res = {
        "norm": float(abs(n1 - n2)),
        "drift_rotation": max_abs(K @ [m1.x, m1.y] - np.array([m2.x, m2.y])),
        "state_rotation": max_abs(K @ r1[:2] - r2[:2]),
        "state_z": float(abs(r1[2] - r2[2])),
    }
    if res["norm"] > tol * max(1.0, n1):
        return TwoLevelVerdict(False, None, res, ["x^2 + y^2 differs between the models"])
    if res["state_z"] > tol:
        return TwoLevelVerdict(False, None, res, ["z components of the initial states differ"])
    if res["state_rotation"] > tol:
        return TwoLevelVerdict(False, None, res, ["initial states are not rotated like the drifts"])
    return TwoLevelVerdict(True, alpha, res)


# -- trace identities ----------------------------------------------------------------------


def _traces(op: np.ndarray, states: np.ndarray) -> np.ndarray:
    """``Tr(op rho(t))`` for every stored state."""
    return np.einsum("ij,tji->t", op, states)


def periodicity_check(l, points: int = 33) -> dict:
    """``P(t) = exp(i sz t) sx exp(-i sz t)``: period 2pi, ``P(0) = sx``, ``P(pi) = -sx``."""
    sx, _, sz = spin_matrices(l)

    def P(t):
        U = expm_skew(1j * sz * t)
        return U @ sx @ U.conj().T

    ts = np.linspace(0.0, 2 * np.pi, points)
    return {
        "periodicity": max(max_abs(P(t + 2 * np.pi) - P(t)) for t in ts),
        "P0": max_abs(P(0.0) - sx),
        "Ppi": max_abs(P(np.pi) + sx),
    }


@dataclass
class TraceIdentityReport:
    families: dict  # name -> max residual
    tol: float
    counts: dict

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.families.values())

    def as_dict(self) -> dict:
        return {"families": dict(self.families), "counts": dict(self.counts), "tol": self.tol, "passed": self.passed}


def _related(m1, m2, inv: Involution) -> bool:
    if m1.spins != m2.spins or not _close(m1.gyros, m2.gyros):
        return False
    if _close(m1.exchange, m2.exchange) and max_abs(m1.rho0 - m2.rho0) <= 1e-8:
        return True
    return homomorphism_check(inv, m1, m2, tol=1e-8).passed


def trace_identity_suite(
    m1: SpinNetworkModel,
    m2: SpinNetworkModel,
    inv: Involution,
    schedule: ControlSchedule,
    tol: float = 1e-8,
    samples_per_segment: int = 9,
    conj_points: int = 9,
) -> TraceIdentityReport:
    """Numerically verify the trace identities that hold between equivalent networks.

    Families:

    ``single_site``
        ``Tr(I_kv rho) = Tr(I'_kv rho')``.
    ``premise``, ``extension``, ``contraction``
        ``b Tr(I rho) = b' Tr(I' rho')`` for multi-site ``I``, and the identities
        obtained by adding an outside site ``d`` (prefactor ``J_kd``) or
        removing an inside one (prefactor ``l_d(l_d+1) J_kd``).
    ``squared_exchange``
        ``l_d(l_d+1) J_kd^2 = l'_d(l'_d+1) J'_kd^2``.
    ``commutator``
        traces of ``[I_kv, I_k'v']``.
    ``conjugated``
        site operators conjugated by ``exp(i sz t)``, ``t`` in ``[0, 2pi]``.
    ``periodicity``
        ``P(t) = exp(i sz t) sx exp(-i sz t)`` facts and the factorization of
        the conjugated site operator as ``P(t)`` on its site.

    Sites in ``m2`` must already be aligned with ``m1``.
    """
    if not _related(m1, m2, inv):
        raise ValueError("trace identities only hold for equivalent (identical or Cartan-related) pairs")
    dims = m1.site_dims
    n = m1.n
    tr1 = propagate(m1, schedule, samples_per_segment, keep_states=True).states
    tr2 = propagate(m2, schedule, samples_per_segment, keep_states=True).states
    J1, J2 = m1.exchange, m2.exchange
    cas1 = [l.casimir for l in m1.spins]
    cas2 = [l.casimir for l in m2.spins]

    cache: dict = {}

    def op(sites):
        key = tuple(sites)
        if key not in cache:
            cache[key] = site_operator(dims, key)
        return cache[key]

    def both(sites):
        o = op(sites)
        return _traces(o, tr1), _traces(o, tr2)

    fam = {k: 0.0 for k in ("single_site", "premise", "extension", "contraction", "squared_exchange", "commutator", "conjugated", "periodicity")}
    counts = {k: 0 for k in fam}

    def record(name, value):
        fam[name] = max(fam[name], float(value))
        counts[name] += 1

    for k, v in product(range(1, n + 1), AXES):
        a, b = both([(k, v)])
        record("single_site", max_abs(a - b))

    # premises: r = 1 (beta = 1), r = 2 and r = 3 built from nonzero exchange chains
    premises = []
    for k, v in product(range(1, n + 1), AXES):
        premises.append(((k,), (v,), 1.0, 1.0))
    for k, d in combinations(range(1, n + 1), 2):
        if J1[k - 1, d - 1] != 0:
            for vs in product(AXES, repeat=2):
                premises.append(((k, d), vs, J1[k - 1, d - 1], J2[k - 1, d - 1]))
    for trio in combinations(range(1, n + 1), 3):
        chain = None
        for (a, b), c in (((trio[0], trio[1]), trio[2]), ((trio[0], trio[2]), trio[1]), ((trio[1], trio[2]), trio[0])):
            for kb in (a, b):
                if J1[a - 1, b - 1] != 0 and J1[kb - 1, c - 1] != 0:
                    chain = (J1[a - 1, b - 1] * J1[kb - 1, c - 1], J2[a - 1, b - 1] * J2[kb - 1, c - 1])
                    break
            if chain:
                break
        if chain:
            for vs in product(AXES, repeat=3):
                premises.append((trio, vs, chain[0], chain[1]))

    for sites, axes, beta1, beta2 in premises:
        spec = list(zip(sites, axes))
        a, b = both(spec)
        record("premise", max_abs(beta1 * a - beta2 * b))
        # extend by an outside site d, for each k in the premise
        for kb in sites:
            for d in range(1, n + 1):
                if d in sites:
                    continue
                for vb in AXES:
                    ext = sorted(spec + [(d, vb)])
                    a, b = both(ext)
                    record("extension", max_abs(beta1 * J1[kb - 1, d - 1] * a - beta2 * J2[kb - 1, d - 1] * b))
        # contract an inside site d against k
        if len(sites) >= 2:
            for kb, d in product(sites, sites):
                if kb == d:
                    continue
                rest = [(k, v) for k, v in spec if k != d]
                a, b = both(rest)
                lhs = beta1 * cas1[d - 1] * J1[kb - 1, d - 1] * a
                rhs = beta2 * cas2[d - 1] * J2[kb - 1, d - 1] * b
                record("contraction", max_abs(lhs - rhs))

    for k, d in combinations(range(n), 2):
        record("squared_exchange", abs(cas1[d] * J1[k, d] ** 2 - cas2[d] * J2[k, d] ** 2))

    # Tr([W, I_kv] rho) = Tr([W', I'_kv] rho') starting from W = I_k'v'
    for (k1, v1), (k2, v2) in product(product(range(1, n + 1), AXES), repeat=2):
        w, i = op([(k1, v1)]), op([(k2, v2)])
        c = w @ i - i @ w
        record("commutator", max_abs(_traces(c, tr1) - _traces(c, tr2)))

    # site-k operators conjugated by exp(i sz t) on site k
    ts = np.linspace(0.0, 2 * np.pi, conj_points)
    for k in range(1, n + 1):
        l = m1.spins[k - 1]
        sz = spin_matrices(l)[2]
        for t in ts:
            C = embed_local(dims, {k: expm_skew(1j * sz * t)})
            for v in AXES:
                o = C @ op([(k, v)]) @ C.conj().T
                record("conjugated", max_abs(_traces(o, tr1) - _traces(o, tr2)))

    # the conjugated site operator factorizes as P(t) on site k, P(0) = sx, P(pi) = -sx
    for k in range(1, n + 1):
        l = m1.spins[k - 1]
        sx, _, sz = spin_matrices(l)
        chk = periodicity_check(l)
        for value in chk.values():
            record("periodicity", value)
        for t in ts:
            U = expm_skew(1j * sz * t)
            C = embed_local(dims, {k: U})
            lhs = C @ op([(k, "x")]) @ C.conj().T
            rhs = embed_local(dims, {k: U @ sx @ U.conj().T})
            record("periodicity", max_abs(lhs - rhs))

    return TraceIdentityReport(fam, tol, counts)
