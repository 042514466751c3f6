import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinequiv.cartan import Involution
from spinequiv.dynamics import ControlSchedule, bloch_state, random_schedule
from spinequiv.equivalence import (
    Verdict,
    adjoint_apply,
    bloch_components,
    cartan_partner,
    condition_star_decide,
    falsify_by_simulation,
    homomorphism_check,
    periodicity_check,
    match_sites,
    partner_state,
    rotation,
    trace_identity_suite,
    two_level_decide,
    z_rotation_automorphism,
)
from spinequiv.network import ModelError, build, permute_sites
from spinequiv.spin import spin_matrices

from conftest import random_state


# -- homomorphism check ---------------------------------------------------------------


def test_partner_satisfies_homomorphism_conditions(three_site, three_site_partner):
    inv = Involution.for_dims(three_site.site_dims)
    rep = homomorphism_check(inv, three_site, three_site_partner)
    assert rep.passed and max(rep.residuals.values()) <= 1e-10


def test_identity_map_on_same_model(pair_model):
    assert homomorphism_check(lambda m: m, pair_model, pair_model).passed


def test_flipped_exchange_with_unchanged_state_fails(three_site):
    inv = Involution.for_dims(three_site.site_dims)
    flipped = three_site.with_exchange(-three_site.exchange)
    rep = homomorphism_check(inv, three_site, flipped)
    assert rep.residuals["drift"] <= 1e-10
    assert rep.residuals["state"] > 1e-4 and not rep.passed


def test_homomorphism_dimension_mismatch(pair_model, three_site):
    with pytest.raises(ValueError):
        homomorphism_check(Involution.for_dims((2, 2)), three_site, three_site)
    with pytest.raises(ValueError):
        homomorphism_check(lambda m: m, pair_model, three_site)


def test_generic_adjoint_matches_self_adjoint_involution():
    inv = Involution.for_dims((2, 3))
    rng = np.random.default_rng(0)
    g = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    x = 0.5 * (g - g.conj().T)
    assert np.abs(adjoint_apply(lambda m: inv(m), x, 6) - inv(x)).max() < 1e-12


def test_partner_state_keeps_unit_trace_and_is_involutive(three_site):
    inv = Involution.for_dims(three_site.site_dims)
    rho2 = partner_state(inv, three_site.rho0)
    assert abs(np.trace(rho2) - 1) < 1e-14
    assert np.abs(partner_state(inv, rho2) - three_site.rho0).max() < 1e-12


def test_polarized_state_has_no_partner():
    m = build(["1/2", "1/2"], {(1, 2): 1.0}, [1.0, 2.0], "ground-z")
    with pytest.raises(ModelError):
        cartan_partner(m)


# -- exact decision -------------------------------------------------------------------


def test_permuted_model_is_identical(three_site):
    v = condition_star_decide(three_site, permute_sites(three_site, [2, 0, 1]))
    assert v.verdict is Verdict.IDENTICAL
    assert v.permutation == (1, 2, 0)
    assert v.as_dict()["permutation"] == [2, 3, 1]


def test_partner_is_cartan_related(three_site, three_site_partner):
    v = condition_star_decide(three_site, three_site_partner)
    assert v.verdict is Verdict.CARTAN
    assert v.residuals["drift_involution"] <= 1e-10 and v.residuals["state_involution"] <= 1e-10
    assert v.equivalent


@pytest.mark.parametrize("perm", [(0, 1, 2), (2, 1, 0), (1, 2, 0)])
def test_matching_invariant_under_relabeling(three_site, three_site_partner, perm):
    a = condition_star_decide(permute_sites(three_site, perm), three_site_partner)
    b = condition_star_decide(three_site, permute_sites(three_site_partner, perm))
    assert a.verdict is b.verdict is Verdict.CARTAN


def test_unmatched_gyro_is_distinct(three_site):
    other = build(three_site.spins, three_site.exchange, [1.0, 2.4, -0.6], three_site.rho0)
    v = condition_star_decide(three_site, other)
    assert v.verdict is Verdict.DISTINCT and "gyromagnetic" in v.reasons[0]


def test_site_count_mismatch(pair_model, three_site):
    assert condition_star_decide(pair_model, three_site).verdict is Verdict.DISTINCT


def test_spin_mismatch_reports_proportionality():
    kw = dict(exchange={(1, 2): 1.0}, gyros=[1.0, 2.0], rho0={"preset": "pseudo-pure", "p": 0.05, "seed": 1})
    a = build(["1/2", "1/2"], **kw)
    # sites (1/2, 1/2) vs (3/2, 3/2): every l(l+1) ratio is 5; J scaled by 1/sqrt(5)
    b = build(["3/2", "3/2"], {(1, 2): 1 / math.sqrt(5)}, [1.0, 2.0], {"preset": "pseudo-pure", "p": 0.05})
    v = condition_star_decide(a, b)
    assert v.verdict is Verdict.DISTINCT
    diag = v.diagnostics["proportionality"]
    assert diag["proportional"] and math.isclose(diag["alpha_squared"], 5.0)
    c = build(["1/2", "3/2"], kw["exchange"], kw["gyros"], {"preset": "pseudo-pure", "p": 0.05})
    assert not condition_star_decide(a, c).diagnostics["proportionality"]["proportional"]


def test_same_exchange_different_state(three_site):
    other = three_site.with_state(random_state(12, np.random.default_rng(9), 0.05))
    v = condition_star_decide(three_site, other)
    assert v.verdict is Verdict.DISTINCT and "states differ" in v.reasons[0]


def test_opposite_exchange_unrelated_state(three_site):
    v = condition_star_decide(three_site, three_site.with_exchange(-three_site.exchange))
    assert v.verdict is Verdict.DISTINCT and "involution" in v.reasons[0]


def test_mixed_sign_exchange(three_site, three_site_partner):
    J = three_site_partner.exchange.copy()
    J[0, 1] = J[1, 0] = -J[0, 1]
    v = condition_star_decide(three_site, three_site_partner.with_exchange(J))
    assert v.verdict is Verdict.DISTINCT and "neither" in v.reasons[0]


@pytest.mark.parametrize(
    "gyros,exchange,reason",
    [
        ([1.0, 1.0], {(1, 2): 1.0}, "coincide"),
        ([0.0, 1.0], {(1, 2): 1.0}, "zero"),
        ([1.0, 2.0], {}, "not controllable"),
    ],
)
def test_hypothesis_violations_are_undecided(gyros, exchange, reason):
    m = build(["1/2", "1/2"], exchange, gyros, {"preset": "pseudo-pure", "p": 0.1})
    v = condition_star_decide(m, m)
    assert v.verdict is Verdict.UNDECIDED and any(reason in r for r in v.reasons)
    assert v.equivalent is None


def test_both_scalar_states_undecided():
    m = build(["1/2", "1/2"], {(1, 2): 1.0}, [1.0, 2.0])
    v = condition_star_decide(m, m)
    assert v.verdict is Verdict.UNDECIDED and "scalar" in v.reasons[0]


def test_match_sites():
    assert match_sites([1.0, 2.0, 3.0], [3.0, 1.0, 2.0]) == (1, 2, 0)
    assert match_sites([1.0, 2.0], [1.0, 2.0 + 1e-12]) == (0, 1)
    assert match_sites([1.0, 2.0], [1.0, 2.1]) is None
    assert match_sites([1.0], [1.0, 2.0]) is None


# -- falsifier ------------------------------------------------------------------------


def test_same_model_never_falsified(pair_model):
    res = falsify_by_simulation(pair_model, pair_model, trials=10)
    assert not res.found and res.max_gap == 0.0 and res.trials_run == 10


def test_perturbed_exchange_is_witnessed(pair_model):
    other = pair_model.with_exchange(1.1 * pair_model.exchange)
    res = falsify_by_simulation(pair_model, other, trials=50)
    assert res.found and res.witness.gap > 1e-3
    assert res.settings["segments"] == [4, 16] and res.settings["amplitude"] == 2.0


def test_falsifier_is_reproducible(pair_model):
    other = pair_model.with_exchange(1.05 * pair_model.exchange)
    a = falsify_by_simulation(pair_model, other, trials=5, seed=11)
    b = falsify_by_simulation(pair_model, other, trials=5, seed=11)
    assert a.as_dict() == b.as_dict()


def test_falsifier_horizon(pair_model):
    other = pair_model.with_exchange(-pair_model.exchange)
    res = falsify_by_simulation(pair_model, other, trials=3, horizon=0.5)
    assert res.witness is None or res.witness.schedule.horizon <= 0.5 + 1e-12


def test_falsifier_rejects_incomparable_outputs(pair_model):
    from spinequiv.dynamics import two_level_model

    with pytest.raises(ValueError):
        falsify_by_simulation(pair_model, two_level_model(1, 0, np.eye(2) / 2), trials=1)


# -- two-level ------------------------------------------------------------------------


def _rotated(x, y, r, alpha):
    x2, y2 = rotation(alpha) @ [x, y]
    rx, ry = rotation(alpha) @ r[:2]
    return x2, y2, bloch_state(rx, ry, r[2])


def test_two_level_rotation_recovered():
    r = np.array([0.3, -0.2, 0.25])
    x2, y2, rho2 = _rotated(0.7, 1.1, r, np.pi / 3)
    v = two_level_decide(0.7, 1.1, bloch_state(*r), x2, y2, rho2)
    assert v.equivalent and abs(v.alpha - np.pi / 3) <= 1e-10


def test_two_level_identity():
    rho = bloch_state(0.1, 0.2, 0.3)
    v = two_level_decide(1.0, 2.0, rho, 1.0, 2.0, rho)
    assert v.equivalent and v.alpha == 0.0


def test_two_level_scaled_drift_not_equivalent():
    rho = bloch_state(0.1, 0.2, 0.3)
    s = math.sqrt(2)
    v = two_level_decide(1.0, 2.0, rho, s, 2 * s, rho)
    assert v.equivalent is False


def test_two_level_state_conditions():
    rho = bloch_state(0.1, 0.2, 0.3)
    assert not two_level_decide(1.0, 0.0, rho, 1.0, 0.0, bloch_state(0.1, 0.2, -0.3)).equivalent
    assert not two_level_decide(1.0, 0.0, rho, 1.0, 0.0, bloch_state(0.2, 0.1, 0.3)).equivalent


def test_two_level_undecided():
    rho = bloch_state(0.1, 0.2, 0.3)
    assert two_level_decide(0, 0, rho, 1, 0, rho).equivalent is None
    assert two_level_decide(1, 0, np.eye(2) / 2, 1, 0, np.eye(2) / 2).equivalent is None


@settings(max_examples=30, deadline=None)
@given(
    x=st.floats(-3, 3), y=st.floats(-3, 3), alpha=st.floats(0, 2 * np.pi),
    rx=st.floats(-0.5, 0.5), ry=st.floats(-0.5, 0.5), rz=st.floats(-0.5, 0.5),
)
def test_two_level_symmetric(x, y, alpha, rx, ry, rz):
    if x * x + y * y < 1e-3 or rx * rx + ry * ry + rz * rz > 1:
        return
    r = np.array([rx, ry, rz])
    x2, y2, rho2 = _rotated(x, y, r, alpha)
    fwd = two_level_decide(x, y, bloch_state(*r), x2, y2, rho2)
    back = two_level_decide(x2, y2, rho2, x, y, bloch_state(*r))
    assert fwd.equivalent == back.equivalent
    if fwd.equivalent is None:
        return
    assert fwd.equivalent
    d = (fwd.alpha + back.alpha) % (2 * np.pi)
    assert min(d, 2 * np.pi - d) < 1e-9


def test_rotation_is_z_automorphism():
    """K_alpha on drift and Bloch vectors is conjugation by exp(-i alpha sz)."""
    sx, sy, sz = spin_matrices("1/2")
    alpha = 0.9
    phi = z_rotation_automorphism(alpha)
    x, y = 0.4, -1.3
    x2, y2 = rotation(alpha) @ [x, y]
    assert np.abs(phi(x * 1j * sx + y * 1j * sy) - (x2 * 1j * sx + y2 * 1j * sy)).max() < 1e-12
    assert np.abs(phi(1j * sz) - 1j * sz).max() < 1e-12
    r = np.array([0.3, 0.1, -0.2])
    img = -1j * phi(1j * bloch_state(*r))
    assert np.allclose(bloch_components(img), [*(rotation(alpha) @ r[:2]), r[2]])


# -- trace identities -----------------------------------------------------------------


def test_trace_identities_spin_half_pair(pair_model):
    partner = cartan_partner(pair_model)
    inv = Involution.for_dims(pair_model.site_dims)
    rep = trace_identity_suite(pair_model, partner, inv, random_schedule(np.random.default_rng(3), (10, 10)))
    assert rep.passed, rep.families
    assert rep.counts["extension"] > 0 and rep.counts["contraction"] > 0


def test_p7_prefactors_on_half_one_pair():
    m = build(["1/2", "1"], {(1, 2): 0.9}, [1.0, -1.7], {"preset": "pseudo-pure", "p": 0.15, "seed": 4})
    partner = cartan_partner(m)
    inv = Involution.for_dims(m.site_dims)
    assert m.spins[1].casimir == 2.0
    rep = trace_identity_suite(m, partner, inv, random_schedule(np.random.default_rng(8), (10, 10)))
    assert rep.counts["contraction"] == 18 and rep.families["contraction"] <= 1e-8


def test_trace_suite_rejects_unrelated_pair(pair_model):
    inv = Involution.for_dims(pair_model.site_dims)
    with pytest.raises(ValueError):
        trace_identity_suite(pair_model, pair_model.with_exchange(-pair_model.exchange), inv, ControlSchedule.constant(1.0))


@pytest.mark.parametrize("l", ["1/2", "1", "3/2"])
def test_p_periodicity(l):
    res = periodicity_check(l)
    assert max(res.values()) <= 1e-12


@pytest.mark.parametrize("target", ["J12", "J13", "J23", "g1", "g2", "g3"])
def test_five_percent_perturbation_is_witnessed(three_site, three_site_partner, target):
    J = three_site_partner.exchange.copy()
    g = three_site_partner.gyros.copy()
    if target[0] == "J":
        k, l = int(target[1]) - 1, int(target[2]) - 1
        J[k, l] = J[l, k] = 1.05 * J[k, l]
    else:
        g[int(target[1]) - 1] *= 1.05
    other = build(three_site_partner.spins, J, g, three_site_partner.rho0)
    assert condition_star_decide(three_site, other).verdict is Verdict.DISTINCT
    res = falsify_by_simulation(three_site, other, trials=50, tol=1e-3)
    assert res.found
