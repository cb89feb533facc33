import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_phases
from ris_secrecy import closed_form as cf
from ris_secrecy import design
from ris_secrecy.errors import DomainError, ValidationError
from ris_secrecy.instantaneous import Active, EnergyHarvesting, Passive, PhasePlan, harvested_power, make_plan
from ris_secrecy.scenario import default_scenario


@pytest.fixture(scope="module")
def setting():
    sc = default_scenario()
    ang = sc.angles()
    return sc, ang, design.aligned_plan(sc, ang, Passive())


def secrecy(sc, ang, phases, mode, k):
    return cf.ergodic_secrecy_rate(sc, make_plan(phases, mode, sc), ang, mode, k).secrecy_rate


# --- aligned phases -----------------------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.sampled_from([1, 2, 4, 9, 16, 25]), st.integers(0, 10_000))
def test_aligned_gives_full_coherence(M, seed):
    sc = default_scenario(M=M, angle_seed=seed)
    ang = sc.angles()
    for k in range(sc.K):
        f = cf.coherence_factors(PhasePlan(design.aligned_phases(ang, sc.ris_array, k)), ang, sc).f[k]
        assert abs(f) == pytest.approx(M, rel=1e-9)


def test_coinciding_directions_give_zero_phases(default):
    ang = default.angles()
    users = ang.users.copy()
    users[0] = ang.bs_aod
    same = dataclasses.replace(ang, users=users)
    ph = design.aligned_phases(same, default.ris_array, 0)
    assert np.allclose(np.exp(1j * ph), 1.0)


def test_aligned_beats_random_plans():
    sc = default_scenario(M=16)
    ang = sc.angles()
    k = sc.user_index
    aligned = design.aligned_plan(sc, ang, Passive())
    best_sig = cf.moment_xi_k(sc, aligned, ang, k)
    single = sc.subset(1, 1)
    best_rate = cf.ergodic_user_rate(single, aligned, single.angles(), Passive(), 0)
    rng = np.random.default_rng(0)
    for _ in range(100):
        plan = PhasePlan(rng.uniform(0, 2 * np.pi, 16))
        assert cf.moment_xi_k(sc, plan, ang, k) <= best_sig
        assert cf.ergodic_user_rate(single, plan, single.angles(), Passive(), 0) <= best_rate


def test_aligned_rejects_bad_user(default):
    with pytest.raises(ValidationError):
        design.aligned_phases(default.angles(), default.ris_array, 9)


# --- GA -----------------------------------------------------------------------------------------

def test_ga_without_generations_is_best_random(desk):
    ang = desk.angles()
    cfg = design.GaConfig(population=16, generations=0, seed=3, seed_aligned=False)
    res = design.ga_run(desk, ang, Passive(), cfg)
    pop = np.random.default_rng(np.random.SeedSequence(3, spawn_key=(0,))).uniform(0, 2 * np.pi, (16, desk.M))
    assert res.objective == pytest.approx(float(np.max(design.sum_rate(desk, ang, Passive(), pop))))
    assert len(res.history) == 1


def test_ga_history_nondecreasing_and_reproducible(desk):
    ang = desk.angles()
    cfg = design.GaConfig(population=16, generations=15, seed=7)
    a = design.ga_run(desk, ang, Active(7.0), cfg)
    b = design.ga_run(desk, ang, Active(7.0), cfg)
    assert np.all(np.diff(a.history) >= 0)
    assert np.array_equal(a.plan.phases, b.plan.phases) and a.objective == b.objective
    assert design.sum_rate(desk, ang, Active(7.0), a.plan.phases) == pytest.approx(a.objective)


def test_ga_single_user_not_worse_than_aligned():
    sc = default_scenario().subset(1, 2)
    ang = sc.angles()
    res = design.ga_run(sc, ang, Passive(), design.GaConfig(population=16, generations=10))
    aligned = design.sum_rate(sc, ang, Passive(), design.aligned_phases(ang, sc.ris_array, 0))
    assert res.objective >= aligned - 1e-6


def test_ga_improves_sum_rate(default):
    ang = default.angles()
    mode = Active(7.0)
    res = design.ga_run(default, ang, mode, design.GaConfig(generations=20))
    aligned = max(design.sum_rate(default, ang, mode, design.aligned_phases(ang, default.ris_array, k))
                  for k in range(default.K))
    assert res.objective >= aligned


@pytest.mark.parametrize("kw", [{"population": 2}, {"generations": -1}, {"mutation_rate": 1.5},
                                {"elitism": 64}, {"tournament": 0}])
def test_ga_config_validation(kw):
    with pytest.raises(ValidationError):
        design.GaConfig(**kw)


# --- required powers ----------------------------------------------------------------------------

@pytest.mark.parametrize("r", [0.05, 0.1, 0.2, 0.3])
def test_user_power_round_trip(setting, r):
    sc, ang, plan = setting
    k = sc.user_index
    p = design.required_user_power(sc, plan, ang, r, k)
    assert p is not None
    got = cf.ergodic_secrecy_rate(sc.with_user_power(k, p), plan, ang, Passive(), k).secrecy_rate
    assert got == pytest.approx(r, abs=1e-9)


def test_user_power_round_trip_from_power(setting):
    sc, ang, plan = setting
    k = sc.user_index
    r = cf.ergodic_secrecy_rate(sc.with_user_power(k, 0.5), plan, ang, Passive(), k).secrecy_rate
    assert design.required_user_power(sc, plan, ang, r, k) == pytest.approx(0.5, rel=1e-9)


def test_user_power_unreachable_target(setting):
    sc, ang, plan = setting
    assert design.required_user_power(sc, plan, ang, 5.0) is None


@pytest.mark.parametrize("p_r", [0.5, 3.0, 7.0])
def test_ris_power_round_trip(setting, p_r):
    sc, ang, plan = setting
    k = sc.user_index
    r = secrecy(sc, ang, plan.phases, Active(p_r), k)
    got = design.required_ris_power(sc, ang, plan, float(sc.user_powers[k]), r, k)
    assert got is not None and got <= p_r * (1 + 1e-9)
    assert secrecy(sc, ang, plan.phases, Active(got), k) == pytest.approx(r, abs=1e-8)


def test_bs_power_round_trip(setting):
    sc, ang, plan = setting
    k = sc.user_index
    p_k = float(sc.user_powers[k])
    r = 0.3
    pb = design.required_bs_power(sc, ang, plan, p_k, r, k=k)
    assert pb is not None
    assert secrecy(sc, ang, plan.phases, design.eh_mode_for(sc, pb), k) == pytest.approx(r, abs=1e-8)


def test_doubling_efficiency_halves_bs_power(setting):
    sc, ang, plan = setting
    a = design.required_bs_power(sc, ang, plan, 2.0, 0.3, eta_eff=0.4)
    b = design.required_bs_power(sc, ang, plan, 2.0, 0.3, eta_eff=0.8)
    assert b == pytest.approx(a / 2, rel=1e-12)


def test_bs_power_harvests_required_ris_power(setting):
    sc, ang, plan = setting
    tau = sc.tau
    pr = design.required_ris_power(sc, ang, plan, 2.0, 0.3 / (1 - tau))
    pb = design.required_bs_power(sc, ang, plan, 2.0, 0.3)
    assert harvested_power(EnergyHarvesting(pb, tau, sc.eta_eff), sc) == pytest.approx(pr, rel=1e-12)


def test_zero_target_needs_no_power(setting):
    sc, ang, plan = setting
    assert design.required_user_power(sc, plan, ang, 0.0) == 0.0
    assert design.required_ris_power(sc, ang, plan, 2.0, 0.0) == 0.0
    assert design.required_bs_power(sc, ang, plan, 2.0, 0.0) == 0.0


def test_infeasible_amplified_targets(setting):
    sc, ang, plan = setting
    assert design.required_ris_power(sc, ang, plan, 2.0, 10.0) is None
    assert design.required_bs_power(sc, ang, plan, 2.0, 10.0) is None


@pytest.mark.parametrize("bad", [-0.1, math.nan, math.inf])
def test_bad_targets_rejected(setting, bad):
    sc, ang, plan = setting
    with pytest.raises(DomainError):
        design.required_user_power(sc, plan, ang, bad)


def test_bad_harvest_parameters(setting):
    sc, ang, plan = setting
    with pytest.raises(DomainError):
        design.required_bs_power(sc, ang, plan, 2.0, 0.3, tau=1.0)
    with pytest.raises(DomainError):
        design.required_bs_power(sc, ang, plan, 2.0, 0.3, eta_eff=0.0)


def test_ris_power_for_inverts_amplification(default):
    from ris_secrecy.instantaneous import amplification_factor

    u = amplification_factor(Active(7.0), default) ** 2
    assert design.ris_power_for(default, u) == pytest.approx(7.0, rel=1e-12)


# --- selection ----------------------------------------------------------------------------------

@pytest.mark.parametrize("r, label", [(0.1, "passive"), (0.2, "passive"), (0.3, "active"), (0.35, "active"),
                                      (0.45, "eh"), (0.5, "eh"), (0.6, "infeasible")])
def test_selection_precedence(setting, r, label):
    sc, ang, plan = setting
    out = design.select_configuration(sc, ang, plan, design.Budgets(20.0, 7.0, 50.0), r)
    assert out.label == label
    assert out.feasible == (label != "infeasible")


def test_selection_prefers_passive_when_it_suffices(setting):
    sc, ang, plan = setting
    budgets = design.Budgets(20.0, 7.0, 50.0)
    for r in np.arange(0.05, 0.6, 0.05):
        p = design.required_user_power(sc, plan, ang, r)
        out = design.select_configuration(sc, ang, plan, budgets, r)
        if p is not None and p <= budgets.user_power:
            assert out.label == "passive" and out.required_user_power == p


def test_zero_user_budget_is_infeasible(setting):
    sc, ang, plan = setting
    assert not design.select_configuration(sc, ang, plan, design.Budgets(0.0, 7.0, 50.0), 0.1).feasible


def test_negative_budget_rejected():
    with pytest.raises(DomainError):
        design.Budgets(1.0, -1.0, 1.0)


def test_thresholds_ordered(setting):
    sc, ang, plan = setting
    th = design.selection_thresholds(sc, ang, plan, design.Budgets(20.0, 7.0, 50.0),
                                     np.round(np.arange(0.05, 1.0, 0.05), 2))
    assert th["passive"] <= th["active"] <= th["eh"]
