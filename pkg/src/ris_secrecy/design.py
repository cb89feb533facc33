"""Phase-shift design and RIS configuration selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import closed_form as cf
from .errors import DomainError, ValidationError
from .geometry import TWO_PI, AngleSet, ArraySpec, link_gains
from .instantaneous import (Active, EnergyHarvesting, Passive, PhasePlan, RisMode, harvested_power,
                            make_plan)
from .stochastic import los_components


def aligned_phases(angles: AngleSet, spec: ArraySpec, k: int) -> np.ndarray:
    """Phases that co-phase every term of the RIS beam towards user ``k``.

    theta_m = -2*pi*(d/lambda)*(x_m*t_k + y_m*l_k) with t_k, l_k the differences
    of the user-side and BS-side direction cosines.
    """
    if not 0 <= k < len(angles.users):
        raise ValidationError(f"user index {k} out of range")
    ua, ue = angles.users[k]
    ta, te = angles.bs_aod
    t = math.sin(ua) * math.sin(ue) - math.sin(ta) * math.sin(te)
    l = math.cos(ue) - math.cos(te)
    x, y = spec.element_indices()
    return np.mod(-TWO_PI * spec.spacing_ratio * (x * t + y * l), TWO_PI)


def aligned_plan(scenario, angles: AngleSet, mode: RisMode, k: int | None = None) -> PhasePlan:
    k = scenario.user_index if k is None else k
    return make_plan(aligned_phases(angles, scenario.ris_array, k), mode, scenario)


# --- genetic algorithm ------------------------------------------------------------------------

@dataclass(frozen=True)
class GaConfig:
    population: int = 64
    generations: int = 200
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    mutation_scale: float = 0.3
    elitism: int = 2
    seed: int = 0
    tournament: int = 3
    scale_decay: float = 0.99
    seed_aligned: bool = True  # inject the per-user aligned plans into the first generation

    def __post_init__(self):
        if self.population < 4:
            raise ValidationError("GA population must be >= 4")
        if self.generations < 0:
            raise ValidationError("GA generations must be >= 0")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1]")
        if not 0 <= self.elitism < self.population:
            raise ValidationError("elitism must lie in [0, population)")
        if self.tournament < 1 or self.mutation_scale < 0:
            raise ValidationError("tournament must be >= 1 and mutation_scale >= 0")


@dataclass(frozen=True)
class GaResult:
    plan: PhasePlan
    objective: float
    history: np.ndarray = field(repr=False)  # best-so-far objective after each generation (index 0 = initial)


def ga_run(scenario, angles: AngleSet, mode: RisMode, cfg: GaConfig = GaConfig()) -> GaResult:
    """Maximise the closed-form sum of user rates over the RIS phases."""
    los = los_components(scenario, angles)
    gains = link_gains(scenario.layout, scenario.pathloss)
    M, P = scenario.M, cfg.population

    def fitness(pop):
        return cf.sum_rate_objective(scenario, pop, mode, los, gains)

    def stream(g):
        return np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(g,)))

    pop = stream(0).uniform(0.0, TWO_PI, size=(P, M))
    if cfg.seed_aligned:
        for k in range(min(scenario.K, P)):
            pop[k] = aligned_phases(angles, scenario.ris_array, k)
    fit = fitness(pop)
    best = int(np.argmax(fit))
    best_x, best_f = pop[best].copy(), float(fit[best])
    history = [best_f]

    for g in range(1, cfg.generations + 1):
        rng = stream(g)
        order = np.argsort(-fit, kind="stable")
        n_child = P - cfg.elitism
        cand = rng.integers(0, P, size=(2, n_child, cfg.tournament))
        winners = cand[np.arange(2)[:, None], np.arange(n_child)[None, :], np.argmax(fit[cand], axis=2)]
        a, b = pop[winners[0]], pop[winners[1]]
        w = rng.uniform(size=(n_child, M))
        blend = np.angle(w * np.exp(1j * a) + (1.0 - w) * np.exp(1j * b))
        cross = rng.uniform(size=(n_child, 1)) < cfg.crossover_rate
        child = np.where(cross, blend, a)
        sigma = cfg.mutation_scale * cfg.scale_decay ** (g - 1)
        hit = rng.uniform(size=child.shape) < cfg.mutation_rate
        child = np.mod(child + hit * rng.normal(0.0, sigma, size=child.shape), TWO_PI)
        pop = np.concatenate([pop[order[:cfg.elitism]], child])
        fit = fitness(pop)
        i = int(np.argmax(fit))
        if fit[i] > best_f:
            best_x, best_f = pop[i].copy(), float(fit[i])
        history.append(best_f)

    return GaResult(make_plan(best_x, mode, scenario), best_f, np.array(history))


def ga_optimize(scenario, angles: AngleSet, mode: RisMode, cfg: GaConfig = GaConfig()) -> PhasePlan:
    return ga_run(scenario, angles, mode, cfg).plan


def sum_rate(scenario, angles: AngleSet, mode: RisMode, phases) -> np.ndarray | float:
    """Closed-form sum of user rates, the GA objective."""
    out = cf.sum_rate_objective(scenario, np.asarray(phases, dtype=float), mode, los_components(scenario, angles))
    return float(out) if np.ndim(out) == 0 else out


# --- required powers --------------------------------------------------------------------------

def _user(scenario, k):
    k = scenario.user_index if k is None else k
    if not 0 <= k < scenario.K:
        raise ValidationError(f"user index {k} out of range")
    return k


def _check_target(r_s: float) -> None:
    if not r_s >= 0 or not math.isfinite(r_s):
        raise DomainError("target secrecy rate must be a finite value >= 0")


def passive_secrecy(scenario, plan: PhasePlan, angles: AngleSet, k: int | None = None) -> float:
    k = _user(scenario, k)
    return cf.ergodic_secrecy_rate(scenario, plan, angles, Passive(), k).secrecy_rate


def required_user_power(scenario, plan: PhasePlan, angles: AngleSet, r_s: float, k: int | None = None):
    """Smallest ``p_k`` giving closed-form passive secrecy rate ``r_s``; None when unreachable.

    With the other users fixed the BS and eavesdropper SINRs are ``p*A`` and
    ``p*X_j``, so ``2**r = (1 + p*A)/(1 + p*X)`` is linear in ``p``.
    """
    _check_target(r_s)
    k = _user(scenario, k)
    if r_s == 0:
        return 0.0
    probe = scenario.with_user_power(k, 1.0)
    t = cf.rate_terms(probe, plan.phases, angles)
    A = float(cf.user_sinr(t, probe.user_powers)[k])
    X = float(cf.eave_sinr(t, probe.user_powers)[:, k].max())
    target = 2.0 ** r_s
    den = A - target * X
    if not den > 0:
        return None
    p = (target - 1.0) / den
    return p if math.isfinite(p) and p > 0 else None


def _secrecy_at_u(t, powers, k, u, pref=1.0):
    su = cf.user_sinr(t, powers, u, True)[k]
    se = cf.eave_sinr(t, powers, u, True)[:, k].max()
    return pref * (math.log2(1.0 + su) - math.log2(1.0 + se))


def required_amplification(scenario, plan: PhasePlan, angles: AngleSet, p_k: float, r_s: float,
                           k: int | None = None, tol: float = 1e-8):
    """Smallest squared amplification ``u`` with active closed-form secrecy ``r_s``; None if none.

    Each eavesdropper gives one quadratic in ``u``; a root is accepted only if
    the full worst-eavesdropper secrecy rate reproduces the target.
    """
    _check_target(r_s)
    k = _user(scenario, k)
    sc = scenario.with_user_power(k, p_k)
    t = cf.rate_terms(sc, plan.phases, angles)
    p = sc.user_powers
    a, n0 = float(t.sig[k]), float(t.bsn[k])
    B = float(np.sum(t.intf[k] * p) + t.ris[k])
    others = np.arange(sc.K) != k
    T = 2.0 ** r_s
    roots = []
    for j in range(sc.J):
        x1, x2 = float(t.ex1[j, k]), float(t.ex2[j, k])
        Y1 = float(np.sum(p[others] * t.ex1[j, others]) + t.ez1[j] * t.noise)
        Y2 = float(np.sum(p[others] * t.ex2[j, others]) + t.noise)
        c2 = (B + p_k * a) * Y1 - T * B * (Y1 + p_k * x1)
        c1 = (B + p_k * a) * Y2 + n0 * Y1 - T * (B * (Y2 + p_k * x2) + n0 * (Y1 + p_k * x1))
        c0 = n0 * Y2 - T * n0 * (Y2 + p_k * x2)
        coef = np.array([c2, c1, c0])
        scale = np.max(np.abs(coef))
        if scale == 0:
            continue
        for r in np.roots(coef / scale):
            if abs(r.imag) <= 1e-9 * max(1.0, abs(r.real)) and r.real > 0:
                roots.append(float(r.real))
    for u in sorted(roots):
        if abs(_secrecy_at_u(t, p, k, u) - r_s) <= tol:
            return u
    return None


def ris_power_for(scenario, u: float, p_k: float | None = None, k: int | None = None) -> float:
    """RIS power that yields squared amplification ``u``."""
    sc = scenario if p_k is None else scenario.with_user_power(_user(scenario, k), p_k)
    gains = link_gains(sc.layout, sc.pathloss)
    return sc.M * u * (float(np.dot(sc.user_powers, gains.user_ris)) + sc.noise_w)


def required_ris_power(scenario, angles: AngleSet, plan: PhasePlan, p_k: float, r_s: float,
                       k: int | None = None):
    """RIS power for closed-form active secrecy rate ``r_s`` at user power ``p_k``; None if infeasible."""
    k = _user(scenario, k)
    if r_s == 0:
        return 0.0
    u = required_amplification(scenario, plan, angles, p_k, r_s, k)
    return None if u is None else ris_power_for(scenario, u, p_k, k)


def required_bs_power(scenario, angles: AngleSet, plan: PhasePlan, p_k: float, r_s: float,
                      tau: float | None = None, eta_eff: float | None = None, k: int | None = None):
    """BS power whose harvested energy drives the RIS to EH secrecy rate ``r_s``; None if infeasible."""
    tau = scenario.tau if tau is None else tau
    eta = scenario.eta_eff if eta_eff is None else eta_eff
    if not 0.0 < tau < 1.0:
        raise DomainError("tau must lie in (0, 1)")
    if not 0.0 < eta <= 1.0:
        raise DomainError("eta_eff must lie in (0, 1]")
    _check_target(r_s)
    p_r = required_ris_power(scenario, angles, plan, p_k, r_s / (1.0 - tau), k)
    if p_r is None:
        return None
    return p_r * (1.0 - tau) / (eta * tau * scenario.N * scenario.M)


def eh_mode_for(scenario, bs_power: float, tau: float | None = None, eta_eff: float | None = None):
    return EnergyHarvesting(bs_power, scenario.tau if tau is None else tau,
                            scenario.eta_eff if eta_eff is None else eta_eff)


# --- configuration selection ------------------------------------------------------------------

@dataclass(frozen=True)
class Budgets:
    user_power: float
    ris_power: float
    bs_power: float

    def __post_init__(self):
        if min(self.user_power, self.ris_power, self.bs_power) < 0:
            raise DomainError("power budgets must be >= 0")


@dataclass(frozen=True)
class SelectionOutcome:
    chosen_mode: RisMode | None
    required_user_power: float | None = None
    required_ris_power: float | None = None
    required_bs_power: float | None = None

    @property
    def feasible(self) -> bool:
        return self.chosen_mode is not None

    @property
    def label(self) -> str:
        return "infeasible" if self.chosen_mode is None else self.chosen_mode.name


def select_configuration(scenario, angles: AngleSet, plan: PhasePlan, budgets: Budgets, r_s: float,
                         k: int | None = None) -> SelectionOutcome:
    """Passive if the user alone can reach ``r_s``, else active, else EH, else infeasible.

    Steps B and C assume the user transmits at its full budget.
    """
    k = _user(scenario, k)
    p = required_user_power(scenario, plan, angles, r_s, k)
    if p is not None and p <= budgets.user_power:
        return SelectionOutcome(Passive(), required_user_power=p)
    if budgets.user_power > 0:
        pr = required_ris_power(scenario, angles, plan, budgets.user_power, r_s, k)
        if pr is not None and 0 < pr <= budgets.ris_power:
            return SelectionOutcome(Active(pr), required_ris_power=pr)
        pb = required_bs_power(scenario, angles, plan, budgets.user_power, r_s, k=k)
        if pb is not None and 0 < pb <= budgets.bs_power:
            return SelectionOutcome(eh_mode_for(scenario, pb), required_bs_power=pb)
    return SelectionOutcome(None)


def selection_thresholds(scenario, angles: AngleSet, plan: PhasePlan, budgets: Budgets, grid,
                         k: int | None = None) -> dict:
    """Largest target on ``grid`` each step can still meet within its budget (nan when none)."""
    out = {"passive": math.nan, "active": math.nan, "eh": math.nan}
    k = _user(scenario, k)
    for r in sorted(float(v) for v in grid):
        if r <= 0:
            continue
        p = required_user_power(scenario, plan, angles, r, k)
        if p is not None and p <= budgets.user_power:
            out["passive"] = r
        if budgets.user_power > 0:
            pr = required_ris_power(scenario, angles, plan, budgets.user_power, r, k)
            if pr is not None and pr <= budgets.ris_power:
                out["active"] = r
            pb = required_bs_power(scenario, angles, plan, budgets.user_power, r, k=k)
            if pb is not None and pb <= budgets.bs_power:
                out["eh"] = r
    return out


__all__ = [
    "aligned_phases", "aligned_plan", "GaConfig", "GaResult", "ga_run", "ga_optimize", "sum_rate",
    "required_user_power", "required_amplification", "required_ris_power", "required_bs_power",
    "ris_power_for", "Budgets", "SelectionOutcome", "select_configuration", "selection_thresholds",
    "passive_secrecy", "harvested_power",
]
