"""Monte-Carlo estimation of every defining expectation and of the ergodic rates.

Trials are split into a fixed number of batches. Batch ``b`` draws from
``SeedSequence(master_seed, spawn_key=(b,))`` and the per-batch statistics are
merged in batch order, so results do not depend on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import closed_form as cf
from .errors import DomainError, ValidationError
from .geometry import AngleSet, link_gains
from .instantaneous import (Passive, PhasePlan, RisMode, bs_breakdown, eave_breakdown,
                            rate_prefactor)
from .stochastic import draw_channel_batch, los_components

DEFAULT_TRIALS = 100_000
DEFAULT_BATCHES = 200
MOMENT_KINDS = ("xi_k", "varsigma_i", "upsilon_k", "nu_k", "eave_x", "eave_y", "eave_z")


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n_trials: int


@dataclass(frozen=True)
class MomentId:
    """Names one defining expectation. ``i`` is the interferer for varsigma_i and eave_y."""

    kind: str
    k: int = 0
    i: int | None = None
    j: int = 0

    def __post_init__(self):
        if self.kind not in MOMENT_KINDS:
            raise DomainError(f"unknown moment {self.kind!r}; expected one of {MOMENT_KINDS}")
        if self.kind in ("varsigma_i", "eave_y") and (self.i is None or self.i == self.k):
            raise DomainError(f"{self.kind} needs an interferer index i != k")

    @property
    def label(self) -> str:
        if self.kind in ("xi_k", "upsilon_k", "nu_k"):
            return f"{self.kind}[k={self.k}]"
        if self.kind == "varsigma_i":
            return f"varsigma_i[k={self.k},i={self.i}]"
        if self.kind == "eave_x":
            return f"eave_x[j={self.j},k={self.k}]"
        if self.kind == "eave_y":
            return f"eave_y[j={self.j},k={self.k},i={self.i}]"
        return f"eave_z[j={self.j}]"


def worker_count(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("RIS_SEC_THREADS", "").strip()
        threads = int(env) if env.isdigit() and int(env) > 0 else (os.cpu_count() or 1)
    return max(1, int(threads))


def _batch_sizes(n_trials: int, n_batches: int) -> list[int]:
    n_batches = max(1, min(n_batches, n_trials))
    base, extra = divmod(n_trials, n_batches)
    return [base + (b < extra) for b in range(n_batches)]


def run_batches(kernel: Callable[[np.random.Generator, int], np.ndarray], n_trials: int, master_seed: int,
                n_batches: int = DEFAULT_BATCHES, threads: int | None = None):
    """Mean, standard error of the columns returned by ``kernel(rng, n) -> (n, width)``."""
    if n_trials < 2:
        raise ValidationError("n_trials must be >= 2")
    sizes = _batch_sizes(n_trials, n_batches)

    def one(b: int):
        rng = np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(b,)))
        vals = np.asarray(kernel(rng, sizes[b]), dtype=float)
        mean = vals.mean(axis=0)
        return vals.shape[0], mean, ((vals - mean) ** 2).sum(axis=0)

    workers = worker_count(threads)
    if workers == 1:
        parts = [one(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, range(len(sizes))))

    # Chan et al. pairwise update, always in batch order
    n, mean, m2 = parts[0]
    for nb, mb, m2b in parts[1:]:
        tot = n + nb
        delta = mb - mean
        mean = mean + delta * (nb / tot)
        m2 = m2 + m2b + delta**2 * (n * nb / tot)
        n = tot
    var = m2 / (n - 1)
    return mean, np.sqrt(var / n), n


class _Layout:
    """Column layout of the flattened moment vector."""

    def __init__(self, K: int, J: int):
        self.K, self.J = K, J
        self.xi = slice(0, K)
        self.vs = slice(K, K + K * K)
        self.ups = slice(K + K * K, 2 * K + K * K)
        self.nu = slice(2 * K + K * K, 3 * K + K * K)
        self.ex = slice(3 * K + K * K, 3 * K + K * K + J * K)
        self.ez = slice(self.ex.stop, self.ex.stop + J)
        self.width = self.ez.stop

    def column(self, mid: MomentId) -> int:
        K = self.K
        if mid.kind == "xi_k":
            return self.xi.start + mid.k
        if mid.kind == "varsigma_i":
            return self.vs.start + mid.k * K + mid.i
        if mid.kind == "upsilon_k":
            return self.ups.start + mid.k
        if mid.kind == "nu_k":
            return self.nu.start + mid.k
        if mid.kind == "eave_x":
            return self.ex.start + mid.j * K + mid.k
        if mid.kind == "eave_y":
            return self.ex.start + mid.j * K + mid.i
        return self.ez.start + mid.j


def _moment_kernel(scenario, plan: PhasePlan, angles: AngleSet, amplified: bool):
    los = los_components(scenario, angles)
    gains = link_gains(scenario.layout, scenario.pathloss)
    rot = np.exp(1j * plan.phases)
    amp = plan.amplification

    def kernel(rng, n):
        d = draw_channel_batch(scenario, angles, rng, n, los)
        err = np.exp(1j * d.phase_errors)
        GT = d.G * rot
        c = np.einsum("tnm,tkm->tnk", GT, d.h_rk)
        ce = np.einsum("tnm,tkm->tnk", GT, err[:, None, :] * d.h_rk)
        S = np.einsum("tnk,tni->tki", np.conj(c), ce)
        xi = np.abs(np.diagonal(S, axis1=1, axis2=2)) ** 2
        vs = np.abs(S) ** 2
        ups = np.sum(np.abs(c) ** 2, axis=1)
        nu = np.sum(np.abs(np.einsum("tnk,tnm->tkm", np.conj(c), GT)) ** 2, axis=2)
        te = amp * rot * err
        he = d.h_ejr * te[:, None, :]
        refl = np.einsum("tjm,tkm->tjk", he, d.h_rk)
        ex = np.abs(refl * np.sqrt(gains.user_ris_eave) + d.h_ejk * np.sqrt(gains.user_eave)) ** 2
        if amplified:
            ez = gains.ris_eave * np.sum(np.abs(he) ** 2, axis=2)
        else:
            ez = np.zeros((n, scenario.J))
        return np.concatenate([xi, vs.reshape(n, -1), ups, nu, ex.reshape(n, -1), ez], axis=1)

    return kernel


def _is_amplified(mode: RisMode | None, plan: PhasePlan) -> bool:
    if mode is None:
        return plan.amplification != 1.0
    return not isinstance(mode, Passive)


def estimate_all_moments(scenario, plan: PhasePlan, angles: AngleSet, n_trials: int, master_seed: int,
                         mode: RisMode | None = None, threads: int | None = None):
    """One MC pass over every defining expectation; returns (layout, mean, se, n)."""
    lay = _Layout(scenario.K, scenario.J)
    kernel = _moment_kernel(scenario, plan, angles, _is_amplified(mode, plan))
    mean, se, n = run_batches(kernel, n_trials, master_seed, threads=threads)
    return lay, mean, se, n


def estimate_moment(mid: MomentId, scenario, plan: PhasePlan, angles: AngleSet, n_trials: int,
                    master_seed: int, mode: RisMode | None = None, threads: int | None = None) -> Estimate:
    """Sample mean of the random quantity whose expectation ``mid`` names.

    Eavesdropper quantities carry the plan's amplification; ``eave_z`` is zero
    unless the RIS amplifies (a non-passive ``mode``, or amplification != 1).
    """
    if not isinstance(mid, MomentId):
        raise DomainError(f"unknown moment id {mid!r}")
    if n_trials < 100:
        raise ValidationError("n_trials must be >= 100")
    if not 0 <= mid.k < scenario.K or (mid.i is not None and not 0 <= mid.i < scenario.K):
        raise ValidationError("user index out of range")
    if not 0 <= mid.j < scenario.J:
        raise ValidationError("eavesdropper index out of range")
    lay, mean, se, n = estimate_all_moments(scenario, plan, angles, n_trials, master_seed, mode, threads)
    col = lay.column(mid)
    return Estimate(float(mean[col]), float(se[col]), n)


@dataclass(frozen=True)
class RateEstimates:
    user: list  # Estimate per user
    eave: list  # eave[j][k] Estimate
    eave_max: list  # per user: Estimate of the worst eavesdropper (max over per-j means)
    eave_argmax: list
    secrecy: list  # per user: Estimate of max(0, user - eave_max)


def _rate_kernel(scenario, plan: PhasePlan, angles: AngleSet, mode: RisMode):
    los = los_components(scenario, angles)
    gains = link_gains(scenario.layout, scenario.pathloss)
    pref = rate_prefactor(mode)

    def kernel(rng, n):
        d = draw_channel_batch(scenario, angles, rng, n, los)
        ub = bs_breakdown(d, plan, mode, scenario, gains).rate(pref)
        eb = eave_breakdown(d, plan, mode, scenario, gains).rate(pref)
        return np.concatenate([ub, eb.reshape(n, -1)], axis=1)

    return kernel


def estimate_ergodic_rates(scenario, plan: PhasePlan, angles: AngleSet, mode: RisMode,
                           n_trials: int = DEFAULT_TRIALS, master_seed: int | None = None,
                           threads: int | None = None) -> RateEstimates:
    """Sample means of log2(1 + SINR) per user and per (eavesdropper, user) pair.

    The worst eavesdropper is chosen on the per-j means. The secrecy standard
    error combines both errors as if independent, which is conservative here.
    """
    seed = scenario.trial_seed if master_seed is None else master_seed
    kernel = _rate_kernel(scenario, plan, angles, mode)
    mean, se, n = run_batches(kernel, n_trials, seed, threads=threads)
    K, J = scenario.K, scenario.J
    user = [Estimate(float(mean[k]), float(se[k]), n) for k in range(K)]
    em, es = mean[K:].reshape(J, K), se[K:].reshape(J, K)
    eave = [[Estimate(float(em[j, k]), float(es[j, k]), n) for k in range(K)] for j in range(J)]
    arg = [int(np.argmax(em[:, k])) for k in range(K)]
    emax = [eave[arg[k]][k] for k in range(K)]
    sec = [Estimate(max(0.0, user[k].mean - emax[k].mean), float(np.hypot(user[k].std_error, emax[k].std_error)), n)
           for k in range(K)]
    return RateEstimates(user, eave, emax, arg, sec)


@dataclass(frozen=True)
class AgreementRow:
    name: str
    kind: str  # "moment" or "rate"
    closed_form: float
    mc_mean: float
    std_error: float
    z: float
    flagged: bool


@dataclass(frozen=True)
class AgreementReport:
    rows: list
    n_trials: int
    z_limit: float
    rate_tolerance: float

    @property
    def moment_flags(self) -> list:
        return [r for r in self.rows if r.kind == "moment" and r.flagged]

    @property
    def passed(self) -> bool:
        return not self.moment_flags


def _zscore(closed: float, mc: float, se: float) -> float:
    diff = mc - closed
    scale = max(abs(closed), abs(mc), 1e-300)
    if se <= 1e-12 * scale:
        return 0.0 if abs(diff) <= 1e-9 * scale else float(np.sign(diff) * np.inf)
    return float(diff / se)


def closed_moment_vector(scenario, plan: PhasePlan, angles: AngleSet, mode: RisMode | None = None) -> np.ndarray:
    """Closed forms laid out like the MC moment vector."""
    t = cf.rate_terms(scenario, plan.phases, angles)
    m = t.moments
    u = plan.amplification ** 2
    ex = t.ex1 * u + t.ex2
    ez = t.ez1 * u if _is_amplified(mode, plan) else np.zeros(scenario.J)
    vs = np.array(m.varsigma, dtype=float)
    return np.concatenate([m.xi, vs.reshape(-1), m.upsilon, m.nu, ex.reshape(-1), ez])


def moment_ids(K: int, J: int) -> list:
    ids = [MomentId("xi_k", k=k) for k in range(K)]
    ids += [MomentId("varsigma_i", k=k, i=i) for k in range(K) for i in range(K) if i != k]
    ids += [MomentId("upsilon_k", k=k) for k in range(K)]
    ids += [MomentId("nu_k", k=k) for k in range(K)]
    ids += [MomentId("eave_x", k=k, j=j) for j in range(J) for k in range(K)]
    ids += [MomentId("eave_z", j=j) for j in range(J)]
    return ids


def agreement_report(scenario, plan: PhasePlan, angles: AngleSet, mode: RisMode,
                     n_trials: int = DEFAULT_TRIALS, master_seed: int | None = None,
                     z_limit: float = 3.0, rate_tolerance: float = 0.5, include_rates: bool = True,
                     threads: int | None = None) -> AgreementReport:
    """Closed form against MC for every moment (z-score test) and every rate (gap test).

    Rate rows compare a ratio of means with a mean of logs, so they are judged
    by ``rate_tolerance`` in bits/s/Hz rather than by standard errors and never
    count towards ``passed``.
    """
    seed = scenario.trial_seed if master_seed is None else master_seed
    lay, mean, se, n = estimate_all_moments(scenario, plan, angles, n_trials, seed, mode, threads)
    closed = closed_moment_vector(scenario, plan, angles, mode)
    rows = []
    for mid in moment_ids(scenario.K, scenario.J):
        col = lay.column(mid)
        z = _zscore(closed[col], mean[col], se[col])
        rows.append(AgreementRow(mid.label, "moment", float(closed[col]), float(mean[col]), float(se[col]), z,
                                 abs(z) > z_limit))
    if include_rates:
        est = estimate_ergodic_rates(scenario, plan, angles, mode, n_trials, seed, threads)
        t = cf.rate_terms(scenario, plan.phases, angles)
        ur = cf.user_rates(t, scenario, mode)
        er = cf.eave_rates(t, scenario, mode)
        for k in range(scenario.K):
            pairs = [(f"user_rate[k={k}]", ur[k], est.user[k]),
                     (f"eave_rate[k={k}]", er[:, k].max(), est.eave_max[k]),
                     (f"secrecy_rate[k={k}]", max(0.0, ur[k] - er[:, k].max()), est.secrecy[k])]
            for name, c, e in pairs:
                gap = e.mean - float(c)
                rows.append(AgreementRow(name, "rate", float(c), e.mean, e.std_error,
                                         _zscore(float(c), e.mean, e.std_error), abs(gap) > rate_tolerance))
    return AgreementReport(rows, n, z_limit, rate_tolerance)


def zero_error_scenario(scenario):
    """Same scenario with the phase errors switched off (Theta_bar = I)."""
    return scenario.replace(kappa=float("inf"))


__all__ = [
    "Estimate", "MomentId", "RateEstimates", "AgreementRow", "AgreementReport", "run_batches",
    "estimate_moment", "estimate_all_moments", "estimate_ergodic_rates", "agreement_report",
    "closed_moment_vector", "moment_ids", "zero_error_scenario", "worker_count",
]
