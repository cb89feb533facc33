"""Closed-form second-order moments and Jensen-style ergodic rates.

Every moment is exact for the Rician/Von-Mises model; the rates replace
E{log2(1 + S/I)} by log2(1 + E{S}/E{I}). All array helpers broadcast over
leading axes of the phase input so a whole GA population is one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .geometry import AngleSet, LinkGains, link_gains
from .instantaneous import (Active, EnergyHarvesting, Passive, PhasePlan, RisMode, mode_amplification,
                            rate_prefactor)
from .stochastic import LosSet, los_components, rho_kappa


@dataclass(frozen=True)
class CoherenceFactors:
    f: np.ndarray  # (..., K) RIS-to-BS beam towards each user
    eave: np.ndarray  # (..., J, K) same sum with the eavesdropper's RIS-side response
    xi_coh: np.ndarray  # (..., J, K) |eave|^2 - M
    user_overlap: np.ndarray  # (K, K) LoS inner products h_k^H h_i


def _weights(rho):
    rho = np.asarray(rho, dtype=float)
    finite = np.where(np.isinf(rho), 0.0, rho)
    p = np.where(np.isinf(rho), 1.0, finite / (finite + 1.0))
    return p, 1.0 - p


def coherence_arrays(phases, los: LosSet) -> CoherenceFactors:
    phases = np.asarray(phases, dtype=float)
    rot = np.exp(1j * phases)[..., None, :]  # (..., 1, M)
    f = np.einsum("...km,m->...k", rot * los.users, np.conj(los.ris_side))
    c = np.einsum("...km,jm->...jk", rot * los.users, los.eaves)
    M = phases.shape[-1]
    overlap = np.conj(los.users) @ los.users.T
    return CoherenceFactors(f, c, np.abs(c) ** 2 - M, overlap)


def coherence_factors(plan: PhasePlan, angles: AngleSet, scenario) -> CoherenceFactors:
    if plan.M != scenario.M:
        raise ValidationError(f"plan has {plan.M} phases, scenario has M={scenario.M}")
    return coherence_arrays(plan.phases, los_components(scenario, angles))


@dataclass(frozen=True)
class _Bs:
    """Per-user moments (broadcast over phase axes) feeding the BS-side rate."""

    xi: np.ndarray  # (..., K)
    varsigma: np.ndarray  # (..., K, K), [k, i]; diagonal is meaningless and zeroed
    upsilon: np.ndarray  # (..., K)
    nu: np.ndarray  # (..., K)


def _bs_moments(scenario, coh: CoherenceFactors) -> _Bs:
    N, M = float(scenario.N), float(scenario.M)
    r2 = rho_kappa(scenario.kappa) ** 2
    pb, qb = _weights(scenario.rho_b)
    pk, qk = _weights(scenario.rho_k)
    f2 = np.abs(coh.f) ** 2

    def q3(ff):
        return N**2 * (pb**2 * M * ff + 2 * pb * qb * ff + qb**2 * M) + qb * N * M * (pb * ff + M)

    q5 = N**2 * (pb**2 * M**2 + 2 * pb * qb * M + qb**2 * M) + qb * N * M**2 * (2 * pb + qb)
    gam = pk * qb + qk * pb + qk * qb
    tr_c2 = (pk**2 * M + 2 * pk * qk) * M + qk**2 * M
    tr_pc2 = (pk**2 * M + 2 * pk * qk) * f2 + qk**2 * M
    q1 = N**2 * (pb * pk * f2 + gam * M) ** 2 + qb * N * (2 * pb * tr_pc2 + qb * tr_c2)
    q2 = (N**2 * (M * pk**2 * pb**2 * f2 + 2 * pk * pb * gam * f2 + M * gam**2)
          + qb * N * (pb * tr_pc2 + tr_c2))
    q3k = q3(f2)
    xi = r2 * q1 + (1 - r2) * q2 + qk * (1 + r2) * pk * q3k + (qk * (1 - r2) * pk + qk**2) * q5

    # interference: row k is the combiner of user k, column i the interferer
    fk, fi = coh.f[..., :, None], coh.f[..., None, :]
    f2k, f2i = f2[..., :, None], f2[..., None, :]
    ov = coh.user_overlap
    cross = (N**2 * (pb**2 * f2k * f2i + 2 * pb * qb * np.real(np.conj(fk) * fi * np.conj(ov))
                     + qb**2 * np.abs(ov) ** 2)
             + qb * N * (pb * M * (f2k + f2i) + qb * M**2))
    pkk, qkk = pk[:, None], qk[:, None]
    pii, qii = pk[None, :], qk[None, :]
    vs = (r2 * pkk * pii * cross + (1 - r2) * pii * pkk * q3k[..., :, None]
          + qkk * (r2 * pii * q3(f2i) + (1 - r2) * pii * q5)
          + qii * pkk * q3k[..., :, None] + qkk * qii * q5)
    K = scenario.K
    vs = np.where(np.eye(K, dtype=bool), 0.0, vs)

    ups = N * (pb * pk * f2 + (1 - pb * pk) * M)
    nu = pk * q3k + qk * q5
    return _Bs(xi, vs, ups, nu)


@dataclass(frozen=True)
class RateTerms:
    """Power- and amplification-free building blocks of every closed-form SINR.

    With ``u = amplification**2`` the BS SINR of user k is
    ``p_k*sig_k*u / ((intf_k + ris_k)*u + bsn_k)`` (the RIS term only for amplified
    modes) and the eavesdropper SINR uses ``x = ex1*u + ex2``.
    """

    sig: np.ndarray  # (..., K)  L_k xi_k
    intf: np.ndarray  # (..., K, K)  L_i varsigma_{k,i}, zero diagonal
    ris: np.ndarray  # (..., K)  d_rb sigma^2 nu_k
    bsn: np.ndarray  # (..., K)  upsilon_k sigma^2
    ex1: np.ndarray  # (..., J, K)  reflected eavesdropper gain
    ex2: np.ndarray  # (J, K)  direct user -> eavesdropper gain
    ez1: np.ndarray  # (J,)  d_er M
    noise: float
    moments: _Bs
    coherence: CoherenceFactors


def rate_terms(scenario, phases, angles: AngleSet | None = None, los: LosSet | None = None,
               gains: LinkGains | None = None) -> RateTerms:
    if los is None:
        los = los_components(scenario, angles if angles is not None else scenario.angles())
    gains = gains or link_gains(scenario.layout, scenario.pathloss)
    coh = coherence_arrays(phases, los)
    bs = _bs_moments(scenario, coh)
    s2 = scenario.noise_w
    M = float(scenario.M)
    r2 = rho_kappa(scenario.kappa) ** 2
    pe, _ = _weights(scenario.rho_ej_r)
    pk, _ = _weights(scenario.rho_k)
    refl = M + pe[:, None] * pk[None, :] * r2 * coh.xi_coh
    return RateTerms(
        sig=gains.user_ris_bs * bs.xi,
        intf=gains.user_ris_bs * bs.varsigma,
        ris=gains.ris_bs * s2 * bs.nu,
        bsn=bs.upsilon * s2,
        ex1=gains.user_ris_eave * refl,
        ex2=gains.user_eave,
        ez1=gains.ris_eave * M,
        noise=s2,
        moments=bs,
        coherence=coh,
    )


def user_sinr(t: RateTerms, powers, u: float = 1.0, amplified: bool = False):
    """Closed-form BS SINR of every user; ``u`` is the squared amplification."""
    powers = np.asarray(powers, dtype=float)
    interference = np.sum(t.intf * powers, axis=-1)
    num = powers * t.sig * u
    den = (interference + (t.ris if amplified else 0.0)) * u + t.bsn
    if np.any(den <= 0):
        raise DomainError("closed-form SINR has a zero denominator")
    return num / den


def eave_sinr(t: RateTerms, powers, u: float = 1.0, amplified: bool = False):
    """Closed-form SINR at every eavesdropper for every user, shape (..., J, K)."""
    powers = np.asarray(powers, dtype=float)
    x = t.ex1 * u + t.ex2
    px = x * powers
    interference = px.sum(axis=-1, keepdims=True) - px
    den = interference + (t.ez1[..., None] * u * t.noise if amplified else 0.0) + t.noise
    return px / den


def _mode_u(mode: RisMode, scenario) -> tuple[float, bool]:
    if isinstance(mode, Passive):
        return 1.0, False
    return mode_amplification(mode, scenario) ** 2, True


def user_rates(t: RateTerms, scenario, mode: RisMode, powers=None, u: float | None = None):
    uu, amplified = _mode_u(mode, scenario)
    u = uu if u is None else u
    powers = scenario.user_powers if powers is None else powers
    return rate_prefactor(mode) * np.log2(1.0 + user_sinr(t, powers, u, amplified))


def eave_rates(t: RateTerms, scenario, mode: RisMode, powers=None, u: float | None = None):
    """Per-eavesdropper rates (..., J, K)."""
    uu, amplified = _mode_u(mode, scenario)
    u = uu if u is None else u
    powers = scenario.user_powers if powers is None else powers
    return rate_prefactor(mode) * np.log2(1.0 + eave_sinr(t, powers, u, amplified))


def sum_rate_objective(scenario, phases, mode: RisMode, los: LosSet, gains: LinkGains | None = None):
    """Sum of closed-form user rates for each phase vector in ``phases`` (leading axes kept)."""
    t = rate_terms(scenario, phases, los=los, gains=gains)
    return user_rates(t, scenario, mode).sum(axis=-1)


# --- single-plan API -------------------------------------------------------------------------

def _terms(scenario, plan: PhasePlan, angles: AngleSet) -> RateTerms:
    if plan.M != scenario.M:
        raise ValidationError(f"plan has {plan.M} phases, scenario has M={scenario.M}")
    return rate_terms(scenario, plan.phases, angles)


def _check_user(scenario, k: int) -> None:
    if not 0 <= k < scenario.K:
        raise ValidationError(f"user index {k} out of range [0, {scenario.K})")


def moment_xi_k(scenario, plan: PhasePlan, angles: AngleSet, k: int) -> float:
    _check_user(scenario, k)
    return float(_terms(scenario, plan, angles).moments.xi[k])


def moment_varsigma_i(scenario, plan: PhasePlan, angles: AngleSet, k: int, i: int) -> float:
    _check_user(scenario, k)
    _check_user(scenario, i)
    if i == k:
        raise DomainError("interference moment needs i != k; use moment_xi_k")
    return float(_terms(scenario, plan, angles).moments.varsigma[k, i])


def moment_upsilon_k(scenario, plan: PhasePlan, angles: AngleSet, k: int) -> float:
    """E||h_k^H Theta^H G^H||^2 (small-scale only; the rate multiplies by sigma^2)."""
    _check_user(scenario, k)
    return float(_terms(scenario, plan, angles).moments.upsilon[k])


def moment_nu_k(scenario, plan: PhasePlan, angles: AngleSet, k: int) -> float:
    _check_user(scenario, k)
    return float(_terms(scenario, plan, angles).moments.nu[k])


def eave_moments(scenario, plan: PhasePlan, angles: AngleSet, mode: RisMode, j: int, k: int):
    """(x, y, z) at eavesdropper j for user k; ``y`` lists the other users in index order."""
    _check_user(scenario, k)
    if not 0 <= j < scenario.J:
        raise ValidationError(f"eavesdropper index {j} out of range [0, {scenario.J})")
    t = _terms(scenario, plan, angles)
    u, amplified = _mode_u(mode, scenario)
    row = t.ex1[j] * u + t.ex2[j]
    others = np.delete(np.arange(scenario.K), k)
    z = t.ez1[j] * u if amplified else 0.0
    return float(row[k]), row[others], float(z)


@dataclass(frozen=True)
class MomentSet:
    xi_k: float
    varsigma_i: np.ndarray
    upsilon_k: float
    nu_k: float
    x_eave: float
    y_eave: np.ndarray
    z_eave: float


def moment_set(scenario, plan: PhasePlan, angles: AngleSet, mode: RisMode, k: int, j: int) -> MomentSet:
    t = _terms(scenario, plan, angles)
    others = np.delete(np.arange(scenario.K), k)
    x, y, z = eave_moments(scenario, plan, angles, mode, j, k)
    m = t.moments
    return MomentSet(float(m.xi[k]), m.varsigma[k, others], float(m.upsilon[k]), float(m.nu[k]), x, y, z)


@dataclass(frozen=True)
class RateReport:
    user_rate: float
    eave_rate: float
    secrecy_rate: float
    mode: RisMode
    eave_index: int = 0


def ergodic_user_rate(scenario, plan: PhasePlan, angles: AngleSet, mode: RisMode, k: int) -> float:
    _check_user(scenario, k)
    return float(user_rates(_terms(scenario, plan, angles), scenario, mode)[k])


def ergodic_eave_rate(scenario, plan: PhasePlan, angles: AngleSet, mode: RisMode, k: int) -> float:
    """Worst-case (max over eavesdroppers) closed-form rate leaked from user ``k``."""
    _check_user(scenario, k)
    return float(eave_rates(_terms(scenario, plan, angles), scenario, mode)[:, k].max())


def ergodic_secrecy_rate(scenario, plan: PhasePlan, angles: AngleSet, mode: RisMode, k: int) -> RateReport:
    _check_user(scenario, k)
    t = _terms(scenario, plan, angles)
    user = float(user_rates(t, scenario, mode)[k])
    per_eave = eave_rates(t, scenario, mode)[:, k]
    j = int(np.argmax(per_eave))
    eave = float(per_eave[j])
    return RateReport(user, eave, max(0.0, user - eave), mode, j)


__all__ = [
    "Active", "EnergyHarvesting", "Passive", "CoherenceFactors", "MomentSet", "RateReport", "RateTerms",
    "coherence_arrays", "coherence_factors", "rate_terms", "user_sinr", "eave_sinr", "user_rates",
    "eave_rates", "sum_rate_objective", "moment_xi_k", "moment_varsigma_i", "moment_upsilon_k",
    "moment_nu_k", "eave_moments", "moment_set", "ergodic_user_rate", "ergodic_eave_rate",
    "ergodic_secrecy_rate",
]
