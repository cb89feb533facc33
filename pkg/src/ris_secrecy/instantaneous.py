"""Per-realisation signal processing: phase plans, amplification and exact SINRs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigurationError, DomainError, ValidationError
from .geometry import TWO_PI, LinkGains, link_gains
from .stochastic import ChannelDraw


@dataclass(frozen=True)
class Passive:
    name = "passive"


@dataclass(frozen=True)
class Active:
    ris_power: float
    name = "active"

    def __post_init__(self):
        if not self.ris_power > 0:
            raise DomainError("active RIS power must be > 0")


@dataclass(frozen=True)
class EnergyHarvesting:
    bs_power: float
    tau: float = 0.5
    eta_eff: float = 0.8
    name = "eh"

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise DomainError("tau must lie in (0, 1)")
        if not 0.0 < self.eta_eff <= 1.0:
            raise DomainError("eta_eff must lie in (0, 1]")
        if self.bs_power < 0:
            raise DomainError("BS power must be >= 0")


RisMode = Union[Passive, Active, EnergyHarvesting]

MODE_NAMES = ("passive", "active", "eh")


def mode_from_name(name: str, scenario) -> RisMode:
    """Build the mode named on the command line from the scenario's power budgets."""
    if name == "passive":
        return Passive()
    if name == "active":
        return Active(scenario.ris_power)
    if name == "eh":
        return EnergyHarvesting(scenario.bs_power, scenario.tau, scenario.eta_eff)
    raise ValidationError(f"unknown mode {name!r}; expected one of {MODE_NAMES}")


def rate_prefactor(mode: RisMode) -> float:
    """Fraction of the frame used for data: ``1 - tau`` for EH, else 1."""
    return 1.0 - mode.tau if isinstance(mode, EnergyHarvesting) else 1.0


def amplification_factor(mode: Active | float, scenario) -> float:
    """Common per-element amplitude gain that spends ``P_r`` on the amplified signal and noise."""
    p_r = mode.ris_power if isinstance(mode, Active) else float(mode)
    if p_r < 0:
        raise DomainError("RIS power must be >= 0")
    gains = link_gains(scenario.layout, scenario.pathloss)
    denom = scenario.M * (float(np.dot(scenario.user_powers, gains.user_ris)) + scenario.noise_w)
    if denom <= 0:
        raise ConfigurationError("amplification factor has a zero denominator")
    return math.sqrt(p_r / denom)


def harvested_power(mode: EnergyHarvesting, scenario) -> float:
    if not 0.0 < mode.tau < 1.0:
        raise DomainError("tau must lie in (0, 1)")
    return mode.eta_eff * mode.tau * mode.bs_power * scenario.N * scenario.M / (1.0 - mode.tau)


def eh_amplification_factor(mode: EnergyHarvesting, scenario) -> float:
    return amplification_factor(harvested_power(mode, scenario), scenario)


def mode_amplification(mode: RisMode, scenario) -> float:
    if isinstance(mode, Active):
        return amplification_factor(mode, scenario)
    if isinstance(mode, EnergyHarvesting):
        return eh_amplification_factor(mode, scenario)
    return 1.0


@dataclass(frozen=True)
class PhasePlan:
    phases: np.ndarray
    amplification: float = 1.0

    def __post_init__(self):
        ph = np.mod(np.asarray(self.phases, dtype=float).reshape(-1), TWO_PI)
        object.__setattr__(self, "phases", ph)
        if not self.amplification >= 0:
            raise DomainError("amplification must be >= 0")

    @property
    def M(self) -> int:
        return self.phases.size

    @property
    def theta(self) -> np.ndarray:
        """Diagonal of the reflection matrix, amplification included."""
        return self.amplification * np.exp(1j * self.phases)


def make_plan(phases, mode: RisMode, scenario) -> PhasePlan:
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (scenario.M,):
        raise ConfigurationError(f"phase vector has shape {phases.shape}, expected ({scenario.M},)")
    return PhasePlan(phases, mode_amplification(mode, scenario))


@dataclass(frozen=True)
class SinrBreakdown:
    signal: np.ndarray | float
    interference: np.ndarray | float
    ris_noise: np.ndarray | float
    rx_noise: np.ndarray | float

    @property
    def sinr(self):
        return self.signal / (self.interference + self.ris_noise + self.rx_noise)

    def rate(self, prefactor: float = 1.0):
        return prefactor * np.log2(1.0 + self.sinr)


def _cascade(draw: ChannelDraw, plan: PhasePlan):
    GT = draw.G * plan.theta  # G Theta
    c = np.einsum("...nm,...km->...nk", GT, draw.h_rk)  # error-free cascades, one column per user
    return GT, c


def mrc_weights(draw: ChannelDraw, plan: PhasePlan, k: int) -> np.ndarray:
    """Combiner for user ``k``: conjugate of the error-free cascaded channel ``G Theta h_k``."""
    _, c = _cascade(draw, plan)
    return np.conj(c[..., :, k])


def bs_breakdown(draw: ChannelDraw, plan: PhasePlan, mode: RisMode, scenario,
                 gains: LinkGains | None = None) -> SinrBreakdown:
    """SINR components at the BS for every user at once (last axis indexes users)."""
    gains = gains or link_gains(scenario.layout, scenario.pathloss)
    GT, c = _cascade(draw, plan)
    err = np.exp(1j * draw.phase_errors)[..., None, :]
    ce = np.einsum("...nm,...km->...nk", GT, err * draw.h_rk)  # G Theta Theta_bar h_i
    S = np.einsum("...nk,...ni->...ki", np.conj(c), ce)
    pw = scenario.user_powers * gains.user_ris_bs
    P = np.abs(S) ** 2 * pw
    signal = np.diagonal(P, axis1=-2, axis2=-1)
    interference = P.sum(axis=-1) - signal
    sigma2 = scenario.noise_w
    rx = np.sum(np.abs(c) ** 2, axis=-2) * sigma2
    if isinstance(mode, Passive):
        ris = np.zeros_like(rx)
    else:
        u = np.einsum("...nk,...nm->...km", np.conj(c), GT)  # |Theta_bar| = 1 drops out of the norm
        ris = gains.ris_bs * sigma2 * np.sum(np.abs(u) ** 2, axis=-1)
    return SinrBreakdown(signal, interference, ris, rx)


def eave_breakdown(draw: ChannelDraw, plan: PhasePlan, mode: RisMode, scenario,
                   gains: LinkGains | None = None) -> SinrBreakdown:
    """SINR components at each eavesdropper for each user; trailing axes are (J, K)."""
    gains = gains or link_gains(scenario.layout, scenario.pathloss)
    te = plan.theta * np.exp(1j * draw.phase_errors)  # Theta Theta_bar diagonal
    refl = np.einsum("...jm,...km->...jk", draw.h_ejr * te[..., None, :], draw.h_rk)
    amp = refl * np.sqrt(gains.user_ris_eave) + draw.h_ejk * np.sqrt(gains.user_eave)
    P = np.abs(amp) ** 2 * scenario.user_powers
    interference = P.sum(axis=-1, keepdims=True) - P
    sigma2 = scenario.noise_w
    if isinstance(mode, Passive):
        ris = np.zeros(P.shape)
    else:
        norm = np.sum(np.abs(draw.h_ejr * te[..., None, :]) ** 2, axis=-1)
        ris = np.broadcast_to((gains.ris_eave * sigma2 * norm)[..., None], P.shape)
    rx = np.full(P.shape, sigma2)
    return SinrBreakdown(P, interference, ris, rx)


def _check_index(idx: int, n: int, name: str) -> None:
    if not 0 <= idx < n:
        raise ValidationError(f"{name} index {idx} out of range [0, {n})")


def sinr_bs(draw: ChannelDraw, plan: PhasePlan, mode: RisMode, scenario, k: int) -> SinrBreakdown:
    _check_index(k, scenario.K, "user")
    b = bs_breakdown(draw, plan, mode, scenario)
    return SinrBreakdown(*(x[..., k] for x in (b.signal, b.interference, b.ris_noise, b.rx_noise)))


def sinr_eave(draw: ChannelDraw, plan: PhasePlan, mode: RisMode, scenario, j: int, k: int) -> SinrBreakdown:
    _check_index(j, scenario.J, "eavesdropper")
    _check_index(k, scenario.K, "user")
    b = eave_breakdown(draw, plan, mode, scenario)
    return SinrBreakdown(*(x[..., j, k] for x in (b.signal, b.interference, b.ris_noise, b.rx_noise)))
