"""Channel and phase-error sampling, and the Von-Mises characteristic function."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ive

from .errors import ConfigurationError, DomainError
from .geometry import AngleSet, steering_vector


def rho_kappa(kappa):
    """Mean resultant length ``I1(kappa)/I0(kappa)`` of a zero-mean Von-Mises law.

    Exponentially scaled Bessel functions keep the ratio finite for any kappa;
    ``kappa=inf`` (no phase error) maps to 1.
    """
    k = np.asarray(kappa, dtype=float)
    if np.any(k < 0) or np.any(np.isnan(k)):
        raise DomainError("kappa must be >= 0")
    finite = np.where(np.isinf(k), 0.0, k)
    out = np.where(np.isinf(k), 1.0, ive(1, finite) / ive(0, finite))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PhaseErrorSpec:
    kappa: float

    def __post_init__(self):
        if self.kappa < 0 or math.isnan(self.kappa):
            raise DomainError("kappa must be >= 0")


def sample_von_mises(spec: PhaseErrorSpec, rng: np.random.Generator, size=None):
    """Zero-mean Von-Mises phase errors (radians); identically zero for infinite kappa."""
    if math.isinf(spec.kappa):
        return np.zeros(size) if size is not None else 0.0
    return rng.vonmises(0.0, spec.kappa, size=size)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) entries."""
    shape = (shape,) if isinstance(shape, (int, np.integer)) else tuple(shape)
    z = rng.standard_normal((2,) + shape)
    return (z[0] + 1j * z[1]) * math.sqrt(0.5)


@dataclass(frozen=True)
class RicianSpec:
    rician_factor: float
    los_component: np.ndarray

    def __post_init__(self):
        if self.rician_factor < 0:
            raise DomainError("Rician factor must be >= 0")

    @property
    def dims(self) -> tuple:
        return np.shape(self.los_component)


def rician_weights(rho: float) -> tuple[float, float]:
    """Amplitude weights (LoS, NLoS) = (sqrt(rho/(rho+1)), sqrt(1/(rho+1)))."""
    if math.isinf(rho):
        return 1.0, 0.0
    return math.sqrt(rho / (rho + 1.0)), math.sqrt(1.0 / (rho + 1.0))


def sample_rician(spec: RicianSpec, rng: np.random.Generator, size=(), dims=None) -> np.ndarray:
    los = np.asarray(spec.los_component, dtype=complex)
    if dims is not None and tuple(dims) != los.shape:
        raise ConfigurationError(f"LoS component has shape {los.shape}, expected {tuple(dims)}")
    c_los, c_nlos = rician_weights(spec.rician_factor)
    size = (size,) if isinstance(size, (int, np.integer)) else tuple(size)
    nlos = complex_normal(rng, size + los.shape)
    return c_los * los + c_nlos * nlos


@dataclass(frozen=True)
class LosSet:
    """Deterministic line-of-sight components derived from an AngleSet."""

    G: np.ndarray  # (N, M) = a_N(ris_to_bs_aoa) a_M(bs_aod)^H
    bs_side: np.ndarray  # (N,)
    ris_side: np.ndarray  # (M,) RIS-side response of G
    users: np.ndarray  # (K, M) user -> RIS column vectors
    eaves: np.ndarray  # (J, M) RIS -> eavesdropper row vectors (already conjugated)


def los_components(scenario, angles: AngleSet) -> LosSet:
    ris, bs = scenario.ris_array, scenario.bs_array
    a_bs = steering_vector(bs, *angles.ris_to_bs_aoa)
    a_ris = steering_vector(ris, *angles.bs_aod)
    users = np.array([steering_vector(ris, *a) for a in angles.users])
    eaves = np.array([steering_vector(ris, *a) for a in angles.eaves]).conj()
    return LosSet(np.outer(a_bs, a_ris.conj()), a_bs, a_ris, users, eaves)


@dataclass(frozen=True)
class ChannelDraw:
    """One (or a batch of) small-scale channel realisations; batch axis leads."""

    G: np.ndarray  # (..., N, M)
    h_rk: np.ndarray  # (..., K, M)
    h_ejr: np.ndarray  # (..., J, M)
    h_ejk: np.ndarray  # (..., J, K) Rayleigh direct links
    phase_errors: np.ndarray  # (..., M)


def draw_channel_batch(scenario, angles: AngleSet, rng: np.random.Generator, n: int | None,
                       los: LosSet | None = None) -> ChannelDraw:
    """Draw ``n`` joint realisations (``n=None`` drops the batch axis)."""
    los = los or los_components(scenario, angles)
    size = () if n is None else (n,)
    G = sample_rician(RicianSpec(scenario.rho_b, los.G), rng, size)
    h_rk = _per_row(scenario.rho_k, los.users, rng, size)
    h_ejr = _per_row(scenario.rho_ej_r, los.eaves, rng, size)
    h_ejk = complex_normal(rng, size + (scenario.J, scenario.K))
    errs = sample_von_mises(PhaseErrorSpec(scenario.kappa), rng, size + (scenario.M,))
    return ChannelDraw(G, h_rk, h_ejr, h_ejk, np.asarray(errs, dtype=float))


def draw_channels(scenario, angles: AngleSet, rng: np.random.Generator) -> ChannelDraw:
    return draw_channel_batch(scenario, angles, rng, None)


def _per_row(rhos, los_rows, rng, size):
    w = np.array([rician_weights(float(r)) for r in rhos])  # (rows, 2)
    nlos = complex_normal(rng, size + los_rows.shape)
    return w[:, :1] * los_rows + w[:, 1:] * nlos
