"""Node placement, distances, large-scale fading and UPA steering vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError

TWO_PI = 2.0 * math.pi

LINKS = ("user_ris", "ris_bs", "user_ris_bs", "ris_eave", "user_eave", "user_ris_eave")


@dataclass(frozen=True)
class NodeLayout:
    bs_pos: np.ndarray
    ris_pos: np.ndarray
    user_pos: np.ndarray  # (K, 2)
    eave_pos: np.ndarray  # (J, 2)

    def __post_init__(self):
        for name in ("bs_pos", "ris_pos"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (2,):
                raise ConfigurationError(f"{name} must be a 2-D point, got shape {arr.shape}")
            object.__setattr__(self, name, arr)
        for name in ("user_pos", "eave_pos"):
            arr = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
                raise ConfigurationError(f"{name} must be a non-empty list of 2-D points")
            object.__setattr__(self, name, arr)

    @property
    def K(self) -> int:
        return self.user_pos.shape[0]

    @property
    def J(self) -> int:
        return self.eave_pos.shape[0]


@dataclass(frozen=True)
class PathLossSpec:
    alpha_r: float  # user -> RIS
    alpha_b: float  # RIS -> BS
    alpha_e: float  # every eavesdropper link

    def __post_init__(self):
        for name in ("alpha_r", "alpha_b", "alpha_e"):
            if not getattr(self, name) > 0:
                raise DomainError(f"path-loss exponent {name} must be > 0")


@dataclass(frozen=True)
class ArraySpec:
    """Uniform planar array with ``size`` elements.

    ``columns`` is the row width of the element grid. When omitted the array
    must be square and the width is ``sqrt(size)``.
    """

    size: int
    spacing_ratio: float = 0.5
    columns: int | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ConfigurationError("array size must be >= 1")
        if not self.spacing_ratio > 0:
            raise DomainError("spacing_ratio d/lambda must be > 0")
        if self.columns is None:
            root = math.isqrt(self.size)
            if root * root != self.size:
                raise ConfigurationError(
                    f"array size {self.size} is not a perfect square; pass columns= for a rectangular grid"
                )
            object.__setattr__(self, "columns", root)
        elif self.columns < 1:
            raise ConfigurationError("columns must be >= 1")

    @classmethod
    def planar(cls, size: int, spacing_ratio: float = 0.5) -> "ArraySpec":
        """Square grid when possible, otherwise rows of ``ceil(sqrt(size))``."""
        return cls(size, spacing_ratio, columns=math.isqrt(size - 1) + 1 if size > 1 else 1)

    def element_indices(self) -> tuple[np.ndarray, np.ndarray]:
        k = np.arange(self.size)
        return k % self.columns, k // self.columns


@dataclass(frozen=True)
class AngleSet:
    """Azimuth/elevation pairs (radians), each stored as ``[azimuth, elevation]``.

    ``ris_to_bs_aoa`` feeds the BS-side array response of the RIS-BS LoS matrix,
    ``bs_aod`` its RIS-side response.
    """

    ris_to_bs_aoa: np.ndarray
    bs_aod: np.ndarray
    users: np.ndarray  # (K, 2)
    eaves: np.ndarray  # (J, 2)
    bs_array: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("ris_to_bs_aoa", "bs_aod"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(2))
        for name in ("users", "eaves"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1, 2))
        if self.bs_array is None:
            object.__setattr__(self, "bs_array", self.ris_to_bs_aoa)


def steering_vector(spec: ArraySpec, phi1: float, phi2: float) -> np.ndarray:
    x, y = spec.element_indices()
    arg = x * math.sin(phi1) * math.sin(phi2) + y * math.cos(phi2)
    return np.exp(1j * TWO_PI * spec.spacing_ratio * arg)


def distance(p, q) -> float:
    d = float(np.hypot(*(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))))
    if d <= 0.0:
        raise DomainError(f"coincident nodes at {tuple(np.asarray(p))}")
    return d


def large_scale_gain(layout: NodeLayout, pl: PathLossSpec, link: str, k: int | None = None,
                     j: int | None = None) -> float:
    """Linear path gain ``d**-alpha`` of a hop, or the product over a composite link."""
    if link == "user_ris":
        return distance(layout.user_pos[k], layout.ris_pos) ** -pl.alpha_r
    if link == "ris_bs":
        return distance(layout.ris_pos, layout.bs_pos) ** -pl.alpha_b
    if link == "user_ris_bs":
        return large_scale_gain(layout, pl, "user_ris", k=k) * large_scale_gain(layout, pl, "ris_bs")
    if link == "ris_eave":
        return distance(layout.ris_pos, layout.eave_pos[j]) ** -pl.alpha_e
    if link == "user_eave":
        return distance(layout.user_pos[k], layout.eave_pos[j]) ** -pl.alpha_e
    if link == "user_ris_eave":
        return large_scale_gain(layout, pl, "user_ris", k=k) * large_scale_gain(layout, pl, "ris_eave", j=j)
    raise ConfigurationError(f"unknown link {link!r}; expected one of {LINKS}")


def draw_angles(K: int, J: int, rng: np.random.Generator) -> AngleSet:
    """All AoA/AoD pairs i.i.d. uniform on (0, 2*pi)."""
    u = rng.uniform(0.0, TWO_PI, size=(2 + K + J, 2))
    return AngleSet(ris_to_bs_aoa=u[0], bs_aod=u[1], users=u[2:2 + K], eaves=u[2 + K:])


def disk_positions(center, radius: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` points uniform over a disk (area-uniform radius)."""
    rad = radius * np.sqrt(rng.uniform(size=count))
    ang = rng.uniform(0.0, TWO_PI, size=count)
    return np.asarray(center, dtype=float) + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])


@dataclass(frozen=True)
class LinkGains:
    """Every large-scale gain the rate expressions need, precomputed."""

    user_ris: np.ndarray  # (K,)
    ris_bs: float
    user_ris_bs: np.ndarray  # (K,)
    ris_eave: np.ndarray  # (J,)
    user_eave: np.ndarray  # (J, K)
    user_ris_eave: np.ndarray  # (J, K)


def link_gains(layout: NodeLayout, pl: PathLossSpec) -> LinkGains:
    K, J = layout.K, layout.J
    ur = np.array([large_scale_gain(layout, pl, "user_ris", k=k) for k in range(K)])
    rb = large_scale_gain(layout, pl, "ris_bs")
    re = np.array([large_scale_gain(layout, pl, "ris_eave", j=j) for j in range(J)])
    ue = np.array([[large_scale_gain(layout, pl, "user_eave", k=k, j=j) for k in range(K)] for j in range(J)])
    return LinkGains(ur, rb, ur * rb, re, ue, re[:, None] * ur[None, :])
