"""Experiment description and its JSON representation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ParseError, ValidationError
from .geometry import AngleSet, ArraySpec, NodeLayout, PathLossSpec, disk_positions, draw_angles

DEFAULTS = {"tau": 0.5, "eta_eff": 0.8, "spacing_ratio": 0.5, "user_index": 0}

REQUIRED = ("K", "J", "N", "M", "user_powers", "ris_power", "bs_power", "noise_dbm", "kappa",
            "rician", "layout", "pathloss", "angle_seed", "trial_seed")


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class Scenario:
    K: int
    J: int
    N: int
    M: int
    user_powers: np.ndarray
    ris_power: float
    bs_power: float
    noise_dbm: float
    kappa: float
    rho_b: float
    rho_k: np.ndarray
    rho_ej_r: np.ndarray
    layout: NodeLayout
    pathloss: PathLossSpec
    tau: float = 0.5
    eta_eff: float = 0.8
    spacing_ratio: float = 0.5
    angle_seed: int = 0
    trial_seed: int = 0
    user_index: int = 0
    defaults_applied: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "user_powers", _vector(self.user_powers, self.K, "user_powers"))
        object.__setattr__(self, "rho_k", _vector(self.rho_k, self.K, "rician.rho_k"))
        object.__setattr__(self, "rho_ej_r", _vector(self.rho_ej_r, self.J, "rician.rho_ej_r"))
        self.validate()

    def validate(self) -> None:
        for name in ("K", "J", "N", "M"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if self.layout.K != self.K:
            raise ValidationError(f"layout.user_pos has {self.layout.K} users, K={self.K}")
        if self.layout.J != self.J:
            raise ValidationError(f"layout.eave_pos has {self.layout.J} eavesdroppers, J={self.J}")
        if np.any(self.user_powers < 0) or self.ris_power < 0 or self.bs_power < 0:
            raise ValidationError("powers must be >= 0")
        if not 0.0 < self.tau < 1.0:
            raise ValidationError("tau must lie in (0, 1)")
        if not 0.0 < self.eta_eff <= 1.0:
            raise ValidationError("eta_eff must lie in (0, 1]")
        if self.kappa < 0 or math.isnan(self.kappa):
            raise ValidationError("kappa must be >= 0")
        if self.rho_b < 0 or np.any(self.rho_k < 0) or np.any(self.rho_ej_r < 0):
            raise ValidationError("Rician factors must be >= 0")
        if not self.spacing_ratio > 0:
            raise ValidationError("spacing_ratio must be > 0")
        if not 0 <= self.user_index < self.K:
            raise ValidationError(f"user_index must lie in [0, {self.K})")

    @property
    def noise_w(self) -> float:
        """Shared noise variance sigma^2 in Watts."""
        return dbm_to_watt(self.noise_dbm)

    @property
    def ris_array(self) -> ArraySpec:
        return ArraySpec.planar(self.M, self.spacing_ratio)

    @property
    def bs_array(self) -> ArraySpec:
        return ArraySpec.planar(self.N, self.spacing_ratio)

    def angles(self) -> AngleSet:
        rng = np.random.default_rng(np.random.SeedSequence(self.angle_seed).spawn(2)[0])
        return draw_angles(self.K, self.J, rng)

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)

    def with_user_power(self, k: int, p: float) -> "Scenario":
        powers = self.user_powers.copy()
        powers[k] = p
        return replace(self, user_powers=powers)

    def subset(self, K: int, J: int, N: int | None = None, M: int | None = None) -> "Scenario":
        """First ``K`` users and ``J`` eavesdroppers, optionally resized arrays."""
        layout = NodeLayout(self.layout.bs_pos, self.layout.ris_pos,
                            self.layout.user_pos[:K], self.layout.eave_pos[:J])
        return replace(self, K=K, J=J, N=N or self.N, M=M or self.M, layout=layout,
                       user_powers=self.user_powers[:K], rho_k=self.rho_k[:K],
                       rho_ej_r=self.rho_ej_r[:J], user_index=min(self.user_index, K - 1))

    def to_dict(self) -> dict:
        return {
            "K": self.K, "J": self.J, "N": self.N, "M": self.M,
            "user_powers": self.user_powers.tolist(),
            "ris_power": self.ris_power, "bs_power": self.bs_power,
            "tau": self.tau, "eta_eff": self.eta_eff,
            "noise_dbm": self.noise_dbm,
            "kappa": "inf" if math.isinf(self.kappa) else self.kappa,
            "rician": {"rho_b": self.rho_b, "rho_k": self.rho_k.tolist(),
                       "rho_ej_r": self.rho_ej_r.tolist()},
            "layout": {"bs_pos": self.layout.bs_pos.tolist(), "ris_pos": self.layout.ris_pos.tolist(),
                       "user_pos": self.layout.user_pos.tolist(),
                       "eave_pos": self.layout.eave_pos.tolist()},
            "pathloss": {"alpha_r": self.pathloss.alpha_r, "alpha_b": self.pathloss.alpha_b,
                         "alpha_e": self.pathloss.alpha_e},
            "spacing_ratio": self.spacing_ratio,
            "angle_seed": self.angle_seed, "trial_seed": self.trial_seed,
            "user_index": self.user_index,
        }


def _vector(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValidationError(f"{name} must have length {n}, got {arr.shape[0] if arr.ndim else 0}")
    return arr.copy()


def _number(obj: dict, key: str, path: str = "", allow_inf: bool = False) -> float:
    val = obj[key]
    if allow_inf and isinstance(val, str) and val.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ParseError(f"key '{path}{key}' must be a number")
    return float(val)


def _integer(obj: dict, key: str) -> int:
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ParseError(f"key '{key}' must be an integer")
    return val


def _numbers(obj: dict, key: str, path: str = ""):
    val = obj[key]
    if isinstance(val, bool):
        raise ParseError(f"key '{path}{key}' must be a number or list of numbers")
    if isinstance(val, (int, float)):
        return float(val)
    if isinstance(val, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val):
        return [float(v) for v in val]
    raise ParseError(f"key '{path}{key}' must be a number or list of numbers")


def _points(obj: dict, key: str, path: str) -> np.ndarray:
    val = obj[key]
    try:
        arr = np.asarray(val, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"key '{path}{key}' must hold 2-D points") from None
    if arr.ndim == 1 and arr.shape == (2,):
        return arr
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ParseError(f"key '{path}{key}' must hold 2-D points")
    return arr


def _section(obj: dict, key: str) -> dict:
    val = obj[key]
    if not isinstance(val, dict):
        raise ParseError(f"key '{key}' must be an object")
    return val


def scenario_from_dict(data: Any) -> Scenario:
    if not isinstance(data, dict):
        raise ParseError("scenario must be a JSON object")
    for key in REQUIRED:
        if key not in data:
            raise ParseError(f"missing key '{key}'")
    applied = tuple(k for k in DEFAULTS if k not in data)
    merged = {**DEFAULTS, **data}

    K, J, N, M = (_integer(merged, k) for k in ("K", "J", "N", "M"))
    angle_seed = _integer(merged, "angle_seed")

    rician = _section(merged, "rician")
    for key in ("rho_b", "rho_k", "rho_ej_r"):
        if key not in rician:
            raise ParseError(f"missing key 'rician.{key}'")

    lay = _section(merged, "layout")
    for key in ("bs_pos", "ris_pos", "user_pos"):
        if key not in lay:
            raise ParseError(f"missing key 'layout.{key}'")
    if "eave_pos" in lay:
        eave_pos = _points(lay, "eave_pos", "layout.")
    elif "eave_region" in lay:
        region = lay["eave_region"]
        if not isinstance(region, dict) or "center" not in region or "radius" not in region:
            raise ParseError("key 'layout.eave_region' needs 'center' and 'radius'")
        # child 1 of the angle seed; child 0 is reserved for the angle draws
        rng = np.random.default_rng(np.random.SeedSequence(angle_seed).spawn(2)[1])
        eave_pos = disk_positions(_points(region, "center", "layout.eave_region."),
                                  _number(region, "radius", "layout.eave_region."), J, rng)
    else:
        raise ParseError("missing key 'layout.eave_pos' (or 'layout.eave_region')")

    pls = _section(merged, "pathloss")
    for key in ("alpha_r", "alpha_b", "alpha_e"):
        if key not in pls:
            raise ParseError(f"missing key 'pathloss.{key}'")

    try:
        layout = NodeLayout(_points(lay, "bs_pos", "layout."), _points(lay, "ris_pos", "layout."),
                            np.atleast_2d(_points(lay, "user_pos", "layout.")), np.atleast_2d(eave_pos))
        pathloss = PathLossSpec(*(_number(pls, k, "pathloss.") for k in ("alpha_r", "alpha_b", "alpha_e")))
        return Scenario(
            K=K, J=J, N=N, M=M,
            user_powers=_numbers(merged, "user_powers"),
            ris_power=_number(merged, "ris_power"),
            bs_power=_number(merged, "bs_power"),
            noise_dbm=_number(merged, "noise_dbm"),
            kappa=_number(merged, "kappa", allow_inf=True),
            rho_b=_number(rician, "rho_b", "rician."),
            rho_k=_numbers(rician, "rho_k", "rician."),
            rho_ej_r=_numbers(rician, "rho_ej_r", "rician."),
            layout=layout, pathloss=pathloss,
            tau=_number(merged, "tau"), eta_eff=_number(merged, "eta_eff"),
            spacing_ratio=_number(merged, "spacing_ratio"),
            angle_seed=angle_seed, trial_seed=_integer(merged, "trial_seed"),
            user_index=_integer(merged, "user_index"),
            defaults_applied=applied,
        )
    except ValidationError:
        raise
    except ValueError as exc:  # invariant failures raised by the geometry types
        raise ValidationError(str(exc)) from None


def parse_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    if not text.strip():
        raise ParseError(f"{path} is empty")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from None
    return scenario_from_dict(data)


def default_scenario(**overrides) -> Scenario:
    """The default evaluation setting (K=J=4, N=10, M=5, -70 dBm)."""
    data = {
        "K": 4, "J": 4, "N": 10, "M": 5,
        "user_powers": 2.0, "ris_power": 7.0, "bs_power": 50.0,
        "noise_dbm": -70.0, "kappa": 2.0,
        "rician": {"rho_b": 0.5, "rho_k": 0.5, "rho_ej_r": 0.5},
        "layout": {"bs_pos": [0, 0], "ris_pos": [20, 20],
                   "user_pos": [[30, 5], [35, 5], [30, -5], [35, -5]],
                   "eave_region": {"center": [20, 0], "radius": 10}},
        "pathloss": {"alpha_r": 2.7, "alpha_b": 2.7, "alpha_e": 2.7},
        "angle_seed": 1, "trial_seed": 2,
    }
    data.update(overrides)
    return scenario_from_dict(data)
