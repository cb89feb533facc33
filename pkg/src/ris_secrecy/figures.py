"""Sweep recipes that regenerate the evaluation curves as CSV series."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import closed_form as cf
from . import design
from . import monte_carlo as mc
from .errors import ValidationError
from .instantaneous import MODE_NAMES, make_plan, mode_from_name

FIGURES = ("rate_vs_power", "rate_vs_kappa", "rate_vs_N", "rate_vs_M", "selection_maps")

SERIES_HEADER = ["x", "secrecy_closed", "secrecy_mc", "mc_se", "user_closed", "eave_closed"]
SELECTION_HEADER = ["target_rate", "required_user_power", "required_ris_power", "required_bs_power", "selected"]
THRESHOLD_HEADER = ["kappa", "passive_max_rate", "active_max_rate", "eh_max_rate"]


@dataclass(frozen=True)
class FigureRecipe:
    figure_id: str
    grid: tuple
    modes: tuple = MODE_NAMES
    overrides: dict = field(default_factory=dict)  # scenario fields applied before sweeping
    ideal: bool = False  # also emit the zero-phase-error curve per mode
    kappas: tuple = (2.0, 8.0)  # selection_maps only

    def __post_init__(self):
        if self.figure_id not in FIGURES:
            raise ValidationError(f"unknown figure {self.figure_id!r}; expected one of {FIGURES}")
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise ValidationError("figure grid must be non-empty")
        if list(grid) != sorted(grid):
            raise ValidationError("figure grid must be sorted")
        object.__setattr__(self, "grid", grid)
        for m in self.modes:
            if m not in MODE_NAMES:
                raise ValidationError(f"unknown mode {m!r}")


def default_recipe(figure_id: str, modes=MODE_NAMES) -> FigureRecipe:
    if figure_id == "rate_vs_power":
        return FigureRecipe(figure_id, (0.5, 1, 2, 5, 10, 20, 50), modes, ideal=True)
    if figure_id == "rate_vs_kappa":
        return FigureRecipe(figure_id, (0.5, 1, 2, 4, 8, 16, 32), modes, ideal=True)
    if figure_id == "rate_vs_N":
        return FigureRecipe(figure_id, (4, 6, 8, 10, 12, 16), modes)
    if figure_id == "rate_vs_M":
        # square (or single-row) grids keep the aligned beam comparable across sizes
        return FigureRecipe(figure_id, (2, 4, 9, 16, 25), modes, overrides={"noise_dbm": -20.0})
    if figure_id == "selection_maps":
        return FigureRecipe(figure_id, tuple(np.round(np.arange(0.05, 3.001, 0.05), 2)), modes)
    raise ValidationError(f"unknown figure {figure_id!r}; expected one of {FIGURES}")


def sweep_point(recipe: FigureRecipe, scenario, x: float):
    k = scenario.user_index
    if recipe.figure_id == "rate_vs_power":
        return scenario.with_user_power(k, x)
    if recipe.figure_id == "rate_vs_kappa":
        return scenario.replace(kappa=x)
    if recipe.figure_id == "rate_vs_N":
        return scenario.replace(N=int(x))
    if recipe.figure_id == "rate_vs_M":
        return scenario.replace(M=int(x))
    raise ValidationError(f"{recipe.figure_id} is not a rate sweep")


def secrecy_point(scenario, mode_name: str, n_trials: int, seed: int | None = None):
    """Closed-form and MC secrecy rate of the scenario's user under the aligned plan."""
    mode = mode_from_name(mode_name, scenario)
    angles = scenario.angles()
    k = scenario.user_index
    plan = make_plan(design.aligned_phases(angles, scenario.ris_array, k), mode, scenario)
    rep = cf.ergodic_secrecy_rate(scenario, plan, angles, mode, k)
    if n_trials > 0:
        est = mc.estimate_ergodic_rates(scenario, plan, angles, mode, n_trials, seed)
        return rep, est.secrecy[k]
    return rep, None


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def reproduce_figure(recipe: FigureRecipe, scenario, out_dir, n_trials: int = mc.DEFAULT_TRIALS,
                     seed: int | None = None) -> list[Path]:
    """Write one CSV per curve and return their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = scenario.replace(**recipe.overrides) if recipe.overrides else scenario
    if recipe.figure_id == "selection_maps":
        return _selection_maps(recipe, base, out_dir)
    written = []
    variants = [("", None)] + ([("_ideal", math.inf)] if recipe.ideal else [])
    for mode_name in recipe.modes:
        for suffix, kappa in variants:
            rows = []
            for x in recipe.grid:
                sc = sweep_point(recipe, base, x)
                if kappa is not None:
                    sc = sc.replace(kappa=kappa)
                rep, est = secrecy_point(sc, mode_name, n_trials, seed)
                rows.append([x, rep.secrecy_rate, est.mean if est else None, est.std_error if est else None,
                             rep.user_rate, rep.eave_rate])
            path = out_dir / f"{recipe.figure_id}_{mode_name}{suffix}.csv"
            write_csv(path, SERIES_HEADER, rows)
            written.append(path)
    return written


def _selection_maps(recipe: FigureRecipe, scenario, out_dir: Path) -> list[Path]:
    k = scenario.user_index
    budgets = design.Budgets(float(scenario.user_powers[k]), scenario.ris_power, scenario.bs_power)
    written, thresholds = [], []
    for kappa in recipe.kappas:
        sc = scenario.replace(kappa=kappa)
        angles = sc.angles()
        plan = design.aligned_plan(sc, angles, mode_from_name("passive", sc), k)
        rows = []
        for r in recipe.grid:
            pu = design.required_user_power(sc, plan, angles, r, k)
            pr = design.required_ris_power(sc, angles, plan, budgets.user_power, r, k)
            pb = design.required_bs_power(sc, angles, plan, budgets.user_power, r, k=k)
            sel = design.select_configuration(sc, angles, plan, budgets, r, k)
            rows.append([r, pu, pr, pb, sel.label])
        path = out_dir / f"selection_maps_kappa{kappa:g}.csv"
        write_csv(path, SELECTION_HEADER, rows)
        written.append(path)
        th = design.selection_thresholds(sc, angles, plan, budgets, recipe.grid, k)
        thresholds.append([kappa, th["passive"], th["active"], th["eh"]])
    path = out_dir / "selection_thresholds.csv"
    write_csv(path, THRESHOLD_HEADER, thresholds)
    written.append(path)
    return written
