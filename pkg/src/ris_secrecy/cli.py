"""Command-line entry point: ``ris-sec {run,figure,verify,select,ga}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import closed_form as cf
from . import design, figures
from . import monte_carlo as mc
from .errors import ConfigurationError, DomainError, ParseError, RisSecError, ValidationError
from .figures import write_csv
from .instantaneous import MODE_NAMES, PhasePlan, make_plan, mode_from_name
from .scenario import default_scenario, parse_scenario

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_DOMAIN = 5
EXIT_IO = 6
EXIT_VERIFY = 7

RUN_HEADER = ["mode", "user_index", "closed_user_rate", "mc_user_rate", "mc_se", "closed_eave_rate",
              "mc_eave_rate", "secrecy_closed", "secrecy_mc"]
VERIFY_HEADER = ["N", "M", "K", "J", "kappa", "quantity", "kind", "closed_form", "mc_mean", "std_error",
                 "z", "flagged"]
SELECT_HEADER = ["target_rate", "selected", "required_user_power", "required_ris_power", "required_bs_power",
                 "feasible"]
VERIFY_GRIDS = {"small": [(2, 2, 2, 1)], "desk": [(2, 2, 2, 1), (4, 4, 2, 2)]}


class _IOFailure(Exception):
    pass


def _load(args):
    sc = parse_scenario(args.config) if args.config else default_scenario()
    if args.config and sc.defaults_applied:
        print("defaults applied: " + ", ".join(f"{k}={getattr(sc, k)}" for k in sc.defaults_applied),
              file=sys.stderr)
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["trial_seed"] = args.seed
    if getattr(args, "user", None) is not None:
        changes["user_index"] = args.user
    return sc.replace(**changes) if changes else sc


def _trials(n: int, allow_zero: bool = False) -> int:
    if n < 0 or (n == 0 and not allow_zero) or n == 1:
        raise ValidationError("--trials must be >= 2" + (" (or 0 for closed form only)" if allow_zero else ""))
    return n


def _plan(args, sc, angles, mode) -> PhasePlan:
    if args.plan == "aligned":
        return design.aligned_plan(sc, angles, mode)
    if args.plan == "ga":
        cfg = design.GaConfig(seed=args.ga_seed, generations=args.generations, population=args.population)
        return design.ga_optimize(sc, angles, mode, cfg)
    if not args.phases:
        raise ValidationError("--plan explicit needs --phases")
    try:
        phases = np.array([float(v) for v in args.phases.split(",")])
    except ValueError:
        raise ParseError("--phases must be a comma-separated list of radians") from None
    return make_plan(phases, mode, sc)


def _write(path, header, rows):
    try:
        write_csv(Path(path), header, rows)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc.strerror}") from None


def cmd_run(args) -> int:
    sc = _load(args)
    n = _trials(args.trials)
    angles = sc.angles()
    rows = []
    for name in args.mode:
        mode = mode_from_name(name, sc)
        plan = _plan(args, sc, angles, mode)
        t = cf.rate_terms(sc, plan.phases, angles)
        ur, er = cf.user_rates(t, sc, mode), cf.eave_rates(t, sc, mode)
        est = mc.estimate_ergodic_rates(sc, plan, angles, mode, n, sc.trial_seed)
        for k in range(sc.K):
            ce = float(er[:, k].max())
            rows.append([name, k, float(ur[k]), est.user[k].mean, est.user[k].std_error, ce,
                         est.eave_max[k].mean, max(0.0, float(ur[k]) - ce), est.secrecy[k].mean])
    _write(args.out, RUN_HEADER, rows)
    return EXIT_OK


def cmd_figure(args) -> int:
    sc = _load(args)
    n = _trials(args.trials, allow_zero=True)
    recipe = figures.default_recipe(args.figure, tuple(args.mode))
    if args.grid:
        try:
            grid = [float(v) for v in args.grid.split(",")]
        except ValueError:
            raise ParseError("--grid must be a comma-separated list of numbers") from None
        recipe = figures.FigureRecipe(recipe.figure_id, grid, recipe.modes, recipe.overrides, recipe.ideal,
                                      recipe.kappas)
    try:
        paths = figures.reproduce_figure(recipe, sc, args.out, n, sc.trial_seed)
    except OSError as exc:
        raise _IOFailure(f"cannot write to {args.out}: {exc.strerror}") from None
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_verify(args) -> int:
    sc = _load(args)
    n = _trials(args.trials)
    rows, flagged = [], 0
    for (N, M, K, J) in VERIFY_GRIDS[args.grid]:
        if K > sc.K or J > sc.J:
            raise ValidationError(f"verify grid needs K >= {K} and J >= {J}")
        for kappa in args.kappa:
            small = sc.subset(K, J).replace(N=N, M=M, kappa=kappa)
            angles = small.angles()
            mode = mode_from_name(args.mode[0], small)
            phases = np.random.default_rng(np.random.SeedSequence(small.angle_seed, spawn_key=(N, M))).uniform(
                0.0, 2 * np.pi, M)
            plan = make_plan(phases, mode, small)
            rep = mc.agreement_report(small, plan, angles, mode, n, small.trial_seed, include_rates=args.rates)
            for r in rep.rows:
                rows.append([N, M, K, J, kappa, r.name, r.kind, r.closed_form, r.mc_mean, r.std_error, r.z,
                             int(r.flagged)])
            bad = rep.moment_flags
            flagged += len(bad)
            status = "PASS" if not bad else f"FAIL ({len(bad)} flagged)"
            print(f"N={N} M={M} K={K} J={J} kappa={kappa:g}: {status}")
            for r in bad:
                print(f"  {r.name}: closed={r.closed_form:.6g} mc={r.mc_mean:.6g} z={r.z:.2f}")
    if args.out:
        _write(args.out, VERIFY_HEADER, rows)
    return EXIT_OK if flagged == 0 else EXIT_VERIFY


def cmd_select(args) -> int:
    sc = _load(args)
    k = sc.user_index
    budgets = design.Budgets(
        float(sc.user_powers[k]) if args.user_budget is None else args.user_budget,
        sc.ris_power if args.ris_budget is None else args.ris_budget,
        sc.bs_power if args.bs_budget is None else args.bs_budget,
    )
    try:
        targets = [float(v) for v in args.target.split(",")]
    except ValueError:
        raise ParseError("--target must be a comma-separated list of rates") from None
    angles = sc.angles()
    plan = design.aligned_plan(sc, angles, mode_from_name("passive", sc))
    rows = []
    for r in targets:
        out = design.select_configuration(sc, angles, plan, budgets, r, k)
        rows.append([r, out.label, out.required_user_power, out.required_ris_power, out.required_bs_power,
                     int(out.feasible)])
    _write(args.out, SELECT_HEADER, rows)
    return EXIT_OK


def cmd_ga(args) -> int:
    sc = _load(args)
    angles = sc.angles()
    mode = mode_from_name(args.mode[0], sc)
    cfg = design.GaConfig(population=args.population, generations=args.generations, seed=args.ga_seed)
    res = design.ga_run(sc, angles, mode, cfg)
    aligned = design.sum_rate(sc, angles, mode, design.aligned_phases(angles, sc.ris_array, sc.user_index))
    _write(args.out, ["element", "phase_rad"], [[m, float(p)] for m, p in enumerate(res.plan.phases)])
    if args.history:
        _write(args.history, ["generation", "best_sum_rate"], [[g, float(v)] for g, v in enumerate(res.history)])
    print(json.dumps({"ga_sum_rate": res.objective, "aligned_sum_rate": float(aligned)}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ris-sec", description="Secrecy-rate analysis of RIS-aided uplinks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, mode_default=("passive",), many_modes=False):
        sp.add_argument("--config", help="scenario JSON (defaults to the built-in evaluation setting)")
        sp.add_argument("--mode", choices=MODE_NAMES, action="append" if many_modes else "store",
                        default=None, help="RIS mode" + (" (repeatable)" if many_modes else ""))
        sp.add_argument("--seed", type=int, help="override the scenario's trial seed")
        sp.add_argument("--user", type=int, help="override the scenario's user index")
        sp.set_defaults(mode_default=list(mode_default), many_modes=many_modes)

    sp = sub.add_parser("run", help="closed-form and MC rates for every user")
    common(sp, MODE_NAMES, many_modes=True)
    sp.add_argument("--plan", choices=("aligned", "ga", "explicit"), default="aligned")
    sp.add_argument("--phases", help="comma-separated phases for --plan explicit")
    sp.add_argument("--trials", type=int, default=mc.DEFAULT_TRIALS)
    sp.add_argument("--out", required=True)
    _ga_flags(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("figure", help="write the CSV series of one figure recipe")
    sp.add_argument("figure", choices=figures.FIGURES)
    common(sp, MODE_NAMES, many_modes=True)
    sp.add_argument("--grid", help="comma-separated sweep values (sorted)")
    sp.add_argument("--trials", type=int, default=mc.DEFAULT_TRIALS, help="0 skips Monte-Carlo")
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_figure)

    sp = sub.add_parser("verify", help="closed-form moments against Monte-Carlo")
    common(sp, ("active",))
    sp.add_argument("--grid", choices=tuple(VERIFY_GRIDS), default="desk")
    sp.add_argument("--kappa", type=float, action="append", default=None)
    sp.add_argument("--trials", type=int, default=mc.DEFAULT_TRIALS)
    sp.add_argument("--rates", action="store_true", help="also report the rate rows")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("select", help="choose passive/active/EH for target secrecy rates")
    common(sp)
    sp.add_argument("--target", required=True, help="target rate(s), comma-separated")
    sp.add_argument("--user-budget", type=float)
    sp.add_argument("--ris-budget", type=float)
    sp.add_argument("--bs-budget", type=float)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_select)

    sp = sub.add_parser("ga", help="genetic-algorithm phase design")
    common(sp)
    _ga_flags(sp)
    sp.add_argument("--history")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_ga)
    return p


def _ga_flags(sp):
    sp.add_argument("--generations", type=int, default=200)
    sp.add_argument("--population", type=int, default=64)
    sp.add_argument("--ga-seed", type=int, default=0)


def _fail(code: int, kind: str, msg: str) -> int:
    print(f"error kind={kind} code={code} msg={json.dumps(msg)}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.mode is None:
        args.mode = args.mode_default
    elif not args.many_modes:
        args.mode = [args.mode]
    if getattr(args, "kappa", "absent") is None:
        args.kappa = [2.0, 8.0]
    try:
        return args.func(args)
    except ParseError as exc:
        return _fail(EXIT_PARSE, exc.kind, str(exc))
    except ValidationError as exc:
        return _fail(EXIT_VALIDATION, exc.kind, str(exc))
    except (DomainError, ConfigurationError) as exc:
        return _fail(EXIT_DOMAIN, exc.kind, str(exc))
    except _IOFailure as exc:
        return _fail(EXIT_IO, "io", str(exc))
    except RisSecError as exc:
        return _fail(EXIT_DOMAIN, exc.kind, str(exc))


if __name__ == "__main__":
    sys.exit(main())
