"""Command-line workflows.

Subcommands::

    generate  synthetic actuals + provider forecasts in the ingestion CSV format
    train     solve for band coefficients on a seeded training split -> band.json
    evaluate  out-of-sample metrics and per-day plot-ready bands
    combine   alpha search over the convex combination of two trained bands
    pareto    mean training width as a function of theta
    sweep     one row per (provider, lambda): the %atypical / width table

Exit codes: 0 success, 1 infeasible or no feasible alpha, 2 usage,
3 data validation, 4 solver budget exhausted without a solution.

Output files (all CSV with a header row, floats with 12 significant digits):

    band.json          x, theta, lambda, horizon, train/test day ids, provenance
    train_report.csv   day_id,regular,offband_energy,abs_width,rel_width
    eval_days.csv      day_id,offband_energy,abs_width,rel_width,is_atypical
    eval_summary.json  EvalReport aggregates + histograms of off-band energy and width
    bands/bands_<day>.csv  t,forecast,actual,lower,upper
    alpha_grid.csv     alpha,atypical_fraction,mean_rel_width
    combine_summary.json  chosen alpha, its metrics, test-set metrics, phi correlation
    combined_bands.csv day_id,t,forecast,actual,lower,upper
    pareto.csv         theta,mean_abs_width,mean_rel_width,objective,status
    table.csv          provider,lambda,pct_atypical,mean_abs_width,pct_rel_width,status[,solve_seconds]
    independence.csv   lambda,theta,pct_first,pct_second,pct_simultaneous,phi
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import hashlib
import json
import logging
import shutil
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .combination import DEFAULT_ALPHA_GRID, DEFAULT_ATYPICAL_BUDGET, alpha_search, combine, evaluate_alpha
from .core import DEFAULT_HORIZON, BandCoefficients, ValidationError, band_limits, band_width, day_offband
from .datagen import GenConfig, generate
from .evaluation import evaluate_set, histogram, pareto_curve, phi_correlation, UndefinedCorrelation
from .ingestion import (
    DEFAULT_ASSIMILATION_WINDOW,
    align,
    normalize_plf,
    parse_capacity,
    parse_csv,
    split_train_test,
)
from .optimizer import INFEASIBLE, SolverOptions, build_instance, solve

log = logging.getLogger("windbands")

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_LIMIT = 4


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _prepare_out(path: str, force: bool) -> Path:
    out = Path(path)
    if out.exists() and any(out.iterdir()):
        if not force:
            raise CliError(f"output directory {out} exists; pass --force to overwrite", EXIT_USAGE)
        shutil.rmtree(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sha256(paths) -> str:
    digest = hashlib.sha256()
    for p in paths:
        digest.update(Path(p).read_bytes())
    return digest.hexdigest()


def _unit_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{value} is outside [0, 1]")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"{value} must be >= 1")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError(f"{value} must be > 0")
    return value


def parse_grid(text: str) -> list[float]:
    """``"0.1,0.2"`` or ``"start:stop:step"`` (inclusive stop) into a list of floats."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise ValueError
            count = int(round((stop - start) / step))
            values = [round(start + i * step, 10) for i in range(count + 1)]
        else:
            values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    if not values or any(not 0.0 <= v <= 1.0 for v in values):
        raise argparse.ArgumentTypeError(f"grid values must lie in [0, 1]: {text!r}")
    return values


def _solver_options(args) -> SolverOptions:
    return SolverOptions(
        tolerance=args.tolerance,
        node_limit=args.node_limit,
        time_limit=args.time_limit,
        x_cap=args.x_cap,
    )


def _load_provider_days(actuals_path, provider_paths, horizon, window, capacity_path=None):
    if capacity_path is None:
        actuals = parse_csv(actuals_path, horizon, name="actuals")
        providers = [parse_csv(p, horizon) for p in provider_paths]
    else:
        capacity = parse_capacity(capacity_path)
        actuals = normalize_plf(parse_csv(actuals_path, horizon, "mw", name="actuals"), capacity)
        providers = [normalize_plf(parse_csv(p, horizon, "mw"), capacity) for p in provider_paths]
    names = [p.name for p in providers]
    if len(set(names)) != len(names):
        raise ValidationError(f"provider files must have distinct names, got {names}")
    return align(providers, actuals, window)


def _split(dataset, args):
    train_n = args.train_days
    if train_n is None:
        train_n = min(120, len(dataset.day_ids) - 1)
    train_ids, test_ids = split_train_test(dataset.day_ids, train_n, args.seed, args.test_days)
    return train_ids, test_ids


def _select(records, day_ids):
    by_day = {r.day_id: r for r in records}
    missing = [d for d in day_ids if d not in by_day]
    if missing:
        raise ValidationError(f"{len(missing)} requested days missing from the data, e.g. {missing[0]}")
    return [by_day[d] for d in day_ids]


def _load_band(path):
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        coeffs = BandCoefficients(payload["x"], payload["theta"], payload["lambda"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed band file ({exc})")
    return coeffs, payload


def _solution_stats(solution, timings: bool):
    stats = {
        "status": solution.status,
        "objective": solution.objective if np.isfinite(solution.objective) else None,
        "best_bound": solution.best_bound if np.isfinite(solution.best_bound) else None,
        "nodes": solution.nodes,
    }
    if timings:
        stats["solve_seconds"] = solution.solve_seconds
    return stats


# -- subcommands ------------------------------------------------------------------


def cmd_generate(args) -> int:
    out = _prepare_out(args.out, args.force)
    config = GenConfig(seed=args.seed, n_days=args.days, horizon=args.horizon)
    dataset = generate(config)
    dataset.write(out)
    _write_json(out / "gen_config.json", {
        "seed": config.seed,
        "n_days": config.n_days,
        "horizon": config.horizon,
        "mean_level": config.mean_level,
        "reversion": config.reversion,
        "noise_scale": config.noise_scale,
        "start_date": config.start_date.isoformat(),
        "providers": [vars(p) for p in config.providers],
    })
    print(f"wrote {config.n_days} days for providers {[p.name for p in config.providers]} to {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    window = None if args.no_assimilation else args.assimilation_window
    inputs = [args.actuals, args.provider, *args.align_with]
    dataset = _load_provider_days(args.actuals, [args.provider, *args.align_with], args.horizon, window, args.capacity)
    out = _prepare_out(args.out, args.force)
    name = Path(args.provider).stem
    train_ids, test_ids = _split(dataset, args)
    train = _select(dataset.provider(name), train_ids)
    mean_source = train
    if args.mean_source == "all":
        mean_source = dataset.provider(name)
    problem = build_instance(train, mean_source, args.theta, args.lam)
    solution = solve(problem, _solver_options(args))
    stats = _solution_stats(solution, args.timings)
    if solution.status == INFEASIBLE:
        witness = train[solution.witness_day].day_id
        print(f"infeasible: day {witness} cannot meet theta={args.theta} at any band width", file=sys.stderr)
        _write_json(out / "solve_log.json", {**stats, "witness_day": witness.isoformat()})
        return EXIT_INFEASIBLE
    if solution.coefficients is None:
        print(f"solver budget exhausted without a feasible band ({solution.nodes} nodes)", file=sys.stderr)
        _write_json(out / "solve_log.json", stats)
        return EXIT_LIMIT
    coeffs = solution.coefficients
    if solution.zero_forecast_hours:
        log.warning("%d training hours have zero forecast and positive actual",
                    len(solution.zero_forecast_hours))
    _write_json(out / "band.json", {
        "x": coeffs.x.tolist(),
        "theta": coeffs.theta,
        "lambda": coeffs.lam,
        "horizon": coeffs.horizon,
        "provider": name,
        "train_days": [d.isoformat() for d in train_ids],
        "test_days": [d.isoformat() for d in test_ids],
        "provenance": {
            "data_sha256": _sha256(inputs),
            "seed": args.seed,
            "mean_source": args.mean_source,
            "assimilation_window": window,
            "solver": stats,
            "version": __version__,
        },
    })
    rows = []
    for day, regular in zip(train, solution.regular_flags):
        abs_w, rel_w = band_width(day.forecast, coeffs)
        rows.append((day.day_id.isoformat(), int(regular), day_offband(day, coeffs), abs_w, rel_w))
    _write_csv(out / "train_report.csv",
               ["day_id", "regular", "offband_energy", "abs_width", "rel_width"], rows)
    print(f"{solution.status}: objective {solution.objective:.6g}, "
          f"{len(solution.atypical_days)} of {len(train)} training days atypical")
    return EXIT_OK


def _day_set(payload, which):
    if which == "all":
        return None
    key = f"{which}_days"
    return [dt.date.fromisoformat(d) for d in payload.get(key, [])]


def _histogram_payload(values, n_bins):
    hist = histogram(values, n_bins)
    return {
        "bins": [{"lo": b.lo, "hi": b.hi, "count": b.count, "mass_share": b.mass_share} for b in hist.bins],
        "quantiles": {f"{q:g}": v for q, v in hist.quantiles.items()},
    }


def cmd_evaluate(args) -> int:
    coeffs, payload = _load_band(args.band)
    window = None if args.no_assimilation else args.assimilation_window
    dataset = _load_provider_days(args.actuals, [args.provider], coeffs.horizon, window, args.capacity)
    records = dataset.provider(Path(args.provider).stem)
    ids = _day_set(payload, args.days)
    days = records if ids is None else _select(records, ids)
    out = _prepare_out(args.out, args.force)
    report = evaluate_set(days, coeffs, args.theta)
    _write_csv(out / "eval_days.csv",
               ["day_id", "offband_energy", "abs_width", "rel_width", "is_atypical"],
               [(r.day_id.isoformat(), r.offband_energy, r.abs_width, r.abs_width / report.horizon,
                 r.is_atypical) for r in report.per_day])
    summary = report.summary()
    summary["days"] = args.days
    summary["histograms"] = {
        "offband_energy": _histogram_payload([r.offband_energy for r in report.per_day], args.bins),
        "rel_width": _histogram_payload([r.abs_width / report.horizon for r in report.per_day], args.bins),
    }
    _write_json(out / "eval_summary.json", summary)
    bands_dir = out / "bands"
    bands_dir.mkdir()
    for day in days:
        limits = band_limits(day.forecast, coeffs)
        _write_csv(bands_dir / f"bands_{day.day_id.isoformat()}.csv",
                   ["t", "forecast", "actual", "lower", "upper"],
                   zip(range(day.horizon), day.forecast, day.actual, limits.lower, limits.upper))
    print(f"{report.n_days} days: {100 * report.atypical_fraction:.1f}% atypical, "
          f"mean width {report.mean_abs_width:.2f} ({100 * report.mean_rel_width:.1f}%)")
    return EXIT_OK


def cmd_combine(args) -> int:
    coeffs1, payload1 = _load_band(args.band1)
    coeffs2, payload2 = _load_band(args.band2)
    if coeffs1.horizon != coeffs2.horizon:
        raise ValidationError("the two band files have different horizons")
    window = None if args.no_assimilation else args.assimilation_window
    dataset = _load_provider_days(args.actuals, [args.provider1, args.provider2], coeffs1.horizon, window, args.capacity)
    name1, name2 = Path(args.provider1).stem, Path(args.provider2).stem
    ids = _day_set(payload1, args.days)
    ids = dataset.day_ids if ids is None else ids
    days1 = _select(dataset.provider(name1), ids)
    days2 = _select(dataset.provider(name2), ids)
    theta = args.theta if args.theta is not None else coeffs1.theta
    grid = [args.alpha] if args.alpha is not None else args.alpha_grid
    out = _prepare_out(args.out, args.force)
    result = alpha_search(days1, days2, coeffs1, coeffs2, grid, theta, args.budget_atypical)
    _write_csv(out / "alpha_grid.csv", ["alpha", "atypical_fraction", "mean_rel_width"],
               [(p.alpha, p.atypical_fraction, p.mean_rel_width) for p in result.diagnostics])
    summary = {
        "provider1": name1,
        "provider2": name2,
        "theta": theta,
        "budget_atypical": args.budget_atypical,
        "search_days": args.days,
        "n_days": len(days1),
        "grid_points": len(grid),
        "alpha_star": result.alpha_star,
    }
    if result.best is not None:
        summary["search_metrics"] = {
            "atypical_fraction": result.best.atypical_fraction,
            "mean_abs_width": result.best.mean_abs_width,
            "mean_rel_width": result.best.mean_rel_width,
        }
    test_ids = _day_set(payload1, "test")
    if test_ids:
        t1 = _select(dataset.provider(name1), test_ids)
        t2 = _select(dataset.provider(name2), test_ids)
        r1 = evaluate_set(t1, coeffs1, theta)
        r2 = evaluate_set(t2, coeffs2, theta)
        summary["test"] = {"n_days": len(t1), name1: r1.summary(), name2: r2.summary()}
        try:
            summary["test"]["phi"] = phi_correlation(r1.indicators(), r2.indicators())
        except UndefinedCorrelation:
            summary["test"]["phi"] = None
        if result.alpha_star is not None:
            point = evaluate_alpha(t1, t2, coeffs1, coeffs2, result.alpha_star, theta)
            summary["test"]["combined"] = {
                "atypical_fraction": point.atypical_fraction,
                "mean_abs_width": point.mean_abs_width,
                "mean_rel_width": point.mean_rel_width,
            }
    _write_json(out / "combine_summary.json", summary)
    if result.alpha_star is None:
        print(f"no alpha keeps atypical days within {args.budget_atypical:.1%}; diagnostics written",
              file=sys.stderr)
        return EXIT_INFEASIBLE
    rows = []
    for d1, d2 in zip(days1, days2):
        band = combine(d1, coeffs1, d2, coeffs2, result.alpha_star)
        for t in range(d1.horizon):
            rows.append((d1.day_id.isoformat(), t, band.forecast[t], d1.actual[t], band.lower[t], band.upper[t]))
    _write_csv(out / "combined_bands.csv", ["day_id", "t", "forecast", "actual", "lower", "upper"], rows)
    print(f"alpha* = {result.alpha_star:.2f}: {100 * result.best.atypical_fraction:.1f}% atypical, "
          f"relative width {100 * result.best.mean_rel_width:.1f}%")
    return EXIT_OK


def cmd_pareto(args) -> int:
    window = None if args.no_assimilation else args.assimilation_window
    dataset = _load_provider_days(args.actuals, [args.provider, *args.align_with], args.horizon, window, args.capacity)
    name = Path(args.provider).stem
    train_ids, _ = _split(dataset, args)
    train = _select(dataset.provider(name), train_ids)
    grid = args.theta_grid
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise CliError("--theta-grid must be strictly increasing", EXIT_USAGE)
    out = _prepare_out(args.out, args.force)
    template = build_instance(train, train, grid[0], args.lam)
    points = pareto_curve(template, grid, _solver_options(args))
    horizon = template.horizon
    _write_csv(out / "pareto.csv", ["theta", "mean_abs_width", "mean_rel_width", "objective", "status"],
               [(p.theta, p.mean_abs_width, p.mean_abs_width / horizon, p.objective, p.status) for p in points])
    print(f"{len(points)} theta points written to {out / 'pareto.csv'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    window = None if args.no_assimilation else args.assimilation_window
    dataset = _load_provider_days(args.actuals, args.provider, args.horizon, window, args.capacity)
    train_ids, test_ids = _split(dataset, args)
    out = _prepare_out(args.out, args.force)
    options = _solver_options(args)
    names = [Path(p).stem for p in args.provider]
    header = ["provider", "lambda", "pct_atypical", "mean_abs_width", "pct_rel_width", "status"]
    if args.timings:
        header.append("solve_seconds")
    rows, indicators = [], {}
    for name in names:
        train = _select(dataset.provider(name), train_ids)
        test = _select(dataset.provider(name), test_ids)
        base = build_instance(train, train, args.theta, 1.0)
        for lam in args.lambdas:
            solution = solve(replace(base, lam=lam), options)
            if solution.coefficients is None:
                row = [name, lam, float("nan"), float("nan"), float("nan"), solution.status]
            else:
                report = evaluate_set(test, solution.coefficients, args.theta)
                indicators[name, lam] = report.indicators()
                row = [name, lam, 100 * report.atypical_fraction, report.mean_abs_width,
                       100 * report.mean_rel_width, solution.status]
            if args.timings:
                row.append(solution.solve_seconds)
            rows.append(row)
            print(" ".join(_fmt(v) for v in row), flush=True)
    _write_csv(out / "table.csv", header, rows)
    if len(names) == 2:
        indep = []
        for lam in args.lambdas:
            a, b = indicators.get((names[0], lam)), indicators.get((names[1], lam))
            if a is None or b is None:
                continue
            fa, fb = np.array(a.flags), np.array(b.flags)
            try:
                phi = phi_correlation(a, b)
            except UndefinedCorrelation:
                phi = float("nan")
            indep.append((lam, args.theta, 100 * fa.mean(), 100 * fb.mean(), 100 * np.mean(fa * fb), phi))
        _write_csv(out / "independence.csv",
                   ["lambda", "theta", f"pct_{names[0]}", f"pct_{names[1]}", "pct_simultaneous", "phi"], indep)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def _add_solver_flags(p):
    p.add_argument("--tolerance", type=_positive_float, default=1e-6)
    p.add_argument("--node-limit", type=_positive_int, default=10_000)
    p.add_argument("--time-limit", type=_positive_float, default=None,
                   help="seconds; results under a time limit are not reproducible")
    p.add_argument("--x-cap", type=float, default=None, help="upper bound on every relative half-width")


def _add_data_flags(p, horizon=True):
    p.add_argument("--actuals", required=True, help="actual generation CSV (day_id,t,value)")
    if horizon:
        p.add_argument("--horizon", type=_positive_int, default=DEFAULT_HORIZON)
    p.add_argument("--assimilation-window", type=_positive_int, default=DEFAULT_ASSIMILATION_WINDOW)
    p.add_argument("--no-assimilation", action="store_true",
                   help="require forecast[0] == actual[0] in the input instead of assimilating")
    p.add_argument("--capacity", default=None,
                   help="day_id,capacity_mw file; when given all series are read as MW")


def _add_split_flags(p):
    p.add_argument("--train-days", type=_positive_int, default=None, help="default: 120 (or all but one)")
    p.add_argument("--test-days", type=_positive_int, default=None, help="default: every remaining day")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="windbands", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--days", type=_positive_int, default=302)
    p.add_argument("--horizon", type=_positive_int, default=DEFAULT_HORIZON)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="fit band coefficients")
    _add_data_flags(p)
    p.add_argument("--provider", required=True, help="forecast CSV to train on")
    p.add_argument("--align-with", action="append", default=[],
                   help="other provider CSVs whose complete days restrict the day set")
    p.add_argument("--theta", type=_unit_float, required=True)
    p.add_argument("--lambda", dest="lam", type=_unit_float, required=True)
    p.add_argument("--mean-source", choices=["train", "all"], default="train",
                   help="days averaged into the objective weights")
    _add_split_flags(p)
    _add_solver_flags(p)
    p.add_argument("--timings", action="store_true", help="record wall-clock solve time")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a band on held-out days")
    _add_data_flags(p, horizon=False)
    p.add_argument("--band", required=True)
    p.add_argument("--provider", required=True)
    p.add_argument("--days", choices=["test", "train", "all"], default="test")
    p.add_argument("--theta", type=_unit_float, default=None, help="override the atypical threshold")
    p.add_argument("--bins", type=_positive_int, default=10)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("combine", help="search the convex combination weight of two bands")
    _add_data_flags(p, horizon=False)
    p.add_argument("--band1", required=True)
    p.add_argument("--band2", required=True)
    p.add_argument("--provider1", required=True)
    p.add_argument("--provider2", required=True)
    p.add_argument("--alpha", type=_unit_float, default=None)
    p.add_argument("--alpha-grid", type=parse_grid, default=list(DEFAULT_ALPHA_GRID),
                   help="comma list or start:stop:step (default 0:1:0.01)")
    p.add_argument("--theta", type=_unit_float, default=None)
    p.add_argument("--budget-atypical", type=_unit_float, default=DEFAULT_ATYPICAL_BUDGET)
    p.add_argument("--days", choices=["train", "test", "all"], default="train",
                   help="days the search runs on (from band1's split)")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("pareto", help="mean band width against theta")
    _add_data_flags(p)
    p.add_argument("--provider", required=True)
    p.add_argument("--align-with", action="append", default=[])
    p.add_argument("--theta-grid", type=parse_grid, required=True)
    p.add_argument("--lambda", dest="lam", type=_unit_float, default=1.0)
    _add_split_flags(p)
    _add_solver_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("sweep", help="train and evaluate each provider over a lambda list")
    _add_data_flags(p)
    p.add_argument("--provider", action="append", required=True)
    p.add_argument("--theta", type=_unit_float, required=True)
    p.add_argument("--lambdas", type=parse_grid, default=[1.0, 0.95, 0.9, 0.85, 0.8])
    _add_split_flags(p)
    _add_solver_flags(p)
    p.add_argument("--timings", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"windbands: {exc}", file=sys.stderr)
        return exc.code
    except ValidationError as exc:
        print(f"windbands: invalid data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"windbands: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
