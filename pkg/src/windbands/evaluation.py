"""Out-of-sample band assessment."""

from __future__ import annotations

import datetime as dt
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    BandCoefficients,
    ValidationError,
    band_limits,
    band_width,
    check_horizons,
    offband_energy,
)
from .optimizer import BandProblem, SolverOptions, solve

log = logging.getLogger(__name__)

NARRATIVE_QUANTILES = (0.5, 0.66, 0.75)


@dataclass(frozen=True)
class DayResult:
    day_id: dt.date
    offband_energy: float
    abs_width: float
    is_atypical: bool


@dataclass(frozen=True)
class EvalReport:
    theta: float
    lam: float
    n_days: int
    horizon: int
    atypical_fraction: float
    mean_abs_width: float
    mean_rel_width: float
    per_day: tuple[DayResult, ...]

    def indicators(self) -> AtypicalIndicators:
        return AtypicalIndicators(
            [r.day_id for r in self.per_day], [int(r.is_atypical) for r in self.per_day]
        )

    def summary(self) -> dict:
        return {
            "theta": self.theta,
            "lambda": self.lam,
            "n_days": self.n_days,
            "horizon": self.horizon,
            "atypical_fraction": self.atypical_fraction,
            "mean_abs_width": self.mean_abs_width,
            "mean_rel_width": self.mean_rel_width,
        }


def evaluate_set(days, coeffs: BandCoefficients, theta: float | None = None) -> EvalReport:
    """Classify and measure every day against the band defined by ``coeffs``.

    A day is atypical when its off-band energy is strictly above ``theta``
    (the training theta when not given).
    """
    days = list(days)
    if not days:
        raise ValidationError("cannot evaluate an empty day set")
    horizon = check_horizons(days, coeffs.horizon)
    threshold = coeffs.theta if theta is None else float(theta)
    if not 0.0 <= threshold <= 1.0:
        raise ValidationError(f"theta must be in [0, 1], got {threshold}")
    per_day = []
    for day in days:
        energy = offband_energy(day, band_limits(day.forecast, coeffs))
        width, _ = band_width(day.forecast, coeffs)
        per_day.append(DayResult(day.day_id, energy, width, energy > threshold))
    n = len(per_day)
    mean_abs = sum(r.abs_width for r in per_day) / n
    return EvalReport(
        theta=threshold,
        lam=coeffs.lam,
        n_days=n,
        horizon=horizon,
        atypical_fraction=sum(r.is_atypical for r in per_day) / n,
        mean_abs_width=mean_abs,
        mean_rel_width=mean_abs / horizon,
        per_day=tuple(per_day),
    )


@dataclass(frozen=True)
class AtypicalIndicators:
    """Per-day binary indicator, 1 for atypical."""

    day_ids: list
    flags: list[int]

    def __post_init__(self):
        if len(self.day_ids) != len(self.flags):
            raise ValidationError("day_ids and flags differ in length")
        if any(f not in (0, 1) for f in self.flags):
            raise ValidationError("flags must be 0 or 1")


class UndefinedCorrelation(ValidationError):
    pass


def phi_from_rates(p1: float, p2: float, p11: float) -> float:
    """Phi coefficient from two marginal rates and the joint rate."""
    denom = p1 * (1 - p1) * p2 * (1 - p2)
    if denom <= 0:
        raise UndefinedCorrelation("phi is undefined when an indicator is constant")
    return (p11 - p1 * p2) / math.sqrt(denom)


def phi_correlation(a: AtypicalIndicators, b: AtypicalIndicators) -> float:
    """Pearson correlation of two aligned binary indicators."""
    if list(a.day_ids) != list(b.day_ids):
        raise ValidationError("indicators must cover the same days in the same order")
    n = len(a.flags)
    if n < 2:
        raise ValidationError("need at least two days")
    fa = np.asarray(a.flags, dtype=float)
    fb = np.asarray(b.flags, dtype=float)
    return phi_from_rates(fa.mean(), fb.mean(), float(np.mean(fa * fb)))


@dataclass(frozen=True)
class Bin:
    lo: float
    hi: float
    count: int
    mass_share: float


@dataclass(frozen=True)
class Histogram:
    bins: tuple[Bin, ...]
    quantiles: dict[float, float]


def nearest_rank_quantile(sorted_values, q: float) -> float:
    n = len(sorted_values)
    rank = max(1, math.ceil(q * n))
    return float(sorted_values[rank - 1])


def histogram(values, n_bins: int = 10, quantiles=NARRATIVE_QUANTILES) -> Histogram:
    """Equal-width histogram over ``[min, max]`` with count and value-mass shares.

    The last bin is closed on the right. When all values coincide a single
    occupied bin is returned.
    """
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValidationError("histogram of an empty sample")
    if n_bins < 1:
        raise ValidationError("n_bins must be >= 1")
    lo, hi = float(arr.min()), float(arr.max())
    total = float(arr.sum())
    if hi == lo:
        bins = (Bin(lo, hi, int(arr.size), 1.0),)
    else:
        edges = np.linspace(lo, hi, n_bins + 1)
        idx = np.minimum(((arr - lo) / (hi - lo) * n_bins).astype(int), n_bins - 1)
        bins = []
        for i in range(n_bins):
            members = arr[idx == i]
            mass = float(members.sum()) / total if total > 0 else members.size / arr.size
            bins.append(Bin(float(edges[i]), float(edges[i + 1]), int(members.size), mass))
        bins = tuple(bins)
    ordered = np.sort(arr)
    return Histogram(bins, {q: nearest_rank_quantile(ordered, q) for q in quantiles})


@dataclass(frozen=True)
class CurvePoint:
    theta: float
    mean_abs_width: float
    status: str
    objective: float


def pareto_curve(template: BandProblem, theta_grid, options: SolverOptions | None = None) -> list[CurvePoint]:
    """Mean training-set band width for each theta on a strictly increasing grid.

    Every point reuses the template's days, mean profile and lambda. A point
    whose solve fails keeps ``nan`` width and its status; the curve goes on.
    """
    grid = [float(t) for t in theta_grid]
    if not grid:
        raise ValidationError("empty theta grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("theta grid must be strictly increasing")
    points = []
    for theta in grid:
        problem = replace(template, theta=theta)
        solution = solve(problem, options)
        if solution.coefficients is None:
            log.warning("theta=%g: solver returned %s", theta, solution.status)
            points.append(CurvePoint(theta, math.nan, solution.status, math.nan))
            continue
        widths = [band_width(d.forecast, solution.coefficients)[0] for d in template.days]
        points.append(CurvePoint(theta, float(np.mean(widths)), solution.status, solution.objective))
    return points
