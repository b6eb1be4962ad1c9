"""Convex combination of two providers' forecasts and bands.

For a weight ``alpha`` the combined forecast is ``alpha * p1 + (1 - alpha) * p2``.
The combined limits mix the two providers' *untruncated* limits and truncate
once::

    upper = min(1, alpha * (1 + x1) * p1 + (1 - alpha) * (1 + x2) * p2)
    lower = max(0, alpha * (1 - x1) * p1 + (1 - alpha) * (1 - x2) * p2)

so before truncation the combined width is exactly the convex combination of
the providers' widths.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ATOL,
    BandCoefficients,
    DayRecord,
    ValidationError,
    DimensionError,
    offband_energy_from_limits,
)

DEFAULT_ALPHA_GRID = tuple(round(i / 100, 2) for i in range(101))
DEFAULT_ATYPICAL_BUDGET = 0.10


@dataclass(frozen=True)
class CombinedBand:
    day_id: dt.date
    alpha: float
    forecast: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must be in [0, 1], got {alpha}")
    return alpha


def _check_pair(day1: DayRecord, day2: DayRecord, coeffs1, coeffs2) -> None:
    if day1.day_id != day2.day_id:
        raise ValidationError(f"day mismatch: {day1.day_id} vs {day2.day_id}")
    if day1.horizon != day2.horizon:
        raise DimensionError(f"{day1.day_id}: horizons {day1.horizon} and {day2.horizon} differ")
    if not np.array_equal(day1.actual, day2.actual):
        raise ValidationError(f"{day1.day_id}: providers disagree on the actual trajectory")
    for coeffs in (coeffs1, coeffs2):
        if coeffs.horizon != day1.horizon:
            raise DimensionError(
                f"band horizon {coeffs.horizon} does not match data horizon {day1.horizon}"
            )


def combine(day1: DayRecord, coeffs1: BandCoefficients, day2: DayRecord,
            coeffs2: BandCoefficients, alpha: float) -> CombinedBand:
    alpha = _check_alpha(alpha)
    _check_pair(day1, day2, coeffs1, coeffs2)
    p1, p2 = day1.forecast, day2.forecast
    x1, x2 = coeffs1.x, coeffs2.x
    beta = 1.0 - alpha
    # alpha in {0, 1} must reproduce a provider bit for bit, so skip the zero-weight term
    if alpha == 1.0:
        forecast, up, lo = p1, (1 + x1) * p1, (1 - x1) * p1
    elif alpha == 0.0:
        forecast, up, lo = p2, (1 + x2) * p2, (1 - x2) * p2
    else:
        forecast = alpha * p1 + beta * p2
        up = alpha * (1 + x1) * p1 + beta * (1 + x2) * p2
        lo = alpha * (1 - x1) * p1 + beta * (1 - x2) * p2
    return CombinedBand(
        day1.day_id,
        alpha,
        np.asarray(forecast, dtype=float),
        np.maximum(0.0, lo),
        np.minimum(1.0, up),
    )


@dataclass(frozen=True)
class AlphaPoint:
    alpha: float
    atypical_fraction: float
    mean_rel_width: float
    mean_abs_width: float

    def feasible(self, budget: float) -> bool:
        return self.atypical_fraction <= budget + ATOL


@dataclass(frozen=True)
class AlphaSearchResult:
    alpha_star: float | None
    best: AlphaPoint | None
    diagnostics: tuple[AlphaPoint, ...]
    budget: float
    theta: float

    @property
    def feasible(self) -> bool:
        return self.alpha_star is not None


def _check_aligned(days1, days2):
    days1, days2 = list(days1), list(days2)
    if not days1:
        raise ValidationError("alpha search needs at least one aligned day")
    if [d.day_id for d in days1] != [d.day_id for d in days2]:
        raise ValidationError("provider day sets are not aligned")
    return days1, days2


def evaluate_alpha(days1, days2, coeffs1, coeffs2, alpha: float, theta: float) -> AlphaPoint:
    days1, days2 = _check_aligned(days1, days2)
    atypical = 0
    total_width = 0.0
    T = days1[0].horizon
    for d1, d2 in zip(days1, days2):
        band = combine(d1, coeffs1, d2, coeffs2, alpha)
        energy = offband_energy_from_limits(d1.actual, band.lower, band.upper)
        atypical += energy > theta
        total_width += float(band.width.sum())
    n = len(days1)
    mean_abs = total_width / n
    return AlphaPoint(float(alpha), atypical / n, mean_abs / T, mean_abs)


def _rank(point: AlphaPoint):
    # lowest width, then lowest atypical rate, then largest alpha
    return (point.mean_rel_width, point.atypical_fraction, -point.alpha)


def alpha_search(days1, days2, coeffs1: BandCoefficients, coeffs2: BandCoefficients,
                 alpha_grid=DEFAULT_ALPHA_GRID, theta: float | None = None,
                 atypical_budget: float = DEFAULT_ATYPICAL_BUDGET) -> AlphaSearchResult:
    """Grid search for the narrowest combined band within an atypical-day budget.

    ``theta`` defaults to the first provider's training theta. When no grid
    point meets the budget the result has ``alpha_star=None`` and still
    carries every diagnostic.
    """
    grid = [_check_alpha(a) for a in alpha_grid]
    if not grid:
        raise ValidationError("empty alpha grid")
    if theta is None:
        theta = coeffs1.theta
    days1, days2 = _check_aligned(days1, days2)
    points = tuple(evaluate_alpha(days1, days2, coeffs1, coeffs2, a, theta) for a in grid)
    feasible = [p for p in points if p.feasible(atypical_budget)]
    best = min(feasible, key=_rank) if feasible else None
    return AlphaSearchResult(
        alpha_star=best.alpha if best else None,
        best=best,
        diagnostics=points,
        budget=atypical_budget,
        theta=float(theta),
    )


def convex_width_bound(rel_width1: float, rel_width2: float, alpha: float) -> float:
    """Pre-truncation estimate of the combined relative width."""
    alpha = _check_alpha(alpha)
    return alpha * rel_width1 + (1 - alpha) * rel_width2


def min_alpha_for_width(rel_width1: float, rel_width2: float, target: float) -> float | None:
    """Smallest alpha whose convex width estimate meets ``target`` (None if none does)."""
    if rel_width1 == rel_width2:
        return 0.0 if rel_width1 <= target else None
    alpha = (target - rel_width2) / (rel_width1 - rel_width2)
    if rel_width1 < rel_width2:
        return min(1.0, max(0.0, alpha)) if rel_width1 <= target else None
    return 0.0 if rel_width2 <= target else None
