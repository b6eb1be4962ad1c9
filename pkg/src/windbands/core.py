"""Domain types and closed-form band arithmetic.

All power quantities are plant load factors (PLF): generated power divided by
installed capacity, so every forecast and actual sample lies in ``[0, 1]``.
A band is defined by per-hour relative half-widths ``x`` applied to a point
forecast ``p``::

    lower_t = max(0, (1 - x_t) * p_t)
    upper_t = min(1, (1 + x_t) * p_t)
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

ATOL = 1e-9
DEFAULT_HORIZON = 72


class ValidationError(ValueError):
    """Input data or parameters violate a documented precondition."""


class DimensionError(ValidationError):
    """Vectors that must share a horizon have different lengths."""


def _as_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _check_unit_interval(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    if arr.size and (arr.min() < -ATOL or arr.max() > 1 + ATOL):
        raise ValidationError(
            f"{name} must lie in [0, 1], got range [{arr.min():.6g}, {arr.max():.6g}]"
        )


def _check_same_length(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{what}: lengths {a.shape[0]} and {b.shape[0]} differ")


def _parse_day(day_id) -> dt.date:
    if isinstance(day_id, dt.datetime):
        return day_id.date()
    if isinstance(day_id, dt.date):
        return day_id
    return dt.date.fromisoformat(str(day_id))


@dataclass(frozen=True)
class DayRecord:
    """One issued forecast and the realized trajectory over the horizon.

    ``check_start`` asserts the assimilation condition ``forecast[0] ==
    actual[0]``. Ingestion enforces it; raw provider data can be held with
    ``check_start=False`` until assimilated.
    """

    day_id: dt.date
    forecast: np.ndarray
    actual: np.ndarray
    check_start: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "day_id", _parse_day(self.day_id))
        forecast = _as_vector(self.forecast, "forecast")
        actual = _as_vector(self.actual, "actual")
        _check_same_length(forecast, actual, f"day {self.day_id}")
        if forecast.size < 2:
            raise DimensionError(f"day {self.day_id}: horizon must be >= 2")
        _check_unit_interval(forecast, f"forecast of {self.day_id}")
        _check_unit_interval(actual, f"actual of {self.day_id}")
        if self.check_start and abs(forecast[0] - actual[0]) > ATOL:
            raise ValidationError(
                f"day {self.day_id}: forecast[0]={forecast[0]:.6g} differs from "
                f"actual[0]={actual[0]:.6g}; assimilate the forecast first"
            )
        object.__setattr__(self, "forecast", forecast)
        object.__setattr__(self, "actual", actual)

    @property
    def horizon(self) -> int:
        return int(self.forecast.size)

    @property
    def abs_error(self) -> np.ndarray:
        return np.abs(self.actual - self.forecast)


@dataclass(frozen=True)
class BandCoefficients:
    """Relative half-widths ``x`` plus the (theta, lambda) they were trained at."""

    x: np.ndarray
    theta: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        x = _as_vector(self.x, "x")
        if not np.all(np.isfinite(x)):
            raise ValidationError("band coefficients must be finite")
        if x.size and x.min() < -ATOL:
            raise ValidationError(f"band coefficients must be >= 0, got min {x.min():.6g}")
        x = np.clip(x, 0.0, None)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        for name in ("theta", "lam"):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {value}")
            object.__setattr__(self, name, value)

    @property
    def horizon(self) -> int:
        return int(self.x.size)

    @classmethod
    def zeros(cls, horizon: int, theta: float = 0.0, lam: float = 1.0) -> BandCoefficients:
        return cls(np.zeros(horizon), theta, lam)


@dataclass(frozen=True)
class MeanProfile:
    """Hourly mean actual PLF over a historical day set; the objective weights."""

    w_bar: np.ndarray

    def __post_init__(self):
        w_bar = _as_vector(self.w_bar, "w_bar")
        _check_unit_interval(w_bar, "mean profile")
        object.__setattr__(self, "w_bar", w_bar)

    @property
    def horizon(self) -> int:
        return int(self.w_bar.size)

    @classmethod
    def from_days(cls, days) -> MeanProfile:
        days = list(days)
        if not days:
            raise ValidationError("mean profile needs at least one day")
        horizons = {d.horizon for d in days}
        if len(horizons) != 1:
            raise DimensionError(f"mixed horizons in mean source: {sorted(horizons)}")
        return cls(np.mean([d.actual for d in days], axis=0))


@dataclass(frozen=True)
class BandLimits:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = _as_vector(self.lower, "lower")
        upper = _as_vector(self.upper, "upper")
        _check_same_length(lower, upper, "band limits")
        _check_unit_interval(lower, "lower limit")
        _check_unit_interval(upper, "upper limit")
        if np.any(lower > upper + ATOL):
            raise ValidationError("lower limit exceeds upper limit")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower


def _coeff_vector(coeffs) -> np.ndarray:
    if isinstance(coeffs, BandCoefficients):
        return coeffs.x
    return np.asarray(coeffs, dtype=float)


def band_limits(forecast, coeffs) -> BandLimits:
    """Truncated band limits around ``forecast``.

    >>> lim = band_limits([0.5, 0.8], [0.4, 0.5])
    >>> lim.lower.round(12).tolist(), lim.upper.round(12).tolist()
    ([0.3, 0.4], [0.7, 1.0])
    """
    p = np.asarray(forecast, dtype=float)
    x = _coeff_vector(coeffs)
    _check_same_length(p, x, "forecast vs band coefficients")
    lower = np.maximum(0.0, (1.0 - x) * p)
    upper = np.minimum(1.0, (1.0 + x) * p)
    return BandLimits(lower, upper)


def offband_energy_from_limits(actual, lower, upper) -> float:
    """Time-normalized energy of ``actual`` falling outside ``[lower, upper]``."""
    w = np.asarray(actual, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    _check_same_length(w, lower, "actual vs band")
    _check_same_length(w, upper, "actual vs band")
    above = np.maximum(w - upper, 0.0)
    below = np.maximum(lower - w, 0.0)
    return float(np.sum(above + below) / w.size)


def offband_energy(day: DayRecord, limits: BandLimits) -> float:
    """Anti-reliability ``1 - R`` of a band for one day, in ``[0, 1]``."""
    return offband_energy_from_limits(day.actual, limits.lower, limits.upper)


def band_width(forecast, coeffs) -> tuple[float, float]:
    """Absolute band area (PLF-hours) and the same area divided by the horizon."""
    limits = band_limits(forecast, coeffs)
    absolute = float(np.sum(limits.width))
    return absolute, absolute / limits.lower.size


def day_offband(day: DayRecord, coeffs) -> float:
    return offband_energy(day, band_limits(day.forecast, coeffs))


def check_horizons(days, horizon: int | None = None) -> int:
    """Return the common horizon of ``days``; raise if they disagree."""
    horizons = sorted({d.horizon for d in days})
    if not horizons:
        raise ValidationError("empty day set")
    if len(horizons) > 1:
        raise DimensionError(f"mixed horizons: {horizons}")
    if horizon is not None and horizons[0] != horizon:
        raise DimensionError(f"data horizon {horizons[0]} does not match band horizon {horizon}")
    return horizons[0]
