"""Seeded synthetic actuals and provider forecasts.

Actual PLF follows a clamped mean-reverting recursion::

    w_{t+1} = clip(w_t + reversion * (mean_level - w_t) + noise_scale * eps_t, 0, 1)

A provider forecast is ``clip(w_t + bias + e_t, floor, 1)`` where ``e`` is an
AR(1) error path started at zero. The small positive ``floor`` keeps relative
bands able to cover every hour; a forecast of exactly zero has a zero-width
band whatever ``x`` is. On an atypical day the error scale is multiplied
by ``atypical_multiplier``. Providers draw from independent streams, so they
share nothing but the actuals.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DayRecord, ValidationError
from .ingestion import DEFAULT_ASSIMILATION_WINDOW, assimilate, write_series


@dataclass(frozen=True)
class ProviderParams:
    name: str
    bias: float = 0.0
    error_scale: float = 0.08
    autocorrelation: float = 0.9
    p_atypical: float = 0.1
    atypical_multiplier: float = 4.0
    seed_offset: int = 1
    floor: float = 0.01

    def __post_init__(self):
        if self.error_scale < 0:
            raise ValidationError("error_scale must be >= 0")
        if not 0.0 <= self.p_atypical <= 1.0:
            raise ValidationError("p_atypical must be in [0, 1]")
        if not -1.0 < self.autocorrelation < 1.0:
            raise ValidationError("autocorrelation must be in (-1, 1)")
        if self.atypical_multiplier < 0:
            raise ValidationError("atypical_multiplier must be >= 0")
        if not 0.0 <= self.floor < 1.0:
            raise ValidationError("floor must be in [0, 1)")


DEFAULT_PROVIDERS = (
    ProviderParams("meteo", error_scale=0.07, seed_offset=1),
    ProviderParams("gh", error_scale=0.10, seed_offset=2),
)


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    n_days: int = 302
    horizon: int = 72
    mean_level: float = 0.35
    reversion: float = 0.08
    noise_scale: float = 0.05
    start_date: dt.date = dt.date(2016, 4, 5)
    providers: tuple[ProviderParams, ...] = field(default=DEFAULT_PROVIDERS)
    assimilation_window: int | None = DEFAULT_ASSIMILATION_WINDOW

    def __post_init__(self):
        if self.n_days < 1:
            raise ValidationError("n_days must be >= 1")
        if self.horizon < 2:
            raise ValidationError("horizon must be >= 2")
        if not 0.0 <= self.mean_level <= 1.0:
            raise ValidationError("mean_level must be in [0, 1]")
        if not 0.0 <= self.reversion <= 1.0:
            raise ValidationError("reversion must be in [0, 1]")
        if self.noise_scale < 0:
            raise ValidationError("noise_scale must be >= 0")
        names = [p.name for p in self.providers]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate provider names: {names}")

    @property
    def day_ids(self) -> list[dt.date]:
        return [self.start_date + dt.timedelta(days=i) for i in range(self.n_days)]


def _day_rngs(seed: int, stream: int, n_days: int) -> list[np.random.Generator]:
    root = np.random.SeedSequence([seed & (2**64 - 1), stream])
    return [np.random.default_rng(child) for child in root.spawn(n_days)]


def generate_actuals(config: GenConfig) -> np.ndarray:
    """Actual PLF trajectories, shape ``(n_days, horizon)``."""
    T = config.horizon
    mu, k, s = config.mean_level, config.reversion, config.noise_scale
    stationary = s / np.sqrt(max(1.0 - (1.0 - k) ** 2, 1e-12))
    out = np.empty((config.n_days, T))
    for d, rng in enumerate(_day_rngs(config.seed, 0, config.n_days)):
        eps = rng.standard_normal(T)
        w = np.clip(mu + stationary * eps[0], 0.0, 1.0)
        out[d, 0] = w
        for t in range(1, T):
            w = np.clip(w + k * (mu - w) + s * eps[t], 0.0, 1.0)
            out[d, t] = w
    return out


def generate_provider(actuals: np.ndarray, params: ProviderParams, seed: int,
                      assimilation_window: int | None = DEFAULT_ASSIMILATION_WINDOW):
    """Forecasts for every actual trajectory plus the injected atypical flags."""
    actuals = np.asarray(actuals, dtype=float)
    n, T = actuals.shape
    rho = params.autocorrelation
    innovation = np.sqrt(1.0 - rho**2)
    forecasts = np.empty_like(actuals)
    atypical = np.zeros(n, dtype=bool)
    for d, rng in enumerate(_day_rngs(seed, params.seed_offset, n)):
        atypical[d] = rng.random() < params.p_atypical
        scale = params.error_scale * (params.atypical_multiplier if atypical[d] else 1.0)
        eps = rng.standard_normal(T)
        e = np.empty(T)
        e[0] = 0.0
        for t in range(1, T):
            e[t] = rho * e[t - 1] + scale * innovation * eps[t]
        p = np.clip(actuals[d] + params.bias + e, params.floor, 1.0)
        if assimilation_window is not None and T > assimilation_window:
            p = assimilate(p, actuals[d, 0], assimilation_window)
        elif assimilation_window is not None:
            p[0] = actuals[d, 0]
        forecasts[d] = p
    return forecasts, atypical


@dataclass
class SyntheticDataset:
    config: GenConfig
    actuals: np.ndarray
    forecasts: dict[str, np.ndarray]
    atypical: dict[str, np.ndarray]

    def records(self, provider: str) -> list[DayRecord]:
        check = self.config.assimilation_window is not None
        return [
            DayRecord(day, p, w, check_start=check)
            for day, p, w in zip(self.config.day_ids, self.forecasts[provider], self.actuals)
        ]

    def write(self, directory) -> list:
        """Write ``actuals.csv``, ``<provider>.csv`` and ``atypical_<provider>.csv``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        days = self.config.day_ids
        written = []

        def rows(matrix):
            for day, vec in zip(days, matrix):
                for t, value in enumerate(vec):
                    yield day, t, float(value)

        path = directory / "actuals.csv"
        write_series(path, rows(self.actuals))
        written.append(path)
        for name, matrix in self.forecasts.items():
            path = directory / f"{name}.csv"
            write_series(path, rows(matrix))
            written.append(path)
            path = directory / f"atypical_{name}.csv"
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["day_id", "injected_atypical"])
                for day, flag in zip(days, self.atypical[name]):
                    writer.writerow([day.isoformat(), int(flag)])
            written.append(path)
        return written


def generate(config: GenConfig) -> SyntheticDataset:
    actuals = generate_actuals(config)
    forecasts, atypical = {}, {}
    for params in config.providers:
        forecasts[params.name], atypical[params.name] = generate_provider(
            actuals, params, config.seed, config.assimilation_window
        )
    return SyntheticDataset(config, actuals, forecasts, atypical)
