"""CSV ingestion, PLF normalization, assimilation, alignment and splitting.

File format (UTF-8, comma separated, decimal point)::

    day_id,t,value
    2016-04-05,0,0.31
    2016-04-05,1,0.29

``day_id`` is an ISO-8601 date, ``t`` the integer hour ahead and ``value``
either a PLF in ``[0, 1]`` or a power in MW. MW files need a capacity file::

    day_id,capacity_mw
    2016-04-05,1400
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DEFAULT_HORIZON, ATOL, DayRecord, ValidationError

log = logging.getLogger(__name__)

SERIES_HEADER = ["day_id", "t", "value"]
CAPACITY_HEADER = ["day_id", "capacity_mw"]
DEFAULT_ASSIMILATION_WINDOW = 6
UNITS = ("plf", "mw")


class ParseError(ValidationError):
    """A CSV file could not be read; ``problems`` lists ``(line, message)``."""

    def __init__(self, path, problems):
        self.path = str(path)
        self.problems = list(problems)
        shown = "; ".join(f"line {line}: {msg}" for line, msg in self.problems[:10])
        more = f" (+{len(self.problems) - 10} more)" if len(self.problems) > 10 else ""
        super().__init__(f"{self.path}: {shown}{more}")


@dataclass
class RawSeries:
    """Validated rows of one provider or actuals file."""

    values: dict[dt.date, dict[int, float]]
    horizon: int = DEFAULT_HORIZON
    units: str = "plf"
    capacity: dict[dt.date, float] | None = None
    name: str = ""

    @property
    def n_rows(self) -> int:
        return sum(len(hours) for hours in self.values.values())

    def complete_days(self) -> list[dt.date]:
        return sorted(d for d, hours in self.values.items() if len(hours) == self.horizon)

    def vector(self, day: dt.date) -> np.ndarray:
        hours = self.values[day]
        return np.array([hours[t] for t in range(self.horizon)])


def _read_rows(path, header):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None:
            raise ParseError(path, [(1, "empty file")])
        if [h.strip() for h in first] != header:
            raise ParseError(path, [(1, f"unknown header {first!r}, expected {header!r}")])
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            yield lineno, row


def parse_csv(path, horizon: int = DEFAULT_HORIZON, units: str = "plf", name: str | None = None) -> RawSeries:
    """Read a ``day_id,t,value`` file, collecting every malformed line before raising."""
    if units not in UNITS:
        raise ValidationError(f"units must be one of {UNITS}, got {units!r}")
    values: dict[dt.date, dict[int, float]] = {}
    problems = []
    for lineno, row in _read_rows(path, SERIES_HEADER):
        if len(row) != 3:
            problems.append((lineno, f"expected 3 fields, got {len(row)}"))
            continue
        try:
            day = dt.date.fromisoformat(row[0].strip())
        except ValueError:
            problems.append((lineno, f"bad date {row[0]!r}"))
            continue
        try:
            t = int(row[1])
        except ValueError:
            problems.append((lineno, f"non-integer hour {row[1]!r}"))
            continue
        try:
            value = float(row[2])
        except ValueError:
            problems.append((lineno, f"non-numeric value {row[2]!r}"))
            continue
        if not 0 <= t < horizon:
            problems.append((lineno, f"hour {t} outside [0, {horizon - 1}]"))
            continue
        if not np.isfinite(value) or value < 0:
            problems.append((lineno, f"value {row[2]!r} must be a finite non-negative number"))
            continue
        if units == "plf" and value > 1 + ATOL:
            problems.append((lineno, f"PLF value {value} outside [0, 1]"))
            continue
        hours = values.setdefault(day, {})
        if t in hours:
            problems.append((lineno, f"duplicate (day_id, t) = ({day}, {t})"))
            continue
        hours[t] = min(value, 1.0) if units == "plf" else value
    if problems:
        raise ParseError(path, problems)
    return RawSeries(values, horizon, units, name=name if name is not None else Path(path).stem)


def parse_capacity(path) -> dict[dt.date, float]:
    capacity = {}
    problems = []
    for lineno, row in _read_rows(path, CAPACITY_HEADER):
        try:
            day = dt.date.fromisoformat(row[0].strip())
            value = float(row[1])
        except (ValueError, IndexError):
            problems.append((lineno, f"malformed row {row!r}"))
            continue
        if not value > 0:
            problems.append((lineno, f"capacity must be positive, got {value}"))
            continue
        if day in capacity:
            problems.append((lineno, f"duplicate day {day}"))
            continue
        capacity[day] = value
    if problems:
        raise ParseError(path, problems)
    return capacity


def normalize_plf(raw: RawSeries, capacity: dict[dt.date, float] | None = None) -> RawSeries:
    """Divide MW values by the day's installed capacity; PLF input passes through."""
    if raw.units == "plf":
        return raw
    capacity = capacity if capacity is not None else raw.capacity
    if capacity is None:
        raise ValidationError(f"{raw.name}: values are in MW but no capacity was given")
    out = {}
    for day, hours in raw.values.items():
        if day not in capacity:
            raise ValidationError(f"{raw.name}: missing capacity for {day}")
        cap = capacity[day]
        for t, value in hours.items():
            if value > cap * (1 + ATOL):
                raise ValidationError(f"{raw.name}: {value} MW exceeds capacity {cap} MW on {day}, hour {t}")
        out[day] = {t: min(value / cap, 1.0) for t, value in hours.items()}
    return RawSeries(out, raw.horizon, "plf", capacity, raw.name)


def assimilate(forecast, actual_start: float, window: int = DEFAULT_ASSIMILATION_WINDOW) -> np.ndarray:
    """Shift the first ``window`` hours toward the measured starting state.

    The correction ``actual_start - forecast[0]`` is applied in full at t=0 and
    decays linearly to zero at t=window; later hours are untouched.
    """
    p = np.asarray(forecast, dtype=float)
    if window < 1:
        raise ValidationError("assimilation window must be >= 1")
    if p.size <= window:
        raise ValidationError(f"forecast length {p.size} must exceed the window {window}")
    if not 0.0 <= actual_start <= 1.0:
        raise ValidationError(f"starting PLF {actual_start} outside [0, 1]")
    t = np.arange(p.size)
    weight = np.maximum(0.0, (window - t) / window)
    out = np.clip(p + (actual_start - p[0]) * weight, 0.0, 1.0)
    out[0] = actual_start
    return out


@dataclass
class AlignedDataset:
    providers: dict[str, list[DayRecord]]
    day_ids: list[dt.date]
    dropped: dict[str, Counter] = field(default_factory=dict)

    def provider(self, name: str) -> list[DayRecord]:
        return self.providers[name]

    @property
    def names(self) -> list[str]:
        return list(self.providers)


def align(providers, actuals: RawSeries, window: int | None = DEFAULT_ASSIMILATION_WINDOW) -> AlignedDataset:
    """Keep the days complete in the actuals and in every provider.

    ``providers`` maps names to PLF ``RawSeries`` (a list of series is keyed
    by each series' ``name``). Forecasts are assimilated to the day's first
    actual unless ``window`` is None, in which case they must already match.
    """
    if not isinstance(providers, dict):
        providers = {series.name: series for series in providers}
    if not providers:
        raise ValidationError("align needs at least one provider")
    for series in [*providers.values(), actuals]:
        if series.units != "plf":
            raise ValidationError(f"{series.name}: normalize to PLF before aligning")
    horizons = {s.horizon for s in providers.values()} | {actuals.horizon}
    if len(horizons) != 1:
        raise ValidationError(f"mixed horizons across inputs: {sorted(horizons)}")

    all_days = set(actuals.values)
    for series in providers.values():
        all_days |= set(series.values)
    complete_actual = set(actuals.complete_days())
    complete = {name: set(s.complete_days()) for name, s in providers.items()}

    dropped = {"actuals": Counter()}
    dropped.update({name: Counter() for name in providers})
    kept = []
    for day in sorted(all_days):
        ok = True
        if day not in complete_actual:
            cause = "missing" if day not in actuals.values else "incomplete"
            dropped["actuals"][cause] += 1
            ok = False
        for name, series in providers.items():
            if day not in complete[name]:
                cause = "missing" if day not in series.values else "incomplete"
                dropped[name][cause] += 1
                log.info("dropping %s: %s forecast %s", day, name, cause)
                ok = False
        if ok:
            kept.append(day)
    if not kept:
        counts = {name: len(days) for name, days in complete.items()}
        raise ValidationError(
            f"no day is complete in every input; complete days per provider {counts}, "
            f"actuals {len(complete_actual)} (horizon {actuals.horizon})"
        )

    records = {name: [] for name in sorted(providers)}
    for day in kept:
        w = actuals.vector(day)
        for name in records:
            p = providers[name].vector(day)
            if window is not None:
                p = assimilate(p, w[0], window)
            records[name].append(DayRecord(day, p, w))
    return AlignedDataset(records, kept, dropped)


def splitmix64(seed: int):
    """Infinite stream of 64-bit outputs from the splitmix64 generator."""
    mask = (1 << 64) - 1
    state = seed & mask
    while True:
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        yield z ^ (z >> 31)


def _below(stream, bound: int) -> int:
    # rejection sampling keeps the draw unbiased
    limit = (1 << 64) - ((1 << 64) % bound)
    while True:
        value = next(stream)
        if value < limit:
            return value % bound


def seeded_permutation(n: int, seed: int) -> list[int]:
    """Fisher-Yates shuffle of range(n) driven by splitmix64."""
    order = list(range(n))
    stream = splitmix64(seed)
    for i in range(n - 1, 0, -1):
        j = _below(stream, i + 1)
        order[i], order[j] = order[j], order[i]
    return order


def split_train_test(days, train: int | float, seed: int, test: int | None = None):
    """Seeded random split into disjoint train and test lists.

    ``train`` is a day count or, if a float in (0, 1), a fraction (floored).
    The test set is every remaining day, or the first ``test`` of them in the
    shuffled order. Both lists are returned in their original order.
    """
    days = list(days)
    n = len(days)
    if isinstance(train, float) and 0 < train < 1:
        n_train = int(np.floor(train * n))
    else:
        n_train = int(train)
    if n_train < 1 or n_train >= n:
        raise ValidationError(f"train size {n_train} must be in [1, {n - 1}] for {n} days")
    order = seeded_permutation(n, seed)
    train_idx = sorted(order[:n_train])
    rest = order[n_train:]
    if test is not None:
        if test < 1 or test > len(rest):
            raise ValidationError(f"test size {test} must be in [1, {len(rest)}]")
        rest = rest[:test]
    test_idx = sorted(rest)
    return [days[i] for i in train_idx], [days[i] for i in test_idx]


def write_series(path, rows) -> None:
    """Write ``(day_id, t, value)`` rows in the ingestion format."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SERIES_HEADER)
        for day, t, value in rows:
            writer.writerow([day.isoformat(), t, f"{value:.6f}"])


def write_days(path, days, attr: str) -> None:
    write_series(path, ((d.day_id, t, v) for d in days for t, v in enumerate(getattr(d, attr))))
