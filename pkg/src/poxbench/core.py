"""Core domain types: weekly series, the county dataset, and elementary ops.

Everything here is immutable after construction and safe to share across
worker processes.
"""

from __future__ import annotations

import datetime as dt
import unicodedata
from dataclasses import dataclass, field

import numpy as np

WEEK = dt.timedelta(days=7)

#: The 20 county labels of the Hungarian dataset, canonical upper-case form.
COUNTIES = (
    "BUDAPEST", "PEST", "BORSOD", "HAJDU", "GYOR", "JASZ", "VESZPREM",
    "BACS", "BARANYA", "FEJER", "CSONGRAD", "SZABOLCS", "HEVES", "BEKES",
    "SOMOGY", "KOMAROM", "VAS", "NOGRAD", "TOLNA", "ZALA",
)

COUNTRY = "COUNTRY"


class DataError(ValueError):
    """Raised for any invalid input data (malformed file, broken invariant)."""


def canonical_county(name: str) -> str:
    """Canonicalize a county label: strip accents, upper-case ASCII."""
    stripped = unicodedata.normalize("NFKD", name).encode("ascii", "ignore")
    return stripped.decode("ascii").strip().upper()


def next_week(d: dt.date) -> dt.date:
    return d + WEEK


def week_range(start: dt.date, n: int) -> tuple[dt.date, ...]:
    """n consecutive week dates starting at `start` (7-day spacing)."""
    return tuple(start + WEEK * i for i in range(n))


def check_weekly_spacing(dates: tuple[dt.date, ...]) -> None:
    for i in range(1, len(dates)):
        gap = (dates[i] - dates[i - 1]).days
        if gap != 7:
            raise DataError(
                f"dates must advance by exactly 7 days; got {gap} days "
                f"between {dates[i - 1]} and {dates[i]} (position {i})"
            )


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One weekly univariate series: a date index and aligned float values.

    Values are 64-bit reals whether they hold raw counts or normalized
    units; integer-ness of raw counts is checked at ingest, not here.
    """

    id: str
    dates: tuple[dt.date, ...]
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != len(vals):
            raise DataError(
                f"series {self.id!r}: {len(self.dates)} dates but {len(vals)} values"
            )
        if len(self.dates) == 0:
            raise DataError(f"series {self.id!r}: empty series")
        check_weekly_spacing(self.dates)
        if not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise DataError(f"series {self.id!r}: non-finite value at index {bad}")

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def start(self) -> dt.date:
        return self.dates[0]

    @property
    def end(self) -> dt.date:
        return self.dates[-1]

    def with_values(self, values, id: str | None = None) -> "TimeSeries":
        """Same date index, new values (and optionally a new label)."""
        return TimeSeries(self.id if id is None else id, self.dates, values)


@dataclass(frozen=True, eq=False)
class Dataset:
    """County series sharing one weekly date index.

    The reference artifact carries exactly the 20 canonical counties; that is
    enforced where the data enters the system (see ingest), so toy datasets
    with fewer counties remain constructible for tests and small runs.
    """

    counties: dict[str, TimeSeries]
    dates: tuple[dt.date, ...] = field(init=False)

    def __post_init__(self):
        if not self.counties:
            raise DataError("dataset has no counties")
        names = list(self.counties)
        for name in names:
            if canonical_county(name) != name:
                raise DataError(f"county name {name!r} is not canonical")
        index = self.counties[names[0]].dates
        for name, series in self.counties.items():
            if series.dates != index:
                raise DataError(f"county {name!r} has a mismatching date index")
        object.__setattr__(self, "dates", index)

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def county_names(self) -> tuple[str, ...]:
        return tuple(self.counties)

    def has_canonical_counties(self) -> bool:
        return set(self.counties) == set(COUNTIES)


@dataclass(frozen=True)
class Horizon:
    """Number of future weeks to forecast."""

    h: int = 1

    def __post_init__(self):
        if self.h < 1:
            raise ValueError(f"horizon must be >= 1, got {self.h}")


def aggregate_country(dataset: Dataset) -> TimeSeries:
    """Sum all county series into one country-level series (id COUNTRY)."""
    total = np.zeros(len(dataset), dtype=np.float64)
    for series in dataset.counties.values():
        total += series.values
    return TimeSeries(COUNTRY, dataset.dates, total)


def slice_series(series: TimeSeries, start_idx: int, end_idx: int) -> TimeSeries:
    """Contiguous sub-series over [start_idx, end_idx)."""
    n = len(series)
    if not (0 <= start_idx < end_idx <= n):
        raise IndexError(
            f"invalid slice [{start_idx}, {end_idx}) of series with {n} points"
        )
    return TimeSeries(
        series.id, series.dates[start_idx:end_idx], series.values[start_idx:end_idx]
    )
