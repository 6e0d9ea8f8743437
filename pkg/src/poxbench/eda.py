"""Exploratory analysis: per-county averages, per-capita ratios, additive
seasonal decomposition, and plot-ready CSV exports.

The decomposition is the classical moving-average kind: a centered moving
average for the trend (masked at the edges), per-phase means of the
detrended values for the seasonal component, remainder as residual.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .core import DataError, Dataset, TimeSeries
from .ingest import PopulationSeries
from .preprocess import population_percent


@dataclass(frozen=True, eq=False)
class Decomposition:
    """observed = trend + seasonal + residual wherever trend is defined.

    trend and residual carry NaN at the masked edges (s//2 points each end);
    seasonal repeats exactly with the period and is centered to zero mean.
    """

    observed: np.ndarray
    trend: np.ndarray
    seasonal: np.ndarray
    residual: np.ndarray
    period: int

    def defined(self) -> np.ndarray:
        """Boolean mask of indices where the trend (hence residual) exists."""
        return np.isfinite(self.trend)


def mean_weekly_cases(dataset: Dataset) -> dict[str, float]:
    """Arithmetic mean of each county's raw weekly series."""
    return {
        name: float(np.mean(series.values))
        for name, series in dataset.counties.items()
    }


def mean_per_capita(
    dataset: Dataset, pops: dict[str, PopulationSeries]
) -> dict[str, float]:
    """Mean over weeks of cases as a percentage of the county population."""
    out = {}
    for name, series in dataset.counties.items():
        if name not in pops:
            raise DataError(f"no population series for county {name!r}")
        out[name] = float(np.mean(population_percent(series, pops[name]).values))
    return out


def decompose_additive(series: TimeSeries, period: int = 52) -> Decomposition:
    """Classical additive decomposition with a centered moving-average trend.

    Even periods get the standard half-weight endpoints, so the window spans
    period + 1 points and the first/last period//2 points have no trend.
    """
    x = series.values
    s = period
    n = len(x)
    if s < 2:
        raise ValueError(f"period must be >= 2, got {s}")
    if n < 2 * s:
        raise DataError(
            f"series {series.id!r}: need at least {2 * s} points for period {s}, got {n}"
        )

    if s % 2 == 0:
        filt = np.concatenate(([0.5], np.ones(s - 1), [0.5])) / s
        half = s // 2
    else:
        filt = np.ones(s) / s
        half = s // 2
    trend = np.full(n, np.nan)
    trend[half:n - half] = np.convolve(x, filt, mode="valid")

    detrended = x - trend
    pattern = np.empty(s)
    for phase in range(s):
        vals = detrended[phase::s]
        pattern[phase] = np.nanmean(vals)
    pattern -= pattern.mean()

    seasonal = pattern[np.arange(n) % s]
    residual = x - trend - seasonal
    return Decomposition(
        observed=x, trend=trend, seasonal=seasonal, residual=residual, period=s
    )


def trend_slope(decomp: Decomposition) -> float:
    """Least-squares slope of the trend component over its defined indices."""
    mask = decomp.defined()
    idx = np.flatnonzero(mask).astype(float)
    return float(np.polyfit(idx, decomp.trend[mask], 1)[0])


def seasonal_extreme_weeks(
    decomp: Decomposition, series: TimeSeries
) -> tuple[int, int]:
    """ISO weeks of the seasonal component's maximum and minimum (one period)."""
    one = decomp.seasonal[: decomp.period]
    hi = int(np.argmax(one))
    lo = int(np.argmin(one))
    return (
        series.dates[hi].isocalendar()[1],
        series.dates[lo].isocalendar()[1],
    )


def _fmt(v) -> str:
    f = float(v)
    if np.isnan(f):
        return ""
    return repr(f)


def averages_csv(
    dataset: Dataset, pops: dict[str, PopulationSeries] | None = None
) -> str:
    """`county,mean_cases,mean_per_capita_percent` rows, one per county."""
    means = mean_weekly_cases(dataset)
    ratios = mean_per_capita(dataset, pops) if pops is not None else {}
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["county", "mean_cases", "mean_per_capita_percent"])
    for name in dataset.county_names:
        writer.writerow(
            [name, _fmt(means[name]), _fmt(ratios[name]) if ratios else ""]
        )
    return out.getvalue()


def decomposition_csv(series: TimeSeries, decomp: Decomposition) -> str:
    """`date,observed,trend,seasonal,residual`; masked trend cells are empty."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["date", "observed", "trend", "seasonal", "residual"])
    for i, date in enumerate(series.dates):
        writer.writerow(
            [
                date.isoformat(),
                _fmt(decomp.observed[i]),
                _fmt(decomp.trend[i]),
                _fmt(decomp.seasonal[i]),
                _fmt(decomp.residual[i]),
            ]
        )
    return out.getvalue()


def county_series_csv(dataset: Dataset) -> str:
    """Wide per-county export: `date,<county>...` rows of raw counts."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    names = list(dataset.county_names)
    writer.writerow(["date"] + names)
    for i, date in enumerate(dataset.dates):
        writer.writerow(
            [date.isoformat()] + [_fmt(dataset.counties[n].values[i]) for n in names]
        )
    return out.getvalue()


FIGURE_KINDS = ("averages", "decomposition", "counties")


def emit_figure_data(what: str, out_path, **inputs) -> None:
    """Write one figure-data CSV (`averages`, `decomposition`, or `counties`)."""
    if what == "averages":
        text = averages_csv(inputs["dataset"], inputs.get("pops"))
    elif what == "decomposition":
        text = decomposition_csv(inputs["series"], inputs["decomposition"])
    elif what == "counties":
        text = county_series_csv(inputs["dataset"])
    else:
        raise ValueError(f"unknown figure kind {what!r}; expected {FIGURE_KINDS}")
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
