"""Train/test splitting, the two normalization methods, window framing.

Both normalizations end in the same train-fitted affine map onto [-1, 1], so
losses measured in normalized space are unit-comparable across methods. All
parameters are fitted on the training portion only.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from .core import DataError, TimeSeries, slice_series
from .ingest import PopulationSeries

METHOD_MINMAX = "M1"
METHOD_POPULATION = "M2"


@dataclass(frozen=True)
class Split:
    train: TimeSeries
    test: TimeSeries
    ratio: float


@dataclass(frozen=True)
class NormalizationParams:
    """Forward-map parameters needed to invert a normalization exactly.

    method M1: affine x -> 2*(x - lo)/(hi - lo) - 1 with train extremes.
    method M2: x -> x / population * 100, then the same affine stage fitted
    on the population-normalized training values.
    """

    method: str
    train_min: float
    train_max: float
    population: PopulationSeries | None = None

    def __post_init__(self):
        if self.method not in (METHOD_MINMAX, METHOD_POPULATION):
            raise ValueError(f"unknown normalization method {self.method!r}")
        if not self.train_max > self.train_min:
            raise DataError("normalization needs train_max > train_min")
        if self.method == METHOD_POPULATION and self.population is None:
            raise ValueError("population-percent params need a population series")


@dataclass(frozen=True)
class WindowedDataset:
    """Supervised one-step framing: inputs[i] = x[i:i+w], targets[i] = x[i+w]."""

    inputs: np.ndarray  # (n - w, w)
    targets: np.ndarray  # (n - w,)
    window_len: int


def split_train_test(series: TimeSeries, ratio: float) -> Split:
    """First floor(ratio*n) points for training, the remainder for testing."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    n = len(series)
    if n < 5:
        raise DataError(f"series {series.id!r} too short to split ({n} points)")
    cut = math.floor(ratio * n)
    if cut == 0 or cut == n:
        raise DataError(f"ratio {ratio} leaves an empty side for n={n}")
    return Split(
        train=slice_series(series, 0, cut),
        test=slice_series(series, cut, n),
        ratio=ratio,
    )


def _affine_params(train_values: np.ndarray) -> tuple[float, float]:
    lo = float(np.min(train_values))
    hi = float(np.max(train_values))
    if hi == lo:
        raise DataError("constant training series: min-max scaling undefined")
    return lo, hi


def _affine_apply(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return 2.0 * (values - lo) / (hi - lo) - 1.0


def _affine_invert(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return (values + 1.0) * (hi - lo) / 2.0 + lo


def normalize_method1(
    split: Split,
) -> tuple[TimeSeries, TimeSeries, NormalizationParams]:
    """Min-max scale train and test onto [-1, 1] using train extremes only.

    Test values may land outside [-1, 1]; that is intentional (no leakage).
    """
    lo, hi = _affine_params(split.train.values)
    params = NormalizationParams(METHOD_MINMAX, lo, hi)
    return (
        split.train.with_values(_affine_apply(split.train.values, lo, hi)),
        split.test.with_values(_affine_apply(split.test.values, lo, hi)),
        params,
    )


def population_percent(series: TimeSeries, pop: PopulationSeries) -> TimeSeries:
    """Raw cases as a percentage of the county population, date by date."""
    values = np.array([pop.at(d) for d in series.dates])
    return series.with_values(series.values / values * 100.0)


def normalize_method2(
    split: Split, pop: PopulationSeries
) -> tuple[TimeSeries, TimeSeries, NormalizationParams]:
    """Population-percent conversion followed by the train-fitted affine stage."""
    pct_train = population_percent(split.train, pop)
    pct_test = population_percent(split.test, pop)
    lo, hi = _affine_params(pct_train.values)
    params = NormalizationParams(METHOD_POPULATION, lo, hi, population=pop)
    return (
        pct_train.with_values(_affine_apply(pct_train.values, lo, hi)),
        pct_test.with_values(_affine_apply(pct_test.values, lo, hi)),
        params,
    )


def normalize(
    split: Split, method: str, pop: PopulationSeries | None = None
) -> tuple[TimeSeries, TimeSeries, NormalizationParams]:
    if method == METHOD_MINMAX:
        return normalize_method1(split)
    if method == METHOD_POPULATION:
        if pop is None:
            raise ValueError("method M2 needs a population series")
        return normalize_method2(split, pop)
    raise ValueError(f"unknown normalization method {method!r}")


def denormalize(
    values: np.ndarray,
    params: NormalizationParams,
    dates: tuple[dt.date, ...] | None = None,
) -> np.ndarray:
    """Exact inverse of the forward normalization, back to case counts."""
    values = np.asarray(values, dtype=np.float64)
    out = _affine_invert(values, params.train_min, params.train_max)
    if params.method == METHOD_POPULATION:
        if dates is None:
            raise ValueError("method M2 denormalization needs the value dates")
        if len(dates) != len(values):
            raise DataError("dates/values length mismatch in denormalize")
        pops = np.array([params.population.at(d) for d in dates])
        out = out * pops / 100.0
    return out


def make_windows(values: np.ndarray, w: int) -> WindowedDataset:
    """All (length-w window, next value) pairs from one value vector."""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    if w < 1:
        raise ValueError(f"window length must be >= 1, got {w}")
    if n <= w:
        raise DataError(f"need more than {w} points to frame windows, got {n}")
    idx = np.arange(n - w)[:, None] + np.arange(w)[None, :]
    return WindowedDataset(inputs=values[idx], targets=values[w:], window_len=w)
