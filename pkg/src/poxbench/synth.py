"""Deterministic synthetic stand-in for the public chickenpox dataset.

The real weekly case file is an external input this package never fetches.
This generator produces a dataset with the same shape (522 weeks from
2005-01-03, the 20 counties, integer counts) and the qualitative structure
reported for the real data: Budapest dominates absolute counts, Veszprem
leads per capita, winter-peaked seasonality, and a downward trend on top of
slowly drifting county populations. It exists so the pipeline and the
acceptance suite can run end to end with planted, known ground truth.
"""

from __future__ import annotations

import datetime as dt
from pathlib import Path

import numpy as np

from .core import COUNTIES, Dataset, TimeSeries, week_range
from .ingest import PopulationTable, attach_population, write_cases_csv

REFERENCE_START = dt.date(2005, 1, 3)
REFERENCE_WEEKS = 522
DEFAULT_SEED = 20050103

# county -> (population on 2005-01-01, yearly growth rate,
#            mean weekly cases per 100 inhabitants, seasonal amplitude)
_COUNTY_PARAMS = {
    "BUDAPEST": (1_697_343, +0.003, 0.0085, 0.85),
    "PEST": (1_106_201, +0.009, 0.0080, 0.90),
    "BORSOD": (739_143, -0.012, 0.0095, 0.95),
    "HAJDU": (550_265, -0.003, 0.0090, 0.85),
    "GYOR": (440_138, +0.004, 0.0100, 0.95),
    "JASZ": (406_744, -0.010, 0.0088, 0.90),
    "VESZPREM": (368_519, -0.006, 0.0130, 0.92),
    "BACS": (541_584, -0.008, 0.0086, 0.88),
    "BARANYA": (400_347, -0.008, 0.0090, 0.86),
    "FEJER": (428_575, -0.002, 0.0092, 0.93),
    "CSONGRAD": (425_785, -0.005, 0.0084, 0.87),
    "SZABOLCS": (583_564, -0.009, 0.0082, 0.96),
    "HEVES": (323_769, -0.011, 0.0089, 0.89),
    "BEKES": (392_845, -0.013, 0.0078, 0.91),
    "SOMOGY": (334_065, -0.009, 0.0083, 0.84),
    "KOMAROM": (316_578, -0.004, 0.0094, 0.90),
    "VAS": (266_342, -0.004, 0.0098, 0.83),
    "NOGRAD": (218_128, -0.013, 0.0087, 0.94),
    "TOLNA": (247_287, -0.010, 0.0085, 0.88),
    "ZALA": (296_705, -0.008, 0.0091, 0.85),
}

_PEAK_ISO_WEEK = 2  # early January: mid-winter
_TREND_TOTAL = 0.72  # per-capita incidence multiplier over the full decade
_NOISE_SD = 0.07
_NOISE_RHO = 0.6


def synthetic_population_table(years=range(2005, 2016)) -> PopulationTable:
    entries = {}
    for county, (base, growth, _, _) in _COUNTY_PARAMS.items():
        entries[county] = tuple(
            (year, int(round(base * (1.0 + growth) ** (year - 2005))))
            for year in years
        )
    return PopulationTable(entries)


def synthetic_reference(seed: int = DEFAULT_SEED
                        ) -> tuple[Dataset, PopulationTable]:
    """The synthetic cases dataset and its matching population table."""
    rng = np.random.default_rng(seed)
    dates = week_range(REFERENCE_START, REFERENCE_WEEKS)
    table = synthetic_population_table()
    iso_weeks = np.array([d.isocalendar()[1] for d in dates], dtype=np.float64)
    t = np.arange(REFERENCE_WEEKS, dtype=np.float64)
    trend = np.exp(np.log(_TREND_TOTAL) * t / (REFERENCE_WEEKS - 1))
    season_phase = np.cos(2.0 * np.pi * (iso_weeks - _PEAK_ISO_WEEK) / 52.0)

    counties = {}
    pops_by_county = {}
    for county in COUNTIES:
        base, growth, rate, amplitude = _COUNTY_PARAMS[county]
        # weekly population interpolated exactly like ingest will do
        anchors = table.entries[county]
        xs = np.array([dt.date(y, 1, 1).toordinal() for y, _ in anchors], float)
        ys = np.array([p for _, p in anchors], float)
        ds = np.array([d.toordinal() for d in dates], float)
        pop = np.interp(ds, xs, ys)
        pops_by_county[county] = pop

        # AR(1) multiplicative noise, stationary sd _NOISE_SD
        shocks = rng.standard_normal(REFERENCE_WEEKS)
        u = np.empty(REFERENCE_WEEKS)
        u[0] = shocks[0] * _NOISE_SD
        innov_sd = _NOISE_SD * np.sqrt(1.0 - _NOISE_RHO ** 2)
        for i in range(1, REFERENCE_WEEKS):
            u[i] = _NOISE_RHO * u[i - 1] + innov_sd * shocks[i]

        level = (rate / 100.0) * pop * trend \
            * np.exp(amplitude * season_phase) * np.exp(u)
        counties[county] = TimeSeries(county, dates,
                                      np.maximum(np.round(level), 0.0))
    return Dataset(counties), table


def population_csv_text(table: PopulationTable) -> str:
    lines = ["county,year,population"]
    for county in sorted(table.entries):
        for year, pop in table.entries[county]:
            lines.append(f"{county},{year},{pop}")
    return "\n".join(lines) + "\n"


def write_synthetic_files(out_dir, seed: int = DEFAULT_SEED
                          ) -> tuple[Path, Path]:
    """Write cases.csv and population.csv; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dataset, table = synthetic_reference(seed)
    cases_path = out / "cases.csv"
    pop_path = out / "population.csv"
    cases_path.write_text(write_cases_csv(dataset), encoding="utf-8")
    pop_path.write_text(population_csv_text(table), encoding="utf-8")
    return cases_path, pop_path


def synthetic_population_series(dataset: Dataset, table: PopulationTable):
    return attach_population(dataset, table)
