"""CSV ingestion: weekly case counts, population anchors, validation.

Malformed input is a hard error with a row/column position; the benchmark's
validity depends on unmodified inputs, so nothing is imputed or repaired.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass

import numpy as np

from .core import (
    COUNTIES,
    COUNTRY,
    DataError,
    Dataset,
    TimeSeries,
    canonical_county,
)


@dataclass(frozen=True)
class PopulationTable:
    """Per-county yearly population anchors: county -> [(year, population)]."""

    entries: dict[str, tuple[tuple[int, int], ...]]

    def __post_init__(self):
        for county, anchors in self.entries.items():
            years = [y for y, _ in anchors]
            if years != sorted(set(years)):
                raise DataError(f"county {county!r}: years must be strictly increasing")
            for year, pop in anchors:
                if pop <= 0:
                    raise DataError(
                        f"county {county!r}, year {year}: population must be > 0"
                    )


@dataclass(frozen=True, eq=False)
class PopulationSeries:
    """Weekly interpolated population aligned to a case series' date index."""

    county: str
    dates: tuple[dt.date, ...]
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(vals) != len(self.dates):
            raise DataError(f"population series {self.county!r}: length mismatch")
        if np.any(vals <= 0):
            raise DataError(f"population series {self.county!r}: non-positive value")

    def at(self, date: dt.date) -> float:
        """Population on one week date of the index."""
        offset = (date - self.dates[0]).days
        idx, rem = divmod(offset, 7)
        if rem != 0 or not (0 <= idx < len(self.values)):
            raise DataError(f"date {date} is not on the population index")
        return float(self.values[idx])


def _decode(raw) -> str:
    if isinstance(raw, bytes):
        return raw.decode("utf-8-sig")
    if hasattr(raw, "read"):
        data = raw.read()
        return data.decode("utf-8-sig") if isinstance(data, bytes) else data
    return str(raw)


def _parse_date(cell: str, fmt: str, row: int) -> dt.date:
    try:
        if fmt == "dmy":
            day, month, year = cell.split("/")
            return dt.date(int(year), int(month), int(day))
        return dt.date.fromisoformat(cell)
    except ValueError as exc:
        raise DataError(f"row {row}: bad date {cell!r}: {exc}") from exc


def _detect_date_format(cell: str, row: int) -> str:
    if "/" in cell:
        return "dmy"
    if "-" in cell:
        return "iso"
    raise DataError(f"row {row}: unrecognized date format {cell!r} "
                    "(expected DD/MM/YYYY or YYYY-MM-DD)")


def parse_cases_csv(raw) -> Dataset:
    """Parse the weekly cases CSV into a Dataset of the 20 canonical counties.

    Header: Date plus one column per county. Accepts DD/MM/YYYY or ISO dates
    but not a mix of both within one file. Cells must be non-negative
    integers; consecutive rows must be exactly 7 days apart.
    """
    reader = csv.reader(io.StringIO(_decode(raw)))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty cases file") from None
    if len(header) < 2:
        raise DataError("cases header needs a date column plus county columns")

    columns = [canonical_county(name) for name in header[1:]]
    unknown = [name for name in columns if name not in COUNTIES]
    if unknown:
        raise DataError(f"unknown county column(s): {', '.join(unknown)}")
    if len(set(columns)) != len(columns):
        raise DataError("duplicate county column in header")
    missing = [name for name in COUNTIES if name not in columns]
    if missing:
        raise DataError(
            f"missing county column(s): {', '.join(sorted(missing))}"
        )

    dates: list[dt.date] = []
    rows: list[list[float]] = []
    fmt = None
    seen: set[dt.date] = set()
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(columns) + 1:
            raise DataError(
                f"row {row_no}: expected {len(columns) + 1} cells, got {len(row)}"
            )
        cell_fmt = _detect_date_format(row[0].strip(), row_no)
        if fmt is None:
            fmt = cell_fmt
        elif cell_fmt != fmt:
            raise DataError(f"row {row_no}: mixed date formats within one file")
        date = _parse_date(row[0].strip(), fmt, row_no)
        if date in seen:
            raise DataError(f"row {row_no}: duplicate date {date}")
        if dates:
            gap = (date - dates[-1]).days
            if gap != 7:
                raise DataError(
                    f"row {row_no}: {gap}-day gap after {dates[-1]} (expected 7)"
                )
        seen.add(date)
        dates.append(date)
        parsed = []
        for col, cell in zip(columns, row[1:]):
            text = cell.strip()
            try:
                value = int(text)
            except ValueError:
                raise DataError(
                    f"row {row_no}, column {col}: non-integer cell {cell!r}"
                ) from None
            if value < 0:
                raise DataError(f"row {row_no}, column {col}: negative count {value}")
            parsed.append(float(value))
        rows.append(parsed)

    if not rows:
        raise DataError("cases file has no data rows")
    table = np.asarray(rows, dtype=np.float64)
    counties = {
        name: TimeSeries(name, tuple(dates), table[:, i])
        for i, name in enumerate(columns)
    }
    # store in canonical order regardless of file column order
    ordered = {name: counties[name] for name in COUNTIES}
    return Dataset(ordered)


def write_cases_csv(dataset: Dataset) -> str:
    """Canonical serialization: ISO dates, integral counts written as ints.

    parse_cases_csv(write_cases_csv(ds)) reproduces ds exactly.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    names = list(dataset.county_names)
    writer.writerow(["Date"] + names)
    for i, date in enumerate(dataset.dates):
        row = [date.isoformat()]
        for name in names:
            v = dataset.counties[name].values[i]
            row.append(str(int(v)) if float(v).is_integer() else repr(float(v)))
        writer.writerow(row)
    return out.getvalue()


def parse_population_csv(raw) -> PopulationTable:
    """Parse `county,year,population` rows into a validated PopulationTable."""
    reader = csv.reader(io.StringIO(_decode(raw)))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty population file") from None
    expected = ["county", "year", "population"]
    if [cell.strip().lower() for cell in header] != expected:
        raise DataError(f"population header must be {','.join(expected)}")

    entries: dict[str, list[tuple[int, int]]] = {}
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise DataError(f"row {row_no}: expected 3 cells, got {len(row)}")
        county = canonical_county(row[0])
        if county != COUNTRY and county not in COUNTIES:
            raise DataError(f"row {row_no}: unknown county {row[0]!r}")
        try:
            year = int(row[1])
            pop = int(row[2])
        except ValueError:
            raise DataError(f"row {row_no}: non-integer year or population") from None
        if pop <= 0:
            raise DataError(f"row {row_no}: population must be > 0, got {pop}")
        anchors = entries.setdefault(county, [])
        if anchors and year <= anchors[-1][0]:
            raise DataError(
                f"row {row_no}: years out of order for county {county}"
            )
        anchors.append((year, pop))

    if not entries:
        raise DataError("population file has no data rows")
    return PopulationTable({c: tuple(a) for c, a in entries.items()})


def attach_population(
    dataset: Dataset, table: PopulationTable
) -> dict[str, PopulationSeries]:
    """Interpolate yearly anchors onto each county's weekly date index.

    Anchors are pinned to January 1 of their year; weeks between anchors get
    the linear interpolation, weeks outside the covered range the nearest
    anchor value (constant extrapolation).
    """
    missing = [c for c in dataset.county_names if c not in table.entries]
    if missing:
        raise DataError(
            f"population table missing county(ies): {', '.join(sorted(missing))}"
        )
    out = {}
    for county in dataset.county_names:
        anchors = table.entries[county]
        xs = np.array([dt.date(year, 1, 1).toordinal() for year, _ in anchors], float)
        ys = np.array([pop for _, pop in anchors], float)
        ds = np.array([d.toordinal() for d in dataset.dates], float)
        interp = np.interp(ds, xs, ys)  # np.interp clamps outside [xs0, xs-1]
        out[county] = PopulationSeries(county, dataset.dates, interp)
    return out


def country_population(pops: dict[str, PopulationSeries]) -> PopulationSeries:
    """Country-level population: the sum of the county series."""
    series = list(pops.values())
    total = np.zeros(len(series[0].values))
    for p in series:
        if p.dates != series[0].dates:
            raise DataError("population series indexes differ")
        total += p.values
    return PopulationSeries(COUNTRY, series[0].dates, total)
