"""The benchmark matrix: (series x model x normalization) -> RMSE.

Every cell gets a seed derived from (master seed, series, model, method), so
the table's content is identical for any worker count or scheduling order.
Losses are reported both in normalized space (comparable to the published
table) and denormalized back to case counts (unit-honest).
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field, replace
from multiprocessing import get_context

import numpy as np

from .classical import (
    DEFAULT_FIT,
    ExogSpec,
    FitConfig,
    NO_EXOG,
    arima_grid,
    grid_search,
    rolling_forecast,
    seasonal_grid,
)
from .core import COUNTRY, DataError, Dataset, TimeSeries, aggregate_country
from .ingest import PopulationSeries, country_population
from .neural import NeuralConfig, rolling_forecast_neural, train
from .neural.models import count_params
from .preprocess import (
    METHOD_MINMAX,
    METHOD_POPULATION,
    denormalize,
    make_windows,
    normalize,
    split_train_test,
)

CLASSICAL_MODELS = ("SARIMAX", "ARIMA", "SARIMA")
NEURAL_MODELS = ("LSTM", "GRU", "NBEATS", "DEEPAR")
MODELS = CLASSICAL_MODELS + NEURAL_MODELS
METHODS = (METHOD_MINMAX, METHOD_POPULATION)


@dataclass(frozen=True)
class BenchmarkCell:
    """One (series, model, method) measurement.

    rmse_scaled lives in the normalized space the model was fit in;
    rmse_cases is measured after denormalizing predictions to case counts.
    Failed cells carry an error string and NaN losses.
    """

    series_id: str
    model: str
    method: str
    rmse_scaled: float
    rmse_cases: float
    seed: int
    wall_ms: float = 0.0
    n_params: int | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class ResultsTable:
    cells: tuple[BenchmarkCell, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.cells,
                               key=lambda c: (c.series_id, c.model, c.method)))
        object.__setattr__(self, "cells", ordered)
        seen = set()
        for cell in ordered:
            key = (cell.series_id, cell.model, cell.method)
            if key in seen:
                raise ValueError(f"duplicate cell {key}")
            seen.add(key)

    def get(self, series_id: str, model: str, method: str) -> BenchmarkCell | None:
        for cell in self.cells:
            if (cell.series_id, cell.model, cell.method) == (series_id, model, method):
                return cell
        return None

    @property
    def series_ids(self) -> tuple[str, ...]:
        return tuple(sorted({c.series_id for c in self.cells}))

    def best_per_series(self) -> dict[str, tuple[str, str]]:
        """Per series, the (model, method) minimizing rmse_scaled under M2.

        Ties break toward fewer parameters, then the model name.
        """
        out = {}
        for sid in self.series_ids:
            candidates = [
                c for c in self.cells
                if c.series_id == sid and c.method == METHOD_POPULATION and c.ok
            ]
            if not candidates:
                continue
            best = min(candidates, key=lambda c: (
                c.rmse_scaled,
                c.n_params if c.n_params is not None else math.inf,
                c.model,
            ))
            out[sid] = (best.model, best.method)
        return out


def rmse(predictions, observations) -> float:
    """Root mean square error: sqrt(mean((prediction - observation)^2))."""
    p = np.asarray(predictions, dtype=np.float64)
    o = np.asarray(observations, dtype=np.float64)
    if p.shape != o.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {o.shape}")
    if p.size == 0:
        raise ValueError("rmse of empty vectors is undefined")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(o))):
        raise ValueError("rmse inputs must be finite")
    d = p - o
    return float(np.sqrt(np.mean(d * d)))


def improvement_percent(loss1: float, loss2: float) -> float:
    """Relative loss reduction of method 2 vs method 1, in percent."""
    if loss1 <= 0:
        raise ValueError(f"loss1 must be positive, got {loss1}")
    return (loss1 - loss2) / loss1 * 100.0


def cell_seed(master_seed: int, series_id: str, model: str, method: str) -> int:
    """Scheduling-independent per-cell seed (stable across platforms)."""
    text = f"{master_seed}|{series_id}|{model}|{method}"
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class BenchmarkConfig:
    ratio: float = 0.8
    period: int = 52
    fourier_k: int = 2
    neural: NeuralConfig = field(default_factory=NeuralConfig)
    fit: FitConfig = DEFAULT_FIT
    model_set: tuple[str, ...] = MODELS

    def __post_init__(self):
        unknown = [m for m in self.model_set if m not in MODELS]
        if unknown:
            raise ValueError(f"unknown model(s): {', '.join(unknown)}")
        if not self.model_set:
            raise ValueError("empty model set")


def _classical_setup(model: str, cfg: BenchmarkConfig):
    if model == "ARIMA":
        return arima_grid(), NO_EXOG
    if model == "SARIMA":
        return seasonal_grid(cfg.period), NO_EXOG
    if model == "SARIMAX":
        return seasonal_grid(cfg.period), ExogSpec("fourier", cfg.fourier_k)
    raise ValueError(f"not a classical model: {model}")


def run_cell(
    series: TimeSeries,
    pop: PopulationSeries | None,
    model: str,
    method: str,
    seed: int,
    cfg: BenchmarkConfig,
) -> BenchmarkCell:
    """Split, normalize, fit, roll forward, score one cell."""
    t0 = time.perf_counter()
    try:
        split = split_train_test(series, cfg.ratio)
        train_n, test_n, params = normalize(split, method, pop)
        if model in CLASSICAL_MODELS:
            grid, exog_spec = _classical_setup(model, cfg)
            _, fitted = grid_search(
                train_n.values, grid, exog_spec=exog_spec,
                dates=train_n.dates, cfg=cfg.fit,
            )
            preds_scaled = rolling_forecast(fitted, test_n.values, test_n.dates)
            n_params = fitted.n_params
        elif model in NEURAL_MODELS:
            ncfg = replace(cfg.neural, seed=seed)
            windows = make_windows(train_n.values, ncfg.window)
            forecaster = train(model, windows, ncfg)
            preds_scaled = rolling_forecast_neural(
                forecaster, train_n.values, test_n.values, seed=seed
            )
            n_params = count_params(forecaster.params)
        else:
            raise ValueError(f"unknown model {model!r}")
        scaled = rmse(preds_scaled, test_n.values)
        preds_cases = denormalize(preds_scaled, params, dates=split.test.dates)
        cases = rmse(preds_cases, split.test.values)
        wall_ms = (time.perf_counter() - t0) * 1000.0
        return BenchmarkCell(series.id, model, method, scaled, cases,
                             seed, wall_ms, n_params)
    except Exception as exc:  # one bad fit never aborts the matrix
        wall_ms = (time.perf_counter() - t0) * 1000.0
        return BenchmarkCell(series.id, model, method, math.nan, math.nan,
                             seed, wall_ms, None, f"{type(exc).__name__}: {exc}")


_WORKER_CTX: dict = {}


def _pool_init(series_map, pop_map, cfg, master_seed):
    _WORKER_CTX["series"] = series_map
    _WORKER_CTX["pops"] = pop_map
    _WORKER_CTX["cfg"] = cfg
    _WORKER_CTX["seed"] = master_seed


def _pool_task(task):
    sid, model, method = task
    ctx = _WORKER_CTX
    return run_cell(
        ctx["series"][sid],
        ctx["pops"].get(sid),
        model,
        method,
        cell_seed(ctx["seed"], sid, model, method),
        ctx["cfg"],
    )


def run_benchmark(
    dataset: Dataset,
    pops: dict[str, PopulationSeries],
    cfg: BenchmarkConfig | None = None,
    seed: int = 42,
    jobs: int = 1,
    series_ids=None,
    progress=None,
) -> ResultsTable:
    """The full matrix over (counties + country) x model_set x methods.

    Deterministic for a fixed seed regardless of `jobs`; failed cells are
    recorded, not raised.
    """
    cfg = cfg or BenchmarkConfig()
    series_map = dict(dataset.counties)
    series_map[COUNTRY] = aggregate_country(dataset)
    pop_map = dict(pops)
    missing = [c for c in dataset.county_names if c not in pop_map]
    if missing:
        raise DataError(f"no population series for: {', '.join(sorted(missing))}")
    if COUNTRY not in pop_map:
        pop_map[COUNTRY] = country_population(
            {c: pops[c] for c in dataset.county_names}
        )

    if series_ids is None:
        series_ids = list(dataset.county_names) + [COUNTRY]
    tasks = [
        (sid, model, method)
        for sid in series_ids
        for model in cfg.model_set
        for method in METHODS
    ]

    if jobs <= 1:
        _pool_init(series_map, pop_map, cfg, seed)
        cells = []
        for i, task in enumerate(tasks):
            cells.append(_pool_task(task))
            if progress:
                progress(i + 1, len(tasks), cells[-1])
    else:
        ctx = get_context("fork")
        with ctx.Pool(jobs, initializer=_pool_init,
                      initargs=(series_map, pop_map, cfg, seed)) as pool:
            if progress:
                cells = []
                for i, cell in enumerate(pool.imap(_pool_task, tasks)):
                    cells.append(cell)
                    progress(i + 1, len(tasks), cell)
            else:
                cells = pool.map(_pool_task, tasks)
    return ResultsTable(tuple(cells))


@dataclass(frozen=True)
class ImprovementEntry:
    series_id: str
    best_model: str
    loss1: float
    loss2: float
    improvement: float


@dataclass(frozen=True)
class ImprovementAnalysis:
    entries: tuple[ImprovementEntry, ...]
    average: float


def analyze_improvements(table: ResultsTable) -> ImprovementAnalysis:
    """Per series: the M2-best model's improvement of loss2 over loss1."""
    entries = []
    for sid, (model, _) in table.best_per_series().items():
        m2 = table.get(sid, model, METHOD_POPULATION)
        m1 = table.get(sid, model, METHOD_MINMAX)
        if m1 is None or not m1.ok:
            raise DataError(f"missing method-1 counterpart for {sid}/{model}")
        entries.append(ImprovementEntry(
            sid, model, m1.rmse_scaled, m2.rmse_scaled,
            improvement_percent(m1.rmse_scaled, m2.rmse_scaled),
        ))
    if not entries:
        raise DataError("no completed method-2 cells to analyze")
    avg = sum(e.improvement for e in entries) / len(entries)
    return ImprovementAnalysis(tuple(entries), avg)


def method2_cases_win_fraction(table: ResultsTable,
                               models=CLASSICAL_MODELS) -> tuple[float, int]:
    """Fraction of (series, model) pairs where M2's rmse_cases <= M1's.

    Restricted to the given models (default: the deterministic classical
    fits); returns (fraction, number of comparable pairs).
    """
    wins = 0
    pairs = 0
    for sid in table.series_ids:
        for model in models:
            m1 = table.get(sid, model, METHOD_MINMAX)
            m2 = table.get(sid, model, METHOD_POPULATION)
            if m1 is None or m2 is None or not (m1.ok and m2.ok):
                continue
            if not (math.isfinite(m1.rmse_cases) and math.isfinite(m2.rmse_cases)):
                continue
            pairs += 1
            if m2.rmse_cases <= m1.rmse_cases:
                wins += 1
    if pairs == 0:
        return math.nan, 0
    return wins / pairs, pairs


def _fmt(v) -> str:
    if v is None:
        return ""
    f = float(v)
    if math.isnan(f):
        return ""
    return repr(f)


RESULTS_CSV_HEADER = "series,model,method,rmse_scaled,rmse_cases,seed"


def results_csv(table: ResultsTable) -> str:
    lines = [RESULTS_CSV_HEADER]
    for c in table.cells:
        lines.append(
            f"{c.series_id},{c.model},{c.method},"
            f"{_fmt(c.rmse_scaled)},{_fmt(c.rmse_cases)},{c.seed}"
        )
    return "\n".join(lines) + "\n"


def timings_csv(table: ResultsTable) -> str:
    """Wall-clock sidecar; the only output that varies between runs."""
    lines = ["series,model,method,wall_ms"]
    for c in table.cells:
        lines.append(f"{c.series_id},{c.model},{c.method},{c.wall_ms:.3f}")
    return "\n".join(lines) + "\n"


def results_json(table: ResultsTable, analysis: ImprovementAnalysis | None = None,
                 published_average: float | None = None) -> str:
    win_frac, pairs = method2_cases_win_fraction(table)
    payload = {
        "cells": [
            {
                "series": c.series_id,
                "model": c.model,
                "method": c.method,
                "rmse_scaled": None if math.isnan(c.rmse_scaled) else c.rmse_scaled,
                "rmse_cases": None if (c.rmse_cases is None or math.isnan(c.rmse_cases))
                              else c.rmse_cases,
                "seed": c.seed,
                "n_params": c.n_params,
                "error": c.error,
            }
            for c in table.cells
        ],
        "best_per_series": {
            sid: {"model": model, "method": method}
            for sid, (model, method) in table.best_per_series().items()
        },
        "method2_cases_win_fraction": None if math.isnan(win_frac) else win_frac,
        "method2_cases_pairs": pairs,
    }
    if analysis is not None:
        payload["improvements"] = {
            "per_series": [
                {
                    "series": e.series_id,
                    "best_model": e.best_model,
                    "loss1": e.loss1,
                    "loss2": e.loss2,
                    "improvement_percent": e.improvement,
                }
                for e in analysis.entries
            ],
            "average_percent": analysis.average,
        }
        if published_average is not None:
            payload["improvements"]["published_average_percent"] = published_average
            payload["improvements"]["delta_vs_published"] = (
                analysis.average - published_average
            )
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def results_markdown(table: ResultsTable,
                     analysis: ImprovementAnalysis | None = None,
                     published_average: float | None = None) -> str:
    """A table-shaped report: per series, one row per model, best bolded."""
    best = table.best_per_series()
    lines = [
        "# Benchmark results",
        "",
        "Losses are RMSE in normalized space (loss 1: min-max method, "
        "loss 2: population-percent method).",
        "",
        "| Series | Model | Loss 1 | Loss 2 | RMSE cases (M2) |",
        "|---|---|---|---|---|",
    ]
    for sid in table.series_ids:
        models = sorted({c.model for c in table.cells if c.series_id == sid})
        for model in models:
            m1 = table.get(sid, model, METHOD_MINMAX)
            m2 = table.get(sid, model, METHOD_POPULATION)
            is_best = best.get(sid, (None,))[0] == model
            name = f"**{model}**" if is_best else model

            def loss(cell):
                if cell is None:
                    return ""
                if not cell.ok:
                    return "error"
                return f"{cell.rmse_scaled:.4f}"

            l2 = loss(m2)
            if is_best and l2 not in ("", "error"):
                l2 = f"**{l2}**"
            cases = ""
            if m2 is not None and m2.ok and m2.rmse_cases is not None \
                    and not math.isnan(m2.rmse_cases):
                cases = f"{m2.rmse_cases:.2f}"
            lines.append(f"| {sid} | {name} | {loss(m1)} | {l2} | {cases} |")
    errors = [c for c in table.cells if not c.ok]
    if errors:
        lines += ["", "## Failed cells", ""]
        for c in errors:
            lines.append(f"- {c.series_id}/{c.model}/{c.method}: {c.error}")
    win_frac, pairs = method2_cases_win_fraction(table)
    lines += ["", "## Method 2 vs method 1 (case units)", ""]
    if pairs:
        lines.append(
            f"Method 2 matched or beat method 1 on rmse_cases in "
            f"{win_frac * 100:.1f}% of {pairs} classical (series, model) pairs."
        )
    else:
        lines.append("No comparable classical cells.")
    if analysis is not None:
        lines += ["", "## Improvement of method 2 over method 1 "
                      "(best model per series)", ""]
        lines.append("| Series | Best model | Loss 1 | Loss 2 | Improvement |")
        lines.append("|---|---|---|---|---|")
        for e in sorted(analysis.entries, key=lambda e: e.series_id):
            lines.append(
                f"| {e.series_id} | {e.best_model} | {e.loss1:.4f} | "
                f"{e.loss2:.4f} | {e.improvement:.2f}% |"
            )
        lines.append("")
        lines.append(f"Average improvement across series: "
                     f"{analysis.average:.2f}%.")
        if published_average is not None:
            delta = analysis.average - published_average
            lines.append(
                f"Published summary states {published_average:.2f}%; "
                f"recomputed average differs by {delta:+.2f} percentage points."
            )
    return "\n".join(lines) + "\n"


def emit_results(table: ResultsTable, fmt: str, path,
                 analysis: ImprovementAnalysis | None = None,
                 published_average: float | None = None) -> None:
    """Write one canonical results file (csv, json, or markdown)."""
    if fmt == "csv":
        text = results_csv(table)
    elif fmt == "json":
        text = results_json(table, analysis, published_average)
    elif fmt == "markdown":
        text = results_markdown(table, analysis, published_average)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def improvements_csv(analysis: ImprovementAnalysis) -> str:
    lines = ["series,best_model,loss1,loss2,improvement_percent"]
    for e in sorted(analysis.entries, key=lambda e: e.series_id):
        lines.append(f"{e.series_id},{e.best_model},{_fmt(e.loss1)},"
                     f"{_fmt(e.loss2)},{_fmt(e.improvement)}")
    lines.append(f"AVERAGE,,,,{_fmt(analysis.average)}")
    return "\n".join(lines) + "\n"
