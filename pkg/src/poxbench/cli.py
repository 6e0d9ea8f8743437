"""Command-line entry point.

Defaults encode the reproduction protocol (80/20 split, 200 epochs, learning
rate 0.01, weekly period 52, seed 42); every knob is overridable. Exit
codes: 0 success, 1 data/validation error, 2 usage error, 3 internal
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__  # noqa: F401  (loads the BLAS thread guard first)
from .bench import (
    BenchmarkCell,
    BenchmarkConfig,
    CLASSICAL_MODELS,
    MODELS,
    ResultsTable,
    analyze_improvements,
    cell_seed,
    emit_results,
    improvements_csv,
    method2_cases_win_fraction,
    rmse,
    run_benchmark,
    run_cell,
    timings_csv,
)
from .classical import model_to_record
from .core import COUNTRY, DataError, Dataset, aggregate_country
from .eda import decompose_additive, emit_figure_data
from .ingest import (
    attach_population,
    country_population,
    parse_cases_csv,
    parse_population_csv,
)
from .preprocess import METHOD_MINMAX, METHOD_POPULATION
from .published import PUBLISHED_AVERAGE_IMPROVEMENT, published_results
from .synth import write_synthetic_files

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def _load_inputs(cases_path, population_path):
    with open(cases_path, "rb") as fh:
        dataset = parse_cases_csv(fh)
    with open(population_path, "rb") as fh:
        table = parse_population_csv(fh)
    pops = attach_population(dataset, table)
    return dataset, pops


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cases", required=True, help="weekly cases CSV")
    p.add_argument("--population", required=True,
                   help="county,year,population CSV")


def cmd_validate(args) -> int:
    dataset, pops = _load_inputs(args.cases, args.population)
    n = len(dataset)
    print(f"weeks: {n}")
    print(f"date range: {dataset.dates[0].isoformat()} .. "
          f"{dataset.dates[-1].isoformat()}")
    print(f"counties: {len(dataset.county_names)} "
          f"({', '.join(dataset.county_names)})")
    if not dataset.has_canonical_counties():
        raise DataError("dataset does not carry the 20 canonical counties")
    total = int(aggregate_country(dataset).values.sum())
    print(f"total reported cases: {total}")
    print(f"population series: {len(pops)} counties attached")
    print("OK")
    return EXIT_OK


def cmd_eda(args) -> int:
    dataset, pops = _load_inputs(args.cases, args.population)
    out = Path(args.out) / "eda"
    out.mkdir(parents=True, exist_ok=True)
    emit_figure_data("averages", out / "eda-averages.csv",
                     dataset=dataset, pops=pops)
    emit_figure_data("counties", out / "eda-county-series.csv", dataset=dataset)
    country = aggregate_country(dataset)
    decomp = decompose_additive(country, period=args.period)
    emit_figure_data("decomposition", out / "eda-decomposition.csv",
                     series=country, decomposition=decomp)
    print(f"wrote {out / 'eda-averages.csv'}")
    print(f"wrote {out / 'eda-county-series.csv'}")
    print(f"wrote {out / 'eda-decomposition.csv'}")
    return EXIT_OK


def _neural_config(args, base=None):
    from .neural import NeuralConfig
    cfg = base or NeuralConfig()
    overrides = {}
    for name, attr in (("epochs", "epochs"), ("learning_rate", "lr"),
                       ("window", "window"), ("batch_size", "batch_size"),
                       ("hidden_size", "hidden_size")):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[name] = value
    return replace(cfg, **overrides) if overrides else cfg


def cmd_train(args) -> int:
    dataset, pops = _load_inputs(args.cases, args.population)
    series_map = dict(dataset.counties)
    series_map[COUNTRY] = aggregate_country(dataset)
    pop_map = dict(pops)
    pop_map[COUNTRY] = country_population(pops)

    sid = args.series.upper()
    if sid not in series_map:
        print(f"unknown series {args.series!r}", file=sys.stderr)
        return EXIT_USAGE
    model = args.model.upper()
    method = METHOD_POPULATION if args.method == "2" else METHOD_MINMAX
    seed = cell_seed(args.seed, sid, model, method)
    cfg = BenchmarkConfig(ratio=args.ratio, neural=_neural_config(args))

    cell = run_cell(series_map[sid], pop_map.get(sid), model, method, seed, cfg)
    if not cell.ok:
        print(f"fit failed: {cell.error}", file=sys.stderr)
        return EXIT_DATA

    out = Path(args.out) / "models"
    out.mkdir(parents=True, exist_ok=True)
    checkpoint = out / f"{sid}_{model}_{method}.json"
    _write_checkpoint(checkpoint, series_map[sid], pop_map.get(sid), model,
                      method, seed, cfg)
    print(f"series={sid} model={model} method={method}")
    print(f"rmse_scaled={cell.rmse_scaled:.6f}")
    print(f"rmse_cases={cell.rmse_cases:.6f}")
    print(f"checkpoint: {checkpoint}")
    return EXIT_OK


def _write_checkpoint(path, series, pop, model, method, seed, cfg) -> None:
    """Refit the chosen model and persist it (classical) or train and dump
    parameters plus the loss curve (neural)."""
    from .classical import grid_search
    from .neural import train as train_neural
    from .neural.training import forecaster_to_record, loss_curve_csv
    from .preprocess import make_windows, normalize, split_train_test

    split = split_train_test(series, cfg.ratio)
    train_n, _, _ = normalize(split, method, pop)
    if model in CLASSICAL_MODELS:
        from .bench import _classical_setup
        grid, exog_spec = _classical_setup(model, cfg)
        _, fitted = grid_search(train_n.values, grid, exog_spec=exog_spec,
                                dates=train_n.dates, cfg=cfg.fit)
        record = model_to_record(fitted)
    else:
        ncfg = replace(cfg.neural, seed=seed)
        forecaster = train_neural(model, make_windows(train_n.values,
                                                      ncfg.window), ncfg)
        record = forecaster_to_record(forecaster)
        curve_path = Path(path).with_suffix(".loss.csv")
        curve_path.write_text(loss_curve_csv(forecaster), encoding="utf-8")
    Path(path).write_text(json.dumps(record, sort_keys=True) + "\n",
                          encoding="utf-8")


def _emit_all(table: ResultsTable, out: Path, with_timings: bool = True) -> None:
    out.mkdir(parents=True, exist_ok=True)
    try:
        analysis = analyze_improvements(table)
    except DataError:
        analysis = None
    emit_results(table, "csv", out / "results.csv")
    emit_results(table, "json", out / "results.json", analysis,
                 PUBLISHED_AVERAGE_IMPROVEMENT)
    emit_results(table, "markdown", out / "results.md", analysis,
                 PUBLISHED_AVERAGE_IMPROVEMENT)
    if analysis is not None:
        (out / "improvements.csv").write_text(improvements_csv(analysis),
                                              encoding="utf-8")
    if with_timings:
        (out / "timings.csv").write_text(timings_csv(table), encoding="utf-8")


def cmd_benchmark(args) -> int:
    dataset, pops = _load_inputs(args.cases, args.population)
    model_set = tuple(MODELS) if args.model_set is None else tuple(
        m.strip().upper() for m in args.model_set.split(",") if m.strip()
    )
    series_ids = None
    if args.series_set:
        series_ids = [s.strip().upper() for s in args.series_set.split(",")]
    cfg = BenchmarkConfig(ratio=args.ratio, neural=_neural_config(args),
                          model_set=model_set)
    jobs = args.jobs or os.cpu_count() or 1

    def progress(done, totaln, cell):
        status = "ok" if cell.ok else "FAILED"
        print(f"[{done}/{totaln}] {cell.series_id}/{cell.model}/{cell.method} "
              f"{status} ({cell.wall_ms:.0f} ms)", file=sys.stderr)

    table = run_benchmark(dataset, pops, cfg=cfg, seed=args.seed, jobs=jobs,
                          series_ids=series_ids,
                          progress=progress if args.verbose else None)
    out = Path(args.out)
    _emit_all(table, out)
    ok_cells = sum(1 for c in table.cells if c.ok)
    frac, pairs = method2_cases_win_fraction(table)
    print(f"{ok_cells}/{len(table.cells)} cells completed -> {out}")
    if pairs:
        print(f"method 2 matched or beat method 1 (rmse_cases) in "
              f"{frac * 100:.1f}% of {pairs} classical pairs")
    return EXIT_OK if ok_cells else EXIT_DATA


def _parse_results_csv(path) -> ResultsTable:
    import csv as _csv
    cells = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = _csv.DictReader(fh)
        expected = {"series", "model", "method", "rmse_scaled", "rmse_cases",
                    "seed"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise DataError(f"{path}: not a results.csv (header {reader.fieldnames})")
        for row in reader:
            scaled = float(row["rmse_scaled"]) if row["rmse_scaled"] else math.nan
            cases = float(row["rmse_cases"]) if row["rmse_cases"] else math.nan
            error = None if row["rmse_scaled"] else "recorded failure"
            cells.append(BenchmarkCell(
                row["series"], row["model"], row["method"], scaled, cases,
                int(row["seed"]), 0.0, None, error,
            ))
    return ResultsTable(tuple(cells))


def cmd_report(args) -> int:
    if args.published:
        table = published_results()
    else:
        if not args.results:
            print("report needs --results PATH or --published", file=sys.stderr)
            return EXIT_USAGE
        table = _parse_results_csv(args.results)
    out = Path(args.out)
    _emit_all(table, out, with_timings=False)
    analysis = analyze_improvements(table)
    print(f"average improvement: {analysis.average:.2f}% "
          f"(published summary: {PUBLISHED_AVERAGE_IMPROVEMENT:.2f}%, "
          f"delta {analysis.average - PUBLISHED_AVERAGE_IMPROVEMENT:+.2f})")
    print(f"wrote report files to {out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    cases, pop = write_synthetic_files(args.out, seed=args.seed)
    print(f"wrote {cases}")
    print(f"wrote {pop}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poxbench",
        description="Weekly case-count forecasting benchmark",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate the input files")
    _add_input_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eda", help="write figure-data CSVs")
    _add_input_args(p)
    p.add_argument("--out", default="out")
    p.add_argument("--period", type=int, default=52)
    p.set_defaults(func=cmd_eda)

    p = sub.add_parser("train", help="train one model on one series")
    _add_input_args(p)
    p.add_argument("--series", required=True,
                   help="county name or COUNTRY")
    p.add_argument("--model", required=True,
                   choices=[m.lower() for m in MODELS] + list(MODELS))
    p.add_argument("--method", choices=["1", "2"], default="2")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--out", default="out")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--window", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--hidden-size", type=int, dest="hidden_size")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("benchmark", help="run the full benchmark matrix")
    _add_input_args(p)
    p.add_argument("--all", action="store_true",
                   help="run every model on every series (the default)")
    p.add_argument("--model-set", dest="model_set",
                   help="comma-separated subset of models")
    p.add_argument("--series-set", dest="series_set",
                   help="comma-separated subset of series")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: all cores)")
    p.add_argument("--out", default="out")
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--window", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--hidden-size", type=int, dest="hidden_size")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("report", help="re-render reports from a results.csv")
    p.add_argument("--results", help="existing results.csv")
    p.add_argument("--published", action="store_true",
                   help="report over the published reference losses")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth",
                       help="write the synthetic reference-like input files")
    p.add_argument("--out", default="data")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "synth" and args.seed is None:
        from .synth import DEFAULT_SEED
        args.seed = DEFAULT_SEED
    try:
        return args.func(args)
    except (DataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
