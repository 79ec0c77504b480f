"""Command-line interface.

Subcommands::

    ehyclus simulate  --dataset ds1 --seed 0 --out ds1.csv
    ehyclus run       --input ds1.csv --k 2 --out results.csv
    ehyclus bench     --dataset ds1 --reps 100 --seed 0 --out ds1_bench.csv
    ehyclus plot-data --input ds1.csv --dataset-name d.MEIMHI --out points.csv

``--config FILE`` reads ``key = value`` lines (names as the long flags,
with ``-`` or ``_``); flags given on the command line win. Exit status is 0
on success, 1 for invalid arguments, configuration or input files, and 2
for failures while computing or writing.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import logging
import sys
from pathlib import Path

from . import __version__
from .core import ArgumentError, EHyClusError, FormatError
from .io import RESULT_FORMATS, guess_format, load_canadian_weather, read_sample, write_results, write_sample
from .pipeline import DATASETS, FAMILIES, METHODS, PipelineConfig, bench, build_index_datasets, emit_plot_data, partitions_table, run_sample
from .simulate import DATASET_IDS, generate
from .smoothing import fit_bspline

log = logging.getLogger("ehyclus")

WEATHER = "canadian-weather"
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

# option name -> (type, default); None defaults mean "not given"
_DEFAULTS = {
    "seed": (int, 0),
    "nbasis": (int, 35),
    "k": (int, None),
    "family": (str, "joint"),
    "methods": (str, None),
    "datasets": (str, None),
    "format": (str, "csv"),
    "input_format": (str, None),
    "reps": (int, 1),
    "workers": (int, None),
    "restarts": (int, 10),
    "sigma": (float, None),
    "degree": (int, 1),
    "no_timing": (bool, False),
    "coefficients": (str, "gaussian"),
    "dataset": (str, None),
    "dataset_name": (str, None),
    "input": (str, None),
    "out": (str, None),
    "replicates_out": (str, None),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _split(text):
    return [s.strip() for s in text.split(",") if s.strip()] if text else None


def _add_grid_options(p):
    p.add_argument("--nbasis", type=int, help="number of cubic B-spline basis functions (default 35)")
    p.add_argument("--family", choices=FAMILIES, help="index family (default joint)")
    p.add_argument("--methods", help="comma-separated methods (default all): " + ",".join(METHODS))
    p.add_argument("--datasets", help="comma-separated index datasets (default all 15)")
    p.add_argument("--restarts", type=int, help="restarts of the k-means type methods (default 10)")
    p.add_argument("--sigma", type=float, help="Gaussian kernel width (default chosen from the data)")
    p.add_argument("--degree", type=int, help="polynomial kernel degree (default 1)")
    p.add_argument("--no-timing", action="store_const", const=True, dest="no_timing",
                   help="report 0 seconds so that output files are reproducible byte for byte")
    p.add_argument("--format", choices=RESULT_FORMATS, help="results format (default csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ehyclus", description="Clustering of multivariate functional data through epigraph and hypograph indexes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="key = value file with default option values")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="generate a simulated dataset")
    p.add_argument("--dataset", choices=DATASET_IDS)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output file (long format) or directory (wide format)")
    p.add_argument("--input-format", dest="input_format", choices=("long", "wide"),
                   help="sample layout to write (default long)")
    p.add_argument("--coefficients", choices=("gaussian", "uniform"),
                   help="law of the ds2 random amplitudes (default gaussian)")

    p = sub.add_parser("run", help="run the method grid on one sample")
    p.add_argument("--input", help=f"sample file or directory, or '{WEATHER}' for the bundled data")
    p.add_argument("--input-format", dest="input_format", choices=("long", "wide"),
                   help="sample layout (default: wide for directories, long for files)")
    p.add_argument("--k", type=int, help="number of clusters (default: number of labels)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="results file; partitions are written instead when the sample has no labels")
    _add_grid_options(p)

    p = sub.add_parser("bench", help="average the grid over simulated replicates")
    p.add_argument("--dataset", choices=DATASET_IDS)
    p.add_argument("--reps", type=int, help="number of replicates (default 1)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="file for the mean results, sorted by mean Rand Index")
    p.add_argument("--replicates-out", dest="replicates_out", help="optional file for the per-replicate rows")
    p.add_argument("--workers", type=int, help="parallel processes (default: $EHYCLUS_WORKERS or 1)")
    _add_grid_options(p)

    p = sub.add_parser("plot-data", help="write two index columns and labels for a scatter plot")
    p.add_argument("--input", help=f"sample file or directory, or '{WEATHER}'")
    p.add_argument("--input-format", dest="input_format", choices=("long", "wide"))
    p.add_argument("--dataset-name", dest="dataset_name", help="index dataset, e.g. d.MEIMHI")
    p.add_argument("--nbasis", type=int)
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--out")
    return parser


def read_config(path) -> dict:
    """Parse ``key = value`` lines; an optional ``[ehyclus]`` header is allowed."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    parser = configparser.ConfigParser(interpolation=None)
    try:
        if not text.lstrip().startswith("["):
            text = "[ehyclus]\n" + text
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise UsageError(f"invalid config file {path}: {exc}") from None
    out = {}
    for section in parser.sections():
        for key, raw in parser[section].items():
            name = key.replace("-", "_")
            if name not in _DEFAULTS:
                raise UsageError(f"{path}: unknown option {key!r}")
            kind = _DEFAULTS[name][0]
            try:
                if kind is bool:
                    out[name] = parser[section].getboolean(key)
                else:
                    out[name] = kind(raw)
            except ValueError:
                raise UsageError(f"{path}: invalid value {raw!r} for {key}") from None
    return out


def _options(args, config: dict) -> dict:
    """Merge defaults, config file values and command-line flags."""
    merged = {}
    for name, (_, default) in _DEFAULTS.items():
        flag = getattr(args, name, None)
        merged[name] = flag if flag is not None else config.get(name, default)
    return merged


def _require(opts, *names):
    for name in names:
        if opts[name] is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _load_input(opts):
    if opts["input"] == WEATHER:
        return load_canadian_weather()
    path = Path(opts["input"])
    if not path.exists():
        raise UsageError(f"input {path} does not exist")
    return read_sample(path, opts["input_format"] or guess_format(path))


def _pipeline_config(opts, **extra) -> PipelineConfig:
    kwargs = dict(
        n_basis=opts["nbasis"], k=opts["k"], family=opts["family"], seed=opts["seed"],
        restarts=opts["restarts"], sigma=opts["sigma"], degree=opts["degree"],
        timing=not opts["no_timing"], workers=opts["workers"],
    )
    if _split(opts["methods"]):
        kwargs["methods"] = tuple(_split(opts["methods"]))
    if _split(opts["datasets"]):
        kwargs["datasets"] = tuple(_split(opts["datasets"]))
    kwargs.update(extra)
    return PipelineConfig(**kwargs)


def _cmd_simulate(opts) -> None:
    _require(opts, "dataset", "out")
    kwargs = {"coefficients": opts["coefficients"]} if opts["dataset"] == "ds2" else {}
    sample = generate(opts["dataset"], opts["seed"], **kwargs)
    write_sample(sample, opts["out"], opts["input_format"] or "long")
    log.info("wrote %s with shape %s to %s", opts["dataset"], sample.shape, opts["out"])


def _cmd_run(opts) -> None:
    _require(opts, "input", "out")
    sample = _load_input(opts)
    config = _pipeline_config(opts)
    cells = run_sample(sample, config)
    if sample.labels is None:
        names, table = partitions_table(cells)
        with open(opts["out"], "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["curve_id", *names])
            for i, row in enumerate(table, start=1):
                writer.writerow([i, *row.tolist()])
        log.info("wrote %d partitions to %s", len(names), opts["out"])
        return
    write_results([c.row for c in cells], opts["out"], opts["format"])
    log.info("wrote %d result rows to %s", len(cells), opts["out"])


def _cmd_bench(opts) -> None:
    _require(opts, "dataset", "out")
    config = _pipeline_config(opts)
    result = bench(opts["dataset"], opts["reps"], opts["seed"], config)
    write_results(result.summary, opts["out"], opts["format"])
    if opts["replicates_out"]:
        write_results(result.rows, opts["replicates_out"], opts["format"])
    log.info("wrote %d mean rows to %s", len(result.summary), opts["out"])


def _cmd_plot_data(opts) -> None:
    _require(opts, "input", "dataset_name", "out")
    if opts["dataset_name"] not in DATASETS:
        raise ArgumentError(f"unknown dataset {opts['dataset_name']!r}; valid names are: {', '.join(DATASETS)}")
    sample = _load_input(opts)
    if sample.labels is None:
        raise UsageError("plot data needs a labelled sample")
    smoothed = fit_bspline(sample, opts["nbasis"])
    features = build_index_datasets(smoothed, opts["family"], [opts["dataset_name"]])[opts["dataset_name"]]
    emit_plot_data(features, sample.labels, opts["out"])


_COMMANDS = {"simulate": _cmd_simulate, "run": _cmd_run, "bench": _cmd_bench, "plot-data": _cmd_plot_data}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = read_config(args.config) if args.config else {}
        opts = _options(args, config)
        _COMMANDS[args.command](opts)
    except (UsageError, ArgumentError, FormatError, FileNotFoundError) as exc:
        print(f"ehyclus: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EHyClusError, OSError, ArithmeticError) as exc:
        print(f"ehyclus: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
