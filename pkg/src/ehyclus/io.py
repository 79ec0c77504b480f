"""Reading and writing samples and result tables as CSV or JSON.

Two layouts are supported for samples:

``long``
    One CSV file with header ``curve_id,dim,t,value`` and one row per
    observation. Labels, if any, go to the sidecar ``<stem>.labels.csv``.
``wide``
    A directory holding ``dim_1.csv`` ... ``dim_p.csv``. Each file has the
    header ``curve_id,t_1,...,t_m`` (grid values as column names) and one row
    per curve. Labels, if any, go to ``labels.csv`` in the same directory.

Label files have the header ``curve_id,label``. Floats are written with
``repr`` so that reading a written file gives back the exact same values.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .core import ArgumentError, FormatError, Grid, MultivariateFunctionalSample
from .metrics import EvaluationReport

FORMATS = ("long", "wide")
RESULT_FORMATS = ("csv", "json")
RESULT_COLUMNS = ("dataset", "method", "purity", "fmeasure", "rand_index", "time_seconds", "replicate", "seed")
LONG_HEADER = ("curve_id", "dim", "t", "value")
LABEL_HEADER = ("curve_id", "label")


def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_float(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise FormatError(f"{where}: {text!r} is not a number") from None
    if not math.isfinite(value):
        raise FormatError(f"{where}: non-finite value {text!r}")
    return value


def _parse_int(text: str, where: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise FormatError(f"{where}: {text!r} is not an integer") from None


def _open_csv(path: Path):
    try:
        return open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from exc


def _write_lines(path: Path, rows: Iterable[Sequence]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _check_header(header, expected, where):
    if header is None or tuple(h.strip() for h in header) != tuple(expected):
        raise FormatError(f"{where}: expected header {','.join(expected)}, got {header}")


def _read_labels(path: Path, curve_ids: List[int]) -> Optional[np.ndarray]:
    if not path.exists():
        return None
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), LABEL_HEADER, str(path))
        found: Dict[int, int] = {}
        for row in reader:
            where = f"{path}:{reader.line_num}"
            if len(row) != 2:
                raise FormatError(f"{where}: expected 2 fields, got {len(row)}")
            cid = _parse_int(row[0], where)
            if cid in found:
                raise FormatError(f"{where}: duplicate curve_id {cid}")
            found[cid] = _parse_int(row[1], where)
    missing = sorted(set(curve_ids) - set(found))
    extra = sorted(set(found) - set(curve_ids))
    if missing or extra:
        raise FormatError(f"{path}: labels do not match the curves (missing {missing[:5]}, unknown {extra[:5]})")
    return np.array([found[c] for c in curve_ids])


def _write_labels(path: Path, labels) -> None:
    _write_lines(path, [LABEL_HEADER, *([i + 1, int(v)] for i, v in enumerate(labels))])


def _labels_path_long(path: Path) -> Path:
    return path.with_name(path.stem + ".labels.csv")


def _read_long(path: Path) -> MultivariateFunctionalSample:
    blocks: Dict[tuple, list] = {}
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), LONG_HEADER, str(path))
        for row in reader:
            where = f"{path}:{reader.line_num}"
            if len(row) != 4:
                raise FormatError(f"{where}: expected 4 fields, got {len(row)}")
            key = (_parse_int(row[0], where), _parse_int(row[1], where))
            t = _parse_float(row[2], where)
            value = _parse_float(row[3], where)
            block = blocks.setdefault(key, [])
            if block and t <= block[-1][0]:
                raise FormatError(f"{where}: t values of curve {key[0]}, dim {key[1]} are not strictly increasing")
            block.append((t, value))
    if not blocks:
        raise FormatError(f"{path}: no observations")
    curves = sorted({c for c, _ in blocks})
    dims = sorted({d for _, d in blocks})
    if dims != list(range(1, len(dims) + 1)):
        raise FormatError(f"{path}: dims must be numbered 1..p, found {dims}")
    reference = None
    values = np.empty((len(curves), len(dims), 0))
    for i, c in enumerate(curves):
        for d in dims:
            block = blocks.get((c, d))
            if block is None:
                raise FormatError(f"{path}: curve {c} has no observations for dim {d}")
            t = [b[0] for b in block]
            if reference is None:
                reference = t
                values = np.empty((len(curves), len(dims), len(t)))
            elif t != reference:
                raise FormatError(f"{path}: curve {c}, dim {d} is observed on a different grid")
            values[i, d - 1] = [b[1] for b in block]
    labels = _read_labels(_labels_path_long(path), curves)
    return MultivariateFunctionalSample(values, Grid(np.array(reference)), labels)


def _write_long(sample: MultivariateFunctionalSample, path: Path) -> None:
    t = [_fmt(x) for x in sample.grid.points]

    def rows():
        yield LONG_HEADER
        for i in range(sample.n):
            for d in range(sample.p):
                for j, v in enumerate(sample.values[i, d]):
                    yield (i + 1, d + 1, t[j], _fmt(v))

    _write_lines(path, rows())
    if sample.labels is not None:
        _write_labels(_labels_path_long(path), sample.labels)


def _read_wide_file(path: Path):
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "curve_id":
            raise FormatError(f"{path}: first column must be curve_id")
        t = np.array([_parse_float(h, f"{path}: header") for h in header[1:]])
        if t.size < 2:
            raise FormatError(f"{path}: need at least two grid columns")
        if np.any(np.diff(t) <= 0):
            raise FormatError(f"{path}: grid columns are not strictly increasing")
        ids, rows = [], []
        for row in reader:
            where = f"{path}:{reader.line_num}"
            if len(row) != len(header):
                raise FormatError(f"{where}: expected {len(header)} fields, got {len(row)}")
            cid = _parse_int(row[0], where)
            if cid in ids:
                raise FormatError(f"{where}: duplicate curve_id {cid}")
            ids.append(cid)
            rows.append([_parse_float(x, where) for x in row[1:]])
    if not rows:
        raise FormatError(f"{path}: no curves")
    order = np.argsort(ids, kind="stable")
    return t, [ids[i] for i in order], np.array(rows)[order]


def _read_wide(path: Path) -> MultivariateFunctionalSample:
    if not path.is_dir():
        raise FormatError(f"{path}: wide format expects a directory of dim_<k>.csv files")
    files = []
    while (path / f"dim_{len(files) + 1}.csv").exists():
        files.append(path / f"dim_{len(files) + 1}.csv")
    if not files:
        raise FormatError(f"{path}: no dim_1.csv found")
    grid, ids, comps = None, None, []
    for f in files:
        t, cur_ids, vals = _read_wide_file(f)
        if grid is None:
            grid, ids = t, cur_ids
        else:
            if t.shape != grid.shape or np.any(t != grid):
                raise FormatError(f"{f}: grid differs from {files[0].name}")
            if cur_ids != ids:
                raise FormatError(f"{f}: curve ids differ from {files[0].name}")
        comps.append(vals)
    labels = _read_labels(path / "labels.csv", ids)
    return MultivariateFunctionalSample(np.stack(comps, axis=1), Grid(grid), labels)


def _write_wide(sample: MultivariateFunctionalSample, path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)
    header = ["curve_id", *(_fmt(x) for x in sample.grid.points)]
    for d in range(sample.p):
        rows = [header, *([i + 1, *(_fmt(v) for v in sample.values[i, d])] for i in range(sample.n))]
        _write_lines(path / f"dim_{d + 1}.csv", rows)
    if sample.labels is not None:
        _write_labels(path / "labels.csv", sample.labels)


def _check_format(fmt: str, allowed) -> str:
    if fmt not in allowed:
        raise ArgumentError(f"unknown format {fmt!r}; expected one of {allowed}")
    return fmt


def read_sample(path, format: str = "long") -> MultivariateFunctionalSample:
    """Load a sample written in the ``long`` or ``wide`` layout."""
    path = Path(path)
    _check_format(format, FORMATS)
    if not path.exists():
        raise FileNotFoundError(f"{path} does not exist")
    return _read_long(path) if format == "long" else _read_wide(path)


def write_sample(sample: MultivariateFunctionalSample, path, format: str = "long") -> None:
    """Write ``sample`` so that :func:`read_sample` returns it unchanged."""
    path = Path(path)
    _check_format(format, FORMATS)
    if format == "long":
        _write_long(sample, path)
    else:
        _write_wide(sample, path)


def guess_format(path) -> str:
    """``wide`` for directories, ``long`` otherwise."""
    return "wide" if Path(path).is_dir() else "long"


def load_canadian_weather() -> MultivariateFunctionalSample:
    """Temperature and precipitation at 35 stations, labelled by region.

    Labels: 1 Arctic, 2 Atlantic, 3 Continental, 4 Pacific.
    """
    root = resources.files("ehyclus") / "data" / "canadian_weather"
    with resources.as_file(root) as path:
        return read_sample(path, "wide")


def canadian_weather_stations() -> List[dict]:
    root = resources.files("ehyclus") / "data" / "canadian_weather" / "stations.csv"
    with root.open("r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


@dataclass(frozen=True)
class ResultRow:
    """One clustering result; ``report`` is ``None`` when the cell failed.

    ``replicate`` is 1-based for single runs; 0 marks a mean over replicates.
    """

    dataset: str
    method: str
    report: Optional[EvaluationReport]
    replicate: int = 1
    seed: int = 0
    error: Optional[str] = None

    @property
    def rand_index(self) -> float:
        return self.report.rand_index if self.report is not None else math.nan

    def as_dict(self) -> dict:
        r = self.report
        return {
            "dataset": self.dataset,
            "method": self.method,
            "purity": r.purity if r else None,
            "fmeasure": r.f_measure if r else None,
            "rand_index": r.rand_index if r else None,
            "time_seconds": r.elapsed_seconds if r else None,
            "replicate": self.replicate,
            "seed": self.seed,
        }


def sort_rows(rows: Iterable[ResultRow]) -> List[ResultRow]:
    """Stable order by Rand Index (descending), then dataset and method; failures last."""

    def key(row):
        ri = row.rand_index
        failed = math.isnan(ri)
        return (failed, 0.0 if failed else -ri, row.dataset, row.method)

    return sorted(rows, key=key)


def write_results(rows: Sequence[ResultRow], path, format: str = "csv") -> None:
    """Write result rows sorted by :func:`sort_rows` as CSV or JSON."""
    _check_format(format, RESULT_FORMATS)
    rows = list(rows)
    if not rows:
        raise ArgumentError("no result rows to write")
    path = Path(path)
    ordered = sort_rows(rows)
    if format == "csv":
        def cell(v):
            if v is None:
                return "nan"
            return _fmt(v) if isinstance(v, float) else v

        _write_lines(path, [RESULT_COLUMNS, *([cell(row.as_dict()[c]) for c in RESULT_COLUMNS] for row in ordered)])
        return
    records = []
    for row in ordered:
        rec = row.as_dict()
        if row.error is not None:
            rec["error"] = row.error
        records.append(rec)
    try:
        path.write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def read_results(path, format: str = "csv") -> List[dict]:
    """Parse a results file back into dictionaries (numbers as floats/ints)."""
    _check_format(format, RESULT_FORMATS)
    path = Path(path)
    if format == "json":
        return json.loads(path.read_text(encoding="utf-8"))
    out = []
    with _open_csv(path) as fh:
        for rec in csv.DictReader(fh):
            for c in ("purity", "fmeasure", "rand_index", "time_seconds"):
                rec[c] = float(rec[c])
            rec["replicate"] = int(rec["replicate"])
            rec["seed"] = int(rec["seed"])
            out.append(rec)
    return out
