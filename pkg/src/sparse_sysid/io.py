"""CSV time-series files, uniform resampling and JSON reports.

CSV layout: comma separated, one header row, one row per time sample. An
optional leading ``t`` column carries timestamps. A complex component ``w``
is stored as the column pair ``w_re, w_im``. Floats are written with
``repr``, the shortest decimal string that round-trips exactly.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .trajectory import TimeSeries

__all__ = [
    "CsvFormatError",
    "CsvSchema",
    "read_csv",
    "write_csv",
    "resample_uniform",
    "write_report",
    "atomic_write",
]


class CsvFormatError(ValueError):
    """Malformed CSV content; ``row`` and ``column`` are 1-based file positions."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass(frozen=True)
class CsvSchema:
    """How to interpret a CSV file.

    ``time_column`` names the timestamp column (ignored when absent from the
    header). ``dt`` overrides the sample spacing; otherwise it is taken from
    uniformly spaced timestamps, or 1.
    """

    time_column: str | None = "t"
    dt: float | None = None
    uniform_rtol: float = 1e-9


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _pair_columns(header):
    """Group header names into components: ``[(name, [col]), (name, [re, im])]``."""
    comps = []
    k = 0
    while k < len(header):
        h = header[k]
        if h.endswith("_re"):
            base = h[:-3]
            if k + 1 >= len(header) or header[k + 1] != base + "_im":
                raise CsvFormatError(f"'{h}' must be followed by '{base}_im'", 1, k + 1)
            comps.append((base, [k, k + 1]))
            k += 2
        elif h.endswith("_im"):
            raise CsvFormatError(f"'{h}' without a preceding '_re' column", 1, k + 1)
        else:
            comps.append((h, [k]))
            k += 1
    return comps


def read_csv(path, schema: CsvSchema = CsvSchema()) -> TimeSeries:
    """Load a time series from a CSV file.

    Raises
    ------
    CsvFormatError
        On an empty file, inconsistent row width or a non-numeric cell; the
        message carries the row and column.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CsvFormatError("file is empty")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    width = len(header)
    values = np.empty((len(body), width))
    line = 1
    k = 0
    for r in rows[1:]:
        line += 1
        if not r or not any(c.strip() for c in r):
            continue
        if len(r) != width:
            raise CsvFormatError(f"expected {width} fields, found {len(r)}", line)
        for j, cell in enumerate(r):
            try:
                values[k, j] = float(cell)
            except ValueError:
                raise CsvFormatError(f"non-numeric value {cell.strip()!r}", line, j + 1) from None
        k += 1

    timestamps = None
    if schema.time_column is not None and header and header[0] == schema.time_column:
        timestamps = values[:, 0].copy()
        header, values = header[1:], values[:, 1:]
    comps = _pair_columns(header)
    is_complex = any(len(cols) == 2 for _, cols in comps)
    X = np.empty((values.shape[0], len(comps)), dtype=complex if is_complex else float)
    for c, (_, cols) in enumerate(comps):
        X[:, c] = values[:, cols[0]] if len(cols) == 1 else values[:, cols[0]] + 1j * values[:, cols[1]]

    dt = schema.dt
    if dt is None:
        dt = 1.0
        if timestamps is not None and timestamps.size >= 2:
            steps = np.diff(timestamps)
            if steps[0] > 0 and np.allclose(steps, steps[0], rtol=schema.uniform_rtol, atol=0):
                dt = float(steps[0])
    names = tuple(name for name, _ in comps)
    return TimeSeries(X, dt=dt, names=names, timestamps=timestamps)


def _header(series: TimeSeries, with_time: bool):
    names = series.names or tuple(f"x{k + 1}" for k in range(series.n))
    cols = ["t"] if with_time else []
    for name in names:
        cols.extend([f"{name}_re", f"{name}_im"] if series.is_complex else [name])
    return cols


def format_csv(series: TimeSeries, with_time: bool | None = None) -> str:
    if with_time is None:
        with_time = series.timestamps is not None
    lines = [",".join(_header(series, with_time))]
    ts = series.timestamps if series.timestamps is not None else np.arange(series.T) * series.dt
    for k, row in enumerate(series.samples):
        cells = [repr(float(ts[k]))] if with_time else []
        for v in row:
            if series.is_complex:
                cells.extend([repr(float(v.real)), repr(float(v.imag))])
            else:
                cells.append(repr(float(v)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_csv(path, series: TimeSeries, with_time: bool | None = None) -> None:
    """Write ``series`` as CSV; an empty series produces a header-only file.

    ``with_time`` adds a leading ``t`` column (default: only when the series
    carries explicit timestamps).
    """
    atomic_write(path, format_csv(series, with_time))


def resample_uniform(timestamps, samples, dt_out: float, natural: bool = True) -> TimeSeries:
    """Interpolate irregular samples onto a uniform grid with cubic splines.

    The grid starts at the first timestamp and steps by ``dt_out`` up to the
    last one. ``natural`` selects natural end conditions; otherwise
    not-a-knot.

    Raises
    ------
    ValueError
        If timestamps are not strictly increasing or fewer than four points
        are given.
    """
    t = np.asarray(timestamps, dtype=float)
    Y = np.asarray(samples)
    if Y.ndim == 1:
        Y = Y[:, None]
    if t.ndim != 1 or t.size != Y.shape[0]:
        raise ValueError("timestamps must be one per sample")
    if t.size < 4:
        raise ValueError("need at least four samples")
    if np.any(np.diff(t) <= 0):
        raise ValueError("timestamps must be strictly increasing")
    if not dt_out > 0:
        raise ValueError("dt_out must be positive")
    count = int(np.floor((t[-1] - t[0]) / dt_out * (1 + 1e-12))) + 1
    grid = t[0] + dt_out * np.arange(count)
    spline = CubicSpline(t, Y, axis=0, bc_type="natural" if natural else "not-a-knot")
    out = spline(grid)
    # exact knot values where the grid hits a knot
    hit = np.searchsorted(t, grid)
    hit = np.clip(hit, 0, t.size - 1)
    same = np.isclose(t[hit], grid, rtol=0, atol=1e-12 * max(1.0, abs(t[-1])))
    out[same] = Y[hit[same]]
    return TimeSeries(out, dt=dt_out, timestamps=grid)


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_dict"):
            return obj.to_dict()
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps_report(report) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


def write_report(path, report) -> None:
    """Write a report object (anything with ``to_dict``, dataclass, dict or list) as JSON."""
    atomic_write(path, dumps_report(report))
