"""Time-series container, CSV ingestion and deterministic pre-transforms."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .errors import DataError

__all__ = [
    "TimeSeries",
    "load_csv",
    "read_csv_text",
    "to_csv",
    "transform",
    "log",
    "diff",
    "log_diff",
    "demean_sample",
    "demean_first",
    "detrend_ols",
]


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered real observations, indexed implicitly by t = 1..n.

    ``values`` is stored as a read-only float64 array.  ``origin`` records
    the transforms applied so far as a comma-separated list.  ``labels``
    (e.g. dates) are carried along but never used in computation.
    """

    values: np.ndarray
    name: str | None = None
    origin: str | None = None
    labels: tuple[str, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        x = np.array(self.values, dtype=float).reshape(-1)
        if x.size < 1:
            raise DataError("time series must have at least one observation")
        if not np.all(np.isfinite(x)):
            bad = int(np.flatnonzero(~np.isfinite(x))[0]) + 1
            raise DataError(f"time series contains a non-finite value at t={bad}")
        x.setflags(write=False)
        object.__setattr__(self, "values", x)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != x.size:
                labels = None
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    @property
    def n(self) -> int:
        return self.values.size

    def derive(self, values, step: str, labels=None) -> "TimeSeries":
        origin = step if not self.origin else f"{self.origin},{step}"
        return replace(self, values=values, origin=origin, labels=labels)

    def segment(self, start: int, end: int) -> "TimeSeries":
        """Observations ``start..end`` (1-based, inclusive)."""
        labels = None if self.labels is None else self.labels[start - 1:end]
        return self.derive(self.values[start - 1:end], f"segment[{start}:{end}]", labels)


def as_series(x) -> TimeSeries:
    if isinstance(x, TimeSeries):
        return x
    return TimeSeries(np.asarray(x, dtype=float))


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_csv_text(text: str, column: str | int = 0, has_header: bool | None = None,
                  label_column: str | int | None = None, name: str | None = None) -> TimeSeries:
    """Parse CSV text into a :class:`TimeSeries`. See :func:`load_csv`."""
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        rows.append((lineno, [cell.strip() for cell in row]))
    if not rows:
        raise DataError("CSV input has no rows")

    if has_header is None:
        first = rows[0][1]
        has_header = isinstance(column, str) or not all(_is_number(c) for c in first if c)
    header = None
    if has_header:
        header = rows[0][1]
        rows = rows[1:]

    def resolve(col):
        if isinstance(col, int) or (isinstance(col, str) and col.isdigit() and
                                    (header is None or col not in header)):
            return int(col)
        if header is None:
            raise DataError(f"column {col!r} requested by name but the file has no header")
        if col not in header:
            raise DataError(f"column {col!r} not found; available: {', '.join(header)}")
        return header.index(col)

    idx = resolve(column)
    lidx = None if label_column is None else resolve(label_column)

    values, labels = [], []
    for lineno, cells in rows:
        if idx >= len(cells) or cells[idx] == "":
            raise DataError(f"row {lineno}: missing value in column {column!r}")
        try:
            v = float(cells[idx])
        except ValueError:
            raise DataError(f"row {lineno}: cannot parse {cells[idx]!r} as a number") from None
        if not np.isfinite(v):
            raise DataError(f"row {lineno}: non-finite value {cells[idx]!r}")
        values.append(v)
        if lidx is not None:
            labels.append(cells[lidx] if lidx < len(cells) else "")
    if not values:
        raise DataError(f"column {column!r} is empty")
    if name is None and header is not None:
        name = header[idx]
    return TimeSeries(np.array(values), name=name, labels=tuple(labels) if lidx is not None else None)


def load_csv(path, column: str | int = 0, has_header: bool | None = None,
             label_column: str | int | None = None) -> TimeSeries:
    """Read one column of a comma-separated file.

    Parameters
    ----------
    path : path-like
        File to read. Rows whose fields are all empty are skipped.
    column : str or int
        Column name (requires a header) or 0-based index.
    has_header : bool, optional
        Whether the first non-empty row is a header. ``None`` detects a
        header when the first row is not entirely numeric.
    label_column : str or int, optional
        Column carried along as labels (dates, say).

    Raises
    ------
    DataError
        Missing file, unparseable cell (the message names the file row),
        or empty column.
    """
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    with open(path, newline="") as fh:
        text = fh.read()
    base = os.path.splitext(os.path.basename(str(path)))[0]
    ts = read_csv_text(text, column, has_header, label_column)
    return ts if ts.name is not None else replace(ts, name=base)


def to_csv(x: TimeSeries, path=None, header: str | None = None) -> str:
    """Write a single-column CSV (with header row); returns the text."""
    buf = io.StringIO()
    buf.write(f"{header or x.name or 'value'}\n")
    for v in x.values.tolist():
        buf.write(f"{v!r}\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def log(x: TimeSeries) -> TimeSeries:
    x = as_series(x)
    if np.any(x.values <= 0):
        bad = int(np.flatnonzero(x.values <= 0)[0]) + 1
        raise DataError(f"log requires strictly positive values (t={bad} is {x.values[bad - 1]!r})")
    return x.derive(np.log(x.values), "log", x.labels)


def diff(x: TimeSeries) -> TimeSeries:
    x = as_series(x)
    if x.n < 2:
        raise DataError("diff requires at least 2 observations")
    return x.derive(np.diff(x.values), "diff", None if x.labels is None else x.labels[1:])


def log_diff(x: TimeSeries) -> TimeSeries:
    return diff(log(x))


def demean_sample(x: TimeSeries) -> TimeSeries:
    x = as_series(x)
    return x.derive(x.values - x.values.mean(), "demean_sample", x.labels)


def demean_first(x: TimeSeries) -> TimeSeries:
    x = as_series(x)
    return x.derive(x.values - x.values[0], "demean_first", x.labels)


def trend_design(n: int, k: int) -> np.ndarray:
    """Columns 1, t, ..., t^k for t = 1..n, with t rescaled to [0, 1].

    Rescaling leaves the column space (and so the residuals) unchanged
    while keeping the design well conditioned for large n.
    """
    t = np.arange(1, n + 1, dtype=float) / n
    return np.vander(t, k + 1, increasing=True)


def detrend_ols(x: TimeSeries, k: int = 1) -> TimeSeries:
    """Residuals from least squares on (1, t, ..., t^k)."""
    x = as_series(x)
    if k < 0:
        raise DataError("detrending order must be >= 0")
    if x.n < k + 2:
        raise DataError(f"detrend_ols(k={k}) requires at least {k + 2} observations")
    X = trend_design(x.n, k)
    beta, _, rank, _ = np.linalg.lstsq(X, x.values, rcond=None)
    if rank < k + 1:
        raise DataError("trend design matrix is rank deficient")
    return x.derive(x.values - X @ beta, f"detrend_ols({k})", x.labels)


_TRANSFORMS = {
    "log": log,
    "diff": diff,
    "log_diff": log_diff,
    "demean_sample": demean_sample,
    "demean_first": demean_first,
}


def transform(x: TimeSeries, kind: str, k: int | None = None) -> TimeSeries:
    """Apply a named transform.

    ``kind`` is one of log, diff, log_diff, demean_sample, demean_first or
    detrend_ols (which takes the polynomial order ``k``, default 1).  The
    input is never modified.
    """
    if kind == "detrend_ols":
        return detrend_ols(x, 1 if k is None else k)
    try:
        fn = _TRANSFORMS[kind]
    except KeyError:
        raise DataError(f"unknown transform {kind!r}") from None
    return fn(x)


def apply_transforms(x: TimeSeries, kinds: Iterable[str]) -> TimeSeries:
    for kind in kinds:
        x = transform(x, kind)
    return x


def values_of(x) -> np.ndarray:
    """Float array view of a TimeSeries or array-like."""
    if isinstance(x, TimeSeries):
        return x.values
    return np.asarray(x, dtype=float).reshape(-1)
