"""Annual multi-variable panels and construction of the five-variable system.

The toolkit works on a ``TimePanel``: a T x K matrix of annual observations
with named columns and a gap-free integer year index.  ``build_system``
turns raw (output, employment, wage, price, unemployment) series into the
fixed-order system

    (p, y-n, w-p, n, u)

with p, n in logs, y-n the log productivity differential, w-p the log real
wage, and u taken as supplied (a rate, never logged).  Every downstream
module assumes this column order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    MissingRole,
    MissingValue,
    NonConsecutiveYears,
    NonPositiveForLog,
    ParseFailure,
    TooShort,
)

SYSTEM_COLUMNS = ("p", "y-n", "w-p", "n", "u")
ROLES = ("output", "employment", "wage", "price", "unemployment")


@dataclass(frozen=True)
class TimePanel:
    """Immutable annual panel: named columns over a consecutive year index."""

    names: tuple
    years: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        years = np.asarray(self.years, dtype=int)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "years", years)
        if values.ndim != 2:
            raise ValueError("values must be a T x K matrix")
        if len(self.names) != values.shape[1]:
            raise ValueError("one name per column required")
        if len(years) != values.shape[0]:
            raise ValueError("one year per row required")
        if np.any(np.diff(years) != 1):
            raise NonConsecutiveYears(f"year index has gaps or repeats: {years.tolist()}")
        if not np.all(np.isfinite(values)):
            row, col = np.argwhere(~np.isfinite(values))[0]
            raise MissingValue(int(row), self.names[int(col)])
        values.setflags(write=False)
        years.setflags(write=False)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def K(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.names.index(name)
        except ValueError:
            raise KeyError(f"no column named {name!r}; have {self.names}") from None
        return self.values[:, j]

    def select(self, names) -> "TimePanel":
        idx = [self.names.index(n) for n in names]
        return TimePanel(tuple(names), self.years, self.values[:, idx])


def load_csv(path, year_column: str) -> TimePanel:
    """Read an annual CSV into a TimePanel.

    First row is the header; ``year_column`` must parse as integers and be
    consecutive.  Any empty or unparseable numeric cell aborts ingestion:
    the loader never imputes.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseFailure(0, "", "empty file") from None
        header = [h.strip() for h in header]
        if year_column not in header:
            raise MissingRole(year_column)
        ycol = header.index(year_column)
        names = [h for i, h in enumerate(header) if i != ycol]
        years, rows = [], []
        for rownum, rec in enumerate(reader):
            if len(rec) != len(header):
                raise ParseFailure(rownum, "", f"expected {len(header)} fields, got {len(rec)}")
            try:
                years.append(int(rec[ycol].strip()))
            except ValueError:
                raise ParseFailure(rownum, year_column, rec[ycol]) from None
            vals = []
            for i, cell in enumerate(rec):
                if i == ycol:
                    continue
                cell = cell.strip()
                if cell == "":
                    raise MissingValue(rownum, header[i])
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseFailure(rownum, header[i], cell) from None
                if math.isnan(v):
                    raise MissingValue(rownum, header[i])
                vals.append(v)
            rows.append(vals)
    if len(rows) < 2:
        raise TooShort(f"need at least 2 rows, got {len(rows)}")
    return TimePanel(tuple(names), np.array(years), np.array(rows))


def save_csv(panel: TimePanel, path, year_column: str = "year") -> None:
    """Write a TimePanel using round-trip-exact float formatting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([year_column, *panel.names])
        for t in range(panel.T):
            writer.writerow([int(panel.years[t])] + [repr(float(v)) for v in panel.values[t]])


def build_system(panel: TimePanel, roles: dict, take_logs: bool = True) -> TimePanel:
    """Construct the five-variable system (p, y-n, w-p, n, u).

    Parameters
    ----------
    panel : TimePanel
        Source data.
    roles : dict
        Maps each of ``output, employment, wage, price, unemployment`` to a
        column name of ``panel``.
    take_logs : bool
        If True (default), output/employment/wage/price are logged first;
        they must then be strictly positive.  If False the columns are used
        as given (already in logs).  Unemployment is never transformed.
    """
    cols = {}
    for role in ROLES:
        if role not in roles:
            raise MissingRole(role)
        cols[role] = panel.column(roles[role])

    def logged(role):
        x = cols[role]
        if not take_logs:
            return x
        bad = np.flatnonzero(x <= 0)
        if bad.size:
            raise NonPositiveForLog(roles[role], int(bad[0]))
        return np.log(x)

    y = logged("output")
    n = logged("employment")
    w = logged("wage")
    p = logged("price")
    u = cols["unemployment"]
    values = np.column_stack([p, y - n, w - p, n, u])
    return TimePanel(SYSTEM_COLUMNS, panel.years, values)
