"""Zero-rate panel ingestion, validation, and export.

A panel is a dated table of continuously compounded zero rates, one column
per maturity (in years), rates stored as decimals. Files are CSV with an
ISO-8601 date column followed by one column per maturity, header row giving
the maturities, e.g. ``date,5,20``.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .errors import CurveDataError

# rates outside this band after unit conversion are treated as a unit mix-up
_RATE_BOUND = 0.5
# calendar irregularity allowed around the median spacing (Feb vs 31-day months)
_SPACING_SLACK_DAYS = 3


@dataclass(frozen=True)
class ColumnMap:
    """How to read a panel CSV.

    date_column: header of the date column.
    rates_in_percent: divide rates by 100 on ingestion.
    maturity_columns: restrict to these headers; None means every non-date column.
    """

    date_column: str = "date"
    rates_in_percent: bool = True
    maturity_columns: tuple[str, ...] | None = None


@dataclass(frozen=True)
class MaturityPair:
    """Ordered maturity pair (years) used for two-column estimation."""

    tau1: float
    tau2: float

    def __post_init__(self):
        if not (0.0 < self.tau1 < self.tau2):
            raise CurveDataError(
                f"maturity pair must satisfy 0 < tau1 < tau2, got ({self.tau1}, {self.tau2})"
            )


@dataclass(frozen=True)
class CurveSnapshot:
    """One observation date: maturities and their zero rates (decimals)."""

    date: dt.date
    maturities: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        if len(self.maturities) != len(self.rates):
            raise CurveDataError("snapshot maturities and rates differ in length")
        if any(t <= 0 for t in self.maturities):
            raise CurveDataError("snapshot maturities must be positive")

    def rate(self, maturity: float, tol: float = 1e-9) -> float:
        for t, z in zip(self.maturities, self.rates):
            if abs(t - maturity) <= tol:
                return z
        raise CurveDataError(
            f"maturity {maturity} not in snapshot (available: {list(self.maturities)})"
        )


@dataclass(frozen=True)
class ZeroCurvePanel:
    """Validated rate panel. Read-only after construction.

    dates: strictly increasing, near-equally spaced observation dates.
    maturities: strictly increasing maturities in years.
    rates: (n_dates, n_maturities) decimals.
    h: observation spacing in year fractions, mean spacing over the span.
    """

    dates: tuple[dt.date, ...]
    maturities: tuple[float, ...]
    rates: np.ndarray
    h: float = field(init=False)

    def __post_init__(self):
        rates = np.asarray(self.rates, dtype=float)
        if rates.shape != (len(self.dates), len(self.maturities)):
            raise CurveDataError(
                f"rates shape {rates.shape} does not match "
                f"{len(self.dates)} dates x {len(self.maturities)} maturities"
            )
        if len(self.maturities) < 2:
            raise CurveDataError("panel needs at least 2 maturities")
        if len(self.dates) < 3:
            raise CurveDataError("panel needs at least 3 dates")
        if any(t2 <= t1 for t1, t2 in zip(self.maturities, self.maturities[1:])):
            raise CurveDataError("maturities must be strictly increasing")
        if not np.all(np.isfinite(rates)):
            raise CurveDataError("panel contains non-finite rates")
        if np.any(np.abs(rates) >= _RATE_BOUND):
            bad = np.argwhere(np.abs(rates) >= _RATE_BOUND)[0]
            raise CurveDataError(
                f"rate {rates[bad[0], bad[1]]} at ({self.dates[bad[0]]}, "
                f"{self.maturities[bad[1]]}) is outside (-{_RATE_BOUND}, {_RATE_BOUND}); "
                "check the percent-vs-decimal unit flag"
            )

        spacings = np.array(
            [(d2 - d1).days for d1, d2 in zip(self.dates, self.dates[1:])], dtype=float
        )
        if np.any(spacings <= 0):
            i = int(np.argwhere(spacings <= 0)[0][0])
            raise CurveDataError(
                f"dates must be strictly increasing: {self.dates[i]} -> {self.dates[i + 1]}"
            )
        med = float(np.median(spacings))
        if np.any(np.abs(spacings - med) > _SPACING_SLACK_DAYS):
            i = int(np.argmax(np.abs(spacings - med)))
            raise CurveDataError(
                f"dates are not equally spaced: gap {self.dates[i]} -> {self.dates[i + 1]} "
                f"is {spacings[i]:.0f} days vs median {med:.0f}"
            )

        span_days = (self.dates[-1] - self.dates[0]).days
        h = span_days / 365.25 / (len(self.dates) - 1)
        rates = rates.copy()
        rates.setflags(write=False)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "h", h)

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    def column(self, maturity: float, tol: float = 1e-9) -> np.ndarray:
        for j, t in enumerate(self.maturities):
            if abs(t - maturity) <= tol:
                return self.rates[:, j]
        raise CurveDataError(
            f"maturity {maturity} not in panel (available: {list(self.maturities)})"
        )

    def snapshot(self, date: dt.date) -> CurveSnapshot:
        try:
            i = self.dates.index(date)
        except ValueError:
            raise CurveDataError(
                f"date {date} not in panel ({self.dates[0]} .. {self.dates[-1]})"
            ) from None
        return CurveSnapshot(date, self.maturities, tuple(float(z) for z in self.rates[i]))


def ingest_panel(path: str, colmap: ColumnMap = ColumnMap()) -> ZeroCurvePanel:
    """Read and validate a panel CSV; any defect is a hard error."""
    try:
        fh = open(path, newline="")
    except OSError as e:
        raise CurveDataError(f"cannot open panel file {path}: {e}") from e
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CurveDataError(f"panel file {path} is empty") from None
        rows = [row for row in reader if row and any(c.strip() for c in row)]

    header = [c.strip() for c in header]
    if colmap.date_column not in header:
        raise CurveDataError(
            f"date column '{colmap.date_column}' not in header {header} of {path}"
        )
    date_idx = header.index(colmap.date_column)

    if colmap.maturity_columns is not None:
        wanted = list(colmap.maturity_columns)
        missing = [c for c in wanted if c not in header]
        if missing:
            raise CurveDataError(f"maturity columns {missing} not in header of {path}")
        mat_idx = [header.index(c) for c in wanted]
    else:
        mat_idx = [j for j in range(len(header)) if j != date_idx]
    if not mat_idx:
        raise CurveDataError(f"no maturity columns found in {path}")

    maturities = []
    for j in mat_idx:
        try:
            maturities.append(float(header[j]))
        except ValueError:
            raise CurveDataError(
                f"maturity header '{header[j]}' in {path} is not a number of years"
            ) from None

    order = sorted(range(len(maturities)), key=lambda k: maturities[k])
    maturities = [maturities[k] for k in order]
    mat_idx = [mat_idx[k] for k in order]

    dates = []
    values = np.empty((len(rows), len(mat_idx)))
    scale = 0.01 if colmap.rates_in_percent else 1.0
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise CurveDataError(
                f"row {i + 2} of {path} has {len(row)} cells, header has {len(header)}"
            )
        raw_date = row[date_idx].strip()
        try:
            dates.append(dt.date.fromisoformat(raw_date))
        except ValueError:
            raise CurveDataError(
                f"date '{raw_date}' in row {i + 2} of {path} is not ISO-8601"
            ) from None
        for k, j in enumerate(mat_idx):
            cell = row[j].strip()
            if not cell:
                raise CurveDataError(
                    f"missing rate at ({raw_date}, {maturities[k]}) in {path}"
                )
            try:
                values[i, k] = float(cell) * scale
            except ValueError:
                raise CurveDataError(
                    f"rate '{cell}' at ({raw_date}, {maturities[k]}) in {path} "
                    "is not a number"
                ) from None

    return ZeroCurvePanel(tuple(dates), tuple(maturities), values)


def export_panel(panel: ZeroCurvePanel, path: str) -> None:
    """Write a panel CSV in decimal rates.

    Rates use shortest round-trip formatting, so export followed by ingest
    with rates_in_percent=False reproduces the panel bit-for-bit.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date"] + [_fmt_maturity(t) for t in panel.maturities])
        for i, d in enumerate(panel.dates):
            writer.writerow([d.isoformat()] + [repr(float(z)) for z in panel.rates[i]])


def select_pair(panel: ZeroCurvePanel, pair: MaturityPair) -> ZeroCurvePanel:
    """Restrict a panel to the two maturities of `pair` (a copy, same dates/h)."""
    z1 = panel.column(pair.tau1)
    z2 = panel.column(pair.tau2)
    return ZeroCurvePanel(
        panel.dates, (pair.tau1, pair.tau2), np.column_stack([z1, z2])
    )


def _fmt_maturity(t: float) -> str:
    return repr(int(t)) if float(t).is_integer() else repr(float(t))
