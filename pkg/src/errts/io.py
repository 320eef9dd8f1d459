"""CSV ingest and construction of mortality-rate series."""

from __future__ import annotations

import csv
import datetime as _dt
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Literal, Union

import numpy as np
from numpy.typing import NDArray

from errts.exceptions import DataError
from errts.series import Series

__all__ = [
    "EpidemicTable",
    "ingest",
    "mortality_rate",
    "DEFINITION_OFFSETS",
    "bundled_dataset",
]

# Days between the case count and the death count in each rate definition.
DEFINITION_OFFSETS = {1: 14, 2: 10, 3: 0}

CountBasis = Literal["cumulative", "daily"]


@dataclass(frozen=True)
class EpidemicTable:
    """Cumulative confirmed cases and deaths on consecutive dates."""

    dates: tuple[_dt.date, ...]
    cases: NDArray[np.float64]
    deaths: NDArray[np.float64]

    def __post_init__(self) -> None:
        n = len(self.dates)
        if n == 0:
            raise DataError("empty input")
        if len(self.cases) != n or len(self.deaths) != n:
            raise DataError("dates, cases and deaths differ in length")
        for i in range(1, n):
            if self.dates[i] <= self.dates[i - 1]:
                raise DataError(f"dates not strictly increasing at {self.dates[i]}")
        for name in ("cases", "deaths"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise DataError(f"{name} must be finite and non-negative")
            bad = np.flatnonzero(np.diff(arr) < 0)
            if bad.size:
                raise DataError(f"cumulative {name} decrease on {self.dates[bad[0] + 1]}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.dates)


def _parse_date(text: str, line: int) -> _dt.date:
    try:
        return _dt.date.fromisoformat(text.strip())
    except ValueError:
        raise DataError(f"line {line}: invalid date {text!r}") from None


def _parse_number(text: str, line: int, name: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"line {line}: invalid {name} {text!r}") from None
    if not np.isfinite(value):
        raise DataError(f"line {line}: non-finite {name}")
    return value


def ingest(path: str | Path) -> Union[EpidemicTable, Series]:
    """Read ``date,cases,deaths`` into an :class:`EpidemicTable` or ``date,value`` into a :class:`Series`.

    Dates are ISO-8601 and must be consecutive days for a ``Series`` origin to
    be meaningful; any gap or repeat is rejected.
    """
    path = Path(path)
    try:
        handle = path.open(newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise DataError("empty input")
        cols = [h.strip().lower() for h in header]
        if cols == ["date", "cases", "deaths"]:
            kind = "table"
        elif cols == ["date", "value"]:
            kind = "series"
        else:
            raise DataError(f"line 1: expected header date,cases,deaths or date,value, got {','.join(header)}")
        dates: list[_dt.date] = []
        rows: list[list[float]] = []
        seen: dict[_dt.date, int] = {}
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(cols):
                raise DataError(f"line {line}: expected {len(cols)} fields, got {len(row)}")
            d = _parse_date(row[0], line)
            if d in seen:
                raise DataError(f"line {line}: duplicate date {d} (first on line {seen[d]})")
            if dates and d < dates[-1]:
                raise DataError(f"line {line}: date {d} out of order")
            seen[d] = line
            dates.append(d)
            rows.append([_parse_number(c, line, name) for c, name in zip(row[1:], cols[1:])])
            if kind == "table" and len(rows) > 1:
                for j, name in enumerate(cols[1:]):
                    if rows[-1][j] < rows[-2][j]:
                        raise DataError(f"line {line}: cumulative {name} decrease")
    if not rows:
        raise DataError("empty input")
    gaps = [i for i in range(1, len(dates)) if (dates[i] - dates[i - 1]).days != 1]
    if gaps:
        raise DataError(f"dates are not consecutive days: gap before {dates[gaps[0]]}")
    arr = np.array(rows)
    if kind == "series":
        return Series(arr[:, 0], origin=dates[0])
    return EpidemicTable(tuple(dates), arr[:, 0], arr[:, 1])


def mortality_rate(table: EpidemicTable, definition: int = 1, count_basis: CountBasis = "cumulative") -> Series:
    """Deaths on day ``t`` over cases on day ``t - k``, in percent.

    ``k`` is 14, 10 or 0 for definitions 1, 2 and 3. ``count_basis="daily"``
    uses new counts (first differences, the first day taken as is) instead
    of cumulative ones.
    """
    if definition not in DEFINITION_OFFSETS:
        raise DataError(f"definition must be 1, 2 or 3, got {definition}")
    k = DEFINITION_OFFSETS[definition]
    n = len(table)
    if n <= k:
        raise DataError(f"definition {definition} needs more than {k} rows, got {n}")
    cases, deaths = table.cases, table.deaths
    if count_basis == "daily":
        cases = np.diff(cases, prepend=0.0)
        deaths = np.diff(deaths, prepend=0.0)
    elif count_basis != "cumulative":
        raise DataError(f"unknown count basis {count_basis!r}")
    num = deaths[k:]
    den = cases[: n - k]
    zero = np.flatnonzero(den == 0)
    if zero.size:
        raise DataError(f"zero case count on {table.dates[zero[0]]} (denominator for {table.dates[zero[0] + k]})")
    return Series(100.0 * num / den, origin=table.dates[k])


def bundled_dataset() -> EpidemicTable:
    """Synthetic case and death counts shipped with the package."""
    ref = resources.files("errts") / "data" / "synthetic.csv"
    with resources.as_file(ref) as path:
        out = ingest(path)
    assert isinstance(out, EpidemicTable)
    return out
