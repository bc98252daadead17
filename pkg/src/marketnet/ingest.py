"""End-of-day price ingestion: CSV parsing, universe pruning, calendar alignment.

The pipeline starts here: vendor CSV dumps become a :class:`PriceHistoryTable`
(rows grouped per ticker, dates strictly increasing), which is pruned to the
analysis window and aligned onto a shared calendar as a :class:`PricePanel`.
Missing closes in a panel are explicit ``NaN`` markers, never silently filled.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields, replace
from datetime import date, datetime
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import DataError, ParseError

ISO_DATE_FORMAT = "%Y-%m-%d"

CALENDAR_POLICIES = ("union", "intersection")

#: logical EoD fields, in canonical column order
EOD_FIELDS = ("ticker", "date", "open", "high", "low", "close", "volume")


@dataclass(frozen=True)
class ColumnSchema:
    """Maps logical EoD fields to the column names of a vendor CSV.

    Only ``date`` and ``close`` must resolve to real columns; ``ticker`` may be
    absent when the caller supplies a per-file default ticker. Any optional
    field mapped to ``None`` is skipped entirely.
    """

    ticker: str | None = "ticker"
    date: str = "date"
    close: str = "close"
    open: str | None = "open"
    high: str | None = "high"
    low: str | None = "low"
    volume: str | None = "volume"

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str]) -> "ColumnSchema":
        unknown = set(mapping) - set(EOD_FIELDS)
        if unknown:
            raise ValueError(f"unknown logical fields: {sorted(unknown)}")
        return replace(cls(), **dict(mapping))


@dataclass(frozen=True)
class EodRow:
    """One end-of-day summary row for one ticker."""

    ticker: str
    date: date
    close: float
    open: float | None = None
    high: float | None = None
    low: float | None = None
    volume: float | None = None

    def __post_init__(self):
        if not self.ticker:
            raise ValueError("ticker must be non-empty")
        if not self.close > 0:
            raise ValueError(f"close must be positive, got {self.close}")
        for name in ("open", "high", "low"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive when present, got {value}")
        if self.volume is not None and self.volume < 0:
            raise ValueError(f"volume must be non-negative, got {self.volume}")


class PriceHistoryTable:
    """Per-ticker EoD rows, tickers sorted, dates strictly increasing.

    The representation is canonical: two tables built from the same rows in any
    order compare equal. Duplicate (ticker, date) rows with identical closes
    are collapsed; conflicting duplicates are rejected at construction.
    """

    def __init__(self, rows_by_ticker: Mapping[str, Sequence[EodRow]]):
        groups: dict[str, tuple[EodRow, ...]] = {}
        for ticker in sorted(rows_by_ticker):
            rows = tuple(rows_by_ticker[ticker])
            if not rows:
                raise ValueError(f"ticker {ticker!r} has no rows")
            for row in rows:
                if row.ticker != ticker:
                    raise ValueError(
                        f"row for {row.ticker!r} filed under {ticker!r}"
                    )
            dates = [r.date for r in rows]
            if any(b <= a for a, b in zip(dates, dates[1:])):
                raise ValueError(f"dates for {ticker!r} not strictly increasing")
            groups[ticker] = rows
        self._groups = groups

    @classmethod
    def from_rows(cls, rows: Iterable[EodRow]) -> "PriceHistoryTable":
        """Group and sort arbitrary rows; dedupe identical (ticker, date) pairs."""
        seen: dict[tuple[str, date], EodRow] = {}
        for row in rows:
            key = (row.ticker, row.date)
            prior = seen.get(key)
            if prior is None:
                seen[key] = row
            elif prior.close != row.close:
                raise DataError(
                    f"conflicting closes for {row.ticker} on {row.date}: "
                    f"{prior.close} vs {row.close}"
                )
        groups: dict[str, list[EodRow]] = {}
        for key in sorted(seen):
            groups.setdefault(key[0], []).append(seen[key])
        if not groups:
            raise DataError("no rows supplied")
        return cls(groups)

    @property
    def tickers(self) -> tuple[str, ...]:
        return tuple(self._groups)

    def rows_for(self, ticker: str) -> tuple[EodRow, ...]:
        return self._groups[ticker]

    def __iter__(self) -> Iterator[EodRow]:
        for rows in self._groups.values():
            yield from rows

    @property
    def n_rows(self) -> int:
        return sum(len(rows) for rows in self._groups.values())

    def first_date(self, ticker: str) -> date:
        return self._groups[ticker][0].date

    def last_date(self, ticker: str) -> date:
        return self._groups[ticker][-1].date

    def __eq__(self, other) -> bool:
        if not isinstance(other, PriceHistoryTable):
            return NotImplemented
        return self._groups == other._groups

    def __repr__(self) -> str:
        return (
            f"PriceHistoryTable({len(self._groups)} tickers, {self.n_rows} rows)"
        )


def _as_text_lines(source: bytes | str | IO[bytes] | IO[str]) -> IO[str]:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    data = source.read()
    if isinstance(data, bytes):
        return io.StringIO(data.decode("utf-8"))
    return io.StringIO(data)


def _parse_price(raw: str, field: str, line: int, ticker: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ParseError(f"{ticker}: unparseable {field} {raw!r}", line=line) from None
    if not math.isfinite(value) or not value > 0:
        raise ParseError(f"{ticker}: non-positive {field} {raw!r}", line=line)
    return value


def parse_eod(
    source: bytes | str | IO[bytes] | IO[str],
    schema: ColumnSchema = ColumnSchema(),
    *,
    date_format: str = ISO_DATE_FORMAT,
    ticker: str | None = None,
) -> PriceHistoryTable:
    """Parse one EoD CSV (header required) into a canonical table.

    ``ticker`` supplies the symbol when the file has no ticker column, e.g.
    per-ticker vendor files named after the symbol. Duplicate (ticker, date)
    rows with the same close are deduplicated; conflicting closes, bad dates,
    and non-positive prices raise :class:`ParseError` with the line number.
    """
    reader = csv.reader(_as_text_lines(source))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty input: header row required", line=1) from None
    header = [h.strip() for h in header]
    position = {name: i for i, name in enumerate(header)}

    def column(field: str, required: bool) -> int | None:
        name = getattr(schema, field)
        if name is None:
            if required:
                raise ParseError(f"schema maps required field {field!r} to nothing")
            return None
        index = position.get(name)
        if index is None and required:
            raise ParseError(f"missing required column {name!r} (field {field!r})", line=1)
        return index

    i_ticker = column("ticker", required=ticker is None)
    i_date = column("date", required=True)
    i_close = column("close", required=True)
    optional = {
        field: column(field, required=False)
        for field in ("open", "high", "low", "volume")
    }

    seen: dict[tuple[str, date], tuple[EodRow, int]] = {}
    for record in reader:
        line = reader.line_num
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) < len(header):
            raise ParseError(
                f"expected {len(header)} columns, got {len(record)}", line=line
            )
        symbol = record[i_ticker].strip() if i_ticker is not None else ticker
        if not symbol:
            raise ParseError("empty ticker", line=line)
        raw_date = record[i_date].strip()
        try:
            day = datetime.strptime(raw_date, date_format).date()
        except ValueError:
            raise ParseError(
                f"{symbol}: unparseable date {raw_date!r} (format {date_format!r})",
                line=line,
            ) from None
        close = _parse_price(record[i_close].strip(), "close", line, symbol)

        extras: dict[str, float | None] = {}
        for field, index in optional.items():
            raw = record[index].strip() if index is not None else ""
            if not raw:
                extras[field] = None
            elif field == "volume":
                try:
                    volume = float(raw)
                except ValueError:
                    raise ParseError(
                        f"{symbol}: unparseable volume {raw!r}", line=line
                    ) from None
                if volume < 0:
                    raise ParseError(f"{symbol}: negative volume {raw!r}", line=line)
                extras[field] = volume
            else:
                extras[field] = _parse_price(raw, field, line, symbol)

        row = EodRow(ticker=symbol, date=day, close=close, **extras)
        key = (symbol, day)
        prior = seen.get(key)
        if prior is None:
            seen[key] = (row, line)
        elif prior[0].close != row.close:
            raise ParseError(
                f"{symbol}: conflicting close for {day} "
                f"(line {prior[1]} has {prior[0].close}, line {line} has {row.close})",
                line=line,
            )
    if not seen:
        raise ParseError("no data rows found")
    return PriceHistoryTable.from_rows(row for row, _ in seen.values())


def load_history(
    paths: Sequence[Path | str],
    schema: ColumnSchema = ColumnSchema(),
    *,
    date_format: str = ISO_DATE_FORMAT,
) -> PriceHistoryTable:
    """Load and merge one or more EoD CSV files.

    A file whose header lacks the ticker column is treated as a per-ticker
    file, with the symbol taken from the filename stem. A directory may be
    passed as a single path: every ``*.csv`` inside it is loaded.
    """
    expanded: list[Path] = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            expanded.extend(sorted(p.glob("*.csv")))
        else:
            expanded.append(p)
    if not expanded:
        raise DataError("no input files found")

    rows: list[EodRow] = []
    for path in expanded:
        text = path.read_text(encoding="utf-8")
        first_line = text.splitlines()[0] if text else ""
        has_ticker_col = schema.ticker is not None and schema.ticker in [
            h.strip() for h in first_line.split(",")
        ]
        stem = None if has_ticker_col else path.stem
        try:
            table = parse_eod(text, schema, date_format=date_format, ticker=stem)
        except ParseError as exc:
            raise ParseError(f"{path}: {exc}") from exc
        rows.extend(table)
    return PriceHistoryTable.from_rows(rows)


def prune_universe(
    table: PriceHistoryTable,
    window_start: date,
    window_end: date,
    exclude: Sequence[str] = (),
) -> PriceHistoryTable:
    """Keep tickers listed on/before ``window_start``, still trading on/after
    ``window_end``, and not excluded; clip surviving rows to the window.

    Note: survival is judged on the table as given. A ticker kept because it
    was listed before the window but with no row exactly on ``window_start``
    loses that evidence once clipped, so re-pruning an already-clipped table is
    only an exact no-op when boundary rows exist.
    """
    if not window_start < window_end:
        raise ValueError(f"window_start {window_start} must precede window_end {window_end}")
    excluded = set(exclude)
    groups: dict[str, list[EodRow]] = {}
    for ticker in table.tickers:
        if ticker in excluded:
            continue
        if table.first_date(ticker) > window_start or table.last_date(ticker) < window_end:
            continue
        clipped = [
            row for row in table.rows_for(ticker) if window_start <= row.date <= window_end
        ]
        if clipped:
            groups[ticker] = clipped
    if not groups:
        raise DataError(
            f"no tickers survive the window {window_start}..{window_end}"
        )
    return PriceHistoryTable(groups)


class PricePanel:
    """Close prices aligned on a shared calendar (rows = dates, cols = tickers).

    ``values`` is a read-only float matrix; missing closes are NaN.
    """

    def __init__(
        self,
        calendar: Sequence[date],
        tickers: Sequence[str],
        values: np.ndarray,
    ):
        calendar = tuple(calendar)
        tickers = tuple(tickers)
        values = np.asarray(values, dtype=np.float64)
        if any(b <= a for a, b in zip(calendar, calendar[1:])):
            raise ValueError("calendar must be strictly increasing")
        if values.shape != (len(calendar), len(tickers)):
            raise ValueError(
                f"values shape {values.shape} != ({len(calendar)}, {len(tickers)})"
            )
        if len(set(tickers)) != len(tickers):
            raise ValueError("duplicate tickers")
        present = ~np.isnan(values)
        if len(calendar) and not present.any(axis=0).all():
            empty = [t for t, ok in zip(tickers, present.any(axis=0)) if not ok]
            raise ValueError(f"tickers with no data: {empty}")
        values = values.copy()
        values.setflags(write=False)
        self.calendar = calendar
        self.tickers = tickers
        self.values = values

    def column(self, ticker: str) -> np.ndarray:
        return self.values[:, self.tickers.index(ticker)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PricePanel):
            return NotImplemented
        return (
            self.calendar == other.calendar
            and self.tickers == other.tickers
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    def __repr__(self) -> str:
        return f"{type(self).__name__}({len(self.calendar)} dates, {len(self.tickers)} tickers)"


def build_panel(table: PriceHistoryTable, calendar_policy: str = "union") -> PricePanel:
    """Align all tickers onto one calendar.

    ``union`` keeps every date any ticker traded (gaps become NaN);
    ``intersection`` keeps only dates where every ticker traded (dense).
    """
    if calendar_policy not in CALENDAR_POLICIES:
        raise ValueError(f"calendar_policy must be one of {CALENDAR_POLICIES}")
    tickers = table.tickers
    if not tickers:
        raise ValueError("empty table")
    date_sets = [set(r.date for r in table.rows_for(t)) for t in tickers]
    if calendar_policy == "union":
        calendar = sorted(set().union(*date_sets))
    else:
        common = set.intersection(*date_sets)
        if not common:
            raise DataError("intersection calendar is empty: no shared trading dates")
        calendar = sorted(common)
    index = {d: i for i, d in enumerate(calendar)}
    values = np.full((len(calendar), len(tickers)), np.nan)
    for j, ticker in enumerate(tickers):
        for row in table.rows_for(ticker):
            i = index.get(row.date)
            if i is not None:
                values[i, j] = row.close
    return PricePanel(calendar, tickers, values)


# ---------------------------------------------------------------------------
# serialization


def table_to_csv(table: PriceHistoryTable) -> str:
    """Canonical CSV for a table: full EoD header, rows sorted by (ticker, date)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(EOD_FIELDS)
    for row in table:
        writer.writerow(
            [
                row.ticker,
                row.date.isoformat(),
                "" if row.open is None else repr(row.open),
                "" if row.high is None else repr(row.high),
                "" if row.low is None else repr(row.low),
                repr(row.close),
                "" if row.volume is None else repr(row.volume),
            ]
        )
    return out.getvalue()


def _panel_to_csv(calendar: Sequence[date], tickers: Sequence[str], values: np.ndarray) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["date", *tickers])
    for i, day in enumerate(calendar):
        cells = [
            "" if np.isnan(v) else repr(float(v)) for v in values[i]
        ]
        writer.writerow([day.isoformat(), *cells])
    return out.getvalue()


def panel_to_csv(panel: PricePanel) -> str:
    """Panel CSV: header ``date,<tickers...>``, empty cell = missing."""
    return _panel_to_csv(panel.calendar, panel.tickers, panel.values)


def read_panel_csv(source: bytes | str | IO[bytes] | IO[str]) -> PricePanel:
    """Read a panel written by :func:`panel_to_csv` (ISO dates, repr floats)."""
    reader = csv.reader(_as_text_lines(source))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty panel file", line=1) from None
    if not header or header[0] != "date":
        raise ParseError("panel header must start with 'date'", line=1)
    tickers = header[1:]
    if not tickers:
        raise ParseError("panel has no ticker columns", line=1)
    calendar: list[date] = []
    rows: list[list[float]] = []
    for record in reader:
        line = reader.line_num
        if not record:
            continue
        if len(record) != len(header):
            raise ParseError(
                f"expected {len(header)} cells, got {len(record)}", line=line
            )
        try:
            calendar.append(date.fromisoformat(record[0]))
        except ValueError:
            raise ParseError(f"bad date {record[0]!r}", line=line) from None
        row = []
        for ticker, cell in zip(tickers, record[1:]):
            if cell == "":
                row.append(np.nan)
                continue
            try:
                row.append(float(cell))
            except ValueError:
                raise ParseError(f"{ticker}: bad price {cell!r}", line=line) from None
        rows.append(row)
    if not rows:
        raise ParseError("panel has no data rows")
    try:
        return PricePanel(calendar, tickers, np.array(rows))
    except ValueError as exc:
        raise ParseError(f"invalid panel: {exc}") from exc
