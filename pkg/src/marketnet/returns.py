"""Closing-price returns under a selectable definition.

A return at row ``t`` exists only when the close is present at both ``t`` and
``t-1``; gaps never produce a return spanning the hole. Columns are computed
by one vectorized expression, so results are identical however the work is
scheduled.
"""

from __future__ import annotations

from datetime import date
from typing import IO, Sequence

import numpy as np

from .errors import DataError
from .ingest import PricePanel, _panel_to_csv

RETURN_MODES = ("simple", "diff", "log")


class ReturnsPanel:
    """Per-day returns aligned on the price calendar minus its first date."""

    def __init__(
        self,
        calendar: Sequence[date],
        tickers: Sequence[str],
        values: np.ndarray,
        mode: str,
    ):
        if mode not in RETURN_MODES:
            raise ValueError(f"mode must be one of {RETURN_MODES}")
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
        values = values.copy()
        values.setflags(write=False)
        self.calendar = calendar
        self.tickers = tickers
        self.values = values
        self.mode = mode

    def column(self, ticker: str) -> np.ndarray:
        return self.values[:, self.tickers.index(ticker)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReturnsPanel):
            return NotImplemented
        return (
            self.calendar == other.calendar
            and self.tickers == other.tickers
            and self.mode == other.mode
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    def __repr__(self) -> str:
        return (
            f"ReturnsPanel({len(self.calendar)} dates, {len(self.tickers)} tickers, "
            f"mode={self.mode!r})"
        )


def compute_returns(panel: PricePanel, mode: str = "simple") -> ReturnsPanel:
    """Convert a price panel into a returns panel.

    Modes: ``simple`` (P_t - P_{t-1}) / P_{t-1}, ``diff`` P_t - P_{t-1},
    ``log`` ln(P_t / P_{t-1}). Missing prices propagate: a gap at either
    endpoint makes the return missing.
    """
    if mode not in RETURN_MODES:
        raise ValueError(f"mode must be one of {RETURN_MODES}")
    if len(panel.calendar) < 2:
        raise DataError("need at least 2 calendar dates to compute returns")
    values = panel.values
    if mode in ("simple", "log"):
        bad = values <= 0
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise DataError(
                f"non-positive close for {panel.tickers[j]} on {panel.calendar[i]}; "
                f"{mode} returns are undefined"
            )
    prev = values[:-1]
    cur = values[1:]
    with np.errstate(invalid="ignore", divide="ignore"):
        if mode == "simple":
            out = (cur - prev) / prev
        elif mode == "diff":
            out = cur - prev
        else:
            out = np.log(cur / prev)
    # NaN at either endpoint already yields NaN; nothing spans a gap.
    return ReturnsPanel(panel.calendar[1:], panel.tickers, out, mode)


def returns_to_csv(panel: ReturnsPanel) -> str:
    """Same layout as the price panel CSV: ``date,<tickers...>``, empty = missing."""
    return _panel_to_csv(panel.calendar, panel.tickers, panel.values)
