"""Pearson correlation over gapped series and the full ticker-pair matrix.

Coefficients are computed on pairwise-complete observations with a two-pass
mean (mean first, then products of deviations), population denominators, and a
fixed per-pair reduction order. Every matrix entry comes from the same scalar
routine regardless of thread count, so output is bitwise reproducible.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InternalError
from .returns import ReturnsPanel

#: |rho| may exceed 1 by at most this much before clamping; more is a kernel bug
RHO_CLAMP_TOL = 1e-12

DEFAULT_MIN_OVERLAP = 100


class PairCorrelation(NamedTuple):
    """Outcome for one ticker pair: coefficient (None when undefined) + overlap."""

    rho: float | None
    overlap: int


def _pair_stats(
    x: np.ndarray,
    y: np.ndarray,
    present_x: np.ndarray,
    present_y: np.ndarray,
    min_overlap: int,
) -> tuple[float, int]:
    """Correlation over the joint support; NaN signals an undefined coefficient."""
    both = present_x & present_y
    n = int(np.count_nonzero(both))
    if n < min_overlap or n < 2:
        return math.nan, n
    xs = x[both]
    ys = y[both]
    mean_x = float(np.sum(xs)) / n
    mean_y = float(np.sum(ys)) / n
    dx = xs - mean_x
    dy = ys - mean_y
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx <= 0.0 or syy <= 0.0:
        return math.nan, n
    sxy = float(np.dot(dx, dy))
    # population covariance over population sigmas; the 1/n factors cancel, so
    # divide once by sqrt(sxx*syy) and keep perfect (anti)correlations exact
    product = sxx * syy
    if math.isfinite(product) and product > 0.0:
        denom = math.sqrt(product)
    else:  # overflow/underflow of the product; split the square root
        denom = math.sqrt(sxx) * math.sqrt(syy)
    if denom == 0.0 or math.isinf(denom):
        return math.nan, n
    rho = sxy / denom
    if abs(rho) > 1.0 + RHO_CLAMP_TOL:
        raise InternalError(f"correlation kernel produced |rho| = {abs(rho)} > 1")
    return min(1.0, max(-1.0, rho)), n


def pearson(
    x: Sequence[float] | np.ndarray,
    y: Sequence[float] | np.ndarray,
    min_overlap: int = 2,
) -> PairCorrelation:
    """Pearson coefficient of two series sharing a calendar; NaN marks gaps.

    Returns ``(None, overlap)`` instead of raising when the overlap is below
    ``min_overlap`` or either series is constant on the joint support.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if x.shape != y.shape:
        raise ValueError(f"mismatched calendar lengths: {x.shape[0]} vs {y.shape[0]}")
    if min_overlap < 1:
        raise ValueError("min_overlap must be >= 1")
    rho, n = _pair_stats(x, y, ~np.isnan(x), ~np.isnan(y), min_overlap)
    return PairCorrelation(None if math.isnan(rho) else rho, n)


class CorrelationMatrix:
    """Symmetric ticker-by-ticker Pearson matrix with per-pair overlap counts.

    ``rho`` uses NaN for undefined coefficients; ``overlap`` always holds the
    number of dates both series were present.
    """

    def __init__(self, tickers: Sequence[str], rho: np.ndarray, overlap: np.ndarray):
        tickers = tuple(tickers)
        rho = np.asarray(rho, dtype=np.float64)
        overlap = np.asarray(overlap, dtype=np.int64)
        n = len(tickers)
        if rho.shape != (n, n) or overlap.shape != (n, n):
            raise ValueError(f"matrices must be {n}x{n}")
        if len(set(tickers)) != n:
            raise ValueError("duplicate tickers")
        rho = rho.copy()
        overlap = overlap.copy()
        rho.setflags(write=False)
        overlap.setflags(write=False)
        self.tickers = tickers
        self.rho = rho
        self.overlap = overlap
        self._index = {t: i for i, t in enumerate(tickers)}

    def get(self, a: str, b: str) -> PairCorrelation:
        value = float(self.rho[self._index[a], self._index[b]])
        count = int(self.overlap[self._index[a], self._index[b]])
        return PairCorrelation(None if math.isnan(value) else value, count)

    def defined_pairs(self):
        """Yield (ticker_a, ticker_b, rho, overlap) for each defined distinct
        pair, upper triangle in matrix order."""
        n = len(self.tickers)
        for i in range(n):
            for j in range(i + 1, n):
                value = self.rho[i, j]
                if not math.isnan(value):
                    yield (
                        self.tickers[i],
                        self.tickers[j],
                        float(value),
                        int(self.overlap[i, j]),
                    )

    def __eq__(self, other) -> bool:
        if not isinstance(other, CorrelationMatrix):
            return NotImplemented
        return (
            self.tickers == other.tickers
            and np.array_equal(self.rho, other.rho, equal_nan=True)
            and np.array_equal(self.overlap, other.overlap)
        )

    def __repr__(self) -> str:
        return f"CorrelationMatrix({len(self.tickers)} tickers)"


def correlation_matrix(
    returns: ReturnsPanel,
    min_overlap: int = DEFAULT_MIN_OVERLAP,
    threads: int = 1,
) -> CorrelationMatrix:
    """Pearson coefficients for all ticker pairs of a returns panel.

    The diagonal is exactly 1.0 whenever a ticker has at least two observations
    and nonzero variance (min_overlap applies to distinct pairs only). Pairs
    are independent, so ``threads > 1`` distributes them without changing a
    single bit of the result.
    """
    tickers = returns.tickers
    n = len(tickers)
    if n < 2:
        raise ValueError("need at least 2 tickers")
    if min_overlap < 1:
        raise ValueError("min_overlap must be >= 1")

    columns = [np.ascontiguousarray(returns.values[:, j]) for j in range(n)]
    present = [~np.isnan(col) for col in columns]

    rho = np.full((n, n), np.nan)
    overlap = np.zeros((n, n), dtype=np.int64)

    for j in range(n):
        count = int(np.count_nonzero(present[j]))
        overlap[j, j] = count
        if count >= 2:
            xs = columns[j][present[j]]
            dx = xs - float(np.sum(xs)) / count
            if float(np.dot(dx, dx)) > 0.0:
                rho[j, j] = 1.0

    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def fill(chunk: list[tuple[int, int]]) -> None:
        for i, j in chunk:
            value, count = _pair_stats(
                columns[i], columns[j], present[i], present[j], min_overlap
            )
            rho[i, j] = rho[j, i] = value
            overlap[i, j] = overlap[j, i] = count

    if threads > 1 and len(pairs) > 1:
        workers = min(threads, len(pairs))
        step = (len(pairs) + workers - 1) // workers
        chunks = [pairs[k : k + step] for k in range(0, len(pairs), step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, chunks))
    else:
        fill(pairs)

    return CorrelationMatrix(tickers, rho, overlap)


def top_pairs(matrix: CorrelationMatrix, k: int) -> list[tuple[str, str, float]]:
    """The k most correlated distinct pairs, descending; ties resolve
    lexicographically by ticker pair. Returns fewer when fewer are defined."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(
        ((a, b, value) for a, b, value, _ in matrix.defined_pairs()),
        key=lambda item: (-item[2], item[0], item[1]),
    )
    return ranked[:k]


# ---------------------------------------------------------------------------
# serialization


def matrix_to_csv(matrix: CorrelationMatrix) -> str:
    """Square CSV with ticker header row and column; empty cell = undefined."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["", *matrix.tickers])
    for i, ticker in enumerate(matrix.tickers):
        cells = [
            "" if math.isnan(v) else repr(float(v)) for v in matrix.rho[i]
        ]
        writer.writerow([ticker, *cells])
    return out.getvalue()


def pairs_to_csv(matrix: CorrelationMatrix) -> str:
    """Long-form CSV of defined pairs: ticker_a,ticker_b,rho,overlap."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["ticker_a", "ticker_b", "rho", "overlap"])
    for a, b, value, count in matrix.defined_pairs():
        writer.writerow([a, b, repr(value), count])
    return out.getvalue()
