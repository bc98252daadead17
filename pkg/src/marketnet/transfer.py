"""Cross-company forecast transfer: train on one ticker, score on others.

The forecaster is a windowed autoregressive least-squares baseline fit on a
standardized return series (closed-form normal equations). Transfer error on
network-near tickers should degrade far less than on network-far tickers;
hop distances from the company graph quantify "near".
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import difflib
import numpy as np

from .errors import DataError, UnknownSymbolError
from .network import CompanyGraph, hop_distances
from .returns import ReturnsPanel

DEFAULT_WINDOW = 10
DEFAULT_SPLIT = 0.8


@dataclass(frozen=True)
class Forecaster:
    """One-step-ahead autoregressive predictor on a standardized series.

    ``coefficients[0]`` is the intercept, ``coefficients[k]`` the loading on
    lag k. ``mean``/``scale`` record the fit-time standardization of the
    source series (population standard deviation).
    """

    source: str
    window: int
    coefficients: np.ndarray
    mean: float
    scale: float

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        coefficients = np.asarray(self.coefficients, dtype=np.float64)
        if coefficients.shape != (self.window + 1,):
            raise ValueError(
                f"need {self.window + 1} coefficients, got {coefficients.shape}"
            )
        if not np.all(np.isfinite(coefficients)):
            raise ValueError("coefficients must be finite")
        coefficients = coefficients.copy()
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)


@dataclass(frozen=True)
class ErrorReport:
    """Forecast error of a model on one target ticker (standardized scale)."""

    target: str
    rmse: float
    mae: float
    n_predictions: int

    def __post_init__(self):
        if self.n_predictions < 1:
            raise ValueError("n_predictions must be >= 1")
        if not (self.rmse >= 0 and self.mae >= 0):
            raise ValueError("errors must be non-negative")
        if self.rmse < self.mae * (1 - 1e-12):
            raise ValueError(f"rmse {self.rmse} < mae {self.mae}")


@dataclass(frozen=True)
class TransferResult:
    """One row of a transfer experiment: error report + network hop distance
    (math.inf when the target is unreachable or absent from the graph)."""

    report: ErrorReport
    hop_distance: int | float


def _validate_series(series: np.ndarray, label: str) -> np.ndarray:
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if np.isnan(series).any():
        raise DataError(f"{label} contains missing returns")
    return series


def _standardize(series: np.ndarray, label: str) -> tuple[np.ndarray, float, float]:
    mean = float(np.mean(series))
    scale = float(np.std(series))
    if scale == 0.0:
        raise DataError(f"{label} is constant; cannot standardize")
    return (series - mean) / scale, mean, scale


def _lag_design(z: np.ndarray, window: int) -> tuple[np.ndarray, np.ndarray]:
    rows = len(z) - window
    design = np.empty((rows, window + 1))
    design[:, 0] = 1.0
    for k in range(1, window + 1):
        design[:, k] = z[window - k : window - k + rows]
    return design, z[window:]


def fit_forecaster(train: Sequence[float] | np.ndarray, window: int, source: str = "") -> Forecaster:
    """Least-squares AR(window) fit on the standardized training series."""
    if window < 1:
        raise ValueError("window must be >= 1")
    series = _validate_series(train, f"training series for {source or 'model'}")
    if len(series) < window + 2:
        raise DataError(
            f"training series too short: {len(series)} rows, "
            f"need at least {window + 2} for window {window}"
        )
    z, mean, scale = _standardize(series, f"training series for {source or 'model'}")
    design, target = _lag_design(z, window)
    gram = design.T @ design
    moment = design.T @ target
    try:
        coefficients = np.linalg.solve(gram, moment)
    except np.linalg.LinAlgError:
        raise DataError(
            f"singular design matrix for window {window}; try a smaller window"
        ) from None
    if not np.all(np.isfinite(coefficients)):
        raise DataError(
            f"degenerate fit for window {window}; try a smaller window"
        )
    return Forecaster(source=source, window=window, coefficients=coefficients,
                      mean=mean, scale=scale)


def error_stats(errors: np.ndarray) -> tuple[float, float]:
    """(rmse, mae) of a vector of prediction errors."""
    errors = np.asarray(errors, dtype=np.float64)
    rmse = math.sqrt(float(np.mean(errors * errors)))
    mae = float(np.mean(np.abs(errors)))
    return rmse, mae


def evaluate(model: Forecaster, target: Sequence[float] | np.ndarray,
             target_name: str = "") -> ErrorReport:
    """One-step-ahead error of ``model`` on a target series standardized by
    the target's own mean and scale."""
    name = target_name or model.source
    series = _validate_series(target, f"target series for {name}")
    if len(series) < model.window + 1:
        raise DataError(
            f"target series too short: {len(series)} rows, "
            f"need at least {model.window + 1} for window {model.window}"
        )
    z, _, _ = _standardize(series, f"target series for {name}")
    design, actual = _lag_design(z, model.window)
    predictions = design @ model.coefficients
    rmse, mae = error_stats(actual - predictions)
    return ErrorReport(target=name, rmse=rmse, mae=mae, n_predictions=len(actual))


def _gap_free_column(panel: ReturnsPanel, ticker: str) -> np.ndarray:
    if ticker not in panel.tickers:
        suggestions = tuple(
            difflib.get_close_matches(ticker, panel.tickers, n=5, cutoff=0.4)
        )
        raise UnknownSymbolError(ticker, suggestions)
    return panel.column(ticker)


def transfer_experiment(
    panel: ReturnsPanel,
    graph: CompanyGraph,
    source: str,
    targets: Sequence[str],
    window: int = DEFAULT_WINDOW,
    split: float = DEFAULT_SPLIT,
    threads: int = 1,
) -> tuple[TransferResult, ...]:
    """Fit on the source's chronological training split, score every target on
    its test split, and attach graph hop distances; rows sorted by rmse.

    Each series must be gap-free on its used span (training span for the
    source, test span for targets); a gap raises naming the ticker.
    """
    if not 0.0 < split < 1.0:
        raise ValueError(f"split must be in (0, 1), got {split}")
    if not targets:
        raise ValueError("need at least one target")
    rows = len(panel.calendar)
    split_index = int(rows * split)
    source_column = _gap_free_column(panel, source)
    train = source_column[:split_index]
    if np.isnan(train).any():
        raise DataError(f"training span for {source} contains missing returns")
    model = fit_forecaster(train, window, source=source)

    test_slices: dict[str, np.ndarray] = {}
    for ticker in targets:
        column = _gap_free_column(panel, ticker)
        segment = column[split_index:]
        if np.isnan(segment).any():
            raise DataError(f"evaluation span for {ticker} contains missing returns")
        test_slices[ticker] = segment

    def score(ticker: str) -> ErrorReport:
        return evaluate(model, test_slices[ticker], target_name=ticker)

    ordered = list(dict.fromkeys(targets))
    if threads > 1 and len(ordered) > 1:
        with ThreadPoolExecutor(max_workers=min(threads, len(ordered))) as pool:
            reports = list(pool.map(score, ordered))
    else:
        reports = [score(t) for t in ordered]

    hops = hop_distances(graph, source)
    results = [
        TransferResult(report, hops.get(report.target, math.inf))
        for report in reports
    ]
    results.sort(key=lambda r: (r.report.rmse, r.report.target))
    return tuple(results)


def report_to_csv(results: Sequence[TransferResult]) -> str:
    """Report CSV: ticker,rmse,mae,n_predictions,hop_distance."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["ticker", "rmse", "mae", "n_predictions", "hop_distance"])
    for result in results:
        report = result.report
        hop = result.hop_distance
        writer.writerow(
            [
                report.target,
                repr(report.rmse),
                repr(report.mae),
                report.n_predictions,
                "inf" if hop == math.inf else int(hop),
            ]
        )
    return out.getvalue()
