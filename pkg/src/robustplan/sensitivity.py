"""Dual multipliers read as forecast prices.

Each multiplier lambda_i measures the guaranteed marginal improvement of the
robust objective per unit tightening of forecast bound i: for any change
delta (positive entries tighten), the re-solved objective is at least
base + lambda . delta. The bound is one-sided and local — multipliers from a
degenerate optimum are one valid pricing among possibly many, and the bound
holds for any of them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .forecast import ForecastSet, IndicatorInterval, NegatedIndicatorInterval
from .solver import PlanningSolution

UPPER_BOUND = "upper_bound"
LOWER_BOUND = "lower_bound"
GENERIC = "generic"


def forecast_kind(fn) -> str:
    """Classify a constraint function as an upper/lower probability bound or generic."""
    if isinstance(fn, IndicatorInterval):
        return UPPER_BOUND
    if isinstance(fn, NegatedIndicatorInterval):
        return LOWER_BOUND
    return GENERIC


@dataclass(frozen=True)
class SensitivityEntry:
    """One forecast's multiplier plus enough metadata to name it to a user.

    ``kind`` distinguishes upper/lower probability bounds from generic
    expectation constraints; ``interval_index`` is the 0-based cell the bound
    belongs to when the forecast set came from prediction intervals.
    """

    forecast_index: int
    kind: str
    interval_index: int | None
    value: float


@dataclass(frozen=True)
class SensitivityReport:
    """Multipliers sorted most-valuable-first, with the objective they price."""

    entries: tuple[SensitivityEntry, ...]
    base_objective: float


def sensitivities(sol: PlanningSolution, fs: ForecastSet) -> SensitivityReport:
    """Rank the forecasts of a solved instance by their dual price.

    Entries are sorted by descending multiplier, ties broken by lowest
    forecast index; the values are the solver's multipliers verbatim.
    """
    if sol.lambda_star.shape != (len(fs.forecasts),):
        raise ValidationError(
            "lambda_star",
            f"solution prices {sol.lambda_star.shape[0]} forecasts, set has {len(fs.forecasts)}",
        )
    m = fs.interval_count
    entries = []
    for i, fc in enumerate(fs.forecasts):
        interval_index = None if m is None else (i if i < m else i - m)
        entries.append(
            SensitivityEntry(i, forecast_kind(fc.function), interval_index, float(sol.lambda_star[i]))
        )
    entries.sort(key=lambda e: (-e.value, e.forecast_index))
    return SensitivityReport(entries=tuple(entries), base_objective=sol.objective)


def lower_bound_after_change(report: SensitivityReport, delta_eps) -> float:
    """Guaranteed objective after changing bounds by delta_eps.

    Positive entries tighten the corresponding forecast (for prediction
    intervals: lower an upper probability bound, or raise a lower one). The
    result lower-bounds the re-solved objective whenever the changed set
    still admits a distribution.
    """
    delta = np.asarray(delta_eps, dtype=float)
    if delta.shape != (len(report.entries),):
        raise ValidationError(
            "delta_eps", f"expected {len(report.entries)} entries, got {delta.shape}"
        )
    return float(
        report.base_objective + sum(e.value * delta[e.forecast_index] for e in report.entries)
    )
