"""Robust planning against every distribution consistent with the forecasts.

The planner picks a decision b maximizing the worst-case expected utility
over the ambiguity set — all distributions F on the outcome domain with
E_F[g_i(x)] <= eps_i for every forecast i. Dualizing the inner minimization
turns the max-min into a single maximization over (b, lambda, eta):

    maximize  -sum_i lambda_i * eps_i - eta
    s.t.      J(x, b) + sum_i lambda_i * g_i(x) + eta >= 0   for all x,
              lambda >= 0.

The pointwise constraint is handled two ways. When every g_i is an interval
indicator, the domain splits into finitely many cells on which all g_i are
constant and J (concave, piecewise affine) attains its minimum at cell
endpoints, so the continuum of constraints collapses to an exact finite LP.
Otherwise an exchange loop grows a finite working set of points until the
most violated point found by a dense grid search is within tolerance.

The dual LP always admits feasible points (eta is free), and its value is
finite exactly when the ambiguity set is nonempty; an unbounded solve
therefore reports AmbiguitySetEmpty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguitySetEmpty,
    ConvergenceFailure,
    NumericalFailure,
    ValidationError,
)
from .forecast import (
    BOUNDARY_SHIFT,
    DiscreteDistribution,
    ForecastSet,
    PredictionIntervals,
    constraint_values,
    to_generic,
)
from .simplex import GE, OPTIMAL, UNBOUNDED, LinearProgram, solve_lp
from .utility import Utility

#: Box applied to the dual variables inside the exchange loop. The finite
#: working-set relaxation of an empty ambiguity set is unbounded, so the box
#: keeps every intermediate LP solvable; a multiplier pressed against it after
#: the violation search converges is the emptiness signal.
MULTIPLIER_BOX = 1e6
OFFSET_BOX = 1e6
_BOX_MARGIN = 1e-3


@dataclass(frozen=True)
class PlanningSolution:
    """Optimal decision plus the dual certificate that prices each forecast.

    ``lambda_star`` is indexed like the ForecastSet that produced it (for
    prediction intervals: upper bounds first, then lower bounds, in interval
    order). ``objective`` equals ``-lambda_star @ bounds - eta_star``: the
    guaranteed worst-case expected utility of playing ``b_star``.
    ``max_violation`` reports the residual of the exchange loop's final
    violation search (None on the exact interval path), and
    ``worst_case_distribution`` is attached only when a primal witness was
    computed separately.
    """

    b_star: float
    lambda_star: np.ndarray
    eta_star: float
    objective: float
    worst_case_distribution: DiscreteDistribution | None = None
    max_violation: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "b_star", float(self.b_star))
        object.__setattr__(self, "eta_star", float(self.eta_star))
        object.__setattr__(self, "objective", float(self.objective))
        object.__setattr__(self, "lambda_star", np.asarray(self.lambda_star, dtype=float).copy())


@dataclass(frozen=True)
class ExchangeConfig:
    """Knobs for the exchange loop on generic (non-indicator) forecasts."""

    initial_grid_points: int = 64
    violation_tolerance: float = 1e-7
    max_rounds: int = 100
    search_grid_points: int = 10_000

    def __post_init__(self):
        if self.initial_grid_points <= 0:
            raise ValidationError("initial_grid_points", f"must be positive, got {self.initial_grid_points}")
        if self.violation_tolerance <= 0:
            raise ValidationError("violation_tolerance", f"must be positive, got {self.violation_tolerance}")
        if self.max_rounds <= 0:
            raise ValidationError("max_rounds", f"must be positive, got {self.max_rounds}")
        if self.search_grid_points < 2:
            raise ValidationError("search_grid_points", f"must be >= 2, got {self.search_grid_points}")


def _check_decision(u: Utility, b: float) -> float:
    lo, hi = u.decision_bounds
    if not lo <= b <= hi:
        raise ValidationError("b", f"decision {b} outside bounds [{lo}, {hi}]")
    return float(b)


def _cell_rows(fs: ForecastSet) -> list[tuple[np.ndarray, float]]:
    """Finite (g-vector, x) pairs equivalent to the pointwise dual constraint.

    Valid when every forecast is an interval indicator: between consecutive
    endpoints all g_i are constant (their value at the cell's left end, by the
    half-open convention), and the concave piecewise-affine utility attains
    its minimum over the cell's closure at one of the two ends. The isolated
    top point of the domain gets its own row since no half-open cell covers
    it.
    """
    lo, hi = fs.domain.lower, fs.domain.upper
    cuts = np.array(sorted({lo, hi, *(e for e in fs.indicator_endpoints() if lo < e < hi)}))
    if fs.forecasts:
        g_at_cuts = np.vstack([constraint_values(fc.function, cuts) for fc in fs.forecasts])
    else:
        g_at_cuts = np.zeros((0, cuts.size))
    rows: dict[tuple, tuple[np.ndarray, float]] = {}
    for j in range(cuts.size - 1):
        g = g_at_cuts[:, j]
        for x in (cuts[j], cuts[j + 1]):
            rows.setdefault((tuple(g), float(x)), (g, float(x)))
    g_top = g_at_cuts[:, -1]
    rows.setdefault((tuple(g_top), float(cuts[-1])), (g_top, float(cuts[-1])))
    return list(rows.values())


def _dual_lp_solution(
    fs: ForecastSet,
    u: Utility,
    point_rows: list[tuple[np.ndarray, float]],
    b_fixed: float | None,
    boxed: bool,
) -> PlanningSolution:
    """Solve the dual LP restricted to the given (g-vector, x) rows.

    Variables are (b, lambda_1..lambda_n, eta) — b present only when not
    fixed. Each row contributes one constraint per utility piece via the
    hypograph trick: J(x, b) >= -(...) iff every affine piece is.
    """
    n = len(fs.forecasts)
    b_var = b_fixed is None
    offset = 1 if b_var else 0
    nvar = offset + n + 1

    matrix = []
    rhs = []
    for g, x in point_rows:
        for a, c, d in u.pieces:
            coeffs = np.zeros(nvar)
            if b_var:
                coeffs[0] = d
            coeffs[offset : offset + n] = g
            coeffs[-1] = 1.0
            matrix.append(coeffs)
            rhs.append(-(a + c * x) - (0.0 if b_var else d * b_fixed))

    objective = np.zeros(nvar)
    objective[offset : offset + n] = -fs.bounds
    objective[-1] = -1.0
    lower = np.zeros(nvar)
    upper = np.full(nvar, MULTIPLIER_BOX if boxed else np.inf)
    if b_var:
        lower[0], upper[0] = u.decision_bounds
    lower[-1] = -OFFSET_BOX if boxed else -np.inf
    upper[-1] = OFFSET_BOX if boxed else np.inf

    lp = LinearProgram(
        objective=objective,
        matrix=np.vstack(matrix),
        senses=(GE,) * len(matrix),
        rhs=np.array(rhs),
        lower=lower,
        upper=upper,
        sense="maximize",
    )
    result = solve_lp(lp)
    if result.status == UNBOUNDED:
        raise AmbiguitySetEmpty("no distribution satisfies every forecast bound")
    if result.status != OPTIMAL:
        # eta is free (or generously boxed), which makes every row satisfiable
        # for reasonable utilities; reaching this indicates a numerical breakdown.
        raise NumericalFailure(f"dual subproblem unexpectedly {result.status}")
    x = result.solution
    return PlanningSolution(
        b_star=x[0] if b_var else b_fixed,
        lambda_star=x[offset : offset + n],
        eta_star=x[-1],
        objective=result.objective_value,
    )


def _solve_indicator(fs: ForecastSet, u: Utility, b_fixed: float | None = None) -> PlanningSolution:
    """Exact dual solve for indicator-only forecast sets."""
    return _dual_lp_solution(fs, u, _cell_rows(fs), b_fixed, boxed=False)


def solve_prediction_intervals(pi: PredictionIntervals, u: Utility) -> PlanningSolution:
    """Optimal robust decision for prediction-interval forecasts (exact LP).

    The returned multipliers follow the to_generic ordering: one per upper
    probability bound, then one per lower bound, in interval order.
    """
    return _solve_indicator(to_generic(pi), u)


def worst_case_value(fs: ForecastSet, u: Utility, b: float) -> tuple[float, np.ndarray, float]:
    """Worst-case expected utility of a fixed decision, with its dual prices.

    Returns (value, multipliers, offset): the tightest guaranteed expected
    utility over the ambiguity set, via the exact finite reduction when all
    forecasts are interval indicators and the exchange loop otherwise.
    """
    b = _check_decision(u, b)
    if fs.all_indicators():
        sol = _solve_indicator(fs, u, b_fixed=b)
    else:
        sol = _exchange(fs, u, ExchangeConfig(), b_fixed=b)
    return sol.objective, sol.lambda_star, sol.eta_star


def solve_forecast_set(fs: ForecastSet, u: Utility, cfg: ExchangeConfig | None = None) -> PlanningSolution:
    """Optimal robust decision for any forecast set.

    Dispatches to the exact interval reduction when possible, otherwise to
    the exchange loop with the given (or default) configuration.
    """
    if fs.all_indicators():
        return _solve_indicator(fs, u)
    return _exchange(fs, u, cfg or ExchangeConfig(), b_fixed=None)


def _special_points(fs: ForecastSet, u: Utility, bs: list[float]) -> list[float]:
    lo, hi = fs.domain.lower, fs.domain.upper
    points = []
    for e in fs.indicator_endpoints():
        points.append(e)
        if e - BOUNDARY_SHIFT >= lo:
            points.append(e - BOUNDARY_SHIFT)
    for b in bs:
        points.extend(u.outcome_kinks(b, lo, hi))
    return points


def _violation_search(
    fs: ForecastSet, u: Utility, sol: PlanningSolution, cfg: ExchangeConfig
) -> tuple[float, float]:
    """Most violated point of the pointwise dual constraint at the iterate."""
    lo, hi = fs.domain.lower, fs.domain.upper
    xs = np.linspace(lo, hi, cfg.search_grid_points)
    extras = _special_points(fs, u, [sol.b_star])
    if extras:
        xs = np.concatenate([xs, np.clip(np.array(extras), lo, hi)])
    xs = np.unique(xs)
    residual = u.values_at(xs, sol.b_star) + sol.eta_star
    if fs.forecasts:
        g = np.vstack([constraint_values(fc.function, xs) for fc in fs.forecasts])
        residual = residual + sol.lambda_star @ g
    worst = int(np.argmin(residual))
    return float(xs[worst]), float(residual[worst])


def _exchange(fs: ForecastSet, u: Utility, cfg: ExchangeConfig, b_fixed: float | None) -> PlanningSolution:
    """Cutting-plane loop for the semi-infinite dual constraint.

    Solves the dual LP over a growing working set of outcome points, adding
    the most violated point each round until the dense-grid violation search
    comes back within tolerance.
    """
    dlo, dhi = fs.domain.lower, fs.domain.upper
    seed_bs = [b_fixed] if b_fixed is not None else [
        u.decision_bounds[0],
        0.5 * (u.decision_bounds[0] + u.decision_bounds[1]),
        u.decision_bounds[1],
    ]
    seeds = [np.linspace(dlo, dhi, cfg.initial_grid_points), np.array([dlo, dhi])]
    extras = _special_points(fs, u, seed_bs)
    if extras:
        seeds.append(np.array(extras))
    working = np.unique(np.clip(np.concatenate(seeds), dlo, dhi))

    sol: PlanningSolution | None = None
    violation = np.inf
    for _ in range(cfg.max_rounds):
        point_rows = _rows_at_points(fs, working)
        sol = _dual_lp_solution(fs, u, point_rows, b_fixed, boxed=True)
        x_worst, residual = _violation_search(fs, u, sol, cfg)
        violation = max(0.0, -residual)
        if violation <= cfg.violation_tolerance:
            if np.any(sol.lambda_star >= MULTIPLIER_BOX - _BOX_MARGIN) or abs(sol.eta_star) >= OFFSET_BOX - _BOX_MARGIN:
                raise AmbiguitySetEmpty(
                    "dual variables diverged: no distribution satisfies every forecast bound"
                )
            return PlanningSolution(
                b_star=sol.b_star,
                lambda_star=sol.lambda_star,
                eta_star=sol.eta_star,
                objective=sol.objective,
                max_violation=violation,
            )
        working = np.unique(np.append(working, x_worst))

    raise ConvergenceFailure(
        f"exchange loop still violated by {violation:.3e} after {cfg.max_rounds} rounds",
        solution=sol,
        residual=violation,
    )


def _rows_at_points(fs: ForecastSet, xs: np.ndarray) -> list[tuple[np.ndarray, float]]:
    """(g-vector, x) rows for an explicit working set of points."""
    if fs.forecasts:
        g = np.vstack([constraint_values(fc.function, xs) for fc in fs.forecasts])
    else:
        g = np.zeros((0, xs.size))
    return [(g[:, j], float(xs[j])) for j in range(xs.size)]


def solve_generic(fs: ForecastSet, u: Utility, cfg: ExchangeConfig | None = None) -> PlanningSolution:
    """Optimal robust decision for generic expectation constraints.

    Runs the exchange loop regardless of constraint structure; on
    indicator-only sets it agrees with the exact path to within the
    violation tolerance. Raises ConvergenceFailure (carrying the best
    iterate and its residual) if max_rounds is exhausted.
    """
    return _exchange(fs, u, cfg or ExchangeConfig(), b_fixed=None)


def sweep(fs: ForecastSet, u: Utility, grid_size: int) -> list[tuple[float, float]]:
    """Worst-case expected utility across a uniform grid of decisions.

    Returns grid_size (b, value) pairs covering both decision bounds.
    """
    if grid_size < 2:
        raise ValidationError("grid_size", f"must be >= 2, got {grid_size}")
    lo, hi = u.decision_bounds
    return [(float(b), worst_case_value(fs, u, float(b))[0]) for b in np.linspace(lo, hi, grid_size)]


def true_expected(truth: DiscreteDistribution, u: Utility, b: float) -> float:
    """Expected utility of decision b under a known outcome distribution."""
    b = _check_decision(u, b)
    return float(truth.probabilities @ u.values_at(truth.locations, b))
