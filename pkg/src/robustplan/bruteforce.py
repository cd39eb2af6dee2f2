"""Brute-force primal check path: discretize the distribution and solve directly.

Instead of dualizing, restrict the adversary to distributions supported on a
finite grid and minimize expected utility over the atom probabilities by LP.
With the grid augmented by every indicator endpoint, a just-inside probe for
each (standing in for the half-open boundary), and the utility's outcome
kinks, the discretization is exact for interval forecasts: the concave
piecewise-affine utility attains each cell's minimum at a grid point. This
module exists to verify the dual solver path and refinement traces, not to
replace them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmbiguitySetEmpty, NumericalFailure, ValidationError
from .forecast import DiscreteDistribution, ForecastSet, constraint_values
from .simplex import EQ, INFEASIBLE, LE, OPTIMAL, LinearProgram, solve_lp
from .solver import worst_case_value
from .utility import Utility


@dataclass(frozen=True)
class GridSpec:
    """Discretization: uniform base points plus boundary-probe augmentation."""

    base_points: int = 512
    epsilon_shift: float = 1e-9

    def __post_init__(self):
        if self.base_points < 2:
            raise ValidationError("base_points", f"must be >= 2, got {self.base_points}")
        if self.epsilon_shift <= 0:
            raise ValidationError("epsilon_shift", f"must be > 0, got {self.epsilon_shift}")


def _augmented_grid(fs: ForecastSet, u: Utility, b: float, grid: GridSpec) -> np.ndarray:
    lo, hi = fs.domain.lower, fs.domain.upper
    narrowest = min(
        (fc.function.hi - fc.function.lo for fc in fs.forecasts if hasattr(fc.function, "lo")),
        default=np.inf,
    )
    if grid.epsilon_shift >= narrowest:
        raise ValidationError(
            "epsilon_shift",
            f"{grid.epsilon_shift} must be smaller than the narrowest interval width {narrowest}",
        )
    points = [np.linspace(lo, hi, grid.base_points)]
    endpoints = fs.indicator_endpoints()
    if endpoints:
        points.append(np.array(endpoints))
        probes = np.array(endpoints) - grid.epsilon_shift
        points.append(probes[probes >= lo])
    kinks = u.outcome_kinks(b, lo, hi)
    if kinks:
        points.append(np.array(kinks))
    return np.unique(np.clip(np.concatenate(points), lo, hi))


def brute_force_worst_case(
    fs: ForecastSet, u: Utility, b: float, grid: GridSpec | None = None
) -> tuple[float, DiscreteDistribution]:
    """Minimum expected utility over grid-supported feasible distributions.

    Returns the value and the minimizing distribution (atoms with zero
    probability dropped). Raises AmbiguitySetEmpty when no grid-supported
    distribution satisfies the forecasts.
    """
    grid = grid or GridSpec()
    lo, hi = u.decision_bounds
    if not lo <= b <= hi:
        raise ValidationError("b", f"decision {b} outside bounds [{lo}, {hi}]")
    xs = _augmented_grid(fs, u, b, grid)
    k = xs.size

    rows = [np.ones(k)]
    senses = [EQ]
    rhs = [1.0]
    for fc in fs.forecasts:
        rows.append(constraint_values(fc.function, xs))
        senses.append(LE)
        rhs.append(fc.bound)
    lp = LinearProgram(
        objective=u.values_at(xs, b),
        matrix=np.vstack(rows),
        senses=tuple(senses),
        rhs=np.array(rhs),
        lower=np.zeros(k),
        upper=np.full(k, np.inf),
        sense="minimize",
    )
    result = solve_lp(lp)
    if result.status == INFEASIBLE:
        raise AmbiguitySetEmpty("no grid-supported distribution satisfies every forecast bound")
    if result.status != OPTIMAL:
        # The feasible set is a face of the probability simplex, hence bounded.
        raise NumericalFailure(f"discretized worst-case LP unexpectedly {result.status}")

    keep = result.solution > 1e-12
    probs = result.solution[keep]
    worst = DiscreteDistribution(atoms=tuple(zip(xs[keep], probs / probs.sum())))
    return float(result.objective_value), worst


def brute_force_plan(
    fs: ForecastSet, u: Utility, b_grid: int, grid: GridSpec | None = None
) -> tuple[float, float]:
    """Maximize the discretized worst case over a uniform decision grid.

    Returns (decision, value); ties go to the lowest decision.
    """
    if b_grid < 2:
        raise ValidationError("b_grid", f"must be >= 2, got {b_grid}")
    lo, hi = u.decision_bounds
    best_b, best_value = None, -np.inf
    for b in np.linspace(lo, hi, b_grid):
        value, _ = brute_force_worst_case(fs, u, float(b), grid)
        if value > best_value:
            best_b, best_value = float(b), value
    return best_b, best_value


def duality_gap(fs: ForecastSet, u: Utility, b: float, grid: GridSpec | None = None) -> float:
    """|discretized primal minus dual solver| at a fixed decision."""
    primal, _ = brute_force_worst_case(fs, u, b, grid)
    dual, _, _ = worst_case_value(fs, u, b)
    return abs(primal - dual)
