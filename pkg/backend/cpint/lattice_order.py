"""Order and lattice structure: f <= g iff F <= G pointwise on the extended line."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .config import settings
from .errors import BudgetExceeded
from .function_core import (
    NEG_INF,
    POS_INF,
    ArrayLike,
    ContinuousFunctionBar,
    TestFunction,
    decompactify,
    extremum,
    grid_peaks,
    pointwise,
    refine_peaks,
)
from .integral_core import Distribution


class OrderRelation(str, Enum):
    less_or_equal = "LessOrEqual"
    greater_or_equal = "GreaterOrEqual"
    equal = "Equal"
    incomparable = "Incomparable"


@dataclass(frozen=True)
class OrderResult:
    relation: OrderRelation
    witnesses: Tuple[float, ...] = ()


def compare(f: Distribution, g: Distribution, tol: Optional[float] = None) -> OrderResult:
    """Pointwise comparison of primitives within a tolerance band.

    Incomparable results carry one point where F > G and one where F < G,
    followed by the grid locations where F - G changes sign.
    """
    band = settings.equality_tol if tol is None else tol

    def gap(x: ArrayLike) -> np.ndarray:
        return np.asarray(f(x), dtype=float) - np.asarray(g(x), dtype=float)

    x_hi, high = extremum(gap, NEG_INF, POS_INF, +1)
    x_lo, low = extremum(gap, NEG_INF, POS_INF, -1)
    if high <= band and low >= -band:
        return OrderResult(OrderRelation.equal)
    if high <= band:
        return OrderResult(OrderRelation.less_or_equal, (x_lo,))
    if low >= -band:
        return OrderResult(OrderRelation.greater_or_equal, (x_hi,))
    u = np.linspace(-1.0, 1.0, settings.audit_grid_points)
    d = gap(decompactify(u))
    signs = np.sign(np.where(np.abs(d) <= band, 0.0, d))
    nonzero = np.flatnonzero(signs)
    flips = [float(decompactify(0.5 * (u[i] + u[j])))
             for i, j in zip(nonzero, nonzero[1:]) if signs[i] != signs[j]]
    return OrderResult(OrderRelation.incomparable, (x_hi, x_lo, *flips))


def _combine(fn, f: Distribution, g: Distribution, label: str) -> Distribution:
    F = pointwise(fn, f.primitive, g.primitive)
    return Distribution(ContinuousFunctionBar(F.evaluator, 0.0, F.limit_pos), label)


def lattice_op(f: Distribution, g: Distribution, kind: str = "join") -> Distribution:
    if kind == "join":
        return _combine(np.maximum, f, g, "join")
    if kind == "meet":
        return _combine(np.minimum, f, g, "meet")
    raise ValueError(f"unknown lattice operation {kind!r}")


def parts(f: Distribution) -> Tuple[Distribution, Distribution, Distribution]:
    """(f+, f-, |f|) with F = F+ - F- and |F| = F+ + F-, F- = -(F ^ 0)."""
    F = f.primitive

    def lift(fn, label: str) -> Distribution:
        part = pointwise(fn, F)
        return Distribution(ContinuousFunctionBar(part.evaluator, 0.0, part.limit_pos), label)

    return (
        lift(lambda v: np.maximum(v, 0.0), "plus"),
        lift(lambda v: -np.minimum(v, 0.0), "minus"),
        lift(np.abs, "abs"),
    )


@dataclass(frozen=True)
class AbsNormResult:
    value: float
    divergent: bool
    lower_bound: float
    levels: int


def _extrema_nodes(F: ContinuousFunctionBar, tol: float, depth_cap: int) -> np.ndarray:
    u = np.linspace(-1.0, 1.0, settings.audit_grid_points)
    v = np.asarray(F.on_compact(u), dtype=float)
    nodes = []
    for sign in (+1, -1):
        def objective(uu: np.ndarray, s: int = sign) -> np.ndarray:
            return s * np.asarray(F.on_compact(uu), dtype=float)

        peaks = grid_peaks(sign * v)
        located, _, _ = refine_peaks(objective, u, sign * v, peaks, tol, depth_cap)
        nodes.append(located)
    return np.concatenate(nodes)


def abs_norm(f: Distribution, budget: Optional[int] = None, tol: Optional[float] = None,
             depth_cap: Optional[int] = None) -> AbsNormResult:
    """Variation of the primitive by nested partition sums in the compact coordinate.

    Every level inserts the refined local extrema of F, so piecewise monotone
    primitives settle at the first refinement.
    """
    budget = settings.max_cells if budget is None else budget
    tol = settings.tol if tol is None else tol
    depth_cap = settings.budget if depth_cap is None else depth_cap
    F = f.primitive
    extrema = _extrema_nodes(F, tol, depth_cap)
    sums, increments = [], []
    level = 0
    while True:
        size = (settings.audit_grid_points - 1) * 2**level + 1
        if size > budget:
            break
        u = np.unique(np.concatenate([np.linspace(-1.0, 1.0, size), extrema]))
        total = float(np.sum(np.abs(np.diff(np.asarray(F.on_compact(u), dtype=float)))))
        if sums:
            step = total - sums[-1]
            if abs(step) <= tol * max(1.0, total):
                return AbsNormResult(total, False, total, level + 1)
            increments.append(step)
        sums.append(total)
        level += 1
        stall = settings.stall_refinements
        recent = increments[-stall:]
        if len(recent) == stall:
            threshold = tol * max(1.0, total)
            if all(d > threshold for d in recent) and all(b > 0.5 * a for a, b in zip(recent, recent[1:])):
                return AbsNormResult(float("inf"), True, total, level)
    if not sums:
        raise BudgetExceeded(f"cell budget {budget} is below the audit grid")
    if len(increments) >= 2 and increments[-1] > 0.5 * increments[-2]:
        return AbsNormResult(float("inf"), True, sums[-1], level)
    raise BudgetExceeded(f"partition sums still settling at {sums[-1]!r} when the cell budget ran out")


def abs_pairing_bound(f: Distribution, phi: TestFunction, budget: Optional[int] = None) -> float:
    """2 VF sup|phi|; infinite when the variation diverges."""
    result = abs_norm(f, budget)
    if result.divergent:
        return float("inf")
    return 2.0 * result.value * phi.sup()
