"""Panel quadrature for primitives of integrands that may oscillate.

The real line is walked outward from an anchor in blocks whose width grows
with the distance. Each block is sampled until its sign-change count is
stable, zeros are refined by bisection, and every panel between consecutive
zeros is integrated with Gauss-Legendre.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .config import settings
from .constants import GAUSS_LEGENDRE_ORDER
from .errors import NoLimitAtInfinity
from .function_core import ArrayLike, Evaluator, decompactify, detect_limit

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_LEGENDRE_ORDER)

BLOCKS_PER_BATCH = 16
MIN_SAMPLES = 16
MAX_SAMPLES = 2**16
ZERO_BISECTIONS = 60
MAX_DISTANCE = 2.0**42
AVERAGING_PASSES = 16


def gauss_legendre(fn: Evaluator, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Fixed-order Gauss-Legendre over many panels at once."""
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * GL_NODES[None, :]
    with np.errstate(all="ignore"):
        values = np.asarray(fn(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return half * (values @ GL_WEIGHTS)


@dataclass
class _SideTable:
    bounds: np.ndarray = field(default_factory=lambda: np.zeros(1))
    cumulative: np.ndarray = field(default_factory=lambda: np.zeros(1))
    is_zero: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=bool))
    exhausted: bool = False

    @property
    def reach(self) -> float:
        return float(self.bounds[-1])


class PanelPrimitive:
    """x -> integral of f from anchor to x, vectorized and extended lazily."""

    def __init__(self, integrand: Evaluator, anchor: float = 0.0):
        self.integrand = integrand
        self.anchor = float(anchor)
        self.sup_abs = 0.0
        self.beyond: Dict[int, Optional[float]] = {+1: None, -1: None}
        self._tables = {+1: _SideTable(), -1: _SideTable()}

    def _oriented(self, side: int) -> Evaluator:
        anchor, f = self.anchor, self.integrand
        return lambda s: np.asarray(f(anchor + side * np.asarray(s, dtype=float)), dtype=float)

    def _extend(self, side: int) -> None:
        table = self._tables[side]
        f = self._oriented(side)
        edges = [table.reach]
        for _ in range(BLOCKS_PER_BATCH):
            edges.append(edges[-1] + max(1.0, edges[-1] / 16.0))
        edges = np.array(edges)
        lo, width = edges[:-1], np.diff(edges)

        n, counts, samples, values = MIN_SAMPLES, None, None, None
        while True:
            t = np.linspace(0.0, 1.0, n + 1)
            grid = lo[:, None] + width[:, None] * t[None, :]
            with np.errstate(all="ignore"):
                v = f(grid.ravel()).reshape(grid.shape)
            new_counts = np.sum(v[:, :-1] * v[:, 1:] < 0, axis=1) + np.sum(v[:, 1:-1] == 0, axis=1)
            if counts is not None and np.array_equal(new_counts, counts):
                samples, values = grid, v
                break
            counts = new_counts
            n *= 2
            if n > MAX_SAMPLES:
                table.exhausted = True
                return
        if not np.all(np.isfinite(values)):
            table.exhausted = True
            return
        self.sup_abs = max(self.sup_abs, float(np.max(np.abs(values))))

        row, col = np.nonzero(values[:, :-1] * values[:, 1:] < 0)
        a, b = samples[row, col], samples[row, col + 1]
        fa = values[row, col]
        for _ in range(ZERO_BISECTIONS):
            m = 0.5 * (a + b)
            fm = f(m)
            same = np.sign(fm) == np.sign(fa)
            a, fa = np.where(same, m, a), np.where(same, fm, fa)
            b = np.where(same, b, m)
        zeros = np.concatenate([0.5 * (a + b), samples[:, 1:-1][values[:, 1:-1] == 0]])
        points = np.concatenate([edges[1:], zeros])
        flags = np.concatenate([np.zeros(edges.size - 1, dtype=bool), np.ones(zeros.size, dtype=bool)])
        order = np.argsort(points, kind="stable")
        points, flags = points[order], flags[order]

        starts = np.concatenate([[table.reach], points[:-1]])
        pieces = gauss_legendre(f, starts, points)
        table.bounds = np.concatenate([table.bounds, points])
        table.cumulative = np.concatenate([table.cumulative, table.cumulative[-1] + np.cumsum(pieces)])
        table.is_zero = np.concatenate([table.is_zero, flags])
        if table.bounds.size > settings.max_cells or table.reach >= MAX_DISTANCE:
            table.exhausted = True

    def _ensure(self, side: int, distance: float) -> None:
        table = self._tables[side]
        while table.reach < distance and not table.exhausted:
            self._extend(side)

    def zero_sums(self, side: int, count: int) -> np.ndarray:
        """Oriented partial integrals up to the first `count` sign changes on one side."""
        table = self._tables[side]
        while int(table.is_zero.sum()) < count and not table.exhausted:
            self._extend(side)
        return table.cumulative[table.is_zero][:count]

    def __call__(self, x: ArrayLike) -> ArrayLike:
        x_arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x_arr).ravel()
        out = np.zeros(flat.shape)
        for side in (+1, -1):
            s = side * (flat - self.anchor)
            mask = (s > 0) & np.isfinite(s)
            if not mask.any():
                continue
            self._ensure(side, float(s[mask].max()))
            table = self._tables[side]
            f = self._oriented(side)
            inside = mask & (s <= table.reach)
            if inside.any():
                si = s[inside]
                k = np.clip(np.searchsorted(table.bounds, si, side="right") - 1, 0, table.bounds.size - 1)
                start = table.bounds[k]
                out[inside] = side * (table.cumulative[k] + gauss_legendre(f, start, si))
            outside = mask & (s > table.reach)
            if outside.any():
                fallback = self.beyond[side]
                out[outside] = side * table.cumulative[-1] if fallback is None else fallback
        out[np.isposinf(flat)] = np.nan if self.beyond[+1] is None else self.beyond[+1]
        out[np.isneginf(flat)] = np.nan if self.beyond[-1] is None else self.beyond[-1]
        out = out.reshape(x_arr.shape)
        return float(out) if x_arr.ndim == 0 else out

    def modulus(self, u_lo: np.ndarray, u_hi: np.ndarray) -> np.ndarray:
        """Lipschitz bound sup|f| * |dx| for cells of the compact grid."""
        with np.errstate(invalid="ignore"):
            span = np.abs(decompactify(u_hi) - decompactify(u_lo))
        bound = max(self.sup_abs, 1e-300) * span * (1.0 + 1e-9)
        return np.where(np.isfinite(bound), bound, np.inf)


def panel_primitive(integrand: Evaluator, anchor: float = 0.0) -> PanelPrimitive:
    return PanelPrimitive(integrand, anchor)


def oscillatory_tail(primitive: PanelPrimitive, side: int, tol: Optional[float] = None,
                     window: Optional[int] = None) -> float:
    """Limit of the primitive at side*inf.

    Partial integrals at consecutive sign changes alternate around the
    limit; repeated averaging of that sequence is accepted once the last
    `window` averaged estimates agree within tolerance. Integrands with too
    few sign changes fall back to the tail ladder.
    """
    tol = settings.tol if tol is None else tol
    window = settings.tail_window if window is None else window
    need = window + AVERAGING_PASSES + 1
    count = 2 * need
    where = "+inf" if side > 0 else "-inf"
    while True:
        sums = primitive.zero_sums(side, count)
        if sums.size < need:
            limit = detect_limit(primitive, side, tol)
            primitive.beyond[side] = limit
            return limit
        if not np.all(np.isfinite(sums)):
            raise NoLimitAtInfinity(f"partial integrals diverge toward {where}", witness=side * np.inf)
        steps = np.abs(np.diff(sums))[-window:]
        if not steps[-1] < (1.0 - 1e-6) * steps[0]:
            raise NoLimitAtInfinity(f"oscillation of partial integrals does not decay toward {where}",
                                    witness=side * np.inf)
        estimates = sums.copy()
        for _ in range(AVERAGING_PASSES):
            estimates = 0.5 * (estimates[1:] + estimates[:-1])
        last = estimates[-window:]
        mean = float(last.mean())
        if float(np.max(np.abs(last - mean))) <= tol * max(1.0, abs(mean)):
            limit = side * mean
            primitive.beyond[side] = limit
            return limit
        if sums.size < count:
            raise NoLimitAtInfinity(f"partial integrals do not settle toward {where} before the panel budget",
                                    witness=side * np.inf)
        count *= 2
