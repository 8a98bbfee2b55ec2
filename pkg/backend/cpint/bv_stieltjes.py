"""Functions of bounded variation on the extended line and the Riemann-Stieltjes engine.

A BVFunction is stored representation-first: monotone pieces between sorted
breakpoints plus a jump record at every breakpoint, including -inf and +inf.
Variation is then a finite sum, and Stieltjes partitions are aligned with
every jump.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .config import settings
from .constants import RS_INITIAL_CELLS
from .errors import BudgetExceeded, DomainError, IntervalEmpty, MalformedPieces
from .function_core import (
    NEG_INF,
    POS_INF,
    ArrayLike,
    ContinuousFunctionBar,
    Evaluator,
    TestFunction,
    compactify,
    decompactify,
    detect_limit,
)

MONOTONE_SAMPLES = 257


def _constant_evaluator(c: float) -> Evaluator:
    def evaluator(x: np.ndarray) -> np.ndarray:
        return np.full(np.shape(x), c, dtype=float)

    return evaluator


def _at(evaluator: Evaluator, x: float) -> float:
    return float(np.asarray(evaluator(np.array([x], dtype=float)), dtype=float).ravel()[0])


@dataclass(frozen=True)
class Piece:
    """A monotone evaluator on [lo, hi] with its one-sided end values."""

    lo: float
    hi: float
    evaluator: Evaluator
    start: float
    end: float

    @property
    def is_constant(self) -> bool:
        return self.start == self.end

    def values(self, x: ArrayLike) -> np.ndarray:
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x_arr.shape)
        finite = np.isfinite(x_arr)
        if finite.any():
            with np.errstate(all="ignore"):
                out[finite] = np.broadcast_to(
                    np.asarray(self.evaluator(x_arr[finite]), dtype=float), (int(finite.sum()),)
                )
        out[np.isneginf(x_arr)] = self.start
        out[np.isposinf(x_arr)] = self.end
        return out


@dataclass(frozen=True)
class Jump:
    """left/value/right at a breakpoint; at -inf left == value, at +inf right == value."""

    location: float
    left: float
    value: float
    right: float

    @property
    def magnitude(self) -> float:
        return abs(self.value - self.left) + abs(self.right - self.value)


@dataclass(frozen=True)
class BVFunction:
    pieces: Tuple[Piece, ...]
    jumps: Tuple[Jump, ...]

    @property
    def breaks(self) -> np.ndarray:
        return np.array([j.location for j in self.jumps[1:-1]], dtype=float)

    @property
    def value_neg_inf(self) -> float:
        return self.jumps[0].value

    @property
    def value_pos_inf(self) -> float:
        return self.jumps[-1].value

    def __call__(self, x: ArrayLike) -> ArrayLike:
        x_arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x_arr).ravel()
        out = np.empty(flat.shape)
        breaks = self.breaks
        index = np.searchsorted(breaks, flat, side="right")
        for i, piece in enumerate(self.pieces):
            mask = (index == i) & np.isfinite(flat)
            if mask.any():
                out[mask] = piece.values(flat[mask])
        for jump in self.jumps:
            out[flat == jump.location] = jump.value
        out = out.reshape(x_arr.shape)
        return float(out) if x_arr.ndim == 0 else out

    def _jump_at(self, x: float) -> Optional[Jump]:
        for jump in self.jumps:
            if jump.location == x:
                return jump
        return None

    def left_limit(self, x: float) -> float:
        jump = self._jump_at(x)
        return jump.left if jump is not None else float(self(x))

    def right_limit(self, x: float) -> float:
        jump = self._jump_at(x)
        return jump.right if jump is not None else float(self(x))

    def inf_abs(self) -> float:
        """inf over the real line of |g|."""
        candidates: List[float] = []
        for piece in self.pieces:
            if piece.start * piece.end <= 0:
                return 0.0
            candidates.append(min(abs(piece.start), abs(piece.end)))
        candidates.extend(abs(j.value) for j in self.jumps[1:-1])
        return min(candidates)

    def bv_norm(self) -> float:
        return abs(self.value_neg_inf) + variation(self)

    def ordered_values(self) -> List[float]:
        values = [self.jumps[0].value, self.jumps[0].right]
        for piece, jump in zip(self.pieces, self.jumps[1:]):
            values.extend([piece.start, piece.end, jump.left, jump.value, jump.right])
        return values

    def is_monotone(self, tol: Optional[float] = None) -> bool:
        tol = settings.tol if tol is None else tol
        steps = np.diff(np.array(self.ordered_values()))
        slack = tol * max(1.0, float(np.max(np.abs(self.ordered_values()))))
        return bool(np.all(steps >= -slack) or np.all(steps <= slack))


def audit_piece(piece: Piece, tol: Optional[float] = None) -> None:
    if piece.is_constant:
        u_lo, u_hi = compactify(piece.lo), compactify(piece.hi)
        samples = piece.values(decompactify(np.linspace(u_lo, u_hi, MONOTONE_SAMPLES)[1:-1]))
        if np.any(np.abs(samples - piece.start) > (settings.tol if tol is None else tol) * max(1.0, abs(piece.start))):
            raise MalformedPieces(f"piece on [{piece.lo}, {piece.hi}] has equal end values but is not constant")
        return
    tol = settings.tol if tol is None else tol
    u = np.linspace(compactify(piece.lo), compactify(piece.hi), MONOTONE_SAMPLES)
    values = piece.values(decompactify(u))
    values[0], values[-1] = piece.start, piece.end
    if not np.all(np.isfinite(values)):
        raise MalformedPieces(f"piece on [{piece.lo}, {piece.hi}] is not finite")
    steps = np.diff(values) * math.copysign(1.0, piece.end - piece.start)
    slack = tol * max(1.0, float(np.max(np.abs(values))))
    if np.any(steps < -slack):
        at = float(decompactify(u[1:][steps < -slack][0]))
        raise MalformedPieces(f"piece on [{piece.lo}, {piece.hi}] is not monotone near x={at!r}", witness=at)


def from_pieces(pieces: Sequence[Piece], point_values: Optional[Sequence[float]] = None,
                value_neg_inf: Optional[float] = None, value_pos_inf: Optional[float] = None,
                audit: bool = True) -> BVFunction:
    """Assembles pieces that abut at their endpoints into a BVFunction."""
    if not pieces:
        raise MalformedPieces("a BV function needs at least one piece")
    if pieces[0].lo != NEG_INF or pieces[-1].hi != POS_INF:
        raise MalformedPieces("pieces must cover the extended line")
    for previous, current in zip(pieces, pieces[1:]):
        if previous.hi != current.lo or not math.isfinite(current.lo):
            raise MalformedPieces(f"pieces do not abut at {previous.hi} / {current.lo}")
        if not previous.lo < previous.hi:
            raise MalformedPieces(f"empty piece [{previous.lo}, {previous.hi}]")
    interior = len(pieces) - 1
    if point_values is not None and len(point_values) != interior:
        raise MalformedPieces(f"{interior} breakpoints need {interior} point values, got {len(point_values)}")
    if audit:
        for piece in pieces:
            audit_piece(piece)
    first, last = pieces[0], pieces[-1]
    v_neg = first.start if value_neg_inf is None else float(value_neg_inf)
    v_pos = last.end if value_pos_inf is None else float(value_pos_inf)
    jumps = [Jump(NEG_INF, v_neg, v_neg, first.start)]
    for i, (previous, current) in enumerate(zip(pieces, pieces[1:])):
        value = current.start if point_values is None else float(point_values[i])
        jumps.append(Jump(current.lo, previous.end, value, current.start))
    jumps.append(Jump(POS_INF, last.end, v_pos, v_pos))
    return BVFunction(tuple(pieces), tuple(jumps))


def make_piece(lo: float, hi: float, evaluator: Evaluator, tol: Optional[float] = None) -> Piece:
    start = detect_limit(evaluator, -1, tol) if lo == NEG_INF else _at(evaluator, lo)
    end = detect_limit(evaluator, +1, tol) if hi == POS_INF else _at(evaluator, hi)
    return Piece(float(lo), float(hi), evaluator, start, end)


def piecewise(breaks: Sequence[float], evaluators: Sequence[Evaluator],
              point_values: Optional[Sequence[float]] = None,
              value_neg_inf: Optional[float] = None, value_pos_inf: Optional[float] = None,
              tol: Optional[float] = None) -> BVFunction:
    breaks = [float(b) for b in breaks]
    if len(evaluators) != len(breaks) + 1:
        raise MalformedPieces(f"{len(breaks)} breakpoints need {len(breaks) + 1} evaluators")
    if any(not math.isfinite(b) for b in breaks) or any(b >= c for b, c in zip(breaks, breaks[1:])):
        raise MalformedPieces("breakpoints must be finite and strictly increasing")
    edges = [NEG_INF, *breaks, POS_INF]
    pieces = [make_piece(lo, hi, ev, tol) for lo, hi, ev in zip(edges, edges[1:], evaluators)]
    return from_pieces(pieces, point_values, value_neg_inf, value_pos_inf)


def constant(c: float) -> BVFunction:
    c = float(c)
    return from_pieces([Piece(NEG_INF, POS_INF, _constant_evaluator(c), c, c)], audit=False)


def step_function(breaks: Sequence[float], levels: Sequence[float],
                  point_values: Optional[Sequence[float]] = None,
                  value_neg_inf: Optional[float] = None, value_pos_inf: Optional[float] = None) -> BVFunction:
    """Piecewise constant: levels[i] between breaks[i-1] and breaks[i]."""
    edges = [NEG_INF, *[float(b) for b in breaks], POS_INF]
    if len(levels) != len(edges) - 1:
        raise MalformedPieces(f"{len(breaks)} breakpoints need {len(breaks) + 1} levels")
    pieces = [Piece(lo, hi, _constant_evaluator(float(c)), float(c), float(c))
              for lo, hi, c in zip(edges, edges[1:], levels)]
    return from_pieces(pieces, point_values, value_neg_inf, value_pos_inf, audit=False)


def heaviside(at: float = 0.0, value: float = 1.0) -> BVFunction:
    """value * 1_{x >= at}."""
    return step_function([at], [0.0, value], [value])


def staircase(steps: Iterable[Tuple[float, float]]) -> BVFunction:
    """Right-continuous sum of height * 1_{x >= location} over the given steps."""
    ordered = sorted((float(loc), float(h)) for loc, h in steps)
    merged: List[Tuple[float, float]] = []
    for loc, h in ordered:
        if merged and merged[-1][0] == loc:
            merged[-1] = (loc, merged[-1][1] + h)
        else:
            merged.append((loc, h))
    levels = [0.0, *np.cumsum([h for _, h in merged]).tolist()]
    return step_function([loc for loc, _ in merged], levels, levels[1:])


def indicator(a: float, b: float, closed_lo: bool = True, closed_hi: bool = True) -> BVFunction:
    """Characteristic function of the interval between a and b.

    An infinite endpoint carries no jump, so indicator(-inf, x) has variation 1.
    """
    if a > b:
        raise DomainError(f"indicator needs a <= b, got [{a}, {b}]")
    if a == NEG_INF and b == POS_INF:
        return constant(1.0)
    if a == b:
        if math.isfinite(a) and closed_lo and closed_hi:
            return step_function([a], [0.0, 0.0], [1.0])
        return constant(0.0)
    if a == NEG_INF:
        return step_function([b], [1.0, 0.0], [1.0 if closed_hi else 0.0])
    if b == POS_INF:
        return step_function([a], [0.0, 1.0], [1.0 if closed_lo else 0.0])
    return step_function([a, b], [0.0, 1.0, 0.0], [1.0 if closed_lo else 0.0, 1.0 if closed_hi else 0.0])


def monotone(evaluator: Evaluator, lo: float = NEG_INF, hi: float = POS_INF,
             tol: Optional[float] = None) -> BVFunction:
    """A monotone evaluator on [lo, hi], extended by its end values."""
    core = make_piece(lo, hi, evaluator, tol)
    pieces: List[Piece] = []
    if math.isfinite(lo):
        pieces.append(Piece(NEG_INF, lo, _constant_evaluator(core.start), core.start, core.start))
    pieces.append(core)
    if math.isfinite(hi):
        pieces.append(Piece(hi, POS_INF, _constant_evaluator(core.end), core.end, core.end))
    return from_pieces(pieces)


def from_test_function(phi: TestFunction) -> BVFunction:
    lo, hi = phi.support
    evaluator = phi.evaluator
    peak = float(phi(phi.center))
    zero = _constant_evaluator(0.0)
    pieces = [
        Piece(NEG_INF, lo, zero, 0.0, 0.0),
        Piece(lo, phi.center, evaluator, 0.0, peak),
        Piece(phi.center, hi, evaluator, peak, 0.0),
        Piece(hi, POS_INF, zero, 0.0, 0.0),
    ]
    return from_pieces(pieces)


def variation(g: BVFunction) -> float:
    """Exact variation: piece end differences plus every jump magnitude."""
    return float(sum(abs(p.end - p.start) for p in g.pieces) + sum(j.magnitude for j in g.jumps))


def brute_force_variation(g: BVFunction, points: ArrayLike) -> float:
    xs = np.sort(np.asarray(points, dtype=float))
    return float(np.sum(np.abs(np.diff(np.asarray(g(xs), dtype=float)))))


def normalize_nbv(g: BVFunction) -> BVFunction:
    """Right continuous on [-inf, inf), left continuous at inf."""
    jumps = [Jump(NEG_INF, g.jumps[0].right, g.jumps[0].right, g.jumps[0].right)]
    jumps.extend(replace(j, value=j.right) for j in g.jumps[1:-1])
    last = g.jumps[-1]
    jumps.append(Jump(POS_INF, last.left, last.left, last.left))
    return BVFunction(g.pieces, tuple(jumps))


def scale(c: float, g: BVFunction) -> BVFunction:
    c = float(c)
    pieces = tuple(
        Piece(p.lo, p.hi, (lambda ev: (lambda x: c * np.asarray(ev(x), dtype=float)))(p.evaluator),
              c * p.start, c * p.end)
        for p in g.pieces
    )
    jumps = tuple(Jump(j.location, c * j.left, c * j.value, c * j.right) for j in g.jumps)
    return BVFunction(pieces, jumps)


def _piece_containing(g: BVFunction, lo: float, hi: float) -> Piece:
    for piece in g.pieces:
        if piece.lo <= lo and hi <= piece.hi:
            return piece
    raise MalformedPieces(f"no piece covers [{lo}, {hi}]")


def _turning_points(piece: Piece, tol: float) -> List[float]:
    u = np.linspace(compactify(piece.lo), compactify(piece.hi), MONOTONE_SAMPLES)
    x = decompactify(u)
    values = piece.values(x)
    steps = np.diff(values)
    slack = tol * max(1.0, float(np.max(np.abs(values))))
    signs = np.sign(np.where(np.abs(steps) <= slack, 0.0, steps))
    nonzero = np.flatnonzero(signs)
    turns: List[float] = []
    for k0, k1 in zip(nonzero, nonzero[1:]):
        if signs[k0] == signs[k1]:
            continue
        lo, hi = x[k0], x[k1 + 1]
        direction = signs[k0]

        def objective(t: float, d: float = direction) -> float:
            return -d * float(piece.values(t)[0])

        result = optimize.minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                                          options={"xatol": 1e-12 * max(1.0, abs(lo), abs(hi))})
        turns.append(float(result.x))
    return sorted(set(turns))


def add(g: BVFunction, h: BVFunction, tol: Optional[float] = None) -> BVFunction:
    """Pointwise sum; summed pieces that turn are split at their turning points."""
    tol = settings.tol if tol is None else tol
    breaks = sorted(set(g.breaks.tolist()) | set(h.breaks.tolist()))
    edges = [NEG_INF, *breaks, POS_INF]
    pieces: List[Piece] = []
    point_values: List[float] = []
    for lo, hi in zip(edges, edges[1:]):
        pg, ph = _piece_containing(g, lo, hi), _piece_containing(h, lo, hi)

        def evaluator(x: np.ndarray, pg: Piece = pg, ph: Piece = ph) -> np.ndarray:
            return pg.values(x) + ph.values(x)

        start = float(pg.values(lo)[0] + ph.values(lo)[0])
        end = float(pg.values(hi)[0] + ph.values(hi)[0])
        summed = Piece(lo, hi, evaluator, start, end)
        cuts = [lo, *_turning_points(summed, tol), hi]
        if pieces:
            point_values.append(float(g(lo)) + float(h(lo)))
        for i, (a, b) in enumerate(zip(cuts, cuts[1:])):
            if not a < b:
                continue
            pa = start if a == lo else float(evaluator(np.array([a]))[0])
            pb = end if b == hi else float(evaluator(np.array([b]))[0])
            if pieces and a != lo:
                point_values.append(pa)
            pieces.append(Piece(a, b, evaluator, pa, pb))
    return from_pieces(pieces, point_values, g.value_neg_inf + h.value_neg_inf, g.value_pos_inf + h.value_pos_inf)


def subtract(g: BVFunction, h: BVFunction, tol: Optional[float] = None) -> BVFunction:
    return add(g, scale(-1.0, h), tol)


class StieltjesTable:
    """Cumulative table C(x) = integral of F dg over [-inf, x].

    Jumps contribute exactly: F(p)(value - left) on arrival at p and
    F(p)(right - value) on departure. Non-constant pieces are integrated by
    adaptive trapezoid Stieltjes sums in the compact coordinate with a
    Richardson correction; constant pieces cost nothing.
    """

    def __init__(self, F: ContinuousFunctionBar, g: BVFunction,
                 tol: Optional[float] = None, depth_cap: Optional[int] = None):
        self.F = F
        self.g = g
        self.tol = settings.tol if tol is None else tol
        self.depth_cap = settings.budget if depth_cap is None else depth_cap
        self.bracket = 0.0
        self._cells: List[Optional[Tuple[np.ndarray, np.ndarray]]] = []
        self._at_point: List[float] = []
        self._after: List[float] = []
        self._build()

    def _build(self) -> None:
        running = 0.0
        for i, jump in enumerate(self.g.jumps):
            f_p = float(self.F(jump.location))
            running += f_p * (jump.value - jump.left)
            self._at_point.append(running)
            running += f_p * (jump.right - jump.value)
            self._after.append(running)
            if i < len(self.g.pieces):
                piece = self.g.pieces[i]
                if piece.is_constant:
                    self._cells.append(None)
                    continue
                edges, cumulative = self._integrate_piece(piece)
                self._cells.append((edges, cumulative))
                running += float(cumulative[-1])

    def _integrate_piece(self, piece: Piece) -> Tuple[np.ndarray, np.ndarray]:
        F, values = self.F, piece.values

        def fg(u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
            x = decompactify(u)
            return np.asarray(F(x), dtype=float), values(x)

        u_lo, u_hi = compactify(piece.lo), compactify(piece.hi)
        nodes = np.linspace(u_lo, u_hi, RS_INITIAL_CELLS + 1)
        a, b = nodes[:-1], nodes[1:]
        m = 0.5 * (a + b)
        Fa, ga = fg(a)
        Fb, gb = fg(b)
        Fm, gm = fg(m)
        ga[0], gb[-1] = piece.start, piece.end
        depth = np.zeros(a.shape, dtype=int)
        scale = max(1.0, float(np.max(np.abs(np.concatenate([Fa, Fb])))) * abs(piece.end - piece.start))
        target = self.tol * scale
        while True:
            coarse = 0.5 * (Fa + Fb) * (gb - ga)
            fine = 0.5 * (Fa + Fm) * (gm - ga) + 0.5 * (Fm + Fb) * (gb - gm)
            err = np.abs(fine - coarse) / 3.0
            if not np.all(np.isfinite(err)):
                raise BudgetExceeded("non-finite Stieltjes sum on a monotone piece")
            if err.sum() <= target:
                break
            split = err > target / err.size
            if not split.any():
                split = err >= err.max()
            if np.any(depth[split] >= self.depth_cap):
                at = float(decompactify(a[split & (depth >= self.depth_cap)][0]))
                raise BudgetExceeded(f"Stieltjes refinement hit depth {self.depth_cap} near x={at!r}", witness=at)
            if err.size + int(split.sum()) > settings.max_cells:
                raise BudgetExceeded(f"Stieltjes refinement exceeds {settings.max_cells} cells")
            sa, sb, sm = a[split], b[split], m[split]
            q1, q2 = 0.5 * (sa + sm), 0.5 * (sm + sb)
            Fq1, gq1 = fg(q1)
            Fq2, gq2 = fg(q2)
            keep = ~split
            a = np.concatenate([a[keep], sa, sm])
            b = np.concatenate([b[keep], sm, sb])
            m = np.concatenate([m[keep], q1, q2])
            Fa = np.concatenate([Fa[keep], Fa[split], Fm[split]])
            Fb = np.concatenate([Fb[keep], Fm[split], Fb[split]])
            ga_new = np.concatenate([ga[keep], ga[split], gm[split]])
            gb_new = np.concatenate([gb[keep], gm[split], gb[split]])
            Fm = np.concatenate([Fm[keep], Fq1, Fq2])
            gm = np.concatenate([gm[keep], gq1, gq2])
            ga, gb = ga_new, gb_new
            child = depth[split] + 1
            depth = np.concatenate([depth[keep], child, child])
        order = np.argsort(a, kind="stable")
        a, b = a[order], b[order]
        coarse = (0.5 * (Fa + Fb) * (gb - ga))[order]
        fine = (0.5 * (Fa + Fm) * (gm - ga) + 0.5 * (Fm + Fb) * (gb - gm))[order]
        self.bracket += float(np.sum(np.abs(Fb - Fa) * np.abs(gb - ga)))
        edges = np.concatenate([a, b[-1:]])
        cumulative = np.concatenate([[0.0], np.cumsum(fine + (fine - coarse) / 3.0)])
        return edges, cumulative

    def _partial(self, piece: Piece, u0: np.ndarray, u1: np.ndarray) -> np.ndarray:
        t = np.linspace(0.0, 1.0, 17)
        nodes = u0[:, None] + (u1 - u0)[:, None] * t[None, :]
        x = decompactify(nodes)
        Fv = np.asarray(self.F(x), dtype=float)
        gv = piece.values(x.ravel()).reshape(x.shape)
        t16 = np.sum(0.5 * (Fv[:, :-1] + Fv[:, 1:]) * np.diff(gv, axis=1), axis=1)
        F8, g8 = Fv[:, ::2], gv[:, ::2]
        t8 = np.sum(0.5 * (F8[:, :-1] + F8[:, 1:]) * np.diff(g8, axis=1), axis=1)
        return t16 + (t16 - t8) / 3.0

    def cumulative(self, x: ArrayLike) -> ArrayLike:
        x_arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x_arr).ravel()
        out = np.empty(flat.shape)
        breaks = self.g.breaks
        index = np.searchsorted(breaks, flat, side="right")
        for i, piece in enumerate(self.g.pieces):
            mask = (index == i) & np.isfinite(flat)
            if not mask.any():
                continue
            base = self._after[i]
            cells = self._cells[i]
            if cells is None:
                out[mask] = base
                continue
            edges, cumulative = cells
            u = compactify(flat[mask])
            k = np.clip(np.searchsorted(edges, u, side="right") - 1, 0, edges.size - 2)
            out[mask] = base + cumulative[k] + self._partial(piece, edges[k], u)
        for i, jump in enumerate(self.g.jumps):
            out[flat == jump.location] = self._at_point[i]
        out = out.reshape(x_arr.shape)
        return float(out) if x_arr.ndim == 0 else out

    @property
    def total(self) -> float:
        return self._at_point[-1]


def rs_integral(F: ContinuousFunctionBar, g: BVFunction, a: float = NEG_INF, b: float = POS_INF,
                tol: Optional[float] = None, depth_cap: Optional[int] = None) -> float:
    """Integral of F dg over [a, b] in the extended line, jumps at the ends included as C(b) - C(a)."""
    if a > b:
        raise IntervalEmpty(f"empty interval [{a}, {b}]")
    if a == b:
        return 0.0
    table = StieltjesTable(F, g, tol, depth_cap)
    return float(table.cumulative(b)) - float(table.cumulative(a))
