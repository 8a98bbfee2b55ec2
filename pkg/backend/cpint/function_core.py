"""Continuous functions on the extended real line [-inf, inf].

All grids, audits and refinements live in the compact coordinate
u = x / (1 + |x|), which maps [-inf, inf] onto [-1, 1].
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy import integrate

from .config import settings
from .constants import EXTREMUM_CANDIDATES
from .errors import BudgetExceeded, DomainError, NoLimitAtInfinity, NotContinuous


ArrayLike = Union[float, np.ndarray]
Evaluator = Callable[[np.ndarray], ArrayLike]
Modulus = Callable[[np.ndarray, np.ndarray], np.ndarray]

NEG_INF = -math.inf
POS_INF = math.inf

# dyadic sub-cells per continuity refinement step
SUBCELLS = 8


def parse_extended(text: str) -> float:
    token = text.strip().lower()
    if token in ("inf", "+inf", "infinity", "+infinity"):
        return POS_INF
    if token in ("-inf", "-infinity"):
        return NEG_INF
    return float(token)


def _like(values: np.ndarray, x: ArrayLike) -> ArrayLike:
    return float(values) if np.ndim(x) == 0 else values


def compactify(x: ArrayLike) -> ArrayLike:
    x_arr = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore"):
        u = x_arr / (1.0 + np.abs(x_arr))
    u = np.where(np.isposinf(x_arr), 1.0, np.where(np.isneginf(x_arr), -1.0, u))
    return _like(u, x)


def decompactify(u: ArrayLike) -> ArrayLike:
    u_arr = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = u_arr / (1.0 - np.abs(u_arr))
    return _like(x, u)


def evaluate_extended(evaluator: Evaluator, x: ArrayLike, limit_neg: float, limit_pos: float) -> ArrayLike:
    """Evaluates on finite points and substitutes the limits at -inf/+inf."""
    x_arr = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x_arr).ravel()
    out = np.full(flat.shape, np.nan)
    finite = np.isfinite(flat)
    if finite.any():
        with np.errstate(all="ignore"):
            values = np.asarray(evaluator(flat[finite]), dtype=float)
        out[finite] = np.broadcast_to(values, (int(finite.sum()),))
    out[np.isneginf(flat)] = limit_neg
    out[np.isposinf(flat)] = limit_pos
    return _like(out.reshape(x_arr.shape), x)


@dataclass(frozen=True)
class ContinuousFunctionBar:
    """An element of C0 of the extended line: evaluator plus limits at -inf and +inf.

    Instances are produced by `build_continuous` (audited) or by operations
    whose result is continuous by construction.
    """

    evaluator: Evaluator
    limit_neg: float
    limit_pos: float
    smoothness_hint: Optional[Modulus] = None

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return evaluate_extended(self.evaluator, x, self.limit_neg, self.limit_pos)

    def on_compact(self, u: ArrayLike) -> ArrayLike:
        return self(decompactify(u))


def pointwise(fn: Callable[..., ArrayLike], *functions: ContinuousFunctionBar,
              hint: Optional[Modulus] = None) -> ContinuousFunctionBar:
    """Combines functions pointwise; continuity and limits carry over."""

    def evaluator(x: np.ndarray) -> np.ndarray:
        return fn(*(f(x) for f in functions))

    return ContinuousFunctionBar(
        evaluator=evaluator,
        limit_neg=float(fn(*(f.limit_neg for f in functions))),
        limit_pos=float(fn(*(f.limit_pos for f in functions))),
        smoothness_hint=hint,
    )


def _resolve(tol: Optional[float], depth_cap: Optional[int]) -> Tuple[float, int]:
    return (settings.tol if tol is None else tol, settings.budget if depth_cap is None else depth_cap)


def _settles(deviations: np.ndarray, scale: float, tol: float) -> bool:
    if not np.all(np.isfinite(deviations)):
        return False
    window = min(settings.tail_window, deviations.size)
    stall = settings.stall_refinements
    tail = deviations[-window:]
    tail = tail[tail.size % stall:]
    maxima = tail.reshape(-1, stall).max(axis=1)
    threshold = tol * scale
    if deviations[-1] > threshold:
        return False
    for previous, current in zip(maxima, maxima[1:]):
        if current > 0.5 * previous and current > threshold:
            return False
    return True


def _tail_points(side: int, depth_cap: int) -> np.ndarray:
    k = np.arange(1, depth_cap + 1, dtype=float)
    return side * (2.0**k - 1.0)


def audit_tail(evaluator: Evaluator, limit: float, side: int,
               tol: Optional[float] = None, depth_cap: Optional[int] = None) -> None:
    tol, depth_cap = _resolve(tol, depth_cap)
    points = _tail_points(side, depth_cap)
    with np.errstate(all="ignore"):
        values = np.broadcast_to(np.asarray(evaluator(points), dtype=float), points.shape)
        deviations = np.abs(values - limit)
    if not _settles(deviations, max(1.0, abs(limit)), tol):
        where = "+inf" if side > 0 else "-inf"
        raise NoLimitAtInfinity(f"values do not settle to {limit!r} at {where}", witness=side * POS_INF)


def detect_limit(evaluator: Evaluator, side: int,
                 tol: Optional[float] = None, depth_cap: Optional[int] = None) -> float:
    """Finds lim F(x) as x -> side*inf by the successive-difference ladder."""
    tol, depth_cap = _resolve(tol, depth_cap)
    points = _tail_points(side, depth_cap)
    with np.errstate(all="ignore"):
        values = np.broadcast_to(np.asarray(evaluator(points), dtype=float), points.shape)
        differences = np.abs(np.diff(values))
    limit = float(values[-1])
    if not math.isfinite(limit) or not _settles(differences, max(1.0, abs(limit)), tol):
        where = "+inf" if side > 0 else "-inf"
        raise NoLimitAtInfinity(f"no finite limit at {where}", witness=side * POS_INF)
    return limit


def _chase_jump(function: Callable[[ArrayLike], ArrayLike], a: float, b: float, floor: float) -> Optional[float]:
    """Follows the worst sub-cell of [a, b] down to float resolution.

    Returns the location if the oscillation is still above `floor` there,
    None once it drops below.
    """
    fractions = np.arange(1, SUBCELLS) / SUBCELLS
    osc = math.inf
    while True:
        nodes = np.unique(np.concatenate([[a], a + (b - a) * fractions, [b]]))
        if nodes.size < 2:
            break
        values = np.asarray(function(decompactify(nodes)), dtype=float)
        if not np.all(np.isfinite(values)):
            return float(decompactify(nodes[~np.isfinite(values)][0]))
        sub_osc = np.abs(np.diff(values))
        k = int(np.argmax(sub_osc))
        a, b, osc = float(nodes[k]), float(nodes[k + 1]), float(sub_osc[k])
        if osc <= floor:
            return None
        if nodes.size == 2:
            break
    return float(decompactify(0.5 * (a + b)))


def audit_continuity(function: Callable[[ArrayLike], ArrayLike], lo: float = NEG_INF, hi: float = POS_INF,
                     tol: Optional[float] = None, depth_cap: Optional[int] = None,
                     hint: Optional[Modulus] = None) -> None:
    """Oscillation audit of `function` over [lo, hi] in the compact coordinate.

    `function` must accept extended reals. Each cell of the initial grid whose
    oscillation exceeds tolerance is cut into eight dyadic sub-cells and the
    audit follows the worst one. A cell whose oscillation fails to halve over
    `stall_refinements` consecutive steps is chased down to float resolution
    and reported as a discontinuity only if the oscillation survives there.
    """
    tol, depth_cap = _resolve(tol, depth_cap)
    u = np.linspace(compactify(lo), compactify(hi), settings.audit_grid_points)
    values = np.asarray(function(decompactify(u)), dtype=float)
    if not np.all(np.isfinite(values)):
        bad = float(decompactify(u[~np.isfinite(values)][0]))
        raise NotContinuous(f"non-finite value at x={bad!r}", witness=bad)
    threshold = tol * max(1.0, float(np.max(np.abs(values))))

    if hint is not None:
        bound = np.asarray(hint(u[:-1], u[1:]), dtype=float)
        increments = np.abs(np.diff(values))
        violated = increments > bound + threshold
        if violated.any():
            at = float(decompactify(u[:-1][violated][0]))
            raise NotContinuous(f"increment exceeds the modulus hint near x={at!r}", witness=at)
        return

    a, b = u[:-1], u[1:]
    ga, gb = values[:-1], values[1:]
    osc = np.abs(gb - ga)
    keep = osc > threshold
    a, b, ga, gb, osc = a[keep], b[keep], ga[keep], gb[keep], osc[keep]
    reference = osc.copy()
    stall = np.zeros(a.shape, dtype=int)
    fractions = np.arange(1, SUBCELLS) / SUBCELLS
    for _ in range(depth_cap):
        if a.size == 0:
            return
        inner = a[:, None] + (b - a)[:, None] * fractions[None, :]
        g_inner = np.asarray(function(decompactify(inner)), dtype=float).reshape(inner.shape)
        if not np.all(np.isfinite(g_inner)):
            bad = float(decompactify(inner[~np.isfinite(g_inner)][0]))
            raise NotContinuous(f"non-finite value at x={bad!r}", witness=bad)
        nodes = np.column_stack([a, inner, b])
        g_nodes = np.column_stack([ga, g_inner, gb])
        sub_osc = np.abs(np.diff(g_nodes, axis=1))
        worst = np.argmax(sub_osc, axis=1)
        rows = np.arange(worst.size)
        a, b = nodes[rows, worst], nodes[rows, worst + 1]
        ga, gb = g_nodes[rows, worst], g_nodes[rows, worst + 1]
        osc = sub_osc[rows, worst]
        halved = osc <= 0.5 * reference
        reference = np.where(halved, osc, reference)
        stall = np.where(halved, 0, stall + 1)
        stalled = stall >= settings.stall_refinements
        for i in np.flatnonzero(stalled):
            at = _chase_jump(function, float(a[i]), float(b[i]), max(threshold, 0.5 * float(reference[i])))
            if at is not None:
                raise NotContinuous(f"oscillation {float(osc[i]):.6g} does not shrink near x={at!r}", witness=at)
        # stalled cells that resolve at float resolution have passed
        keep = (osc > threshold) & ~stalled
        a, b, ga, gb = a[keep], b[keep], ga[keep], gb[keep]
        osc, reference, stall = osc[keep], reference[keep], stall[keep]


def build_continuous(evaluator: Evaluator, limit_neg: float, limit_pos: float,
                     tol: Optional[float] = None, *, smoothness_hint: Optional[Modulus] = None,
                     depth_cap: Optional[int] = None) -> ContinuousFunctionBar:
    """Membership gate for C0 of the extended line.

    Raises NoLimitAtInfinity when the tails do not settle to the claimed
    limits and NotContinuous when the oscillation audit finds a jump.
    """
    if not (math.isfinite(limit_neg) and math.isfinite(limit_pos)):
        raise NoLimitAtInfinity("limits at infinity must be finite reals")
    audit_tail(evaluator, limit_neg, -1, tol, depth_cap)
    audit_tail(evaluator, limit_pos, +1, tol, depth_cap)
    function = ContinuousFunctionBar(evaluator, float(limit_neg), float(limit_pos), smoothness_hint)
    audit_continuity(function, NEG_INF, POS_INF, tol, depth_cap, smoothness_hint)
    return function


def grid_peaks(v: np.ndarray) -> np.ndarray:
    padded = np.concatenate(([-np.inf], v, [-np.inf]))
    return np.flatnonzero((padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:]))


def refine_peaks(objective: Callable[[np.ndarray], np.ndarray], u: np.ndarray, v: np.ndarray,
                 peaks: np.ndarray, tol: float, depth_cap: int) -> Tuple[np.ndarray, np.ndarray, bool]:
    """Bracket halving around grid local maxima of `objective` (a function of u).

    Returns refined locations, values, and whether every bracket settled.
    """
    last = u.size - 1
    lo_idx, hi_idx = np.maximum(peaks - 1, 0), np.minimum(peaks + 1, last)
    l, c, r = u[lo_idx], u[peaks], u[hi_idx]
    vl, vc, vr = v[lo_idx], v[peaks], v[hi_idx]
    scale = max(1.0, float(np.max(np.abs(v))))
    for _ in range(depth_cap):
        if np.all(vc - np.minimum(vl, vr) <= tol * scale):
            return c, vc, True
        q1, q2 = 0.5 * (l + c), 0.5 * (c + r)
        v1, v2 = objective(q1), objective(q2)
        left_best = (v1 > vc) & (v1 >= v2)
        right_best = (v2 > vc) & ~left_best
        l, c, r, vl, vc, vr = (
            np.where(left_best, l, np.where(right_best, c, q1)),
            np.where(left_best, q1, np.where(right_best, q2, c)),
            np.where(left_best, c, np.where(right_best, r, q2)),
            np.where(left_best, vl, np.where(right_best, vc, v1)),
            np.where(left_best, v1, np.where(right_best, v2, vc)),
            np.where(left_best, vc, np.where(right_best, vr, v2)),
        )
        scale = max(scale, float(np.max(np.abs(vc))))
    return c, vc, bool(np.all(vc - np.minimum(vl, vr) <= tol * scale))


def extremum(function: Callable[[ArrayLike], ArrayLike], lo: float = NEG_INF, hi: float = POS_INF,
             sign: int = 1, tol: Optional[float] = None,
             depth_cap: Optional[int] = None) -> Tuple[float, float]:
    """Location and value of max(sign * function) over [lo, hi].

    Grid scan in u, then the leading grid local maxima are refined by
    bracket halving until the bracket oscillation is below tolerance.
    """
    tol, depth_cap = _resolve(tol, depth_cap)

    def objective(uu: np.ndarray) -> np.ndarray:
        return sign * np.asarray(function(decompactify(uu)), dtype=float)

    u = np.linspace(compactify(lo), compactify(hi), settings.audit_grid_points)
    v = objective(u)
    if not np.all(np.isfinite(v)):
        raise DomainError("function is not finite on the audit grid")
    peaks = grid_peaks(v)
    peaks = peaks[np.argsort(-v[peaks], kind="stable")][:EXTREMUM_CANDIDATES]
    c, vc, settled = refine_peaks(objective, u, v, peaks, tol, depth_cap)
    if not settled:
        raise BudgetExceeded(f"extremum not resolved within {depth_cap} refinements")
    best = int(np.argmax(vc))
    return float(decompactify(c[best])), float(sign * vc[best])


def sup_norm(F: ContinuousFunctionBar, tol: Optional[float] = None, depth_cap: Optional[int] = None) -> float:
    """max over the extended line of |F|, endpoint limits included."""
    _, top = extremum(F, NEG_INF, POS_INF, +1, tol, depth_cap)
    _, bottom = extremum(F, NEG_INF, POS_INF, -1, tol, depth_cap)
    return max(abs(top), abs(bottom), abs(F.limit_neg), abs(F.limit_pos))


def restrict_extend(evaluator: Evaluator, a: float, b: float) -> ContinuousFunctionBar:
    """0 left of a, F - F(a) on [a, b], F(b) - F(a) right of b."""
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("restriction needs finite endpoints")
    if a > b:
        raise DomainError(f"empty interval [{a}, {b}]")
    base = float(np.asarray(evaluator(np.array([a], dtype=float)), dtype=float).ravel()[0])
    top = float(np.asarray(evaluator(np.array([b], dtype=float)), dtype=float).ravel()[0])

    def restricted(x: np.ndarray) -> np.ndarray:
        return np.asarray(evaluator(np.clip(x, a, b)), dtype=float) - base

    return ContinuousFunctionBar(restricted, 0.0, top - base)


@lru_cache(maxsize=None)
def bump_mass() -> float:
    """Integral of exp(1/(|s|-1)) over (-1, 1)."""
    value, _ = integrate.quad(lambda s: math.exp(1.0 / (abs(s) - 1.0)), -1.0, 1.0, points=[0.0])
    return value


@dataclass(frozen=True)
class TestFunction:
    """amplitude * exp(1/(|s|-1)) with s = (x - center) / width, zero for |s| >= 1."""

    __test__ = False

    center: float
    width: float
    amplitude: float = 1.0

    @property
    def support(self) -> Tuple[float, float]:
        return (self.center - self.width, self.center + self.width)

    def __call__(self, x: ArrayLike) -> ArrayLike:
        s = (np.asarray(x, dtype=float) - self.center) / self.width
        inside = np.abs(s) < 1.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            values = np.where(inside, self.amplitude * np.exp(1.0 / (np.abs(s) - 1.0)), 0.0)
        return _like(values, x)

    def derivative(self, x: ArrayLike) -> ArrayLike:
        s = (np.asarray(x, dtype=float) - self.center) / self.width
        inside = np.abs(s) < 1.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            d = np.abs(s) - 1.0
            slope = -np.exp(1.0 / d) / d**2 * np.sign(s) / self.width
            values = np.where(inside, self.amplitude * slope, 0.0)
        return _like(values, x)

    @property
    def evaluator(self) -> Callable[[ArrayLike], ArrayLike]:
        return self.__call__

    @property
    def derivative_evaluator(self) -> Callable[[ArrayLike], ArrayLike]:
        return self.derivative

    def mass(self) -> float:
        return self.amplitude * self.width * bump_mass()

    def sup(self) -> float:
        return abs(self.amplitude) * math.exp(-1.0)


def bump(center: float, width: float) -> TestFunction:
    if not width > 0:
        raise DomainError(f"bump width must be positive, got {width}")
    return TestFunction(float(center), float(width), 1.0)


def delta_sequence(x0: float, n: int) -> TestFunction:
    if n < 1:
        raise DomainError(f"delta sequence index must be >= 1, got {n}")
    width = 1.0 / n
    return TestFunction(float(x0), width, 1.0 / (width * bump_mass()))


def pair(G: Callable[[ArrayLike], ArrayLike], phi: TestFunction) -> float:
    """<G, phi> = integral of G * phi over the support of phi."""
    lo, hi = phi.support
    value, _ = integrate.quad(lambda x: float(G(x)) * float(phi(x)), lo, hi, points=[phi.center], limit=200)
    return value
