"""Products with functions of bounded variation and the calculus built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bv_stieltjes import (
    BVFunction,
    Piece,
    StieltjesTable,
    from_pieces,
    normalize_nbv,
    rs_integral,
    variation,
)
from .constants import BISECTION_STEPS, SECOND_MVT_RESIDUAL
from .errors import DomainError, NonMonotone, ResidualTooLarge
from .function_core import (
    NEG_INF,
    POS_INF,
    ArrayLike,
    ContinuousFunctionBar,
    Evaluator,
    audit_continuity,
    compactify,
    decompactify,
    detect_limit,
    extremum,
)
from .config import settings
from .integral_core import Distribution, NormKind, integral, norm


def multiply_bv(f: Distribution, g: BVFunction, tol: Optional[float] = None,
                depth_cap: Optional[int] = None) -> Distribution:
    """fg = H' with H(x) = F(x) g(x) - integral of F dg over [-inf, x].

    H uses the point value g(x); the jump terms of the Stieltjes table make
    it continuous anyway.
    """
    table = StieltjesTable(f.primitive, g, tol, depth_cap)
    F = f.primitive.evaluator

    def H(x: np.ndarray) -> np.ndarray:
        x_arr = np.asarray(x, dtype=float)
        return np.asarray(F(x_arr), dtype=float) * np.asarray(g(x_arr), dtype=float) - table.cumulative(x_arr)

    top = f.total * g.value_pos_inf - table.total
    return Distribution(ContinuousFunctionBar(H, 0.0, top), f.label)


def integral_product(f: Distribution, g: BVFunction, tol: Optional[float] = None,
                     depth_cap: Optional[int] = None) -> float:
    """F(inf) g(inf) - integral of F dg over the extended line."""
    table = StieltjesTable(f.primitive, g, tol, depth_cap)
    return f.total * g.value_pos_inf - table.total


@dataclass(frozen=True)
class HolderBound:
    first: float
    second: float

    @property
    def bound(self) -> float:
        return min(self.first, self.second)


def holder_report(f: Distribution, g: BVFunction, tol: Optional[float] = None) -> HolderBound:
    alexiewicz = norm(f, NormKind.alexiewicz, tol)
    normalized = normalize_nbv(g)
    first = abs(integral(f)) * normalized.inf_abs() + 2.0 * alexiewicz * variation(normalized)
    second = 2.0 * alexiewicz * g.bv_norm()
    return HolderBound(first, second)


def holder_bound(f: Distribution, g: BVFunction, tol: Optional[float] = None) -> float:
    return holder_report(f, g, tol).first


def h_continuity_bound(f: Distribution, g: BVFunction, x: float, y: float,
                       tol: Optional[float] = None) -> float:
    """|F(x)-F(y)| sup|g| + max over [x, y] of |F(t)-F(y)| times Vg."""
    lo, hi = min(x, y), max(x, y)
    Fy = float(f(y))
    sup_g = max(abs(v) for v in g.ordered_values())
    _, spread = extremum(lambda t: np.abs(np.asarray(f(t), dtype=float) - Fy), lo, hi, +1, tol)
    return abs(float(f(x)) - Fy) * sup_g + spread * variation(g)


def change_of_variables(f: Distribution, G: Evaluator, a: float, b: float,
                        G_at_a: Optional[float] = None, G_at_b: Optional[float] = None,
                        tol: Optional[float] = None) -> float:
    """F(G(b)) - F(G(a)); G only has to be continuous into the extended line."""
    if a > b:
        raise DomainError(f"change of variables needs a <= b, got [{a}, {b}]")

    def end_value(t: float, given: Optional[float], side: int) -> float:
        if given is not None:
            return float(given)
        if math.isfinite(t):
            return float(np.asarray(G(np.array([t])), dtype=float)[0])
        return detect_limit(G, side, tol)

    ga, gb = end_value(a, G_at_a, -1), end_value(b, G_at_b, +1)

    def composed(t: ArrayLike) -> np.ndarray:
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty(t_arr.shape)
        interior = (t_arr > a) & (t_arr < b)
        if interior.any():
            with np.errstate(all="ignore"):
                out[interior] = compactify(np.asarray(G(t_arr[interior]), dtype=float))
        out[t_arr <= a] = compactify(ga)
        out[t_arr >= b] = compactify(gb)
        return out.reshape(np.shape(t))

    audit_continuity(composed, a, b, tol)
    return float(f(gb)) - float(f(ga))


def second_mvt_xi(f: Distribution, g: BVFunction, tol: Optional[float] = None) -> float:
    """Leftmost xi with  integral fg = g(-inf) F(xi) + g(inf) (F(inf) - F(xi))."""
    if not g.is_monotone(tol):
        raise NonMonotone("second mean value theorem needs a monotone g")
    g_lo, g_hi = g.value_neg_inf, g.value_pos_inf
    if g_lo == g_hi:
        return NEG_INF
    lhs = integral_product(f, g, tol)
    target = (g_hi * f.total - lhs) / (g_hi - g_lo)

    def residual_at(xi: float) -> float:
        F_xi = float(f(xi))
        return abs(lhs - g_lo * F_xi - g_hi * (f.total - F_xi))

    u = np.linspace(-1.0, 1.0, settings.audit_grid_points)
    h = np.asarray(f(decompactify(u)), dtype=float) - target
    hits = np.flatnonzero((h[:-1] == 0.0) | (h[:-1] * h[1:] < 0.0))
    if hits.size:
        i = int(hits[0])
        if h[i] == 0.0:
            xi = float(decompactify(u[i]))
        else:
            lo, hi, h_lo = u[i], u[i + 1], h[i]
            for _ in range(BISECTION_STEPS):
                mid = 0.5 * (lo + hi)
                h_mid = float(f(decompactify(mid))) - target
                if h_mid == 0.0:
                    lo = hi = mid
                    break
                if np.sign(h_mid) == np.sign(h_lo):
                    lo, h_lo = mid, h_mid
                else:
                    hi = mid
            xi = float(decompactify(0.5 * (lo + hi)))
    elif h[-1] == 0.0:
        xi = POS_INF
    else:
        xi, _ = extremum(lambda x: -np.abs(np.asarray(f(x), dtype=float) - target), NEG_INF, POS_INF, +1, tol)
    residual = residual_at(xi)
    if not residual < SECOND_MVT_RESIDUAL:
        raise ResidualTooLarge(f"no xi meets the identity, best residual {residual:.3g}", witness=xi)
    return xi


@dataclass(frozen=True)
class TaylorInput:
    n: int
    a: float
    b: float
    top_derivative: ContinuousFunctionBar
    coefficients: Sequence[float]


def taylor_input(n: int, a: float, b: float, top_derivative: Evaluator, coefficients: Sequence[float],
                 tol: Optional[float] = None) -> TaylorInput:
    """Audits f^(n) on [a, b] and freezes it as a function on the extended line."""
    if n < 0:
        raise DomainError(f"Taylor order must be nonnegative, got {n}")
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise DomainError(f"Taylor expansion needs a finite interval, got [{a}, {b}]")
    if len(coefficients) != n + 1:
        raise DomainError(f"order {n} needs {n + 1} coefficients, got {len(coefficients)}")
    at_a = float(np.asarray(top_derivative(np.array([a])), dtype=float)[0])
    at_b = float(np.asarray(top_derivative(np.array([b])), dtype=float)[0])
    clipped = ContinuousFunctionBar(lambda t: top_derivative(np.clip(t, a, b)), at_a, at_b)
    audit_continuity(clipped, a, b, tol)
    return TaylorInput(n, float(a), float(b), clipped, tuple(float(c) for c in coefficients))


@dataclass(frozen=True)
class TaylorResult:
    polynomial: float
    remainder: float
    bound_pointwise: float
    bound_uniform: float
    remainder_norm_bound: float

    @property
    def value(self) -> float:
        return self.polynomial + self.remainder


def _kernel(x: float, a: float, n: int) -> BVFunction:
    """t -> (x - t)^n on [a, x], constant outside."""
    height = (x - a) ** n

    def power(t: np.ndarray) -> np.ndarray:
        return (x - np.asarray(t, dtype=float)) ** n

    pieces = [
        Piece(NEG_INF, a, lambda t: np.full(np.shape(t), height), height, height),
        Piece(a, x, power, height, 0.0),
        Piece(x, POS_INF, lambda t: np.zeros(np.shape(t)), 0.0, 0.0),
    ]
    return from_pieces(pieces, audit=False)


def taylor_expand(data: TaylorInput, x: float, tol: Optional[float] = None) -> TaylorResult:
    n, a, b = data.n, data.a, data.b
    if not a <= x <= b:
        raise DomainError(f"x={x} lies outside [{a}, {b}]")
    top = data.top_derivative
    polynomial = sum(c * (x - a) ** k / math.factorial(k) for k, c in enumerate(data.coefficients))
    top_a = top.limit_neg

    def deviation(t: ArrayLike) -> np.ndarray:
        return np.abs(np.asarray(top(t), dtype=float) - top_a)

    _, spread_ab = extremum(deviation, a, b, +1, tol)
    spread_ax = 0.0 if x == a else extremum(deviation, a, x, +1, tol)[1]
    n_fact = math.factorial(n)
    bound_pointwise = (x - a) ** n / n_fact * spread_ax
    bound_uniform = (b - a) ** n / n_fact * spread_ab
    norm_bound = (b - a) ** (n + 1) / math.factorial(n + 1) * spread_ab

    if x == a:
        remainder = 0.0
    elif n == 0:
        remainder = float(top(x)) - top_a
    else:
        stieltjes = rs_integral(top, _kernel(x, a, n), a, x, tol)
        remainder = (-top_a * (x - a) ** n - stieltjes) / n_fact
    return TaylorResult(polynomial, remainder, bound_pointwise, bound_uniform, norm_bound)
