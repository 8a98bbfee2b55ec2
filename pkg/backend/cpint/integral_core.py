"""The space of integrable distributions: derivatives of continuous primitives vanishing at -inf.

Integration is endpoint evaluation of the primitive; all numerical work
happens when primitives are built and when norms are taken.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy import integrate

from .config import settings
from .errors import DomainError, IntervalEmpty
from .function_core import (
    NEG_INF,
    POS_INF,
    ArrayLike,
    ContinuousFunctionBar,
    Evaluator,
    TestFunction,
    audit_continuity,
    build_continuous,
    decompactify,
    detect_limit,
    extremum,
    pointwise,
    restrict_extend,
)
from .quadrature import PanelPrimitive, oscillatory_tail


class NormKind(str, Enum):
    alexiewicz = "alexiewicz"
    interval_sup = "interval_sup"
    dual_bv_lower = "dual_bv_lower"


@dataclass(frozen=True)
class Distribution:
    """f = F' with F continuous on the extended line and F(-inf) = 0."""

    primitive: ContinuousFunctionBar
    label: str = ""

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return self.primitive(x)

    @property
    def total(self) -> float:
        return self.primitive.limit_pos


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    closed_lo: bool = True
    closed_hi: bool = True


def try_from_primitive(F: ContinuousFunctionBar, label: str = "") -> Distribution:
    shift = F.limit_neg
    if shift == 0.0:
        return Distribution(F, label)
    shifted = pointwise(lambda v: v - shift, F, hint=F.smoothness_hint)
    return Distribution(ContinuousFunctionBar(shifted.evaluator, 0.0, F.limit_pos - shift, F.smoothness_hint), label)


def from_evaluator(evaluator: Evaluator, limit_neg: float, limit_pos: float,
                   tol: Optional[float] = None, label: str = "") -> Distribution:
    return try_from_primitive(build_continuous(evaluator, limit_neg, limit_pos, tol), label)


def on_interval(evaluator: Evaluator, a: float, b: float, audit: bool = True,
                tol: Optional[float] = None, label: str = "") -> Distribution:
    """The distribution whose primitive is F on [a, b] and constant outside."""
    F = restrict_extend(evaluator, a, b)
    if audit:
        audit_continuity(F, a, b, tol)
    return Distribution(F, label)


def zero() -> Distribution:
    return Distribution(ContinuousFunctionBar(lambda x: np.zeros(np.shape(x)), 0.0, 0.0), "0")


def integral(f: Distribution, a: float = NEG_INF, b: float = POS_INF) -> float:
    """F(b) - F(a)."""
    if a > b:
        raise IntervalEmpty(f"empty interval [{a}, {b}]")
    if a == b:
        return 0.0
    return float(f(b)) - float(f(a))


def integral_over(f: Distribution, interval: Interval) -> float:
    # primitives are continuous, so endpoint inclusion does not matter
    return integral(f, interval.lo, interval.hi)


def primitive_range(f: Distribution, tol: Optional[float] = None,
                    depth_cap: Optional[int] = None) -> Tuple[float, float]:
    """(inf F, sup F) over the extended line, the limits included."""
    _, top = extremum(f.primitive, NEG_INF, POS_INF, +1, tol, depth_cap)
    _, bottom = extremum(f.primitive, NEG_INF, POS_INF, -1, tol, depth_cap)
    ends = (0.0, f.total)
    return min(bottom, *ends), max(top, *ends)


def norm(f: Distribution, kind: NormKind = NormKind.alexiewicz, tol: Optional[float] = None,
         depth_cap: Optional[int] = None) -> float:
    low, high = primitive_range(f, tol, depth_cap)
    kind = NormKind(kind)
    if kind is NormKind.alexiewicz:
        return max(abs(low), abs(high))
    if kind is NormKind.interval_sup:
        return high - low
    return max(high, -low)


def translate(f: Distribution, t: float) -> Distribution:
    if not math.isfinite(t):
        raise DomainError(f"translation needs a finite shift, got {t}")
    evaluator = f.primitive.evaluator

    def shifted(x: np.ndarray) -> np.ndarray:
        return evaluator(np.asarray(x, dtype=float) - t)

    return Distribution(ContinuousFunctionBar(shifted, 0.0, f.total), f.label)


def linear_combine(a: float, f: Distribution, g: Distribution) -> Distribution:
    """a*f + g."""
    combined = pointwise(lambda F, G: a * F + G, f.primitive, g.primitive)
    return Distribution(ContinuousFunctionBar(combined.evaluator, 0.0, combined.limit_pos))


def equals(f: Distribution, g: Distribution, tol: Optional[float] = None) -> bool:
    tol = settings.equality_tol if tol is None else tol
    x = decompactify(np.linspace(-1.0, 1.0, settings.audit_grid_points))
    gap = np.abs(np.asarray(f(x), dtype=float) - np.asarray(g(x), dtype=float))
    return bool(np.max(gap) <= tol)


def action(f: Distribution, phi: TestFunction) -> float:
    """<f, phi> = -integral of F phi' over the support of phi."""
    lo, hi = phi.support
    value, _ = integrate.quad(lambda x: float(f(x)) * float(phi.derivative(x)), lo, hi,
                              points=[phi.center], limit=200)
    return -value


def hake_extend(F_finite: Optional[Evaluator] = None, tol: Optional[float] = None, *,
                integrand: Optional[Evaluator] = None, anchor: float = 0.0,
                label: str = "") -> Distribution:
    """A primitive on the real line with finite limits at both ends is already in the space.

    Pass either the primitive itself or, with `integrand=`, the function to be
    integrated from `anchor`; the latter takes the oscillation-aware tail path.
    """
    if (F_finite is None) == (integrand is None):
        raise DomainError("hake_extend needs exactly one of a primitive or an integrand")
    if integrand is not None:
        primitive = PanelPrimitive(integrand, anchor)
        limit_neg = oscillatory_tail(primitive, -1, tol)
        limit_pos = oscillatory_tail(primitive, +1, tol)
        F = ContinuousFunctionBar(primitive, limit_neg, limit_pos, primitive.modulus)
        audit_continuity(F, NEG_INF, POS_INF, tol, hint=primitive.modulus)
        return try_from_primitive(F, label)
    limit_neg = detect_limit(F_finite, -1, tol)
    limit_pos = detect_limit(F_finite, +1, tol)
    return try_from_primitive(build_continuous(F_finite, limit_neg, limit_pos, tol), label)
