"""Kernels applied through the product rule: the half-plane Poisson integral and the Laplace transform."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize

from .bv_stieltjes import BVFunction, Piece, from_pieces
from .config import settings
from .constants import CONE_ANGLES, GAP_SAMPLES
from .errors import DomainError
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
)
from .integral_core import Distribution
from .product_calculus import integral_product
from .quadrature import GL_NODES, GL_WEIGHTS
from .schemas import GrowthProbe

# Laplacian stencil: samples per kernel width around the centre point
FOCUS_SPAN = 64.0
FOCUS_SAMPLES = 4097
# continuity of a locally integrable primitive is audited on [0, WEIGHTED_AUDIT_REACH]
WEIGHTED_AUDIT_REACH = 64.0
# weighted primitive: uniform cells below the reach, quad breakpoints at these multiples of 1/|r|
WEIGHTED_MAX_CELLS = 4096
WEIGHTED_BREAKS = (1.0, 4.0, 16.0, 64.0)
LOG_TINY = math.log(np.finfo(float).tiny)


@dataclass(frozen=True)
class HalfPlanePoint:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (self.y > 0 and math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError(f"Poisson points need finite x and y > 0, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class ComplexPoint:
    re: float
    im: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def check_laplace(self) -> None:
        if not (self.re > 0 or (self.re == 0 and self.im == 0)):
            raise DomainError(f"the Laplace transform needs Re z > 0 or z = 0, got {self.value}")


def _scalar(fn: Evaluator) -> Callable[[float], float]:
    return lambda t: float(np.asarray(fn(np.array([t], dtype=float)), dtype=float)[0])


def monotone_pieces(fn: Evaluator, dfn: Evaluator, lo: float, hi: float,
                    samples: Optional[ArrayLike] = None,
                    limits: Tuple[float, float] = (0.0, 0.0)) -> List[Piece]:
    """Cuts a smooth kernel into monotone pieces at the sign changes of its derivative.

    Sign changes are bracketed on `samples` (default: the audit grid in u) and
    refined with brentq. `limits` are the kernel values at infinite ends.
    """
    if samples is None:
        u = np.linspace(compactify(lo), compactify(hi), settings.audit_grid_points)[1:-1]
        samples = decompactify(u)
    t = np.unique(np.asarray(samples, dtype=float))
    t = t[(t > lo) & (t < hi) & np.isfinite(t)]
    slope = np.asarray(dfn(t), dtype=float)
    signs = np.sign(slope)
    nonzero = np.flatnonzero(signs)
    derivative = _scalar(dfn)
    roots = []
    for i, j in zip(nonzero, nonzero[1:]):
        if signs[i] != signs[j]:
            roots.append(optimize.brentq(derivative, t[i], t[j], xtol=1e-14, rtol=4 * np.finfo(float).eps))
    edges = [lo, *sorted(set(roots)), hi]
    value = _scalar(fn)

    def at(x: float) -> float:
        if x == NEG_INF:
            return limits[0]
        if x == POS_INF:
            return limits[1]
        return value(x)

    return [Piece(a, b, fn, at(a), at(b)) for a, b in zip(edges, edges[1:]) if a < b]


def poisson_kernel(s: ArrayLike, y: float) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return y / (math.pi * (s * s + y * y))


def poisson_kernel_bv(p: HalfPlanePoint) -> BVFunction:
    """t -> K(x - t, y): increasing up to t = x, then decreasing; V = 2/(pi y)."""
    peak = 1.0 / (math.pi * p.y)

    def kernel(t: np.ndarray) -> np.ndarray:
        return poisson_kernel(p.x - np.asarray(t, dtype=float), p.y)

    pieces = [Piece(NEG_INF, p.x, kernel, 0.0, peak), Piece(p.x, POS_INF, kernel, peak, 0.0)]
    return from_pieces(pieces, audit=False)


def poisson(f: Distribution, p: HalfPlanePoint, tol: Optional[float] = None) -> float:
    """u(x, y) = integral of f(t) K(x - t, y) dt."""
    return integral_product(f, poisson_kernel_bv(p), tol)


def _kernel_slope(s: np.ndarray, y: float) -> np.ndarray:
    """d/dt of K(x - t, y) written in s = x - t."""
    return 2.0 * y * s / (math.pi * (s * s + y * y) ** 2)


def laplacian_probe(f: Distribution, p: HalfPlanePoint, h: float, tol: Optional[float] = None) -> float:
    """Five-point Laplacian of u at p, taken under the integral sign."""
    if not 0 < h < p.y:
        raise DomainError(f"stencil step must lie in (0, y), got h={h} with y={p.y}")
    shifts = ((h, 0.0, 1.0), (-h, 0.0, 1.0), (0.0, h, 1.0), (0.0, -h, 1.0), (0.0, 0.0, -4.0))

    def stencil(t: np.ndarray) -> np.ndarray:
        s = p.x - np.asarray(t, dtype=float)
        return sum(w * poisson_kernel(s + dx, p.y + dy) for dx, dy, w in shifts) / (h * h)

    def stencil_slope(t: np.ndarray) -> np.ndarray:
        s = p.x - np.asarray(t, dtype=float)
        return sum(w * _kernel_slope(s + dx, p.y + dy) for dx, dy, w in shifts) / (h * h)

    u = np.linspace(-1.0, 1.0, settings.audit_grid_points)[1:-1]
    focus = p.x + p.y * np.linspace(-FOCUS_SPAN, FOCUS_SPAN, FOCUS_SAMPLES)
    samples = np.concatenate([decompactify(u), focus])
    pieces = monotone_pieces(stencil, stencil_slope, NEG_INF, POS_INF, samples)
    return integral_product(f, from_pieces(pieces, audit=False), tol)


def _poisson_distribution(x: float, y: float) -> BVFunction:
    """t -> 1/2 + arctan((x - t)/y)/pi, decreasing from 1 to 0."""

    def cdf(t: np.ndarray) -> np.ndarray:
        return 0.5 + np.arctan((x - np.asarray(t, dtype=float)) / y) / math.pi

    return from_pieces([Piece(NEG_INF, POS_INF, cdf, 1.0, 0.0)], audit=False)


def boundary_norm_gap(f: Distribution, y: float, points: Optional[Sequence[float]] = None,
                      tol: Optional[float] = None) -> float:
    """max over the points x of |integral of u(., y) over [-inf, x] - F(x)|."""
    if not y > 0:
        raise DomainError(f"boundary gap needs y > 0, got {y}")
    if points is None:
        points = decompactify(np.linspace(-1.0, 1.0, GAP_SAMPLES + 2)[1:-1])
    gaps = [abs(integral_product(f, _poisson_distribution(float(x), y), tol) - float(f(x))) for x in points]
    return max(gaps)


def _check_half_line(f: Distribution) -> None:
    u = np.linspace(-1.0, 0.0, settings.audit_grid_points)
    values = np.asarray(f(decompactify(u)), dtype=float)
    if np.max(np.abs(values)) > settings.equality_tol:
        raise DomainError("the Laplace transform needs a primitive that vanishes on (-inf, 0]")


def _tail_cutoff(x: float, y: float, n: int, scale: float, tol: float) -> float:
    """T with T^n e^(-xT) (1 + |y|/x) scale below a small fraction of tol."""
    weight = (1.0 + abs(y) / x) * max(1.0, scale)
    cutoff = max(1.0, n / x, math.log(weight * 1e3 / tol) / x)
    while cutoff**n * math.exp(-x * cutoff) * weight * 1e3 > tol:
        cutoff *= 1.25
    return cutoff


def _laplace_kernel_bv(kernel: Callable[[np.ndarray], np.ndarray], slope: Callable[[np.ndarray], np.ndarray],
                       x: float, y: float, cutoff: float) -> BVFunction:
    """Kernel on [0, T] cut into monotone pieces, continued past T by a monotone exponential tail."""
    at_zero = float(kernel(np.array([0.0]))[0])
    at_cut = float(kernel(np.array([cutoff]))[0])
    samples = np.linspace(0.0, cutoff, max(settings.audit_grid_points, int(8 * abs(y) * cutoff / math.pi) + 1))
    # dense near t = 0, where t^n e^(-zt) turns for large |z|
    samples = np.concatenate([samples, np.geomspace(1e-8, 1.0, 129) * min(1.0, cutoff)])
    head = monotone_pieces(kernel, slope, 0.0, cutoff, samples)

    def before(t: np.ndarray) -> np.ndarray:
        return np.full(np.shape(t), at_zero)

    def tail(t: np.ndarray) -> np.ndarray:
        return at_cut * np.exp(-x * (np.asarray(t, dtype=float) - cutoff))

    pieces = [Piece(NEG_INF, 0.0, before, at_zero, at_zero), *head, Piece(cutoff, POS_INF, tail, at_cut, 0.0)]
    return from_pieces(pieces, audit=False)


def _transform(f: Distribution, z: ComplexPoint, n: int, tol: Optional[float]) -> complex:
    z.check_laplace()
    _check_half_line(f)
    tol = settings.tol if tol is None else tol
    if z.re == 0 and z.im == 0:
        return complex(f.total, 0.0)
    zc = z.value
    scale = float(np.max(np.abs(np.asarray(f(decompactify(np.linspace(0.0, 1.0, settings.audit_grid_points))),
                                            dtype=float))))
    cutoff = _tail_cutoff(z.re, z.im, n, scale, tol)

    def complex_kernel(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return t**n * np.exp(-zc * t)

    def complex_slope(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        lead = n * t ** (n - 1) if n else np.zeros_like(t)
        return (lead - zc * t**n) * np.exp(-zc * t)

    def part(component: str) -> float:
        kernel = _laplace_kernel_bv(lambda t: getattr(complex_kernel(t), component),
                                    lambda t: getattr(complex_slope(t), component), z.re, z.im, cutoff)
        return integral_product(f, kernel, tol)

    imag = part("imag") if z.im != 0 else 0.0
    return (-1) ** n * complex(part("real"), imag)


def laplace(f: Distribution, z: ComplexPoint, tol: Optional[float] = None) -> complex:
    """Integral over [0, inf] of f(t) e^(-zt)."""
    return _transform(f, z, 0, tol)


def laplace_derivative(f: Distribution, z: ComplexPoint, n: int, tol: Optional[float] = None) -> complex:
    """n-th derivative of the transform: (-1)^n times the integral of f(t) t^n e^(-zt)."""
    if n < 0:
        raise DomainError(f"derivative order must be nonnegative, got {n}")
    if n > 0 and not z.re > 0:
        raise DomainError(f"derivatives of the transform need Re z > 0, got {z.value}")
    return _transform(f, z, n, tol)


def growth_probe(f: Distribution, alpha: float, radii: Sequence[float], tol: Optional[float] = None) -> GrowthProbe:
    """max |f^(z)| over the cone arc |arg z| <= alpha at each radius."""
    if not 0 <= alpha < 0.5 * math.pi:
        raise DomainError(f"cone half-angle must lie in [0, pi/2), got {alpha}")
    # real primitives: |f^(conj z)| = |f^(z)|, so the upper half of the arc suffices
    angles = np.linspace(-alpha, alpha, CONE_ANGLES)
    angles = np.unique(np.abs(angles))
    maxima = []
    for r in radii:
        values = [abs(laplace(f, ComplexPoint(r * math.cos(a), r * math.sin(a)), tol)) for a in angles]
        maxima.append(max(values))
    if len(maxima) < 2:
        trend = "inconclusive"
    elif all(b <= a + 1e-12 for a, b in zip(maxima, maxima[1:])):
        trend = "decreasing"
    else:
        trend = "not_decreasing"
    return GrowthProbe(alpha=alpha, radii=list(radii), maxima=maxima, trend=trend)


class WeightedPrimitive:
    """x -> integral of F'(t) e^(-rt) over [0, x] for a continuous F on [0, inf); 0 for x <= 0.

    The half-line is cut on a uniform grid over [0, WEIGHTED_AUDIT_REACH] and
    at 2^k - 1 beyond it. Each cell [a, b] is integrated by parts against
    F - F(s), where the anchor s is a or b so that e^(-r(t - s)) stays below
    e on the cell, and the factor e^(-rs) is applied in log space. Cells where
    that factor underflows contribute nothing, even where F itself overflows.
    """

    def __init__(self, F_loc: Evaluator, r: float, depth_cap: Optional[int] = None):
        self.F_loc = F_loc
        self.r = float(r)
        depth_cap = settings.budget if depth_cap is None else depth_cap
        self._value = _scalar(F_loc)
        self._long: Dict[Tuple[float, float], float] = {}

        cells = min(WEIGHTED_MAX_CELLS, math.ceil(WEIGHTED_AUDIT_REACH * max(1.0, abs(self.r))))
        ladder = 2.0 ** np.arange(1, depth_cap + 1) - 1.0
        self.nodes = np.unique(np.concatenate([np.linspace(0.0, WEIGHTED_AUDIT_REACH, cells + 1), ladder]))
        near = int(np.searchsorted(self.nodes, WEIGHTED_AUDIT_REACH, side="right"))
        increments = np.full(self.nodes.size - 1, np.nan)
        increments[:near - 1] = self._cells(self.nodes[:near - 1], self.nodes[1:near])
        running = float(np.sum(increments[:near - 1]))
        # far cells one at a time: once the sum blows up the rest is moot
        for i in range(near - 1, self.nodes.size - 1):
            increments[i] = self._cells(self.nodes[i:i + 1], self.nodes[i + 1:i + 2])[0]
            running += increments[i]
            if not math.isfinite(running):
                break
        self.cumulative = np.concatenate([[0.0], np.cumsum(increments)])

    def _F(self, x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.F_loc(x), dtype=float), np.shape(x))

    def _short_integrals(self, a: np.ndarray, b: np.ndarray, s: np.ndarray) -> np.ndarray:
        half = 0.5 * (b - a)
        t = (0.5 * (a + b))[:, None] + half[:, None] * GL_NODES[None, :]
        G = self._F(t.ravel()).reshape(t.shape) - self._F(s)[:, None]
        return half * ((G * np.exp(-self.r * (t - s[:, None]))) @ GL_WEIGHTS)

    def _long_integral(self, a: float, b: float, s: float) -> float:
        key = (a, b)
        if key not in self._long:
            at_s = self._value(s)
            r = self.r

            def integrand(t: float) -> float:
                return (self._value(t) - at_s) * math.exp(-r * (t - s))

            width = 1.0 / abs(r)
            points = sorted({p for k in WEIGHTED_BREAKS for p in (a + k * width, b - k * width) if a < p < b})
            self._long[key], _ = integrate.quad(integrand, a, b, points=points or None, limit=200,
                                                epsabs=0.0, epsrel=1e-12)
        return self._long[key]

    def _cells(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        r = self.r
        short = abs(r) * (b - a) <= 1.0
        s = np.where((r >= 0) | short, a, b)
        log_scale = -r * s
        out = np.zeros(a.shape)
        live = log_scale > LOG_TINY
        if not live.any():
            return out
        a, b, s, short = a[live], b[live], s[live], short[live]
        with np.errstate(all="ignore"):
            at_s = self._F(s)
            bracket = (self._F(b) - at_s) * np.exp(-r * (b - s)) - (self._F(a) - at_s) * np.exp(-r * (a - s))
            if r != 0:
                body = np.empty(a.shape)
                if short.any():
                    body[short] = self._short_integrals(a[short], b[short], s[short])
                for i in np.flatnonzero(~short):
                    body[i] = self._long_integral(float(a[i]), float(b[i]), float(s[i]))
                bracket = bracket + r * body
            out[live] = np.sign(bracket) * np.exp(np.log(np.abs(bracket)) + log_scale[live])
        return out

    def __call__(self, x: ArrayLike) -> np.ndarray:
        x_arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x_arr).ravel()
        out = np.zeros(flat.shape)
        positive = flat > 0
        xs = flat[positive]
        k = np.searchsorted(self.nodes, xs, side="right") - 1
        base = self.nodes[k]
        values = self.cumulative[k].copy()
        inside = xs > base
        if inside.any():
            values[inside] += self._cells(base[inside], xs[inside])
        out[positive] = values
        return out.reshape(x_arr.shape)


def _weighted_primitive(F_loc: Evaluator, r: float, tol: Optional[float]) -> Tuple[WeightedPrimitive, float]:
    """The weighted primitive of F_loc' and its limit at +inf."""

    def local(t: ArrayLike) -> np.ndarray:
        return np.asarray(F_loc(np.clip(np.asarray(t, dtype=float), 0.0, WEIGHTED_AUDIT_REACH)), dtype=float)

    audit_continuity(local, 0.0, WEIGHTED_AUDIT_REACH, tol)
    F_r = WeightedPrimitive(F_loc, r)
    return F_r, detect_limit(F_r, +1, tol)


def weighted_integral(F_loc: Evaluator, r: float, tol: Optional[float] = None) -> float:
    """Integral over [0, inf] of F_loc'(t) e^(-rt) for any real r.

    Raises NoLimitAtInfinity when F_loc' is outside the weighted space, i.e.
    when the weighted primitive has no limit at +inf.
    """
    return _weighted_primitive(F_loc, r, tol)[1]


def weighted_laplace(F_loc: Evaluator, z: ComplexPoint, r: float, tol: Optional[float] = None) -> complex:
    """Laplace transform of F_loc' at z, for F_loc' in the weighted space of exponent r.

    This is the ordinary transform of F_loc'(t) e^(-rt) at z - r, so it needs
    Re z > r, or z = r where it reduces to the weighted integral.
    """
    shifted = ComplexPoint(z.re - r, z.im)
    if not (shifted.re > 0 or (shifted.re == 0 and shifted.im == 0)):
        raise DomainError(f"the weighted transform needs Re z > {r} or z = {r}, got {z.value}")
    F_r, limit = _weighted_primitive(F_loc, r, tol)
    f_r = Distribution(ContinuousFunctionBar(F_r, 0.0, limit), f"weighted r={r}")
    return laplace(f_r, shifted, tol)
