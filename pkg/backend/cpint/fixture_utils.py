import json
import math
import re
from typing import Dict, Optional, Tuple, Union

import numpy as np
from pydantic import ValidationError
from scipy import special

from .bv_stieltjes import (
    BVFunction,
    constant,
    heaviside,
    indicator,
    monotone,
    piecewise,
    step_function,
)
from .config import settings
from .convergence_lab import DistributionSequence, default_bv_battery, fixtures
from .errors import DomainError, UnknownFixture
from .expressions import compile_expression
from .function_core import ContinuousFunctionBar, Evaluator, parse_extended
from .integral_core import Distribution, from_evaluator, hake_extend, on_interval
from .quadrature import panel_primitive
from .schemas import FixtureSpec
from .transforms import HalfPlanePoint, poisson_kernel_bv


Fixture = Union[Distribution, BVFunction, DistributionSequence]

# ternary digits resolved per Cantor evaluation; the tail weight is 2^-64
CANTOR_DIGITS = 64


def _cantor_scalar(x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    # exact ternary digits of the dyadic rational x
    num, den = float(x).as_integer_ratio()
    value, weight = 0.0, 0.5
    for _ in range(CANTOR_DIGITS):
        digit, num = divmod(3 * num, den)
        if digit == 1:
            return value + weight
        if digit == 2:
            value += weight
        if num == 0:
            break
        weight *= 0.5
    return value


_cantor_vectorized = np.vectorize(_cantor_scalar, otypes=[float])


def cantor_function(x):
    """The Cantor function on [0, 1], 0 to the left and 1 to the right."""
    return _cantor_vectorized(np.asarray(x, dtype=float))


def _arctan(x: np.ndarray) -> np.ndarray:
    return np.arctan(x) + 0.5 * math.pi


def _si(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.where(x > 0.0, special.sici(np.maximum(x, 0.0))[0], 0.0)


def _gaussian(shift: float) -> Evaluator:
    def evaluator(x: np.ndarray) -> np.ndarray:
        return special.ndtr(math.sqrt(2.0) * (np.asarray(x, dtype=float) - shift))

    return evaluator


def _exp_decay(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.where(x > 0.0, -np.expm1(-np.maximum(x, 0.0)), 0.0)


FRESNEL_TOTAL = math.sqrt(0.5 * math.pi)


def _fresnel(x: np.ndarray) -> np.ndarray:
    s, _ = special.fresnel(np.asarray(x, dtype=float) * math.sqrt(2.0 / math.pi))
    return FRESNEL_TOTAL * (s + 0.5)


def _indicator_ramp(x: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(x, dtype=float) + 1.0, 0.0, 2.0)


def _sin_bump(x: np.ndarray) -> np.ndarray:
    return np.sin(math.pi * np.clip(np.asarray(x, dtype=float), -1.0, 1.0))


def _lorentz_ratio(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x / (1.0 + x * x)


def _nonabsolute(x: np.ndarray) -> np.ndarray:
    t = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = t * t * np.cos(t**-2.0)
    return np.where(t > 0.0, values, 0.0)


# name -> (primitive, F(inf), description)
CATALOG: Dict[str, Tuple[Evaluator, float, str]] = {
    "arctan": (_arctan, math.pi, "f = 1/(1+x^2)"),
    "si": (_si, 0.5 * math.pi, "f = sin(x)/x on (0, inf)"),
    "cantor": (cantor_function, 1.0, "the Cantor function as a primitive; f is singular"),
    "gaussian": (_gaussian(0.0), 1.0, "f = exp(-x^2)/sqrt(pi)"),
    "gaussian_shift": (_gaussian(1.0), 1.0, "f = exp(-(x-1)^2)/sqrt(pi)"),
    "exp_decay": (_exp_decay, 1.0, "f = exp(-t) on [0, inf)"),
    "fresnel": (_fresnel, FRESNEL_TOTAL, "f = sin(x^2)"),
    "indicator_ramp": (_indicator_ramp, 2.0, "f = indicator of [-1, 1]"),
    "sin_bump": (_sin_bump, 0.0, "F = sin(pi x) on [-1, 1]"),
    "lorentz_ratio": (_lorentz_ratio, 0.0, "F = x/(1+x^2)"),
    "nonabsolute": (_nonabsolute, math.cos(1.0), "F = x^2 cos(x^-2) on [0, 1]"),
}


def catalog(name: str) -> Distribution:
    if name not in CATALOG:
        raise UnknownFixture(f"unknown catalog fixture {name!r}; expected one of {', '.join(sorted(CATALOG))}")
    evaluator, total, _ = CATALOG[name]
    return Distribution(ContinuousFunctionBar(evaluator, 0.0, total), name)


def load_fixture_specs(path: Optional[str] = None) -> Dict[str, FixtureSpec]:
    """name -> FixtureSpec from a JSON object with one block per fixture name."""
    path = settings.fixture_specs_path if path is None else path
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        return {}
    if not isinstance(data, dict):
        raise DomainError(f"{path}: expected a JSON object keyed by fixture name")
    specs: Dict[str, FixtureSpec] = {}
    for name, body in data.items():
        try:
            specs[name] = FixtureSpec.model_validate({**body, "name": name})
        except ValidationError as exc:
            raise DomainError(f"fixture {name!r} in {path} is malformed: {exc.errors()[0]['msg']}") from exc
    return specs


# BV specs: one, const:C, heaviside[:P], indicator:[A,B], atan, staircase, poisson:X,Y, blocks:N
INDICATOR_RE = re.compile(r"^indicator:([\[(])\s*([^,\s]+)\s*,\s*([^\]\s)]+)\s*([\])])$")


def blocks(count: int) -> BVFunction:
    """Sum over k <= count of k^-2 times the indicator of [2k-1, 2k]."""
    if count < 1:
        raise DomainError(f"blocks needs at least one block, got {count}")
    breaks, levels, point_values = [], [0.0], []
    for k in range(1, count + 1):
        height = 1.0 / (k * k)
        breaks.extend([2.0 * k - 1.0, 2.0 * k])
        levels.extend([height, 0.0])
        point_values.extend([height, height])
    return step_function(breaks, levels, point_values)


def parse_bv_spec(text: str) -> BVFunction:
    spec = text.strip()
    named = dict(default_bv_battery())
    if spec in named:
        return named[spec]
    head, _, rest = spec.partition(":")
    try:
        if head == "const":
            return constant(float(rest))
        if head == "heaviside":
            return heaviside(parse_extended(rest))
        if head == "indicator":
            match = INDICATOR_RE.match(spec)
            if match is None:
                raise DomainError(f"malformed indicator spec {spec!r}; expected indicator:[A,B]")
            lo_mark, a, b, hi_mark = match.groups()
            return indicator(parse_extended(a), parse_extended(b), lo_mark == "[", hi_mark == "]")
        if head == "poisson":
            x, y = (float(v) for v in rest.split(","))
            return poisson_kernel_bv(HalfPlanePoint(x, y))
        if head == "blocks":
            return blocks(int(rest))
    except ValueError as exc:
        raise DomainError(f"malformed BV spec {spec!r}: {exc}") from exc
    raise DomainError(f"unknown BV spec {spec!r}")


def _build_primitive(spec: FixtureSpec, tol: Optional[float]) -> Distribution:
    if spec.integrand:
        return hake_extend(integrand=compile_expression(spec.integrand, continuous=False), tol=tol, label=spec.name)
    evaluator = compile_expression(spec.expression)
    if spec.support is not None:
        return on_interval(evaluator, *spec.support, tol=tol, label=spec.name)
    if spec.limit_neg is not None and spec.limit_pos is not None:
        return from_evaluator(evaluator, spec.limit_neg, spec.limit_pos, tol, label=spec.name)
    return hake_extend(evaluator, tol, label=spec.name)


def _build_bv(spec: FixtureSpec, tol: Optional[float]) -> BVFunction:
    if spec.bv:
        return parse_bv_spec(spec.bv)
    evaluators = [compile_expression(text, continuous=False) for text in spec.pieces]
    return piecewise(spec.breaks, evaluators, spec.point_values or None,
                     spec.value_neg_inf, spec.value_pos_inf, tol)


def build_fixture(spec: FixtureSpec, tol: Optional[float] = None) -> Fixture:
    if spec.kind == "primitive":
        return _build_primitive(spec, tol)
    if spec.kind == "bv":
        return _build_bv(spec, tol)
    return fixtures(spec.family, spec.params)


def resolve_fixture(name: str, path: Optional[str] = None, tol: Optional[float] = None) -> Fixture:
    """Catalog names first, then the fixture file."""
    if name in CATALOG:
        return catalog(name)
    specs = load_fixture_specs(path)
    if name not in specs:
        known = sorted({*CATALOG, *specs})
        raise UnknownFixture(f"unknown fixture {name!r}; expected one of {', '.join(known)}")
    return build_fixture(specs[name], tol)


# Seeded generators for the randomized suites


def seeded_rng(seed: Optional[int] = None) -> np.random.Generator:
    return np.random.default_rng(settings.seed if seed is None else seed)


def random_linear_primitive(rng: np.random.Generator, knots: int = 6,
                            span: Tuple[float, float] = (-5.0, 5.0)) -> Distribution:
    """Piecewise linear F through random knots, 0 before the first and flat after the last."""
    xs = np.sort(rng.uniform(span[0], span[1], knots))
    ys = rng.normal(0.0, 1.0, knots)
    ys[0] = 0.0

    def evaluator(x: np.ndarray) -> np.ndarray:
        return np.interp(x, xs, ys)

    return Distribution(ContinuousFunctionBar(evaluator, 0.0, float(ys[-1])), "random_linear")


def random_bv(rng: np.random.Generator, jumps: int = 4, span: Tuple[float, float] = (-5.0, 5.0)) -> BVFunction:
    """A step function whose point values are not always one of the one-sided limits."""
    breaks = np.sort(rng.uniform(span[0], span[1], jumps))
    levels = rng.normal(0.0, 1.0, jumps + 1)
    point_values = []
    for i in range(jumps):
        choice = rng.integers(3)
        point_values.append(levels[i] if choice == 0 else levels[i + 1] if choice == 1 else rng.normal())
    return step_function(breaks.tolist(), levels.tolist(), point_values)


def random_monotone_bv(rng: np.random.Generator, jumps: int = 4,
                       span: Tuple[float, float] = (-5.0, 5.0)) -> BVFunction:
    """Either a monotone staircase or a scaled, shifted tanh; the direction is random."""
    direction = 1.0 if rng.random() < 0.5 else -1.0
    if rng.random() < 0.5:
        height, shift, offset = rng.uniform(0.2, 2.0), rng.uniform(*span), rng.normal()

        def ramp(x: np.ndarray) -> np.ndarray:
            return offset + direction * height * np.tanh(np.asarray(x, dtype=float) - shift)

        return monotone(ramp)
    breaks = np.sort(rng.uniform(span[0], span[1], jumps))
    start = rng.normal()
    levels = np.concatenate([[start], start + direction * np.cumsum(rng.uniform(0.1, 1.0, jumps))])
    point_values = [levels[i] + rng.random() * (levels[i + 1] - levels[i]) for i in range(jumps)]
    return step_function(breaks.tolist(), levels.tolist(), point_values)


def random_triple(rng: np.random.Generator) -> Tuple[Distribution, Distribution, Distribution]:
    return (random_linear_primitive(rng), random_linear_primitive(rng), random_linear_primitive(rng))


def source_distribution(primitive: Optional[str] = None, primitive_of: Optional[str] = None,
                        fixture: Optional[str] = None, support: Optional[Tuple[float, float]] = None,
                        a: float = -math.inf, b: float = math.inf, hake: bool = False,
                        tol: Optional[float] = None) -> Distribution:
    """The Distribution named by exactly one of an expression primitive, an integrand or a fixture.

    An expression primitive is restricted to `support`, else to [a, b] when
    both are finite, else its limits come from the tail audit.
    """
    given = [s for s in (primitive, primitive_of, fixture) if s]
    if len(given) != 1:
        raise DomainError("exactly one of a primitive, an integrand or a fixture is required")
    if fixture:
        resolved = resolve_fixture(fixture, tol=tol)
        if not isinstance(resolved, Distribution):
            raise DomainError(f"fixture {fixture!r} is not a primitive")
        return resolved
    if primitive_of:
        integrand = compile_expression(primitive_of, continuous=False)
        if support:
            return on_interval(panel_primitive(integrand), *support, tol=tol)
        return hake_extend(integrand=integrand, tol=tol)
    evaluator = compile_expression(primitive)
    if support:
        return on_interval(evaluator, *support, tol=tol)
    if math.isfinite(a) and math.isfinite(b) and not hake:
        return on_interval(evaluator, a, b, tol=tol)
    return hake_extend(evaluator, tol)
