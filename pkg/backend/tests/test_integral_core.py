import math

import numpy as np
import pytest
from scipy import integrate

from cpint.errors import DomainError, IntervalEmpty
from cpint.function_core import NEG_INF, POS_INF, ContinuousFunctionBar, bump
from cpint.integral_core import (
    Interval,
    NormKind,
    action,
    equals,
    from_evaluator,
    hake_extend,
    integral,
    integral_over,
    linear_combine,
    norm,
    on_interval,
    primitive_range,
    translate,
    try_from_primitive,
    zero,
)


def test_integral_is_endpoint_evaluation(arctan):
    assert integral(arctan) == pytest.approx(math.pi)
    assert integral(arctan, 0.0, POS_INF) == pytest.approx(0.5 * math.pi)
    assert integral(arctan, -1.0, 1.0) == pytest.approx(0.5 * math.pi)
    assert integral(arctan, 2.0, 2.0) == 0.0


def test_integral_rejects_reversed_interval(arctan):
    with pytest.raises(IntervalEmpty):
        integral(arctan, 1.0, 0.0)


def test_integral_over_ignores_endpoint_inclusion(arctan):
    closed = integral_over(arctan, Interval(-1.0, 1.0))
    open_ = integral_over(arctan, Interval(-1.0, 1.0, closed_lo=False, closed_hi=False))
    assert closed == open_


@pytest.mark.parametrize("kind, expected", [
    (NormKind.alexiewicz, math.pi),
    (NormKind.interval_sup, math.pi),
    (NormKind.dual_bv_lower, math.pi),
])
def test_norms_of_arctan(arctan, kind, expected):
    assert norm(arctan, kind) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("kind, expected", [
    ("alexiewicz", 1.0),
    ("interval_sup", 2.0),
    ("dual_bv_lower", 1.0),
])
def test_norms_of_a_primitive_with_zero_total(sin_bump, kind, expected):
    assert norm(sin_bump, kind) == pytest.approx(expected, abs=1e-9)


def test_norms_are_equivalent(sin_bump, arctan):
    for f in (sin_bump, arctan):
        alexiewicz = norm(f, NormKind.alexiewicz)
        assert alexiewicz <= norm(f, NormKind.interval_sup) + 1e-12
        assert norm(f, NormKind.interval_sup) <= 2.0 * alexiewicz + 1e-12


def test_primitive_range():
    lorentz = from_evaluator(lambda x: x / (1.0 + x * x), 0.0, 0.0)
    low, high = primitive_range(lorentz)
    assert low == pytest.approx(-0.5, abs=1e-9)
    assert high == pytest.approx(0.5, abs=1e-9)


def test_try_from_primitive_shifts_to_zero_at_minus_infinity():
    f = try_from_primitive(ContinuousFunctionBar(np.arctan, -0.5 * math.pi, 0.5 * math.pi))
    assert f(NEG_INF) == 0.0
    assert f(0.0) == pytest.approx(0.5 * math.pi)
    assert f.total == pytest.approx(math.pi)


def test_on_interval_restricts_the_primitive():
    f = on_interval(lambda x: np.asarray(x) ** 3, 0.0, 1.0)
    assert integral(f) == 1.0
    assert f(-5.0) == 0.0
    assert f(5.0) == 1.0


def test_translate(arctan):
    g = translate(arctan, 2.0)
    assert g(2.0) == pytest.approx(0.5 * math.pi)
    assert g.total == arctan.total
    with pytest.raises(DomainError):
        translate(arctan, POS_INF)


def test_linear_combine(arctan, gaussian):
    h = linear_combine(2.0, arctan, gaussian)
    assert h.total == pytest.approx(2.0 * math.pi + 1.0)
    assert h(0.0) == pytest.approx(math.pi + 0.5)


def test_equals(arctan, gaussian):
    assert equals(arctan, translate(arctan, 0.0))
    assert not equals(arctan, gaussian)
    assert equals(linear_combine(-1.0, arctan, arctan), zero())


def test_action_pairs_with_the_density(gaussian):
    phi = bump(0.3, 1.0)
    expected, _ = integrate.quad(lambda x: math.exp(-x * x) / math.sqrt(math.pi) * phi(x), -0.7, 1.3, points=[0.3])
    assert action(gaussian, phi) == pytest.approx(expected, rel=1e-7)


def test_hake_extend_from_a_primitive():
    f = hake_extend(np.arctan)
    assert f.total == pytest.approx(math.pi, abs=1e-9)
    assert f(0.0) == pytest.approx(0.5 * math.pi, abs=1e-9)


def test_hake_extend_from_an_integrand():
    f = hake_extend(integrand=lambda x: np.exp(-np.asarray(x) ** 2))
    assert f.total == pytest.approx(math.sqrt(math.pi), abs=1e-9)
    assert integral(f, 0.0, 1.0) == pytest.approx(0.5 * math.sqrt(math.pi) * math.erf(1.0), abs=1e-10)


def test_hake_extend_needs_exactly_one_source():
    with pytest.raises(DomainError):
        hake_extend()
    with pytest.raises(DomainError):
        hake_extend(np.arctan, integrand=np.cos)
