import math

import numpy as np
import pytest
from scipy import special

from cpint.errors import DomainError, NoLimitAtInfinity, NotContinuous
from cpint.function_core import (
    NEG_INF,
    POS_INF,
    ContinuousFunctionBar,
    audit_continuity,
    bump,
    bump_mass,
    build_continuous,
    compactify,
    decompactify,
    delta_sequence,
    detect_limit,
    evaluate_extended,
    extremum,
    pair,
    parse_extended,
    pointwise,
    restrict_extend,
    sup_norm,
)


@pytest.mark.parametrize("text, expected", [
    ("inf", POS_INF),
    ("+Infinity", POS_INF),
    (" -inf ", NEG_INF),
    ("2.5", 2.5),
    ("-1e3", -1000.0),
])
def test_parse_extended(text, expected):
    assert parse_extended(text) == expected


def test_parse_extended_rejects_garbage():
    with pytest.raises(ValueError):
        parse_extended("infinite")


def test_compactify_maps_the_extended_line_onto_the_chart():
    assert compactify(POS_INF) == 1.0
    assert compactify(NEG_INF) == -1.0
    assert compactify(1.0) == 0.5
    assert compactify(-3.0) == -0.75
    assert decompactify(1.0) == POS_INF
    assert decompactify(-1.0) == NEG_INF


@pytest.mark.parametrize("x", [0.0, 3.0, -3.0, 7.0, 1023.0])
def test_chart_round_trip_is_exact_on_dyadic_values(x):
    assert decompactify(compactify(x)) == x


def test_compactify_keeps_array_shape():
    u = compactify(np.array([[NEG_INF, 0.0], [1.0, POS_INF]]))
    assert u.shape == (2, 2)
    np.testing.assert_array_equal(u, [[-1.0, 0.0], [0.5, 1.0]])


def test_evaluate_extended_substitutes_limits():
    values = evaluate_extended(np.arctan, np.array([NEG_INF, 0.0, POS_INF]), -7.0, 7.0)
    np.testing.assert_array_equal(values, [-7.0, 0.0, 7.0])


def test_build_continuous_accepts_arctan():
    F = build_continuous(np.arctan, -0.5 * math.pi, 0.5 * math.pi)
    assert F(POS_INF) == 0.5 * math.pi
    assert F(1.0) == pytest.approx(0.25 * math.pi)


def test_build_continuous_rejects_wrong_limits():
    with pytest.raises(NoLimitAtInfinity):
        build_continuous(np.arctan, 0.0, 0.0)


def test_build_continuous_rejects_infinite_limits():
    with pytest.raises(NoLimitAtInfinity):
        build_continuous(np.arctan, NEG_INF, POS_INF)


def test_build_continuous_locates_a_jump():
    with pytest.raises(NotContinuous) as info:
        build_continuous(np.sign, -1.0, 1.0)
    assert abs(info.value.witness) < 1e-6


def test_audit_passes_a_rapidly_oscillating_primitive():
    def F(x):
        t = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(t > 0.0, t * t * np.cos(t**-2.0), 0.0)

    audit_continuity(F, 0.0, 1.0)


def test_detect_limit():
    assert detect_limit(np.arctan, +1) == pytest.approx(0.5 * math.pi, abs=1e-9)
    assert detect_limit(np.arctan, -1) == pytest.approx(-0.5 * math.pi, abs=1e-9)


def test_detect_limit_rejects_oscillation():
    with pytest.raises(NoLimitAtInfinity):
        detect_limit(np.sin, +1)


def test_extremum_finds_an_interior_peak():
    x, value = extremum(lambda t: np.exp(-(np.asarray(t) - 1.0) ** 2))
    assert x == pytest.approx(1.0, abs=1e-4)
    assert value == pytest.approx(1.0, abs=1e-9)


def test_extremum_minimum_by_sign():
    x, value = extremum(lambda t: np.sin(np.pi * np.clip(t, -1.0, 1.0)), sign=-1)
    assert x == pytest.approx(-0.5, abs=1e-4)
    assert value == pytest.approx(-1.0, abs=1e-9)


def test_sup_norm_counts_the_limits():
    F = ContinuousFunctionBar(np.arctan, -0.5 * math.pi, 0.5 * math.pi)
    assert sup_norm(F) == pytest.approx(0.5 * math.pi, abs=1e-9)


def test_pointwise_carries_limits():
    F = ContinuousFunctionBar(np.arctan, -0.5 * math.pi, 0.5 * math.pi)
    G = pointwise(lambda a, b: a + b, F, F)
    assert G.limit_pos == math.pi
    assert G(1.0) == pytest.approx(0.5 * math.pi)


def test_restrict_extend():
    F = restrict_extend(lambda x: np.asarray(x) ** 2, 1.0, 2.0)
    assert F(0.0) == 0.0
    assert F(1.5) == pytest.approx(1.25)
    assert F(5.0) == 3.0
    assert F.limit_pos == 3.0


@pytest.mark.parametrize("a, b", [(2.0, 1.0), (NEG_INF, 1.0)])
def test_restrict_extend_rejects_bad_intervals(a, b):
    with pytest.raises(DomainError):
        restrict_extend(np.sin, a, b)


def test_bump_mass_closed_form():
    # twice the integral of exp(-1/t) over (0, 1)
    assert bump_mass() == pytest.approx(2.0 * (math.exp(-1.0) - special.exp1(1.0)), rel=1e-8)


def test_bump_values_and_support():
    phi = bump(2.0, 0.5)
    assert phi.support == (1.5, 2.5)
    assert phi(2.0) == pytest.approx(math.exp(-1.0))
    assert phi(2.5) == 0.0
    assert phi(10.0) == 0.0
    assert phi.sup() == pytest.approx(math.exp(-1.0))
    assert phi.mass() == pytest.approx(0.5 * bump_mass())


def test_bump_derivative_matches_finite_difference():
    phi = bump(0.0, 1.0)
    h = 1e-6
    for x in (-0.7, -0.2, 0.3, 0.8):
        assert phi.derivative(x) == pytest.approx((phi(x + h) - phi(x - h)) / (2 * h), rel=1e-5)


@pytest.mark.parametrize("n", [1, 4, 32])
def test_delta_sequence_has_unit_mass(n):
    phi = delta_sequence(0.5, n)
    assert phi.mass() == pytest.approx(1.0)
    assert pair(lambda x: 1.0, phi) == pytest.approx(1.0, rel=1e-8)


def test_test_function_constructors_validate():
    with pytest.raises(DomainError):
        bump(0.0, 0.0)
    with pytest.raises(DomainError):
        delta_sequence(0.0, 0)
