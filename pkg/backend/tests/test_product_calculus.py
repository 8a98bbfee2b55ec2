import math

import numpy as np
import pytest

from cpint.bv_stieltjes import constant, heaviside, indicator, step_function
from cpint.errors import DomainError, NonMonotone
from cpint.fixture_utils import catalog, random_bv, random_linear_primitive, random_monotone_bv
from cpint.integral_core import integral, on_interval
from cpint.product_calculus import (
    change_of_variables,
    h_continuity_bound,
    holder_bound,
    holder_report,
    integral_product,
    multiply_bv,
    second_mvt_xi,
    taylor_expand,
    taylor_input,
)


def test_product_with_heaviside(arctan):
    assert integral_product(arctan, heaviside()) == pytest.approx(0.5 * math.pi)


def test_product_with_an_indicator(gaussian):
    assert integral_product(gaussian, indicator(-1.0, 1.0)) == pytest.approx(math.erf(1.0), abs=1e-12)


def test_product_with_one_is_the_integral(arctan, gaussian):
    for f in (arctan, gaussian):
        assert integral_product(f, constant(1.0)) == pytest.approx(integral(f))


def test_multiply_bv_primitive(arctan):
    g = heaviside()
    h = multiply_bv(arctan, g)
    assert h(-1.0) == 0.0
    assert h(0.0) == pytest.approx(0.0, abs=1e-15)
    assert h(1.0) == pytest.approx(0.25 * math.pi)
    assert h.total == pytest.approx(integral_product(arctan, g))


def test_point_values_off_the_jumps_do_not_matter(arctan):
    spiked = step_function([1.0], [1.0, 1.0], [5.0])
    assert integral_product(arctan, spiked) == pytest.approx(integral_product(arctan, constant(1.0)), abs=1e-12)
    assert multiply_bv(arctan, spiked)(2.0) == pytest.approx(multiply_bv(arctan, constant(1.0))(2.0), abs=1e-12)


def test_holder_report(arctan):
    g = indicator(0.0, 1.0)
    report = holder_report(arctan, g)
    assert report.first == pytest.approx(4.0 * math.pi, abs=1e-8)
    assert report.second == pytest.approx(4.0 * math.pi, abs=1e-8)
    assert abs(integral_product(arctan, g)) <= report.bound


def test_holder_inequality_on_random_data(rng):
    for _ in range(10):
        f, g = random_linear_primitive(rng), random_bv(rng)
        assert abs(integral_product(f, g)) <= holder_bound(f, g) * (1.0 + 1e-9) + 1e-12


def test_h_continuity_bound(arctan):
    g = heaviside()
    h = multiply_bv(arctan, g)
    bound = h_continuity_bound(arctan, g, 0.0, 1.0)
    assert abs(float(h(1.0)) - float(h(0.0))) <= bound + 1e-12
    assert bound == pytest.approx(0.5 * math.pi, abs=1e-8)


def test_change_of_variables_with_a_polynomial():
    f = on_interval(np.sin, -10.0, 10.0)
    assert change_of_variables(f, lambda t: np.asarray(t) ** 2, 0.0, 1.0) == pytest.approx(math.sin(1.0))


def test_change_of_variables_onto_the_whole_line(arctan):
    half_pi = 0.5 * math.pi
    value = change_of_variables(arctan, np.tan, -half_pi, half_pi, G_at_a=-math.inf, G_at_b=math.inf)
    assert value == pytest.approx(math.pi)


def test_change_of_variables_rejects_reversed_interval(arctan):
    with pytest.raises(DomainError):
        change_of_variables(arctan, np.tan, 1.0, 0.0)


def test_second_mean_value_point(gaussian):
    xi = second_mvt_xi(gaussian, heaviside())
    assert xi == pytest.approx(0.0, abs=1e-9)


def test_second_mean_value_point_identity(arctan):
    g = heaviside(1.0, 2.0)
    xi = second_mvt_xi(arctan, g)
    lhs = integral_product(arctan, g)
    rhs = g.value_neg_inf * float(arctan(xi)) + g.value_pos_inf * (arctan.total - float(arctan(xi)))
    assert lhs == pytest.approx(rhs, abs=1e-8)


@pytest.mark.slow
def test_second_mean_value_identity_on_random_monotone_data(rng):
    for _ in range(100):
        f, g = random_linear_primitive(rng), random_monotone_bv(rng)
        F_xi = float(f(second_mvt_xi(f, g)))
        rhs = g.value_neg_inf * F_xi + g.value_pos_inf * (f.total - F_xi)
        assert integral_product(f, g) == pytest.approx(rhs, abs=1e-8)


def test_second_mean_value_needs_monotone_g(arctan):
    with pytest.raises(NonMonotone):
        second_mvt_xi(arctan, indicator(0.0, 1.0))


def test_taylor_is_exact_on_a_cubic():
    data = taylor_input(2, 0.0, 1.0, lambda t: 6.0 * np.asarray(t), [0.0, 0.0, 0.0])
    result = taylor_expand(data, 1.0)
    assert result.polynomial == 0.0
    assert result.remainder == pytest.approx(1.0, abs=1e-10)
    assert result.value == pytest.approx(1.0, abs=1e-10)
    assert abs(result.remainder) <= result.bound_pointwise <= result.bound_uniform


def test_taylor_with_a_kink_in_the_top_derivative():
    data = taylor_input(1, 0.0, 1.0, lambda t: 2.0 * np.abs(t), [0.0, 0.0])
    assert taylor_expand(data, 0.5).remainder == pytest.approx(0.25, abs=1e-10)


def test_taylor_of_order_zero():
    data = taylor_input(0, 0.0, 1.0, np.cos, [1.0])
    result = taylor_expand(data, 0.5)
    assert result.value == pytest.approx(math.cos(0.5))


def test_taylor_at_the_base_point():
    data = taylor_input(2, 0.0, 1.0, np.cos, [1.0, 0.0, 1.0])
    result = taylor_expand(data, 0.0)
    assert result.remainder == 0.0
    assert result.value == 1.0


def test_taylor_input_validation():
    with pytest.raises(DomainError):
        taylor_input(2, 0.0, 1.0, np.cos, [1.0, 0.0])
    with pytest.raises(DomainError):
        taylor_input(1, 1.0, 0.0, np.cos, [1.0, 0.0])
    data = taylor_input(1, 0.0, 1.0, np.cos, [0.0, 1.0])
    with pytest.raises(DomainError):
        taylor_expand(data, 2.0)


def test_catalog_products_agree_with_integrals():
    f = catalog("indicator_ramp")
    assert integral_product(f, indicator(-1.0, 0.0)) == pytest.approx(integral(f, -1.0, 0.0))
