import math

import numpy as np
import pytest

from cpint.bv_stieltjes import variation
from cpint.errors import DomainError, NoLimitAtInfinity
from cpint.fixture_utils import catalog
from cpint.transforms import (
    ComplexPoint,
    HalfPlanePoint,
    boundary_norm_gap,
    growth_probe,
    laplace,
    laplace_derivative,
    laplacian_probe,
    monotone_pieces,
    poisson,
    poisson_kernel_bv,
    weighted_integral,
    weighted_laplace,
)


@pytest.fixture
def exp_decay():
    return catalog("exp_decay")


@pytest.mark.parametrize("x, y", [(0.0, 0.0), (0.0, -1.0), (math.inf, 1.0)])
def test_half_plane_points_are_checked(x, y):
    with pytest.raises(DomainError):
        HalfPlanePoint(x, y)


def test_poisson_kernel_variation():
    assert variation(poisson_kernel_bv(HalfPlanePoint(0.0, 2.0))) == pytest.approx(1.0 / math.pi)


def test_monotone_pieces_split_at_turning_points():
    pieces = monotone_pieces(np.sin, np.cos, 0.0, 2.0 * math.pi)
    assert [p.hi for p in pieces[:-1]] == pytest.approx([0.5 * math.pi, 1.5 * math.pi], abs=1e-12)
    assert pieces[0].start == 0.0
    assert pieces[1].end == pytest.approx(-1.0)


@pytest.mark.parametrize("x, y, expected", [
    (0.0, 1.0, 0.5),
    (0.5, 0.5, (0.25 * math.pi + math.atan(3.0)) / math.pi),
])
def test_poisson_integral_of_an_indicator(x, y, expected):
    assert poisson(catalog("indicator_ramp"), HalfPlanePoint(x, y)) == pytest.approx(expected, abs=1e-8)


def test_poisson_integral_is_harmonic(arctan):
    assert abs(laplacian_probe(arctan, HalfPlanePoint(0.0, 1.0), 0.1)) < 0.05


def test_laplacian_stencil_step_is_checked(arctan):
    with pytest.raises(DomainError):
        laplacian_probe(arctan, HalfPlanePoint(0.0, 1.0), 1.0)


@pytest.mark.slow
def test_boundary_gap_shrinks_toward_the_axis(arctan):
    gaps = [boundary_norm_gap(arctan, y) for y in (1.0, 0.5, 0.25)]
    assert gaps[0] > gaps[1] > gaps[2]
    with pytest.raises(DomainError):
        boundary_norm_gap(arctan, 0.0)


def test_laplace_of_an_exponential(exp_decay):
    assert laplace(exp_decay, ComplexPoint(1.0, 0.0)) == pytest.approx(0.5, abs=1e-8)
    value = laplace(exp_decay, ComplexPoint(1.0, 1.0))
    assert value.real == pytest.approx(0.4, abs=1e-8)
    assert value.imag == pytest.approx(-0.2, abs=1e-8)


def test_laplace_at_zero_is_the_integral(exp_decay):
    assert laplace(exp_decay, ComplexPoint(0.0, 0.0)) == complex(1.0, 0.0)


def test_laplace_of_a_conditionally_convergent_integral():
    assert laplace(catalog("si"), ComplexPoint(1.0, 0.0)).real == pytest.approx(0.25 * math.pi, abs=1e-8)


def test_laplace_derivative(exp_decay):
    assert laplace_derivative(exp_decay, ComplexPoint(1.0, 0.0), 1).real == pytest.approx(-0.25, abs=1e-8)


def test_laplace_domain(exp_decay, arctan):
    with pytest.raises(DomainError):
        laplace(exp_decay, ComplexPoint(-1.0, 0.0))
    with pytest.raises(DomainError):
        laplace(exp_decay, ComplexPoint(0.0, 1.0))
    with pytest.raises(DomainError):
        laplace(arctan, ComplexPoint(1.0, 0.0))
    with pytest.raises(DomainError):
        laplace_derivative(exp_decay, ComplexPoint(1.0, 0.0), -1)
    with pytest.raises(DomainError):
        laplace_derivative(exp_decay, ComplexPoint(0.0, 0.0), 1)


@pytest.mark.slow
def test_transform_maxima_decrease_in_the_cone(exp_decay):
    result = growth_probe(exp_decay, 0.5, [1.0, 2.0, 4.0])
    assert result.trend == "decreasing"
    # |1/(1+z)| peaks on the edge of the cone
    assert result.maxima[0] == pytest.approx(1.0 / (2.0 * math.cos(0.25)), abs=1e-8)


def test_growth_cone_angle_is_checked(exp_decay):
    with pytest.raises(DomainError):
        growth_probe(exp_decay, 0.5 * math.pi, [1.0])


@pytest.mark.parametrize("F_loc, r, expected, tolerance", [
    (np.sin, 1.0, 0.5, 1e-9),
    (np.arctan, 0.0, 0.5 * math.pi, 1e-9),
    (lambda x: x, 1.0, 1.0, 1e-9),
    (lambda x: x * x, 1.0, 2.0, 1e-9),
    (lambda x: -np.exp(-2.0 * x), -1.0, 2.0, 1e-9),
    (lambda x: 1.0 - np.exp(-2.0 * x), -1.0, 2.0, 1e-6),
])
def test_weighted_integral(F_loc, r, expected, tolerance):
    assert weighted_integral(F_loc, r) == pytest.approx(expected, abs=tolerance)


@pytest.mark.parametrize("F_loc, r", [(lambda x: x, 0.0), (np.sin, -1.0)])
def test_weighted_integral_without_a_limit(F_loc, r):
    with pytest.raises(NoLimitAtInfinity):
        weighted_integral(F_loc, r)


def test_weighted_laplace_of_an_exponential():
    # F_r' = exp(-t/2), so the shifted transform at 1/2 is 1
    assert weighted_laplace(np.exp, ComplexPoint(2.0, 0.0), 1.5) == pytest.approx(1.0, abs=1e-8)


def test_weighted_laplace_needs_a_limit_of_the_weighted_primitive():
    with pytest.raises(NoLimitAtInfinity):
        weighted_laplace(np.exp, ComplexPoint(2.0, 0.0), 1.0)


@pytest.mark.parametrize("z", [ComplexPoint(1.0, 0.0), ComplexPoint(1.5, 1.0)])
def test_weighted_laplace_domain(z):
    with pytest.raises(DomainError):
        weighted_laplace(np.exp, z, 1.5)


POISSON_GRID = [(-2.25 + 0.5 * i, y) for i in range(10) for y in (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0)]


def indicator_poisson(x, y):
    return (math.atan((1.0 - x) / y) + math.atan((1.0 + x) / y)) / math.pi


@pytest.mark.parametrize("x, y", POISSON_GRID)
def test_poisson_integral_of_an_indicator_on_a_grid(x, y):
    u = poisson(catalog("indicator_ramp"), HalfPlanePoint(x, y))
    assert u == pytest.approx(indicator_poisson(x, y), abs=1e-8)


@pytest.mark.slow
@pytest.mark.parametrize("x, y", POISSON_GRID)
def test_poisson_integral_of_an_indicator_is_harmonic(x, y):
    h = 0.25 * y
    # five-point truncation bound from the fourth derivatives of the two arguments
    bound = 2.0 * h * h / (math.pi * (y - h) ** 4)
    assert abs(laplacian_probe(catalog("indicator_ramp"), HalfPlanePoint(x, y), h)) <= bound + 1e-6


@pytest.mark.slow
def test_growth_of_the_sine_integral_transform():
    radii = [1.0, 2.0, 4.0]
    result = growth_probe(catalog("si"), 0.25, radii)
    assert result.trend == "decreasing"
    for r, maximum in zip(radii, result.maxima):
        assert maximum >= math.atan(1.0 / r) - 1e-8
