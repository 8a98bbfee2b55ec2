import math

import numpy as np
import pytest

from cpint.bv_stieltjes import (
    Piece,
    StieltjesTable,
    add,
    brute_force_variation,
    constant,
    from_pieces,
    from_test_function,
    heaviside,
    indicator,
    monotone,
    normalize_nbv,
    piecewise,
    rs_integral,
    scale,
    staircase,
    step_function,
    subtract,
    variation,
)
from cpint.convergence_lab import normalized_arctan
from cpint.errors import DomainError, IntervalEmpty, MalformedPieces
from cpint.fixture_utils import random_bv, random_monotone_bv
from cpint.function_core import NEG_INF, POS_INF, bump


def zeros(x):
    return np.zeros(np.shape(x))


def test_indicator_of_a_closed_interval():
    g = indicator(0.0, 1.0)
    np.testing.assert_array_equal(g(np.array([NEG_INF, -1.0, 0.0, 0.5, 1.0, 2.0, POS_INF])),
                                  [0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0])
    assert variation(g) == 2.0


def test_indicator_endpoint_conventions():
    half_open = indicator(0.0, 1.0, closed_lo=False)
    assert half_open(0.0) == 0.0
    assert half_open(1.0) == 1.0
    assert variation(half_open) == 2.0
    assert variation(indicator(NEG_INF, 0.0)) == 1.0
    assert variation(indicator(NEG_INF, POS_INF)) == 0.0
    assert variation(indicator(0.0, 0.0)) == 2.0


def test_indicator_rejects_reversed_interval():
    with pytest.raises(DomainError):
        indicator(2.0, 1.0)


def test_one_sided_limits_of_heaviside():
    g = heaviside()
    assert g(0.0) == 1.0
    assert g.left_limit(0.0) == 0.0
    assert g.right_limit(0.0) == 1.0
    assert g.left_limit(3.0) == 1.0


def test_removable_spike_counts_twice():
    g = step_function([0.0], [0.0, 0.0], [1.0])
    assert g(0.0) == 1.0
    assert variation(g) == 2.0
    assert brute_force_variation(g, [-1.0, 0.0, 1.0]) == 2.0


def test_staircase_merges_coincident_steps():
    g = staircase([(0.0, 0.5), (0.0, 0.5), (1.0, -1.0)])
    assert g(0.5) == 1.0
    assert g(1.0) == 0.0
    assert variation(g) == 2.0


def test_monotone_piece_limits_come_from_the_tails():
    g = monotone(normalized_arctan)
    assert g.value_neg_inf == pytest.approx(0.0, abs=1e-9)
    assert g.value_pos_inf == pytest.approx(1.0, abs=1e-9)
    assert variation(g) == pytest.approx(1.0, abs=1e-9)
    assert g.is_monotone()


def test_from_test_function_variation():
    assert variation(from_test_function(bump(0.0, 1.0))) == pytest.approx(2.0 * math.exp(-1.0))


def test_from_pieces_checks_coverage_and_point_values():
    pieces = [Piece(NEG_INF, 0.0, zeros, 0.0, 0.0), Piece(0.0, POS_INF, zeros, 0.0, 0.0)]
    with pytest.raises(MalformedPieces):
        from_pieces(pieces[:1])
    with pytest.raises(MalformedPieces):
        from_pieces(pieces, point_values=[0.0, 1.0])
    with pytest.raises(MalformedPieces):
        from_pieces([])


def test_piecewise_rejects_a_non_monotone_piece():
    with pytest.raises(MalformedPieces):
        piecewise([-5.0, 5.0], [zeros, np.sin, zeros])


def test_piecewise_rejects_unsorted_breaks():
    with pytest.raises(MalformedPieces):
        piecewise([1.0, 0.0], [zeros, zeros, zeros])


def test_normalize_nbv_takes_right_limits():
    g = step_function([0.0], [0.0, 1.0], [0.5])
    normalized = normalize_nbv(g)
    assert normalized(0.0) == 1.0
    assert variation(normalized) == variation(g) == 1.0


def test_scale_and_subtract():
    g = indicator(0.0, 1.0)
    assert variation(scale(2.0, g)) == 4.0
    assert scale(-3.0, g)(0.5) == -3.0
    assert variation(subtract(g, g)) == 0.0


def test_add_keeps_point_values():
    h = add(heaviside(0.0), heaviside(1.0))
    np.testing.assert_array_equal(h(np.array([-1.0, 0.0, 0.5, 1.0, 2.0])), [0.0, 1.0, 1.0, 2.0, 2.0])
    assert variation(h) == 2.0


def test_add_splits_turning_pieces():
    up = monotone(np.tanh)
    down = monotone(lambda x: -np.tanh(np.asarray(x) - 1.0))
    h = add(up, down)
    assert len(h.pieces) == 2
    assert h.pieces[0].hi == pytest.approx(0.5, abs=1e-6)
    peak = 2.0 * math.tanh(0.5)
    assert variation(h) == pytest.approx(2.0 * peak, abs=1e-8)


def test_inf_abs_and_bv_norm():
    assert constant(2.0).inf_abs() == 2.0
    assert indicator(0.0, 1.0).inf_abs() == 0.0
    assert constant(-2.0).bv_norm() == 2.0
    assert indicator(0.0, 1.0).bv_norm() == 2.0


def test_is_monotone():
    assert heaviside().is_monotone()
    assert staircase([(0.0, 1.0), (1.0, 2.0)]).is_monotone()
    assert not indicator(0.0, 1.0).is_monotone()


def test_stieltjes_integral_against_a_jump(arctan):
    assert rs_integral(arctan.primitive, heaviside()) == pytest.approx(0.5 * math.pi)


def test_stieltjes_integral_against_a_smooth_piece(arctan):
    # integral of (theta + pi/2) d(theta/pi) over theta in [-pi/2, pi/2]
    g = monotone(normalized_arctan)
    assert rs_integral(arctan.primitive, g) == pytest.approx(0.5 * math.pi, abs=1e-9)


def test_stieltjes_table_is_cumulative(arctan):
    table = StieltjesTable(arctan.primitive, heaviside())
    assert table.cumulative(-1.0) == 0.0
    assert table.cumulative(0.0) == pytest.approx(0.5 * math.pi)
    assert table.cumulative(5.0) == pytest.approx(0.5 * math.pi)
    assert table.total == pytest.approx(0.5 * math.pi)


def test_rs_integral_rejects_reversed_interval(arctan):
    with pytest.raises(IntervalEmpty):
        rs_integral(arctan.primitive, heaviside(), 1.0, 0.0)
    assert rs_integral(arctan.primitive, heaviside(), 1.0, 1.0) == 0.0


def test_variation_of_random_step_functions_matches_brute_force(rng):
    for _ in range(20):
        g = random_bv(rng)
        points = [-10.0, 10.0]
        for b in g.breaks:
            points.extend([b - 1e-9, b, b + 1e-9])
        assert brute_force_variation(g, points) == pytest.approx(variation(g), abs=1e-12)


def test_random_monotone_functions_are_monotone(rng):
    for _ in range(10):
        g = random_monotone_bv(rng)
        assert g.is_monotone(1e-9)
        assert variation(g) == pytest.approx(abs(g.value_pos_inf - g.value_neg_inf), abs=1e-9)
