"""Tests for hyposelect.lp: the minimax program and simplex feasibility."""

import math

import numpy as np

from hyposelect.lp import simplex_point, solve_minimax


def test_minimax_on_three_point_class(three_point_class):
    Q, _ = three_point_class
    solution = solve_minimax(Q.matrix, np.zeros(3))
    assert math.isclose(solution.value, 0.5, abs_tol=1e-8)
    np.testing.assert_allclose(solution.rounding, [0.5, 0.5, 0.0], atol=1e-7)
    np.testing.assert_allclose(solution.test, [0.5, 0.5, 0.0], atol=1e-7)


def test_minimax_value_shifts_with_u(three_point_class):
    """Raising every u_i by c lowers the value by exactly c."""
    Q, _ = three_point_class
    base = solve_minimax(Q.matrix, np.zeros(3)).value
    shifted = solve_minimax(Q.matrix, np.full(3, 0.2)).value
    assert math.isclose(base - shifted, 0.2, abs_tol=1e-8)


def test_minimax_duals_form_a_distribution(rng):
    matrix = rng.dirichlet(np.ones(5), size=4)
    solution = solve_minimax(matrix, rng.uniform(0, 0.3, size=4))
    assert solution.test.min() >= 0
    assert math.isclose(solution.test.sum(), 1.0)
    assert math.isclose(solution.rounding.sum(), 1.0)


def test_simplex_point_without_cuts_is_on_the_simplex():
    point = simplex_point(np.zeros((0, 3)), np.zeros(0))
    assert point is not None
    assert math.isclose(point.sum(), 1.0)


def test_simplex_point_reports_empty_polytope():
    # h_0 ≤ -0.1 cannot hold on the simplex.
    assert simplex_point(np.array([[1.0, 0.0]]), np.array([-0.1])) is None


def test_simplex_point_objective_picks_a_vertex():
    point = simplex_point(np.zeros((0, 3)), np.zeros(0), objective=np.array([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(point, [1.0, 0.0, 0.0], atol=1e-9)


def test_simplex_point_respects_cuts():
    # h_0 − h_1 ≤ −0.5 forces weight onto coordinate 1.
    directions = np.array([[1.0, -1.0]])
    point = simplex_point(directions, np.array([-0.5]), objective=np.array([0.0, 1.0]))
    assert point is not None
    assert float(directions[0] @ point) <= -0.5 + 1e-9
