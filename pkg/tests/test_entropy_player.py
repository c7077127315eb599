"""Tests for hyposelect.entropy_player: the entropy dual and the cut loop."""

import math

import numpy as np
import pytest
from scipy.special import entr

from hyposelect import entropy_player
from hyposelect.checks import grid_margins, simplex_grid
from hyposelect.distributions import DistanceVector, HypothesisClass, TestDirection, entropy
from hyposelect.entropy_player import (
    MAX_RESOLVES,
    InfeasibleTestError,
    WitnessPool,
    max_entropy_test,
    maximize_entropy,
    pythagorean_gap,
)
from hyposelect.lp import SolverError
from hyposelect.tv_geometry import MarginQuery, margin

# ---------------------------------------------------------------------------
# maximize_entropy
# ---------------------------------------------------------------------------


def test_no_cuts_gives_uniform():
    weights, value, mu = maximize_entropy(np.zeros((0, 4)), np.zeros(0))
    np.testing.assert_allclose(weights, [0.25] * 4)
    assert math.isclose(value, math.log(4))
    assert mu.size == 0


def test_single_cut_moves_mass_to_the_constrained_coordinate():
    """max H(h) s.t. h_0 ≥ ½ is (½, ¼, ¼)."""
    weights, value, _ = maximize_entropy(np.array([[1.0, 0.0, 0.0]]), np.array([0.5]))
    np.testing.assert_allclose(weights, [0.5, 0.25, 0.25], atol=1e-5)
    assert value >= entropy(TestDirection(weights / weights.sum())) - 1e-9


def test_slack_cut_leaves_uniform():
    weights, _, mu = maximize_entropy(np.array([[1.0, 0.0]]), np.array([0.1]))
    np.testing.assert_allclose(weights, [0.5, 0.5], atol=1e-8)
    assert mu[0] == pytest.approx(0.0, abs=1e-8)


# ---------------------------------------------------------------------------
# WitnessPool
# ---------------------------------------------------------------------------


def test_witness_pool_dedupes(three_point_class):
    Q, _ = three_point_class
    pool = WitnessPool(Q)
    assert pool.add(np.array([0.5, 0.5, 0.0]))
    assert not pool.add(np.array([0.5, 0.5, 0.0]))
    assert len(pool) == 1
    directions = pool.directions(np.array([0.1, 0.1, 0.1]))
    np.testing.assert_allclose(directions, [[0.4, 0.4, -0.1]])


def test_empty_pool_has_no_directions(three_point_class):
    Q, _ = three_point_class
    assert WitnessPool(Q).directions(np.zeros(3)).shape == (0, 3)


# ---------------------------------------------------------------------------
# max_entropy_test
# ---------------------------------------------------------------------------


def test_max_entropy_test_returns_a_violated_test(three_point_class):
    Q, _ = three_point_class
    u = DistanceVector.zeros(3)
    solution = max_entropy_test(u, 0.25, Q, tol=0.05)
    assert solution.certified_margin >= 0.275 - 1e-9
    assert margin(solution.h, MarginQuery(u, 0.25), Q) >= 0.275 - 1e-9
    assert solution.attained_entropy <= math.log(3)
    assert solution.gap_certificate >= 0


def test_max_entropy_test_prefers_spread_tests(three_point_class):
    """A looser margin admits tests with at least as much entropy."""
    Q, _ = three_point_class
    u = DistanceVector.zeros(3)
    loose = max_entropy_test(u, 0.05, Q, tol=0.05)
    tight = max_entropy_test(u, 0.35, Q, tol=0.05)
    assert loose.attained_entropy >= tight.attained_entropy - 1e-6


def test_max_entropy_test_raises_when_nothing_is_violated(three_point_class):
    Q, _ = three_point_class
    with pytest.raises(InfeasibleTestError):
        max_entropy_test(DistanceVector.zeros(3), 0.5, Q, tol=0.01)


def test_max_entropy_test_rejects_nonpositive_tol(three_point_class):
    Q, _ = three_point_class
    with pytest.raises(ValueError):
        max_entropy_test(DistanceVector.zeros(3), 0.1, Q, tol=0.0)


def test_shared_pool_grows_monotonically(three_point_class):
    Q, _ = three_point_class
    pool = WitnessPool(Q)
    max_entropy_test(DistanceVector.zeros(3), 0.2, Q, tol=0.05, pool=pool)
    first = len(pool)
    max_entropy_test(DistanceVector([0.05, 0.05, 0.0]), 0.2, Q, tol=0.05, pool=pool)
    assert len(pool) >= first


# ---------------------------------------------------------------------------
# pythagorean_gap
# ---------------------------------------------------------------------------


def test_pythagorean_gap_is_zero_for_self_projection():
    a = TestDirection([0.2, 0.3, 0.5])
    b = TestDirection([0.4, 0.4, 0.2])
    assert pythagorean_gap(a, a, b) == 0.0


def test_pythagorean_gap_infinite_off_support():
    q = TestDirection([0.5, 0.5])
    p = TestDirection([1.0, 0.0])
    assert math.isinf(pythagorean_gap(q, q, p))


# ---------------------------------------------------------------------------
# Re-solving when the entropy dual stops short
# ---------------------------------------------------------------------------


def _short_dual(shortfall):
    def short(directions, offsets, start=None):
        return maximize_entropy(directions, offsets - shortfall, start)

    return short


def test_max_entropy_test_recovers_from_a_dual_that_stops_short(
    three_point_class, monkeypatch: pytest.MonkeyPatch
):
    """Every solve lands 1e-3 short of its cuts, more than the 5e-4 stop slack."""
    Q, _ = three_point_class
    monkeypatch.setattr(entropy_player, "maximize_entropy", _short_dual(1e-3))
    u = DistanceVector.zeros(3)

    solution = max_entropy_test(u, 0.4, Q, tol=1e-3)

    assert solution.certified_margin >= 0.401 - 5e-4
    assert margin(solution.h, MarginQuery(u, 0.4), Q) >= 0.401 - 5e-4


def test_max_entropy_test_gives_up_after_bounded_resolves(
    three_point_class, monkeypatch: pytest.MonkeyPatch
):
    Q, _ = three_point_class
    calls = []

    def stuck(directions, offsets, start=None):
        calls.append(offsets)
        k = directions.shape[0]
        return np.full(3, 1 / 3), math.log(3), np.zeros(k)

    monkeypatch.setattr(entropy_player, "maximize_entropy", stuck)
    with pytest.raises(SolverError, match="stalled"):
        max_entropy_test(DistanceVector.zeros(3), 0.4, Q, tol=1e-3)
    # One solve without cuts, one with the single witness, then the re-solves.
    assert len(calls) == MAX_RESOLVES + 2


def test_resolves_leave_other_calls_on_the_plain_threshold(
    three_point_class, monkeypatch: pytest.MonkeyPatch
):
    Q, _ = three_point_class
    pool = WitnessPool(Q)
    monkeypatch.setattr(entropy_player, "maximize_entropy", _short_dual(1e-3))
    max_entropy_test(DistanceVector.zeros(3), 0.4, Q, tol=1e-3, pool=pool)
    monkeypatch.undo()

    offsets = []

    def recording(directions, offsets_, start=None):
        offsets.append(offsets_.copy())
        return maximize_entropy(directions, offsets_, start)

    monkeypatch.setattr(entropy_player, "maximize_entropy", recording)
    max_entropy_test(DistanceVector.zeros(3), 0.4, Q, tol=1e-3, pool=pool)
    np.testing.assert_allclose(offsets[0], 0.401)


def test_witness_pool_index_of(three_point_class):
    Q, _ = three_point_class
    pool = WitnessPool(Q)
    pool.add(np.array([1.0, 0.0, 0.0]))
    pool.add(np.array([0.5, 0.5, 0.0]))
    assert pool.index_of(np.array([0.5, 0.5, 0.0])) == 1
    assert pool.index_of(np.array([0.0, 1.0, 0.0])) is None


# ---------------------------------------------------------------------------
# Agreement with exhaustive search
# ---------------------------------------------------------------------------


def _grid_best(Q, u, threshold):
    tests = simplex_grid(Q.n)
    margins = grid_margins(tests, u, Q)
    feasible = tests[margins >= threshold]
    scores = entr(feasible).sum(axis=1)
    return feasible[int(np.argmax(scores))], float(scores.max())


def test_two_hypothesis_maximizer_matches_grid():
    """Q = {(1,0), (0,1)}, u = (0.4, 0): G(t, 1−t) = min(0.6t, 1 − 1.4t), so h = (½, ½)."""
    Q = HypothesisClass.from_rows([[1.0, 0.0], [0.0, 1.0]])
    u = DistanceVector([0.4, 0.0])
    solution = max_entropy_test(u, 0.2, Q)

    best, best_entropy = _grid_best(Q, u, 0.2 + 1e-4)
    np.testing.assert_allclose(solution.h.weights, best, atol=1e-2)
    np.testing.assert_allclose(solution.h.weights, [0.5, 0.5], atol=1e-6)
    assert abs(solution.attained_entropy - best_entropy) <= 1e-2


@pytest.mark.parametrize(
    ("u", "eps"),
    [((0.0, 0.0, 0.0), 0.4), ((0.1, 0.0, 0.05), 0.3), ((0.3, 0.3, 0.0), 0.1)],
)
def test_three_hypothesis_entropy_matches_grid(three_point_class, u, eps):
    Q, _ = three_point_class
    u = DistanceVector(u)
    solution = max_entropy_test(u, eps, Q, tol=1e-3)
    _, best_entropy = _grid_best(Q, u, eps + 1e-3)
    assert abs(solution.attained_entropy - best_entropy) <= 1e-2
