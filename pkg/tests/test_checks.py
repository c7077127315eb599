"""Tests for hyposelect.checks, the invariant suite behind ``hyposelect check``."""

import numpy as np
import pytest

from hyposelect.checks import (
    CHECKS,
    CheckResult,
    breakpoint_witnesses,
    brute_force_support_value,
    check_dual_round_bound,
    check_entropy_grid,
    check_entropy_identities,
    check_minimax,
    check_progress_contract,
    check_tv_metric,
    grid_margins,
    grid_support_value,
    run_checks,
    simplex_grid,
)
from hyposelect.distributions import DistanceVector, HypothesisClass, TestDirection
from hyposelect.instances import generate_instance
from hyposelect.selectors import RefinedParams
from hyposelect.tv_geometry import MarginQuery, margin, support_min


def test_cheap_checks_pass():
    rng = np.random.default_rng(0)
    for check in (check_tv_metric, check_entropy_identities, check_minimax):
        result = check(rng, 10, 0.25)
        assert result.passed, result.detail


def test_progress_contract_check_passes():
    assert check_progress_contract(np.random.default_rng(1), 5, 0.25).passed


def test_dual_round_bound_check_passes():
    result = check_dual_round_bound(np.random.default_rng(2), 1, 0.25)
    assert result == CheckResult("dual-round-bound", True)


def test_entropy_grid_check_passes():
    result = check_entropy_grid(np.random.default_rng(4), 3, 0.25)
    assert result == CheckResult("entropy-grid", True)


def test_checks_take_tolerances_from_params():
    params = RefinedParams(support_tol=1e-6, entropy_tol=1e-3)
    rng = np.random.default_rng(5)
    assert check_minimax(rng, 5, 0.25, params).passed
    assert check_entropy_grid(rng, 2, 0.25, params).passed


def test_run_checks_covers_every_check():
    results = run_checks(seed=3, count=2)
    assert len(results) == len(CHECKS)
    assert len({result.name for result in results}) == len(CHECKS)
    failed = [result for result in results if not result.passed]
    assert not failed, failed


# ---------------------------------------------------------------------------
# Brute-force references
# ---------------------------------------------------------------------------


def test_simplex_grid_points():
    np.testing.assert_allclose(simplex_grid(2, 0.5), [[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]])
    grid = simplex_grid(3, 0.5)
    assert grid.shape == (6, 3)
    np.testing.assert_allclose(grid.sum(axis=1), 1.0)
    assert simplex_grid(3).shape == (1001 * 1002 // 2, 3)


def test_simplex_grid_rejects_large_domains():
    with pytest.raises(ValueError):
        simplex_grid(4)


def test_two_point_minimum_by_every_route():
    """h = (½, ½) against (0.9, 0.1) and (0.1, 0.9): any p′ between them costs 0.4."""
    Q = HypothesisClass.from_rows([[0.9, 0.1], [0.1, 0.9]])
    h = TestDirection([0.5, 0.5])
    assert brute_force_support_value(h, Q) == pytest.approx(0.4)
    assert grid_support_value(h, Q) == pytest.approx(0.4, abs=5e-3)
    assert support_min(h, Q).value == pytest.approx(0.4)


def test_breakpoint_witnesses_lie_on_the_simplex(three_point_class):
    Q, _ = three_point_class
    witnesses = breakpoint_witnesses(Q)
    assert np.all(witnesses >= 0)
    np.testing.assert_allclose(witnesses.sum(axis=1), 1.0)
    assert any(np.allclose(row, [0.5, 0.5, 0.0]) for row in witnesses)


@pytest.mark.parametrize("seed", range(6))
def test_support_min_matches_grid_on_small_domains(seed):
    rng = np.random.default_rng(seed)
    Q, _ = generate_instance(seed, 2 + seed % 3, 2 + seed % 2)
    for _ in range(4):
        h = TestDirection(rng.dirichlet(np.ones(Q.n)))
        value = support_min(h, Q).value
        assert abs(value - grid_support_value(h, Q)) <= 5e-3
        assert value == pytest.approx(brute_force_support_value(h, Q), abs=1e-9)


def test_grid_margins_match_margin(three_point_class):
    Q, _ = three_point_class
    u = DistanceVector([0.1, 0.05, 0.0])
    tests = simplex_grid(3, 0.25)
    margins = grid_margins(tests, u, Q)
    for h, value in zip(tests, margins, strict=True):
        assert value == pytest.approx(margin(TestDirection(h), MarginQuery(u, 0.1), Q), abs=1e-9)
