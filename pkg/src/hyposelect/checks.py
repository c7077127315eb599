"""Invariant suite behind ``hyposelect check``.

Each check draws its own random instances from the master seed and
returns a :class:`CheckResult`; the CLI exits 0 only if all pass.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.special import entr

from .distributions import (
    DistanceVector,
    Distribution,
    FloatArray,
    HypothesisClass,
    TestDirection,
    distance_vector,
    entropy,
    kl_divergence,
    l1_distance,
    tv_distance,
)
from .entropy_player import max_entropy_test, pythagorean_gap
from .games import (
    MaxEntropyDualPlayer,
    dual_round_bound,
    greedy_diameter_adversary,
    run_dual_game,
)
from .instances import InstanceKind, brute_force_opt, generate_instance
from .logging_config import get_logger
from .sampling import OracleMode, SampleOracle, progress_step
from .selectors import RefinedParams, basic_select, refined_primal_run, yatracos_select
from .tv_geometry import MarginQuery, certified_lower_bound, margin, support_min

logger = get_logger(__name__)

NUMERIC_SLACK = 1e-9

# Brute-force grids over Δ(X) are built for |X| ≤ 3 only.
GRID_STEP = 1e-3
GRID_AGREEMENT = 5e-3
GRID_MAX_SIZE = 3
ENTROPY_AGREEMENT = 1e-2

DEFAULT_PARAMS = RefinedParams()


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


CheckFn = Callable[[np.random.Generator, int, float, RefinedParams], CheckResult]


def _simplex(rng: np.random.Generator, size: int) -> np.ndarray:
    point = rng.dirichlet(np.ones(size))
    return point / point.sum()


def simplex_grid(size: int, step: float = GRID_STEP) -> FloatArray:
    """Every point of Δ(size) whose coordinates are multiples of ``step``."""
    k = round(1 / step)
    if size == 2:
        t = np.arange(k + 1) / k
        return np.column_stack([t, 1 - t])
    if size == 3:
        a, b = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
        keep = a + b <= k
        a, b = a[keep], b[keep]
        return np.column_stack([a, b, k - a - b]) / k
    raise ValueError(f"grids are built for 2 or 3 coordinates, got {size}")


def tv_table(points: FloatArray, Q: HypothesisClass) -> FloatArray:
    """TV(point, q_i) for every row of ``points`` and every hypothesis."""
    return np.asarray(
        0.5 * np.abs(points[:, None, :] - Q.matrix[None, :, :]).sum(axis=2), dtype=np.float64
    )


def breakpoint_witnesses(Q: HypothesisClass) -> FloatArray:
    """Candidate p′ that contain a minimizer of Σ_i h_i·TV(p′, q_i) for every h.

    The objective is separable and piecewise linear in each p′(x), with kinks
    at 0 and at each q_i(x). Some minimizer has every coordinate but one on a
    kink, and the last one is fixed by Σ p′ = 1.
    """
    size = Q.domain_size
    kinks = [np.unique(np.append(Q.matrix[:, x], 0.0)) for x in range(size)]
    points = []
    for free in range(size):
        others = [kinks[x] for x in range(size) if x != free]
        for values in itertools.product(*others):
            rest = 1.0 - float(sum(values))
            if rest < -NUMERIC_SLACK:
                continue
            points.append(np.insert(np.asarray(values, dtype=np.float64), free, max(rest, 0.0)))
    return np.unique(np.vstack(points), axis=0)


def brute_force_support_value(h: TestDirection, Q: HypothesisClass) -> float:
    """min_{p′} Σ_i h_i·TV(p′, q_i) by enumerating :func:`breakpoint_witnesses`."""
    return float((tv_table(breakpoint_witnesses(Q), Q) @ h.weights).min())


def grid_support_value(h: TestDirection, Q: HypothesisClass, step: float = GRID_STEP) -> float:
    """The same minimum over a ``step`` grid of Δ(X); needs |X| ≤ 3."""
    return float((tv_table(simplex_grid(Q.domain_size, step), Q) @ h.weights).min())


def grid_margins(tests: FloatArray, u: DistanceVector, Q: HypothesisClass) -> FloatArray:
    """G_u(h) for every row h of ``tests``, exact through the breakpoint witnesses."""
    margins = np.full(tests.shape[0], np.inf)
    for row in tv_table(breakpoint_witnesses(Q), Q) - u.values:
        np.minimum(margins, tests @ row, out=margins)
    return margins


def check_tv_metric(
    rng: np.random.Generator, count: int, eps: float, params: RefinedParams = DEFAULT_PARAMS
) -> CheckResult:
    for _ in range(count):
        size = int(rng.integers(2, 9))
        a, b, c = (Distribution(_simplex(rng, size)) for _ in range(3))
        if abs(tv_distance(a, b) - tv_distance(b, a)) > NUMERIC_SLACK:
            return CheckResult("tv-metric", False, "asymmetric TV")
        if tv_distance(a, c) > tv_distance(a, b) + tv_distance(b, c) + NUMERIC_SLACK:
            return CheckResult("tv-metric", False, "triangle inequality broken")
    return CheckResult("tv-metric", True)


def check_tv_convexity(
    rng: np.random.Generator, count: int, eps: float, params: RefinedParams = DEFAULT_PARAMS
) -> CheckResult:
    for trial in range(count):
        Q, _ = generate_instance(int(rng.integers(2**32)), 3, int(rng.integers(2, 9)))
        p1, p2 = _simplex(rng, Q.domain_size), _simplex(rng, Q.domain_size)
        weight = float(rng.uniform())
        mixed = distance_vector(Distribution(weight * p1 + (1 - weight) * p2), Q).values
        bound = (
            weight * distance_vector(Distribution(p1), Q).values
            + (1 - weight) * distance_vector(Distribution(p2), Q).values
        )
        if np.any(mixed > bound + NUMERIC_SLACK):
            return CheckResult("tv-convexity", False, f"trial {trial}")
    return CheckResult("tv-convexity", True)


def check_entropy_identities(
    rng: np.random.Generator, count: int, eps: float, params: RefinedParams = DEFAULT_PARAMS
) -> CheckResult:
    for _ in range(count):
        n = int(rng.integers(2, 9))
        a, b = TestDirection(_simplex(rng, n)), TestDirection(_simplex(rng, n))
        if kl_divergence(a, b) < 0.5 * l1_distance(a, b) ** 2 - NUMERIC_SLACK:
            return CheckResult("entropy-identities", False, "Pinsker inequality broken")
        gap = entropy(a) - (math.log(n) - kl_divergence(a, TestDirection.uniform(n)))
        if abs(gap) > NUMERIC_SLACK:
            return CheckResult("entropy-identities", False, f"entropy/KL identity off by {gap}")
        if pythagorean_gap(a, a, b) != 0.0:
            return CheckResult("entropy-identities", False, "degenerate Pythagorean gap")
    return CheckResult("entropy-identities", True)


def check_minimax(
    rng: np.random.Generator, count: int, eps: float, params: RefinedParams = DEFAULT_PARAMS
) -> CheckResult:
    """support_min against its discriminator certificate and against brute force.

    Every trial enumerates the kinks of the objective; domains of at most
    three elements are also swept on a 1e-3 grid.
    """
    tol = params.support_tol
    for trial in range(count):
        size = int(rng.integers(2, 7))
        Q, _ = generate_instance(int(rng.integers(2**32)), int(rng.integers(2, 5)), size)
        h = TestDirection(_simplex(rng, Q.n))
        game = support_min(h, Q, tol)
        lower = certified_lower_bound(h, Q, game.discriminators)
        if abs(game.value - lower) > 2 * tol:
            return CheckResult("minimax", False, f"trial {trial}: gap {game.value - lower:.3g}")
        brute = brute_force_support_value(h, Q)
        if abs(game.value - brute) > 2 * tol:
            return CheckResult("minimax", False, f"trial {trial}: off brute force by {brute:.3g}")
        if size <= GRID_MAX_SIZE and abs(game.value - grid_support_value(h, Q)) > GRID_AGREEMENT:
            return CheckResult("minimax", False, f"trial {trial}: off the grid minimum")
    return CheckResult("minimax", True)


def check_entropy_grid(
    rng: np.random.Generator, count: int, eps: float, params: RefinedParams = DEFAULT_PARAMS
) -> CheckResult:
    """max_entropy_test against an exhaustive 1e-3 grid of tests for n ≤ 3.

    The query level is half the best margin, so the feasible region has room.
    """
    tol = params.entropy_tol
    for trial in range(count):
        n = int(rng.integers(2, GRID_MAX_SIZE + 1))
        Q, _ = generate_instance(int(rng.integers(2**32)), n, int(rng.integers(2, 5)))
        u = rng.uniform(0.0, 0.1, size=n)
        tests = simplex_grid(n)
        margins = grid_margins(tests, DistanceVector(u), Q)
        level = float(margins.max()) / 2
        if level <= 2 * tol:
            continue
        feasible = margins >= level + tol
        grid_best = float(entr(tests[feasible]).sum(axis=1).max())
        solution = max_entropy_test(DistanceVector(u), level, Q, tol)
        if abs(solution.attained_entropy - grid_best) > ENTROPY_AGREEMENT:
            return CheckResult(
                "entropy-grid",
                False,
                f"trial {trial}: entropy {solution.attained_entropy:.4g} vs grid {grid_best:.4g}",
            )
    return CheckResult("entropy-grid", True)


def check_margin_shape(
    rng: np.random.Generator, count: int, eps: float, params: RefinedParams = DEFAULT_PARAMS
) -> CheckResult:
    """Concavity and 1-Lipschitz continuity of G."""
    tol = params.support_tol
    for trial in range(count):
        Q, p = generate_instance(int(rng.integers(2**32)), 4, 6)
        query = MarginQuery(DistanceVector(rng.uniform(0, 0.5, size=Q.n)), eps)
        a, b = _simplex(rng, Q.n), _simplex(rng, Q.n)
        ga = margin(TestDirection(a), query, Q, tol)
        gb = margin(TestDirection(b), query, Q, tol)
        gm = margin(TestDirection((a + b) / 2), query, Q, tol)
        if gm < (ga + gb) / 2 - 2 * tol:
            return CheckResult("margin-shape", False, f"trial {trial}: not concave")
        if abs(ga - gb) > float(np.abs(a - b).sum()) + 2 * tol:
            return CheckResult("margin-shape", False, f"trial {trial}: not 1-Lipschitz")
    return CheckResult("margin-shape", True)


def check_progress_contract(
    rng: np.random.Generator, count: int, eps: float, params: RefinedParams = DEFAULT_PARAMS
) -> CheckResult:
    alpha = eps / 2
    tol = params.support_tol
    for trial in range(count):
        Q, p = generate_instance(int(rng.integers(2**32)), 4, 6)
        oracle = SampleOracle(p, mode=OracleMode.EXACT)
        u = DistanceVector(rng.uniform(0, 0.5, size=Q.n))
        h = TestDirection(_simplex(rng, Q.n))
        z = progress_step(u, h, alpha, 0.1, oracle, Q, tol).z.values
        if np.any(z > distance_vector(p, Q).values + NUMERIC_SLACK):
            return CheckResult("progress-contract", False, f"trial {trial}: z exceeds v(p)")
        if float(h.weights @ z) < support_min(h, Q, tol).value - alpha - tol:
            return CheckResult("progress-contract", False, f"trial {trial}: h·z too small")
    return CheckResult("progress-contract", True)


def check_selector_guarantees(
    rng: np.random.Generator, count: int, eps: float, params: RefinedParams = DEFAULT_PARAMS
) -> CheckResult:
    kinds = list(InstanceKind)
    for trial in range(count):
        kind = kinds[trial % len(kinds)]
        Q, p = generate_instance(int(rng.integers(2**32)), 3, 5, kind)
        opt = brute_force_opt(p, Q)
        oracle = SampleOracle(p, mode=OracleMode.EXACT)
        outputs = (
            ("yatracos", 3, yatracos_select(Q, oracle, eps, 0.1)),
            ("basic", 2, basic_select(Q, oracle, eps, 0.1, params)),
            ("refined", 2, refined_primal_run(Q, oracle, eps, 0.1, params)),
        )
        for name, factor, output in outputs:
            if tv_distance(output, p) > factor * opt + eps + 1e-6:
                return CheckResult("selector-guarantees", False, f"trial {trial}: {name}")
    return CheckResult("selector-guarantees", True)


def check_dual_round_bound(
    rng: np.random.Generator, count: int, eps: float, params: RefinedParams = DEFAULT_PARAMS
) -> CheckResult:
    """Round bound, per-round entropy drop and the Pythagorean inequality.

    Each max-entropy pick is the I-projection of uniform onto its universe,
    and every later pick lies inside that universe.
    """
    game_eps = 0.5
    for n in (2, 4, 8):
        bound = dual_round_bound(n, game_eps)
        transcript = run_dual_game(
            n, game_eps, MaxEntropyDualPlayer(), greedy_diameter_adversary, bound + 1
        )
        if not transcript.emptied or transcript.rounds > bound:
            return CheckResult("dual-round-bound", False, f"n={n}: {transcript.rounds} rounds")
        for before, after in zip(transcript.tests, transcript.tests[1:], strict=False):
            if entropy(before) - entropy(after) < game_eps**2 / 2 - 1e-3:
                return CheckResult("dual-round-bound", False, f"n={n}: entropy drop too small")
        uniform = TestDirection.uniform(n)
        for k, m in itertools.combinations(range(len(transcript.tests)), 2):
            if pythagorean_gap(transcript.tests[m], transcript.tests[k], uniform) < -1e-6:
                return CheckResult("dual-round-bound", False, f"n={n}: Pythagorean gap at {k}")
    return CheckResult("dual-round-bound", True)


CHECKS: tuple[CheckFn, ...] = (
    check_tv_metric,
    check_tv_convexity,
    check_entropy_identities,
    check_minimax,
    check_entropy_grid,
    check_margin_shape,
    check_progress_contract,
    check_selector_guarantees,
    check_dual_round_bound,
)


def run_checks(
    seed: int = 0,
    count: int = 20,
    eps: float = 0.25,
    params: RefinedParams | None = None,
) -> list[CheckResult]:
    """Run every check with its own child stream of ``seed``."""
    params = params or DEFAULT_PARAMS
    streams = np.random.SeedSequence(seed).spawn(len(CHECKS))
    results = []
    for check, stream in zip(CHECKS, streams, strict=True):
        result = check(np.random.default_rng(stream), count, eps, params)
        level = logger.info if result.passed else logger.error
        level(f"{result.name}: {'pass' if result.passed else 'FAIL'} {result.detail}".rstrip())
        results.append(result)
    return results
