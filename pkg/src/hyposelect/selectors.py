"""End-to-end hypothesis selection.

Four selectors share one calling convention ``(Q, oracle, eps, delta, ...)``
and return a :class:`Distribution`:

  * :func:`yatracos_select`     minimum-distance estimate over Yatracos sets (3·opt + ε, proper)
  * :func:`basic_select`        max-entropy primal game with progress steps (2·opt + ε)
  * :func:`refined_primal_run`  the refined primal game with dyadic slices (2·opt + ε)
  * :func:`tiny_error_select`   refined runs plus a fresh-sample audit, for δ < ε²/n³

:func:`select` picks between the last two. Every selector accepts an
optional :class:`SelectionTrace` that records transcripts for replay.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):  # type: ignore[no-redef]
        __str__ = str.__str__
from typing import Any

import numpy as np

from .distributions import (
    DistanceVector,
    Distribution,
    FloatArray,
    HypothesisClass,
    TestDirection,
)
from .entropy_player import DEFAULT_ENTROPY_TOL, WitnessPool, max_entropy_test
from .games import dual_round_bound
from .logging_config import get_logger
from .sampling import SampleOracle, progress_step
from .tv_geometry import (
    DEFAULT_TOL,
    MarginSolver,
    feasibility_round,
    solve_margin,
    support_min,
)

logger = get_logger(__name__)


class RoundBoundExceeded(RuntimeError):
    """A game ran past its proven round bound; tolerances are misconfigured."""


class RestartCapExceeded(RuntimeError):
    """Too many consecutive failed slices or failed audits."""


@dataclass(frozen=True)
class RefinedParams:
    """Constants of the refined algorithm plus solver settings shared by all selectors.

    ``gamma`` left as None is derived per level from (d, eps, delta, n).
    """

    C0: float = 256.0
    C1: float = 64.0
    C2: float = 33.0
    gamma: float | None = None
    restart_cap: int = 100
    solver: MarginSolver = MarginSolver.HIGHS
    tol: float = DEFAULT_TOL
    support_tol: float = DEFAULT_TOL
    entropy_tol: float = DEFAULT_ENTROPY_TOL
    mirror_max_iterations: int = 100_000
    max_cuts: int = 500

    def __post_init__(self) -> None:
        if not self.C2 > 32:
            raise ValueError(f"C2 must exceed 32, got {self.C2}")
        if not self.C0 >= 4 * self.C2:
            raise ValueError(f"C0 must be at least 4*C2 = {4 * self.C2}, got {self.C0}")
        if not self.C1 >= 8:
            raise ValueError(f"C1 must be at least 8, got {self.C1}")
        if self.restart_cap < 1:
            raise ValueError(f"restart_cap must be >= 1, got {self.restart_cap}")
        if self.gamma is not None and not 0 < self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        object.__setattr__(self, "solver", MarginSolver(self.solver))

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> RefinedParams:
        return cls(
            C0=float(config.get("C0", cls.C0)),
            C1=float(config.get("C1", cls.C1)),
            C2=float(config.get("C2", cls.C2)),
            restart_cap=int(config.get("restart_cap", cls.restart_cap)),
            solver=MarginSolver(config.get("solver", cls.solver)),
            tol=float(config.get("lp_tol", cls.tol)),
            support_tol=float(config.get("support_tol", cls.support_tol)),
            entropy_tol=float(config.get("entropy_tol", cls.entropy_tol)),
            mirror_max_iterations=int(
                config.get("mirror_max_iterations", cls.mirror_max_iterations)
            ),
            max_cuts=int(config.get("maxent_max_cuts", cls.max_cuts)),
        )


class SliceStatus(StrEnum):
    SUCCESS = "success"
    FAIL = "fail"


@dataclass(frozen=True, eq=False)
class UpdateEvent:
    """Coordinate i rose to ``threshold`` at slice j, judged by ``discriminator``."""

    index: int
    discriminator: FloatArray
    q_expectation: float
    threshold: float
    j: int


@dataclass(frozen=True, eq=False)
class SliceResult:
    j: int
    v: DistanceVector
    discriminators: FloatArray
    samples_used: int
    status: SliceStatus
    events: tuple[UpdateEvent, ...] = ()


@dataclass(frozen=True, eq=False)
class RefinedStep:
    d: float
    dprime: float
    j: int
    samples_used: int
    restarts: int
    h: TestDirection
    u_before: DistanceVector
    u_after: DistanceVector

    def rule_sum(self) -> float:
        """Σ_i min(2^{−j}, u_after,i − u_before,i)·h_i."""
        step = np.minimum(2.0**-self.j, self.u_after.values - self.u_before.values)
        return float(step @ self.h.weights)


@dataclass(eq=False)
class SelectionTrace:
    """Mutable record of one selector run."""

    algorithm: str = ""
    points: list[DistanceVector] = field(default_factory=list)
    tests: list[TestDirection] = field(default_factory=list)
    d_schedule: list[float] = field(default_factory=list)
    steps: list[RefinedStep] = field(default_factory=list)
    events: list[UpdateEvent] = field(default_factory=list)
    restarts: int = 0
    audit_restarts: int = 0

    @property
    def rounds(self) -> int:
        return len(self.tests)

    @property
    def slice_indices(self) -> list[int]:
        return [step.j for step in self.steps]


def _check_accuracy(eps: float, delta: float) -> None:
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


# ---------------------------------------------------------------------------
# Yatracos baseline
# ---------------------------------------------------------------------------


def yatracos_sets(Q: HypothesisClass) -> FloatArray:
    """Indicators of {x : q_j(x) ≥ q_k(x)} for all ordered pairs j ≠ k, row-wise."""
    rows = [
        Q.matrix[j] >= Q.matrix[k] for j in range(Q.n) for k in range(Q.n) if j != k
    ]
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), Q.domain_size)


def yatracos_select(
    Q: HypothesisClass,
    oracle: SampleOracle,
    eps: float,
    delta: float,
    trace: SelectionTrace | None = None,
) -> Distribution:
    """Member of Q whose worst Yatracos-set discrepancy against p̂ is smallest."""
    if eps <= 0 or not 0 < delta < 1:
        raise ValueError(f"need eps > 0 and delta in (0, 1), got {eps}, {delta}")
    if trace is not None:
        trace.algorithm = "yatracos"
    if Q.n == 1 or eps >= 2:
        return Q[0]
    sets = yatracos_sets(Q)
    m = math.ceil(2 * math.log(2 * sets.shape[0] / delta) / eps**2)
    empirical = oracle.estimate_expectations(sets, m)
    discrepancy = np.abs(Q.matrix @ sets.T - empirical).max(axis=1)
    winner = int(np.argmin(discrepancy))
    logger.info(f"yatracos: picked q_{winner} with discrepancy {discrepancy[winner]:.4g}")
    return Q[winner]


# ---------------------------------------------------------------------------
# Max-entropy primal game
# ---------------------------------------------------------------------------


def basic_select(
    Q: HypothesisClass,
    oracle: SampleOracle,
    eps: float,
    delta: float,
    params: RefinedParams | None = None,
    trace: SelectionTrace | None = None,
) -> Distribution:
    """Play the primal game with the max-entropy player, then round.

    The game runs at margin 3ε/4 with emptiness slack ε/8, which leaves
    ε/16 for the rounding certificate.
    """
    _check_accuracy(eps, delta)
    params = params or RefinedParams()
    trace = trace if trace is not None else SelectionTrace()
    trace.algorithm = "basic"
    if Q.n == 1:
        return Q[0]

    level = 3 * eps / 4
    slack = eps / 8
    alpha = level / 2
    bound = dual_round_bound(Q.n, level / 4)
    beta = delta / bound

    u = DistanceVector.zeros(Q.n)
    pool = WitnessPool(Q)
    trace.points.append(u)
    rounds = 0
    while True:
        certificate = solve_margin(
            u, Q, max(params.tol, slack / 4), params.solver, params.mirror_max_iterations
        )
        if certificate.lower <= level + slack:
            break
        if rounds >= bound:
            raise RoundBoundExceeded(f"basic_select passed its bound of {bound} rounds")
        solution = max_entropy_test(
            u, level, Q, slack, pool=pool, max_cuts=params.max_cuts, check_feasible=False
        )
        output = progress_step(u, solution.h, alpha, beta, oracle, Q, params.support_tol)
        u = DistanceVector(np.maximum(u.values, output.z.values))
        rounds += 1
        trace.tests.append(solution.h)
        trace.points.append(u)
        logger.debug(
            f"basic round {rounds}: margin {certificate.lower:.4g}, "
            f"entropy {solution.attained_entropy:.4g}"
        )

    logger.info(f"basic_select finished in {rounds} rounds")
    return feasibility_round(
        u, level + slack, Q, eps / 16, params.solver, params.mirror_max_iterations
    )


# ---------------------------------------------------------------------------
# Refined primal game
# ---------------------------------------------------------------------------


def level_step(d: float, C0: float) -> float:
    """d′ = d / (C0·ln(1 + 1/d))."""
    return d / (C0 * math.log1p(1 / d))


def slice_count(d: float) -> int:
    """j_max = 2 + ⌈log2(1 + 1/d)⌉."""
    return 2 + math.ceil(math.log2(1 + 1 / d))


def slice_sample_size(j: int, d: float, gamma: float, C1: float) -> int:
    """m_j = ⌈C1·ln(max(ln(1/d), 1)/γ)·4^j⌉."""
    return math.ceil(C1 * math.log(max(math.log(1 / d), 1.0) / gamma) * 4**j)


def failure_budget(d: float, eps: float, delta: float, n: int) -> float:
    """γ = min(d³, δε²/(64·ln n·ln(2/ε)))."""
    return min(d**3, delta * eps**2 / (64 * math.log(n) * math.log(2 / eps)))


def refined_hypothesis_select(
    u: DistanceVector,
    h: TestDirection,
    d: float,
    dprime: float,
    gamma: float,
    params: RefinedParams,
    oracle: SampleOracle,
    Q: HypothesisClass,
) -> SliceResult:
    """Find the first dyadic slice j whose estimated gains clear 2d′.

    ``samples_used`` is the nominal Σ_{j′≤j} m_{j′}; exact oracles draw nothing.
    """
    F = support_min(h, Q, params.support_tol).discriminators
    q_expectations = (Q.matrix * F).sum(axis=1)
    used = 0
    j_max = slice_count(d)
    for j in range(j_max + 1):
        m = slice_sample_size(j, d, gamma, params.C1)
        used += m
        w = oracle.estimate_expectations(F, m) - q_expectations
        v = np.maximum(u.values, w - 2.0 ** (-j - 1))
        gain = float(np.minimum(2.0**-j, v - u.values) @ h.weights)
        if gain > 2 * dprime:
            events = tuple(
                UpdateEvent(int(i), F[i], float(q_expectations[i]), float(v[i]), j)
                for i in np.flatnonzero(v > u.values)
            )
            return SliceResult(j, DistanceVector(v), F, used, SliceStatus.SUCCESS, events)
    return SliceResult(j_max, u, F, used, SliceStatus.FAIL)


def refined_primal_run(
    Q: HypothesisClass,
    oracle: SampleOracle,
    eps: float,
    delta: float,
    params: RefinedParams | None = None,
    trace: SelectionTrace | None = None,
) -> Distribution:
    """The refined primal game: shrink the level d by d′ until d ≤ ε/2, then round."""
    _check_accuracy(eps, delta)
    params = params or RefinedParams()
    trace = trace if trace is not None else SelectionTrace()
    trace.algorithm = trace.algorithm or "refined"
    if Q.n == 1:
        return Q[0]

    u = DistanceVector.zeros(Q.n)
    pool = WitnessPool(Q)
    trace.points.append(u)
    best: float | None = None
    d = 1.0
    slack = 0.0
    while d > eps / 2:
        dprime = level_step(d, params.C0)
        slack = dprime / 4
        target = d - dprime
        gamma = params.gamma or failure_budget(d, eps, delta, Q.n)
        limit = math.ceil(16 * math.log(Q.n) / dprime**2)
        steps = 0
        while True:
            if best is None:
                best = solve_margin(
                    u, Q, max(params.tol, slack / 4), params.solver, params.mirror_max_iterations
                ).lower
            if best <= target + slack:
                break
            if steps >= limit:
                raise RoundBoundExceeded(f"refined level d={d:.4g} passed {limit} steps")
            solution = max_entropy_test(
                u,
                target,
                Q,
                slack,
                pool=pool,
                cut_tol=slack / 16,
                max_cuts=params.max_cuts,
                check_feasible=False,
            )
            result, retries = _slice_with_restarts(
                u, solution.h, d, dprime, gamma, params, oracle, Q
            )
            trace.restarts += retries
            step = RefinedStep(
                d=d,
                dprime=dprime,
                j=result.j,
                samples_used=result.samples_used,
                restarts=retries,
                h=solution.h,
                u_before=u,
                u_after=result.v,
            )
            if not step.rule_sum() > 2 * dprime:
                raise RuntimeError(f"accepted step breaks the refined rule at d={d:.4g}")
            trace.steps.append(step)
            trace.events.extend(result.events)
            trace.tests.append(solution.h)
            trace.points.append(result.v)
            u = result.v
            best = None
            steps += 1
        d -= dprime
        trace.d_schedule.append(d)

    logger.info(
        f"refined run: {len(trace.d_schedule)} levels, {len(trace.steps)} steps, "
        f"final d={d:.4g}"
    )
    return feasibility_round(
        u, d + slack, Q, max(params.tol, slack / 4), params.solver, params.mirror_max_iterations
    )


def _slice_with_restarts(
    u: DistanceVector,
    h: TestDirection,
    d: float,
    dprime: float,
    gamma: float,
    params: RefinedParams,
    oracle: SampleOracle,
    Q: HypothesisClass,
) -> tuple[SliceResult, int]:
    for attempt in range(params.restart_cap + 1):
        result = refined_hypothesis_select(u, h, d, dprime, gamma, params, oracle, Q)
        if result.status is SliceStatus.SUCCESS:
            return result, attempt
        logger.warning(f"no slice cleared 2d′ at d={d:.4g} (attempt {attempt + 1}); retrying")
    raise RestartCapExceeded(f"{params.restart_cap} consecutive failed slices at d={d:.4g}")


# ---------------------------------------------------------------------------
# Tiny error regime
# ---------------------------------------------------------------------------


def audit_batch_size(events: list[UpdateEvent], eps: float, delta: float) -> int:
    count = len(events)
    top = max(event.j for event in events)
    return math.ceil(
        max(
            64 * (math.log(1 / delta) + math.log(count)) / eps**2,
            2 ** (2 * top + 3) * math.log(2 * count / delta),
        )
    )


def verify_update_events(
    events: list[UpdateEvent], oracle: SampleOracle, eps: float, delta: float
) -> bool:
    """Re-estimate every recorded rise on one fresh batch.

    An event passes when Ê[F_i] − E_{q_i}[F_i] > threshold − 2^{−j−3}.
    """
    if not events:
        return True
    m = audit_batch_size(events, eps, delta)
    table = np.vstack([event.discriminator for event in events])
    estimates = oracle.estimate_expectations(table, m)
    for event, estimate in zip(events, estimates, strict=True):
        if estimate - event.q_expectation <= event.threshold - 2.0 ** (-event.j - 3):
            logger.warning(
                f"audit failed for coordinate {event.index} at slice {event.j}: "
                f"{estimate - event.q_expectation:.4g} vs {event.threshold:.4g}"
            )
            return False
    return True


def tiny_error_select(
    Q: HypothesisClass,
    oracle: SampleOracle,
    eps: float,
    delta: float,
    params: RefinedParams | None = None,
    trace: SelectionTrace | None = None,
) -> Distribution:
    """Refined runs at δ′ = ε²/n³, each audited against fresh samples at δ."""
    _check_accuracy(eps, delta)
    params = params or RefinedParams()
    if Q.n == 1:
        return Q[0]
    inner_delta = eps**2 / Q.n**3
    if delta >= inner_delta:
        raise ValueError(f"tiny_error_select needs delta < eps²/n³ = {inner_delta:.3g}")

    audit_restarts = 0
    for _ in range(params.restart_cap + 1):
        attempt = SelectionTrace(algorithm="tiny-error")
        output = refined_primal_run(Q, oracle, eps, inner_delta, params, attempt)
        if verify_update_events(attempt.events, oracle, eps, delta):
            if trace is not None:
                _absorb(trace, attempt, audit_restarts)
            return output
        audit_restarts += 1
        logger.warning(f"audit rejected refined run; restart {audit_restarts}")
    raise RestartCapExceeded(f"{params.restart_cap} audits failed in a row")


def _absorb(trace: SelectionTrace, attempt: SelectionTrace, audit_restarts: int) -> None:
    trace.algorithm = attempt.algorithm
    trace.points = attempt.points
    trace.tests = attempt.tests
    trace.d_schedule = attempt.d_schedule
    trace.steps = attempt.steps
    trace.events = attempt.events
    trace.restarts = attempt.restarts
    trace.audit_restarts = audit_restarts


def select(
    Q: HypothesisClass,
    oracle: SampleOracle,
    eps: float,
    delta: float,
    params: RefinedParams | None = None,
    trace: SelectionTrace | None = None,
) -> Distribution:
    """2·opt + ε selection with near-optimal samples; dispatches on δ vs ε²/n³."""
    _check_accuracy(eps, delta)
    if Q.n == 1:
        return Q[0]
    if uses_refined_path(Q.n, eps, delta):
        return refined_primal_run(Q, oracle, eps, delta, params, trace)
    return tiny_error_select(Q, oracle, eps, delta, params, trace)


def uses_refined_path(n: int, eps: float, delta: float) -> bool:
    return delta >= eps**2 / n**3
