"""The feasible set P_Q and its violated tests.

P_Q is the upward closure of the distance vectors v(p′) over all p′ ∈ Δ(X).
For a test direction h the support value min_{v∈P_Q} h·v is

    min_{p′} Σ_i h_i · TV(p′, q_i) = min_{p′} Σ_x Σ_i h_i · (p′(x) − q_i(x))_+

which separates over domain elements into convex piecewise-linear costs.
:func:`support_min` solves it exactly by filling the cheapest marginal
segments first; the slope of the last segment filled is the dual price and
fixes the discriminating functions F_i.

The margin G(h) = support_min(h) − h·u is concave in h. Its maximum equals
min_{r∈Δ(X)} max_i (TV(r, q_i) − u_i), so one certificate both decides
whether a violated test exists and rounds u to an output distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):  # type: ignore[no-redef]
        __str__ = str.__str__

import numpy as np
from scipy.special import logsumexp

from .distributions import (
    DistanceVector,
    Distribution,
    DomainMismatchError,
    FloatArray,
    HypothesisClass,
    TestDirection,
    clean_simplex_vector,
    tv_rows,
)
from .logging_config import get_logger
from .lp import SolverError, solve_minimax

logger = get_logger(__name__)

DEFAULT_TOL = 1e-7

# How often the mirror solver recomputes its upper bound.
_MIRROR_CHECK_EVERY = 10


class InfeasibleRoundingError(ValueError):
    """u + eps·1 is certifiably outside P_Q, so there is nothing to round to."""


class MarginSolver(StrEnum):
    HIGHS = "highs"
    MIRROR = "mirror"


@dataclass(frozen=True, eq=False)
class GameValueResult:
    """Exact value of min_{p′} Σ_i h_i·TV(p′, q_i) with its saddle point.

    ``discriminators`` stacks the F_i row-wise (n × |X|, entries in [0,1]).
    ``level`` is the dual price λ = min_x Σ_i h_i F_i(x); ``gap`` is the
    certified duality gap of the (witness, discriminators) pair.
    """

    value: float
    witness: Distribution
    discriminators: FloatArray
    level: float
    gap: float


@dataclass(frozen=True, eq=False)
class MarginQuery:
    u: DistanceVector
    eps: float

    def __post_init__(self) -> None:
        if not self.eps >= 0:
            raise ValueError(f"margin eps must be >= 0, got {self.eps}")


@dataclass(frozen=True, eq=False)
class MarginCertificate:
    """Bracket on max_h G(h) = min_r max_i (TV(r, q_i) − u_i).

    ``lower`` is G at ``test``; ``upper`` is the max-excess of ``rounding``.
    """

    lower: float
    upper: float
    test: TestDirection
    rounding: Distribution

    @property
    def gap(self) -> float:
        return self.upper - self.lower


# ---------------------------------------------------------------------------
# Support minimization
# ---------------------------------------------------------------------------


def support_min_arrays(
    weights: FloatArray, Q: HypothesisClass
) -> tuple[float, FloatArray, FloatArray, float]:
    """Raw-array form of :func:`support_min`: (value, witness, F, level).

    Skips validation and the gap certificate; for inner solver loops.
    """
    matrix = Q.matrix
    n, size = matrix.shape
    order = Q.column_order
    breaks = np.take_along_axis(matrix, order, axis=0)

    # Segment k of element x runs between the (k−1)-th and k-th smallest
    # q_i(x); its slope is the weight of hypotheses already passed.
    slopes = np.vstack([np.zeros((1, size)), np.cumsum(weights[order], axis=0)])
    lower = np.vstack([np.zeros((1, size)), breaks])
    upper = np.vstack([breaks, np.full((1, size), np.inf)])
    lengths = (upper - lower).ravel()

    seg_k, seg_x = np.indices((n + 1, size))
    fill_order = np.lexsort((seg_k.ravel(), seg_x.ravel(), slopes.ravel()))
    filled = np.cumsum(lengths[fill_order])
    last = int(np.searchsorted(filled, 1.0, side="left"))
    remainder = 1.0 - (float(filled[last - 1]) if last > 0 else 0.0)
    last_segment = int(fill_order[last])
    level = float(slopes.ravel()[last_segment])

    full = np.zeros((n + 1) * size, dtype=bool)
    full[fill_order[:last]] = True
    partial = remainder < lengths[last_segment]
    if not partial:
        full[last_segment] = True
    full = full.reshape(n + 1, size)

    # Filled segments form a prefix per element, so the witness sits at the
    # upper end of the highest full segment (exact breakpoint copies).
    has_full = full.any(axis=0)
    top = n - np.argmax(full[::-1], axis=0)
    witness = np.where(has_full, upper[np.where(has_full, top, 0), np.arange(size)], 0.0)
    if partial:
        k_p, x_p = divmod(last_segment, size)
        witness[x_p] = lower[k_p, x_p] + remainder

    above = witness > matrix
    equal = witness == matrix
    col_weights = weights[:, None]
    below_mass = (col_weights * (matrix < witness)).sum(axis=0)
    equal_mass = (col_weights * equal).sum(axis=0)
    theta = np.ones(size)
    balance = (witness > 0) & (equal_mass > 0)
    theta[balance] = np.clip((level - below_mass[balance]) / equal_mass[balance], 0.0, 1.0)
    discriminators = np.where(equal, theta[None, :], above.astype(np.float64))

    value = float(weights @ tv_rows(matrix, witness))
    return value, witness, discriminators, level


def support_min(
    h: TestDirection, Q: HypothesisClass, tol: float = DEFAULT_TOL
) -> GameValueResult:
    """Minimize Σ_i h_i·TV(p′, q_i) over p′ and return the saddle point."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if h.n != Q.n:
        raise DomainMismatchError(f"test has {h.n} coordinates, class has {Q.n} hypotheses")
    value, witness, discriminators, level = support_min_arrays(h.weights, Q)
    gap = value - certified_lower_bound(h, Q, discriminators)
    if gap > tol:
        raise SolverError(f"support minimization gap {gap:.3g} exceeds tolerance {tol:.3g}")
    return GameValueResult(
        value=value,
        witness=Distribution(witness),
        discriminators=discriminators,
        level=level,
        gap=max(gap, 0.0),
    )


def certified_lower_bound(
    h: TestDirection, Q: HypothesisClass, discriminators: FloatArray
) -> float:
    """min over p′ of Σ_i h_i (E_{p′}[F_i] − E_{q_i}[F_i]) for fixed F.

    The objective is linear in p′, so the minimum sits on a point mass.
    """
    per_element = h.weights @ discriminators
    offset = float(np.sum(h.weights[:, None] * Q.matrix * discriminators))
    return float(per_element.min()) - offset


def margin(
    h: TestDirection, query: MarginQuery, Q: HypothesisClass, tol: float = DEFAULT_TOL
) -> float:
    """G(h) = min_{v∈P_Q} h·v − h·u. ``query.eps`` is not used."""
    return support_min(h, Q, tol).value - float(h.weights @ query.u.values)


# ---------------------------------------------------------------------------
# Maximum margin
# ---------------------------------------------------------------------------


def _highs_certificate(Q: HypothesisClass, u: FloatArray) -> MarginCertificate:
    solution = solve_minimax(Q.matrix, u)
    test = TestDirection(clean_simplex_vector(solution.test))
    rounding = Distribution(clean_simplex_vector(solution.rounding))
    value, *_ = support_min_arrays(test.weights, Q)
    return MarginCertificate(
        lower=value - float(test.weights @ u),
        upper=float(np.max(tv_rows(Q.matrix, rounding.probs) - u)),
        test=test,
        rounding=rounding,
    )


def _mirror_certificate(
    Q: HypothesisClass, u: FloatArray, tol: float, max_iterations: int
) -> MarginCertificate:
    """Entropic mirror ascent on h with averaged inner witnesses.

    The averaged witness r̄ gives the upper bound (TV is convex in r), the
    best iterate gives the lower bound; their gap shrinks like
    sqrt(ln n / t).
    """
    n = Q.n
    scale = math.sqrt(2.0 * math.log(n)) if n > 1 else 1.0
    log_weights = np.zeros(n)
    weights = np.full(n, 1.0 / n)
    witness_sum = np.zeros(Q.domain_size)
    best_lower, best_weights = -np.inf, weights
    upper, r_bar = np.inf, witness_sum

    for t in range(1, max_iterations + 1):
        value, witness, _, _ = support_min_arrays(weights, Q)
        lower = value - float(weights @ u)
        if lower > best_lower:
            best_lower, best_weights = lower, weights
        witness_sum += witness
        if t % _MIRROR_CHECK_EVERY == 0 or t == max_iterations or n == 1:
            r_bar = witness_sum / t
            upper = float(np.max(tv_rows(Q.matrix, r_bar) - u))
            if upper - best_lower <= tol:
                logger.debug(f"mirror ascent certified gap {upper - best_lower:.3g} at t={t}")
                break
        gradient = tv_rows(Q.matrix, witness) - u
        log_weights = log_weights + scale / math.sqrt(t) * gradient
        weights = np.exp(log_weights - logsumexp(log_weights))
    else:
        raise SolverError(
            f"mirror ascent gap {upper - best_lower:.3g} above {tol:.3g} "
            f"after {max_iterations} iterations"
        )

    return MarginCertificate(
        lower=best_lower,
        upper=upper,
        test=TestDirection(clean_simplex_vector(best_weights)),
        rounding=Distribution(clean_simplex_vector(r_bar)),
    )


def solve_margin(
    u: DistanceVector,
    Q: HypothesisClass,
    tol: float = DEFAULT_TOL,
    solver: MarginSolver | str = MarginSolver.HIGHS,
    max_iterations: int = 100_000,
) -> MarginCertificate:
    """Certified bracket on max_h G(h) with gap at most ``tol``."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if u.n != Q.n:
        raise DomainMismatchError(f"point has {u.n} coordinates, class has {Q.n} hypotheses")
    if MarginSolver(solver) is MarginSolver.MIRROR:
        certificate = _mirror_certificate(Q, u.values, tol, max_iterations)
    else:
        certificate = _highs_certificate(Q, u.values)
    if certificate.gap > tol:
        raise SolverError(f"margin certificate gap {certificate.gap:.3g} exceeds {tol:.3g}")
    return certificate


def violated_test_value(
    query: MarginQuery,
    Q: HypothesisClass,
    tol: float = DEFAULT_TOL,
    solver: MarginSolver | str = MarginSolver.HIGHS,
    max_iterations: int = 100_000,
) -> tuple[float, TestDirection]:
    """(max_h G(h) within tol, a maximizer).

    H_{P,eps}(u) counts as nonempty iff the value exceeds eps + tol.
    """
    certificate = solve_margin(query.u, Q, tol, solver, max_iterations)
    return certificate.lower, certificate.test


def in_feasible_set(v: DistanceVector, Q: HypothesisClass, tol: float = DEFAULT_TOL) -> bool:
    """Whether v ∈ P_Q up to ``tol`` (some p′ has v(p′) ≤ v + tol)."""
    return solve_margin(v, Q, tol).upper <= tol


def feasibility_round(
    u: DistanceVector,
    eps: float,
    Q: HypothesisClass,
    tol: float = DEFAULT_TOL,
    solver: MarginSolver | str = MarginSolver.HIGHS,
    max_iterations: int = 100_000,
) -> Distribution:
    """Find r with TV(r, q_i) ≤ u_i + eps + 2·tol for every i."""
    certificate = solve_margin(u, Q, tol, solver, max_iterations)
    if certificate.lower > eps + tol:
        raise InfeasibleRoundingError(
            f"u + {eps:.4g}·1 is outside P_Q: a test has margin {certificate.lower:.6g}"
        )
    return certificate.rounding


# ---------------------------------------------------------------------------
# Yatracos sets
# ---------------------------------------------------------------------------


def yatracos_set(i: int, j: int, Q: HypothesisClass) -> np.ndarray:
    """Indicator of {x : q_i(x) ≥ q_j(x)} (0-based hypothesis indices)."""
    for index in (i, j):
        if not 0 <= index < Q.n:
            raise IndexError(f"hypothesis index {index} out of range for n={Q.n}")
    if i == j:
        raise ValueError("a Yatracos set needs two distinct hypotheses")
    return np.asarray(Q.matrix[i] >= Q.matrix[j])
