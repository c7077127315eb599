"""The max-entropy player of the cutting-with-margin game.

The player answers every round with the highest-entropy test in the
current universe. Universes here are always described by linear cuts
a_k·h ≥ b_k intersected with Δ_n, and the entropy maximizer over such a
polytope has the Gibbs form h ∝ exp(Σ_k μ_k a_k). The multipliers come from
the convex dual

    min_{μ ≥ 0}  logsumexp(Aᵀμ) − b·μ

solved with L-BFGS-B. For the primal game's universe {h : G(h) ≥ c} the
cuts are the witness halfspaces h·(v(p′) − u) ≥ c; a :class:`WitnessPool`
collects them lazily, adding one whenever the current maximizer still has
G(h) < c. The multiplier on the G constraint is Σ_k μ_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .distributions import (
    DistanceVector,
    FloatArray,
    HypothesisClass,
    TestDirection,
    clean_simplex_vector,
    entropy,
    kl_divergence,
    tv_rows,
)
from .logging_config import get_logger
from .lp import SolverError
from .tv_geometry import DEFAULT_TOL, MarginQuery, support_min_arrays, violated_test_value

logger = get_logger(__name__)

# L-BFGS-B settings for the entropy dual.
_DUAL_GTOL = 1e-11
_DUAL_MAXITER = 20_000

# Margin slack of a max-entropy query when the caller names none.
DEFAULT_ENTROPY_TOL = 1e-4

# Re-solves allowed when L-BFGS-B stops short of a cut it already holds.
MAX_RESOLVES = 32


class InfeasibleTestError(ValueError):
    """The requested test set is empty (with the caller's slack)."""


@dataclass(frozen=True, eq=False)
class EntropySolution:
    h: TestDirection
    attained_entropy: float
    certified_margin: float
    gap_certificate: float
    cuts: int = 0


@dataclass(eq=False)
class WitnessPool:
    """Witnesses p′ whose halfspaces h·(v(p′) − u) ≥ c outer-approximate {G ≥ c}.

    Reusing one pool while u only grows keeps successive relaxations nested,
    which is what makes consecutive max-entropy picks lose entropy.
    """

    Q: HypothesisClass
    witnesses: list[FloatArray] = field(default_factory=list)
    distances: list[FloatArray] = field(default_factory=list)
    multipliers: FloatArray = field(default_factory=lambda: np.zeros(0))

    def __len__(self) -> int:
        return len(self.witnesses)

    def index_of(self, witness: FloatArray) -> int | None:
        for index, existing in enumerate(self.witnesses):
            if np.array_equal(existing, witness):
                return index
        return None

    def add(self, witness: FloatArray) -> bool:
        """Pool a witness; False if an identical one is already present."""
        if self.index_of(witness) is not None:
            return False
        self.witnesses.append(np.array(witness, dtype=np.float64))
        self.distances.append(tv_rows(self.Q.matrix, witness))
        self.multipliers = np.append(self.multipliers, 0.0)
        return True

    def directions(self, u: FloatArray) -> FloatArray:
        if not self.distances:
            return np.zeros((0, self.Q.n))
        return np.vstack(self.distances) - u


def maximize_entropy(
    directions: FloatArray,
    offsets: FloatArray,
    start: FloatArray | None = None,
) -> tuple[FloatArray, float, FloatArray]:
    """Max-entropy point of Δ_n ∩ {h : directions·h ≥ offsets}.

    Returns (h, dual objective, multipliers). The dual objective upper-bounds
    the entropy of every feasible point.
    """
    k, n = directions.shape
    if k == 0:
        return np.full(n, 1.0 / n), math.log(n), np.zeros(0)

    def dual(mu: FloatArray) -> tuple[float, FloatArray]:
        scores = directions.T @ mu
        lse = float(logsumexp(scores))
        gibbs = np.exp(scores - lse)
        return lse - float(offsets @ mu), directions @ gibbs - offsets

    x0 = np.zeros(k) if start is None or start.size != k else start
    result = minimize(
        dual,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=[(0.0, None)] * k,
        options={"maxiter": _DUAL_MAXITER, "gtol": _DUAL_GTOL, "ftol": 1e-15},
    )
    mu = np.asarray(result.x, dtype=np.float64)
    scores = directions.T @ mu
    weights = np.exp(scores - logsumexp(scores))
    return weights, float(result.fun), mu


def max_entropy_test(
    u: DistanceVector,
    eps: float,
    Q: HypothesisClass,
    tol: float = DEFAULT_ENTROPY_TOL,
    *,
    pool: WitnessPool | None = None,
    cut_tol: float | None = None,
    max_cuts: int = 500,
    check_feasible: bool = True,
) -> EntropySolution:
    """Highest-entropy h with G(h) ≥ eps + tol, up to ``cut_tol``.

    ``cut_tol`` defaults to tol/2, so the returned h has G(h) ≥ eps + tol/2.
    Callers that certified nonemptiness themselves pass
    ``check_feasible=False``.

    When the support minimizer hands back a witness that is already pooled,
    the dual stopped short of that cut. The first such stall restarts the
    dual cold; later ones raise that cut's offset by the shortfall. Only
    after :data:`MAX_RESOLVES` of these does it raise :class:`SolverError`.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    threshold = eps + tol
    stop_slack = tol / 2 if cut_tol is None else min(cut_tol, tol / 2)

    if check_feasible:
        best, _ = violated_test_value(MarginQuery(u, eps), Q, DEFAULT_TOL)
        if best <= threshold:
            raise InfeasibleTestError(
                f"no test with margin above {threshold:.6g}; the best is {best:.6g}"
            )

    pool = WitnessPool(Q) if pool is None else pool
    bumps = np.zeros(len(pool))
    added = resolves = 0
    while True:
        if bumps.size < len(pool):
            bumps = np.append(bumps, np.zeros(len(pool) - bumps.size))
        directions = pool.directions(u.values)
        weights, dual_value, mu = maximize_entropy(directions, threshold + bumps, pool.multipliers)
        pool.multipliers = mu
        value, witness, _, _ = support_min_arrays(weights, Q)
        current = value - float(weights @ u.values)
        if current >= threshold - stop_slack:
            return _solution(weights, current, dual_value, len(pool))

        index = pool.index_of(witness)
        if index is None:
            if added == max_cuts:
                raise SolverError(f"max-entropy player did not settle within {max_cuts} cuts")
            pool.add(witness)
            added += 1
            logger.debug(f"max-entropy cut {len(pool)}: margin {current:.6g} < {threshold:.6g}")
            continue

        resolves += 1
        if resolves > MAX_RESOLVES:
            raise SolverError(
                f"entropy dual stalled at margin {current:.6g} below {threshold:.6g} "
                f"after {MAX_RESOLVES} re-solves"
            )
        shortfall = threshold - current
        if resolves == 1:
            pool.multipliers = np.zeros(len(pool))
        else:
            bumps[index] += shortfall + stop_slack / 2
        logger.debug(f"max-entropy re-solve {resolves}: cut {index} short by {shortfall:.3g}")


def _solution(weights: FloatArray, margin: float, dual_value: float, cuts: int) -> EntropySolution:
    h = TestDirection(clean_simplex_vector(weights))
    attained = entropy(h)
    return EntropySolution(
        h=h,
        attained_entropy=attained,
        certified_margin=margin,
        gap_certificate=max(dual_value - attained, 0.0),
        cuts=cuts,
    )


def pythagorean_gap(q: TestDirection, qstar: TestDirection, p: TestDirection) -> float:
    """KL(q,p) − KL(q,q*) − KL(q*,p); nonnegative when q* is the I-projection of p.

    Any infinite divergence makes the gap +inf.
    """
    terms = (kl_divergence(q, p), kl_divergence(q, qstar), kl_divergence(qstar, p))
    if not all(math.isfinite(t) for t in terms):
        return math.inf
    return terms[0] - terms[1] - terms[2]
