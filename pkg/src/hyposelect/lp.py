"""Linear programs over the simplex, solved with HiGHS via ``scipy.optimize.linprog``.

Two shapes show up across the package:

  * the minimax program  min_{r∈Δ(X)} max_i (TV(r, q_i) − u_i), whose
    optimal duals are the maximizing test direction h;
  * plain feasibility / linear objectives over Δ_n ∩ {g·h ≤ c}, used by
    the dual game for emptiness checks and vertex-biased players.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .distributions import FloatArray
from .logging_config import get_logger

logger = get_logger(__name__)

# linprog status codes
_OPTIMAL = 0
_INFEASIBLE = 2


class SolverError(RuntimeError):
    """A numerical solver failed to converge or certify its answer."""


@dataclass(frozen=True)
class MinimaxSolution:
    value: float
    rounding: FloatArray  # argmin r over Δ(X)
    test: FloatArray  # dual h over Δ_n


def solve_minimax(matrix: FloatArray, u: FloatArray) -> MinimaxSolution:
    """Solve min_r max_i (TV(r, q_i) − u_i) exactly.

    Variables are r (|X|), slack s_ix ≥ (r_x − q_ix)_+ (n·|X|) and the
    epigraph level t. TV(r, q_i) = Σ_x (r_x − q_ix)_+ for distributions.
    """
    n, size = matrix.shape
    eye_x = sparse.identity(size, format="csr")
    # r_x − s_ix ≤ q_ix
    a_pos = sparse.hstack(
        [
            sparse.kron(np.ones((n, 1)), eye_x),
            -sparse.identity(n * size),
            sparse.csr_matrix((n * size, 1)),
        ]
    )
    # Σ_x s_ix − t ≤ u_i
    a_lvl = sparse.hstack(
        [
            sparse.csr_matrix((n, size)),
            sparse.kron(sparse.identity(n), np.ones((1, size))),
            sparse.csr_matrix(-np.ones((n, 1))),
        ]
    )
    a_ub = sparse.vstack([a_pos, a_lvl], format="csr")
    b_ub = np.concatenate([matrix.ravel(), u])
    a_eq = sparse.hstack(
        [sparse.csr_matrix(np.ones((1, size))), sparse.csr_matrix((1, n * size + 1))],
        format="csr",
    )
    cost = np.zeros(size + n * size + 1)
    cost[-1] = 1.0
    bounds = [(0.0, None)] * (size + n * size) + [(None, None)]

    res = linprog(
        cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=bounds, method="highs"
    )
    if res.status != _OPTIMAL:
        raise SolverError(f"minimax LP failed (status {res.status}): {res.message}")

    duals = -np.asarray(res.ineqlin.marginals[n * size :], dtype=np.float64)
    duals = np.clip(duals, 0.0, None)
    total = float(duals.sum())
    if not 0.5 < total < 1.5:
        raise SolverError(f"minimax LP duals sum to {total}, expected 1")
    logger.debug(f"minimax LP: n={n} |X|={size} value={res.fun:.6g}")
    rounding = np.clip(np.asarray(res.x[:size], dtype=np.float64), 0.0, None)
    return MinimaxSolution(
        value=float(res.fun),
        rounding=rounding / rounding.sum(),
        test=duals / total,
    )


def simplex_point(
    directions: FloatArray,
    offsets: FloatArray,
    objective: FloatArray | None = None,
) -> FloatArray | None:
    """Return a point of Δ_n ∩ {h : directions·h ≤ offsets}, or None if empty.

    With ``objective`` the point minimizes objective·h, which lands on a
    vertex of the polytope.
    """
    n = directions.shape[1]
    cost = np.zeros(n) if objective is None else objective
    a_ub = directions if directions.shape[0] else None
    b_ub = offsets if directions.shape[0] else None
    res = linprog(
        cost,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=np.ones((1, n)),
        b_eq=[1.0],
        bounds=[(0.0, None)] * n,
        method="highs",
    )
    if res.status == _INFEASIBLE:
        return None
    if res.status != _OPTIMAL:
        raise SolverError(f"simplex feasibility LP failed (status {res.status}): {res.message}")
    point = np.clip(np.asarray(res.x, dtype=np.float64), 0.0, None)
    return np.asarray(point / point.sum(), dtype=np.float64)
