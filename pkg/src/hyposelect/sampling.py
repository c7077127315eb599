"""Sample access to a hidden target distribution.

Selectors never see the target directly. They ask a :class:`SampleOracle`
for draws or for empirical means of bounded functions, and the oracle keeps
an exact count of what it handed out. Exact mode answers expectation
queries with true values instead, which isolates algorithmic correctness
from sampling noise in tests and in the benchmark harness.

Functions X → [0,1] are passed as a (k × |X|) array, one row per function.
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
from numpy.typing import ArrayLike

from .distributions import (
    DistanceVector,
    Distribution,
    DomainMismatchError,
    FloatArray,
    HypothesisClass,
    TestDirection,
)
from .logging_config import get_logger
from .tv_geometry import DEFAULT_TOL, support_min

logger = get_logger(__name__)

# Confidence used by statistical_query in sampled mode.
SQ_CONFIDENCE = 0.01


class OracleModeError(RuntimeError):
    """An operation was called in a mode that does not support it."""


class OracleMode(StrEnum):
    SAMPLED = "sampled"
    EXACT = "exact"


class SampleOracle:
    """Seeded sampler over a hidden target.

    ``samples_drawn`` counts every element produced, whether returned by
    :meth:`draw` or folded into an estimate. ``exact_queries`` counts the
    functions evaluated exactly in exact mode.
    """

    def __init__(
        self,
        target: Distribution,
        seed: int | np.random.SeedSequence = 0,
        mode: OracleMode | str = OracleMode.SAMPLED,
    ) -> None:
        self._target = target
        self.mode = OracleMode(mode)
        if not isinstance(seed, np.random.SeedSequence):
            seed = np.random.SeedSequence(seed)
        self.seed_sequence = seed
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self.samples_drawn = 0
        self.exact_queries = 0

    @property
    def domain_size(self) -> int:
        return self._target.domain_size

    @property
    def is_exact(self) -> bool:
        return self.mode is OracleMode.EXACT

    def draw(self, m: int) -> list[int]:
        """Return m i.i.d. domain elements from the target."""
        if self.is_exact:
            raise OracleModeError("draw() is unavailable in exact mode")
        if m < 0:
            raise ValueError(f"sample count must be >= 0, got {m}")
        if m == 0:
            return []
        elements = self._rng.choice(self.domain_size, size=m, p=self._target.probs)
        self.samples_drawn += m
        return [int(x) for x in elements]

    def estimate_expectations(self, functions: ArrayLike, m: int) -> FloatArray:
        """Empirical means of each function row over one fresh batch of m samples.

        Exact mode returns the true expectations and ignores ``m``.
        """
        table = np.asarray(functions, dtype=np.float64)
        if table.ndim == 1:
            table = table[None, :]
        if table.shape[1] != self.domain_size:
            raise DomainMismatchError(
                f"functions have {table.shape[1]} columns, domain size is {self.domain_size}"
            )
        if self.is_exact:
            self.exact_queries += table.shape[0]
            return np.asarray(table @ self._target.probs, dtype=np.float64)
        if m < 1:
            raise ValueError(f"sampled estimates need m >= 1, got {m}")
        counts = self._rng.multinomial(m, self._target.probs)
        self.samples_drawn += m
        return np.asarray(table @ counts / m, dtype=np.float64)

    def statistical_query(self, f: ArrayLike, tol: float) -> float:
        """E_p[f] within ±tol (with probability 1 − SQ_CONFIDENCE when sampled)."""
        if not 0 < tol < 1:
            raise ValueError(f"query tolerance must lie in (0, 1), got {tol}")
        m = math.ceil(math.log(2 / SQ_CONFIDENCE) / (2 * tol**2))
        return float(self.estimate_expectations(f, m)[0])

    def __repr__(self) -> str:
        return (
            f"SampleOracle(mode={self.mode.value}, |X|={self.domain_size}, "
            f"samples_drawn={self.samples_drawn}, exact_queries={self.exact_queries})"
        )


@dataclass(frozen=True, eq=False)
class ProgressOutput:
    z: DistanceVector
    used_samples: int
    discriminators: FloatArray
    witness: Distribution


def progress_sample_size(n: int, alpha: float, beta: float) -> int:
    """⌈8(ln n + ln(2/β))/α²⌉, enough for all n estimates to land within α/4."""
    return math.ceil(8 * (math.log(n) + math.log(2 / beta)) / alpha**2)


def progress_step(
    u: DistanceVector,
    h: TestDirection,
    alpha: float,
    beta: float,
    oracle: SampleOracle,
    Q: HypothesisClass,
    tol: float = DEFAULT_TOL,
) -> ProgressOutput:
    """Estimate a point z ≤ v(p) with h·z ≥ min_{v∈P_Q} h·v − α.

    ``used_samples`` is the nominal batch size; exact mode draws nothing.
    """
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise ValueError(f"alpha and beta must lie in (0, 1), got {alpha}, {beta}")
    if u.n != Q.n or h.n != Q.n:
        raise DomainMismatchError(f"u has {u.n} and h has {h.n} coordinates, n={Q.n}")

    game = support_min(h, Q, tol)
    F = game.discriminators
    m = progress_sample_size(Q.n, alpha, beta)
    estimates = oracle.estimate_expectations(F, m)
    w = estimates - (Q.matrix * F).sum(axis=1)
    z = np.clip(w - alpha / 2, 0.0, 1.0)
    logger.debug(f"progress step: m={m} h·z={float(h.weights @ z):.6g} target={game.value:.6g}")
    return ProgressOutput(
        z=DistanceVector(z), used_samples=m, discriminators=F, witness=game.witness
    )
