"""Finite discrete distributions and total-variation geometry.

Four immutable value types carry every vector the algorithms exchange:

  * ``Distribution``   : a probability vector over the domain {0, …, |X|−1}
  * ``HypothesisClass``: the ordered candidates q_1 … q_n over one domain
  * ``DistanceVector`` : a point of [0,1]^n (u_k, z, v(p), …)
  * ``TestDirection``  : a point of the simplex Δ_n (the tests h)

Construction validates and freezes the backing array, so instances are
safe to share between concurrent trials. Inputs outside the normalization
tolerance are rejected rather than renormalized; solver outputs that are
off by rounding noise go through :func:`clean_simplex_vector` first.
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import entr, rel_entr

# Sum-to-one slack accepted on construction.
NORMALIZATION_TOL = 1e-9

# Solver outputs may drift further than NORMALIZATION_TOL (LP primal
# feasibility is ~1e-9 per coordinate); cleaning accepts up to this much
# before refusing.
SOLVER_CLEAN_TOL = 1e-6

FloatArray = NDArray[np.float64]


class InvalidDistributionError(ValueError):
    """A vector failed the simplex or [0,1]^n invariants."""


class DomainMismatchError(ValueError):
    """Two objects were defined over different domains or dimensions."""


def _frozen(values: ArrayLike) -> FloatArray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidDistributionError(f"expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidDistributionError("vector contains non-finite entries")
    arr.setflags(write=False)
    return arr


def _check_simplex(arr: FloatArray, what: str) -> None:
    if np.any(arr < 0):
        raise InvalidDistributionError(f"{what} has negative entries (min {arr.min():.3g})")
    total = float(arr.sum())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise InvalidDistributionError(
            f"{what} sums to {total!r}, outside tolerance {NORMALIZATION_TOL}"
        )


def clean_simplex_vector(values: ArrayLike, tol: float = SOLVER_CLEAN_TOL) -> FloatArray:
    """Clip rounding noise from a solver's simplex point and renormalize.

    Raises ``InvalidDistributionError`` if the raw vector is further than
    ``tol`` from the simplex.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidDistributionError(f"expected a non-empty 1-D vector, got shape {arr.shape}")
    if np.any(arr < -tol) or abs(float(arr.sum()) - 1.0) > tol:
        raise InvalidDistributionError(f"solver output is not within {tol} of the simplex")
    clipped = np.clip(arr, 0.0, None)
    return np.asarray(clipped / clipped.sum(), dtype=np.float64)


@dataclass(frozen=True, eq=False)
class Distribution:
    probs: FloatArray

    def __init__(self, probs: ArrayLike) -> None:
        arr = _frozen(probs)
        _check_simplex(arr, "distribution")
        object.__setattr__(self, "probs", arr)

    @classmethod
    def uniform(cls, domain_size: int) -> Distribution:
        return cls(np.full(domain_size, 1.0 / domain_size))

    @classmethod
    def point_mass(cls, domain_size: int, element: int) -> Distribution:
        probs = np.zeros(domain_size)
        probs[element] = 1.0
        return cls(probs)

    @property
    def domain_size(self) -> int:
        return int(self.probs.size)

    def __repr__(self) -> str:
        return f"Distribution({np.array2string(self.probs, precision=4)})"


@dataclass(frozen=True, eq=False)
class HypothesisClass:
    """Ordered candidates q_1 … q_n over one shared domain.

    ``matrix`` stacks the candidates row-wise (n × |X|). ``column_order``
    caches a stable per-element sort of the rows; support minimization
    reuses it for every test direction.
    """

    hypotheses: tuple[Distribution, ...]
    matrix: FloatArray = field(init=False, repr=False)
    column_order: NDArray[np.intp] = field(init=False, repr=False)

    def __init__(self, hypotheses: Sequence[Distribution]) -> None:
        hyps = tuple(hypotheses)
        if not hyps:
            raise InvalidDistributionError("a hypothesis class needs at least one member")
        size = hyps[0].domain_size
        for i, q in enumerate(hyps):
            if q.domain_size != size:
                raise DomainMismatchError(
                    f"hypothesis {i} has domain size {q.domain_size}, expected {size}"
                )
        matrix = np.vstack([q.probs for q in hyps])
        matrix.setflags(write=False)
        order = np.argsort(matrix, axis=0, kind="stable")
        order.setflags(write=False)
        object.__setattr__(self, "hypotheses", hyps)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "column_order", order)

    @classmethod
    def from_rows(cls, rows: ArrayLike) -> HypothesisClass:
        return cls([Distribution(row) for row in np.asarray(rows, dtype=np.float64)])

    @property
    def n(self) -> int:
        return len(self.hypotheses)

    @property
    def domain_size(self) -> int:
        return self.hypotheses[0].domain_size

    def __len__(self) -> int:
        return len(self.hypotheses)

    def __getitem__(self, index: int) -> Distribution:
        return self.hypotheses[index]

    def __iter__(self) -> Iterator[Distribution]:
        return iter(self.hypotheses)


@dataclass(frozen=True, eq=False)
class DistanceVector:
    values: FloatArray

    def __init__(self, values: ArrayLike) -> None:
        arr = np.array(values, dtype=np.float64)
        # TV sums can land a few ulps outside [0, 1].
        if arr.ndim == 1 and np.all(np.isfinite(arr)):
            if np.any(arr < -NORMALIZATION_TOL) or np.any(arr > 1 + NORMALIZATION_TOL):
                raise InvalidDistributionError(
                    f"distance vector entries must lie in [0, 1], got range "
                    f"[{arr.min():.6g}, {arr.max():.6g}]"
                )
            arr = np.clip(arr, 0.0, 1.0)
        object.__setattr__(self, "values", _frozen(arr))

    @classmethod
    def zeros(cls, n: int) -> DistanceVector:
        return cls(np.zeros(n))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __repr__(self) -> str:
        return f"DistanceVector({np.array2string(self.values, precision=4)})"


@dataclass(frozen=True, eq=False)
class TestDirection:
    weights: FloatArray

    # Not a pytest class, despite the name.
    __test__ = False

    def __init__(self, weights: ArrayLike) -> None:
        arr = _frozen(weights)
        _check_simplex(arr, "test direction")
        object.__setattr__(self, "weights", arr)

    @classmethod
    def uniform(cls, n: int) -> TestDirection:
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def vertex(cls, n: int, index: int) -> TestDirection:
        weights = np.zeros(n)
        weights[index] = 1.0
        return cls(weights)

    @property
    def n(self) -> int:
        return int(self.weights.size)

    def __repr__(self) -> str:
        return f"TestDirection({np.array2string(self.weights, precision=4)})"


# ---------------------------------------------------------------------------
# Total variation
# ---------------------------------------------------------------------------


def tv_rows(matrix: FloatArray, probs: FloatArray) -> FloatArray:
    """TV distance from ``probs`` to every row of ``matrix`` (raw arrays)."""
    return np.asarray(0.5 * np.abs(matrix - probs).sum(axis=1), dtype=np.float64)


def tv_distance(a: Distribution, b: Distribution) -> float:
    if a.domain_size != b.domain_size:
        raise DomainMismatchError(f"domain sizes differ: {a.domain_size} vs {b.domain_size}")
    return float(min(1.0, 0.5 * np.abs(a.probs - b.probs).sum()))


def distance_vector(p: Distribution, Q: HypothesisClass) -> DistanceVector:
    if p.domain_size != Q.domain_size:
        raise DomainMismatchError(
            f"target has domain size {p.domain_size}, hypotheses have {Q.domain_size}"
        )
    return DistanceVector(tv_rows(Q.matrix, p.probs))


def opt_index(p: Distribution, Q: HypothesisClass) -> tuple[int, float]:
    """Closest hypothesis to ``p`` and its distance; ties go to the lowest index."""
    distances = distance_vector(p, Q).values
    index = int(np.argmin(distances))
    return index, float(distances[index])


# ---------------------------------------------------------------------------
# Entropy and KL (nats)
# ---------------------------------------------------------------------------


def entropy(h: TestDirection | Distribution) -> float:
    vec = h.weights if isinstance(h, TestDirection) else h.probs
    return float(entr(vec).sum())


def kl_divergence(a: TestDirection | Distribution, b: TestDirection | Distribution) -> float:
    """KL(a‖b); +inf when a puts mass where b has none."""
    va = a.weights if isinstance(a, TestDirection) else a.probs
    vb = b.weights if isinstance(b, TestDirection) else b.probs
    if va.size != vb.size:
        raise DomainMismatchError(f"dimensions differ: {va.size} vs {vb.size}")
    return float(rel_entr(va, vb).sum())


def l1_distance(a: TestDirection, b: TestDirection) -> float:
    return float(np.abs(a.weights - b.weights).sum())
