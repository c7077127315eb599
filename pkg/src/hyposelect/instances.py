"""Random problem instances, the brute-force opt oracle and instance files.

Instance files are JSON objects::

    {"domain_size": 3, "hypotheses": [[...], ...], "target": [...]}

JSON floats carry 17 significant digits, so files round-trip exactly.
"""

from __future__ import annotations

import json
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):  # type: ignore[no-redef]
        __str__ = str.__str__
from pathlib import Path

import numpy as np

from .distributions import Distribution, HypothesisClass, tv_distance
from .logging_config import get_logger

logger = get_logger(__name__)

# Mass a corner hypothesis spreads off its peak.
CORNER_SPREAD = 0.05

# Largest TV between a near-realizable target and its source hypothesis.
NEAR_REALIZABLE_RADIUS = 0.05


class InstanceKind(StrEnum):
    RANDOM_DIRICHLET = "random-dirichlet"
    ADVERSARIAL_CORNERS = "adversarial-corners"
    NEAR_REALIZABLE = "near-realizable"


def _normalized(row: np.ndarray) -> np.ndarray:
    return row / row.sum()


def generate_instance(
    seed: int | np.random.SeedSequence,
    n: int,
    domain_size: int,
    kind: InstanceKind | str = InstanceKind.RANDOM_DIRICHLET,
) -> tuple[HypothesisClass, Distribution]:
    """Deterministic (Q, p) for a seed."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if domain_size < 2:
        raise ValueError(f"domain_size must be >= 2, got {domain_size}")
    kind = InstanceKind(kind)
    rng = np.random.default_rng(seed)

    if kind is InstanceKind.ADVERSARIAL_CORNERS:
        rows = []
        for i in range(n):
            peak = np.zeros(domain_size)
            peak[i % domain_size] = 1.0
            noise = rng.dirichlet(np.ones(domain_size))
            rows.append(_normalized((1 - CORNER_SPREAD) * peak + CORNER_SPREAD * noise))
        Q = HypothesisClass.from_rows(rows)
        target = _normalized(rng.dirichlet(np.ones(domain_size)))
    else:
        Q = HypothesisClass.from_rows(
            [_normalized(row) for row in rng.dirichlet(np.ones(domain_size), size=n)]
        )
        target = _normalized(rng.dirichlet(np.ones(domain_size)))
        if kind is InstanceKind.NEAR_REALIZABLE:
            source = int(rng.integers(n))
            weight = rng.uniform(0.0, NEAR_REALIZABLE_RADIUS)
            target = _normalized((1 - weight) * Q.matrix[source] + weight * target)

    return Q, Distribution(target)


def brute_force_opt(p: Distribution, Q: HypothesisClass) -> float:
    """min_i TV(p, q_i) by direct evaluation."""
    return min(tv_distance(p, q) for q in Q)


def save_instance(path: str | Path, Q: HypothesisClass, p: Distribution) -> None:
    payload = {
        "domain_size": Q.domain_size,
        "hypotheses": Q.matrix.tolist(),
        "target": p.probs.tolist(),
    }
    Path(path).write_text(json.dumps(payload, indent=2), encoding="utf-8")
    logger.debug(f"Saved instance with n={Q.n}, |X|={Q.domain_size} to {path}")


def load_instance(path: str | Path) -> tuple[HypothesisClass, Distribution]:
    """Read an instance file; raises ValueError on a malformed one."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        size = int(payload["domain_size"])
        Q = HypothesisClass.from_rows(payload["hypotheses"])
        p = Distribution(payload["target"])
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise ValueError(f"Malformed instance file {path}: {e}") from e
    if Q.domain_size != size or p.domain_size != size:
        raise ValueError(
            f"Instance file {path} declares domain_size {size} but holds "
            f"{Q.domain_size}-element hypotheses and a {p.domain_size}-element target"
        )
    return Q, p
