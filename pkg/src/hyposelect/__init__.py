"""Agnostic hypothesis selection over finite domains.

The public surface re-exports the value types and the end-to-end selectors;
the game engines, oracles and harness live in their own modules.
"""

from .distributions import (
    DistanceVector,
    Distribution,
    HypothesisClass,
    TestDirection,
    distance_vector,
    entropy,
    kl_divergence,
    opt_index,
    tv_distance,
)
from .sampling import OracleMode, SampleOracle
from .selectors import (
    RefinedParams,
    basic_select,
    refined_primal_run,
    select,
    tiny_error_select,
    yatracos_select,
)

__version__ = "0.1.0"

__all__ = [
    "DistanceVector",
    "Distribution",
    "HypothesisClass",
    "OracleMode",
    "RefinedParams",
    "SampleOracle",
    "TestDirection",
    "basic_select",
    "distance_vector",
    "entropy",
    "kl_divergence",
    "opt_index",
    "refined_primal_run",
    "select",
    "tiny_error_select",
    "tv_distance",
    "yatracos_select",
]
