"""Input validation for config layers and user-supplied paths."""

from pathlib import Path
from typing import Any

from .logging_config import get_logger

logger = get_logger(__name__)

ALGORITHMS = ("yatracos", "basic", "refined", "select")
INSTANCE_KINDS = ("random-dirichlet", "adversarial-corners", "near-realizable")
ORACLE_MODES = ("sampled", "exact")
SOLVERS = ("highs", "mirror")


class PathValidationError(Exception):
    """Raised when a user-supplied path is unsafe."""


def validate_file_path(
    path: str | Path, must_exist: bool = False, allow_symlinks: bool = False
) -> Path:
    """
    Validate a file path given on the command line or in a config file.

    Args:
        path: Path to validate
        must_exist: Whether the path must exist
        allow_symlinks: Whether to allow symbolic links

    Returns:
        Validated, resolved Path object

    Raises:
        PathValidationError: If path is unsafe
        FileNotFoundError: If must_exist=True and path doesn't exist
    """
    text = str(path)
    if "../" in text or "..\\" in text:
        raise PathValidationError(f"Path traversal attempt detected: {path}")

    # Check the symlink before resolve(), which would follow it.
    pre_resolve = Path(path).expanduser()
    if not allow_symlinks and pre_resolve.is_symlink():
        raise PathValidationError(f"Symbolic links not allowed: {pre_resolve}")

    path_obj = pre_resolve.resolve()
    if must_exist and not path_obj.exists():
        raise FileNotFoundError(f"Path does not exist: {path_obj}")

    sensitive_dirs = ("etc", "boot", "sys", "proc", "dev")
    if len(path_obj.parts) > 1 and path_obj.parts[1] in sensitive_dirs:
        logger.warning(f"Writing or reading under a system directory: {path_obj}")

    return path_obj


def validate_json_config(config: dict[str, Any]) -> dict[str, Any]:
    """
    Validate one configuration layer.

    Only keys present in the layer are checked; cross-key constraints
    (C0 ≥ 4·C2) are checked when both keys appear.

    Raises:
        ValueError: If a value is out of range or of the wrong type
        PathValidationError: If a path is unsafe
    """
    if "results_dir" in config:
        config["results_dir"] = str(validate_file_path(config["results_dir"]))

    # (low, high, low_inclusive, high_inclusive)
    numeric_params: dict[str, tuple[float, float, bool, bool]] = {
        "C0": (4 * 32, 1e6, False, True),
        "C1": (8, 1e6, True, True),
        "C2": (32, 1e6, False, True),
        "eps": (0, 1, False, False),
        "delta": (0, 1, False, False),
        "support_tol": (0, 0.5, False, False),
        "lp_tol": (0, 0.5, False, False),
        "entropy_tol": (0, 0.5, False, False),
    }
    for param, (low, high, low_in, high_in) in numeric_params.items():
        if param in config:
            try:
                if isinstance(config[param], bool):
                    raise TypeError(f"{param} must be a number")
                val = float(config[param])
                above = val >= low if low_in else val > low
                below = val <= high if high_in else val < high
                if not (above and below):
                    raise ValueError(f"{param} out of range")
            except (ValueError, TypeError) as e:
                raise ValueError(f"Invalid {param}: {config[param]}") from e

    if "C0" in config and "C2" in config and float(config["C0"]) < 4 * float(config["C2"]):
        raise ValueError(f"C0 must be at least 4*C2, got C0={config['C0']} C2={config['C2']}")

    count_params = (
        "restart_cap",
        "mirror_max_iterations",
        "maxent_max_cuts",
        "trials",
        "n",
        "workers",
    )
    for param in count_params:
        if param in config:
            value = config[param]
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValueError(f"Invalid {param}: {value!r} (expected a positive integer)")

    if "domain_size" in config:
        value = config["domain_size"]
        if isinstance(value, bool) or not isinstance(value, int) or value < 2:
            raise ValueError(f"Invalid domain_size: {value!r} (expected an integer >= 2)")

    bool_params = ["record_wall_time"]
    for param in bool_params:
        if param in config and not isinstance(config[param], bool):
            raise ValueError(f"{param} must be boolean, got {type(config[param])}")

    choice_params = {
        "solver": SOLVERS,
        "instance_kind": INSTANCE_KINDS,
        "oracle_mode": ORACLE_MODES,
    }
    for param, choices in choice_params.items():
        if param in config and config[param] not in choices:
            raise ValueError(f"{param} must be one of {list(choices)}, got {config[param]}")

    if "algorithms" in config:
        algorithms = config["algorithms"]
        if not isinstance(algorithms, list) or not algorithms:
            raise ValueError(f"algorithms must be a non-empty list, got {algorithms!r}")
        unknown = [name for name in algorithms if name not in ALGORITHMS]
        if unknown:
            raise ValueError(f"Unknown algorithms {unknown}; expected some of {list(ALGORITHMS)}")

    return config
