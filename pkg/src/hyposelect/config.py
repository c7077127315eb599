import json
from pathlib import Path
from typing import Any

from .logging_config import get_logger
from .paths import RESULTS_DIR, get_config_files

logger = get_logger(__name__)

# 1. CODE DEFAULTS
CODE_DEFAULTS: dict[str, Any] = {
    # Refined-algorithm constants. C2 must exceed 32 and C0 must be at
    # least 4*C2; C1 scales every slice's sample count.
    "C0": 256.0,
    "C1": 64.0,
    "C2": 33.0,
    "restart_cap": 100,  # Consecutive failed slices (or audits) before giving up
    # Margin solver: "highs" solves the minimax LP exactly, "mirror" runs
    # entropic mirror ascent with a certified gap.
    "solver": "highs",
    "support_tol": 1e-7,  # Duality-gap tolerance of support minimization
    "lp_tol": 1e-7,  # Gap tolerance of max-margin certificates
    "entropy_tol": 1e-4,  # Margin slack of standalone max-entropy queries
    "mirror_max_iterations": 100_000,
    "maxent_max_cuts": 500,  # Witness cuts per max-entropy solve
    # Experiment defaults (overridden per run by CLI flags)
    "eps": 0.2,
    "delta": 0.1,
    "trials": 10,
    "n": 4,
    "domain_size": 8,
    "instance_kind": "random-dirichlet",  # random-dirichlet, adversarial-corners, near-realizable
    "oracle_mode": "sampled",  # sampled, exact
    "algorithms": ["yatracos", "basic", "select"],
    "workers": 1,  # Trial processes; 1 runs in-process
    # Wall time makes CSVs differ between reruns; turn off for byte-identical output.
    "record_wall_time": True,
    "results_dir": str(RESULTS_DIR),
}


def load_app_config(extra_file: str | Path | None = None) -> dict[str, Any]:
    """Load the effective configuration by merging all available layers.

    Layers, lowest to highest precedence:
        1. ``CODE_DEFAULTS`` (built into the package)
        2. ``/etc/hyposelect/config.json`` (system, optional)
        3. ``~/.config/hyposelect/config.json`` (per-user, optional)
        4. ``extra_file`` (the ``--config`` flag, optional)

    A malformed XDG layer logs an error and is skipped. A malformed
    ``extra_file`` raises, since the user asked for it by name.
    """
    from .validation import validate_file_path, validate_json_config

    config = CODE_DEFAULTS.copy()
    layers = get_config_files()
    if not layers and extra_file is None:
        logger.debug("No config files found. Using code defaults.")
        return config

    for path in layers:
        logger.debug(f"Loading config from {path}...")
        try:
            with open(path) as f:
                layer = json.load(f)
            config.update(validate_json_config(layer))
        except (json.JSONDecodeError, ValueError, TypeError, OSError) as e:
            logger.error(f"Error loading config from {path}: {e}. Skipping this layer.")

    if extra_file is not None:
        path = validate_file_path(extra_file, must_exist=True)
        logger.debug(f"Loading config from {path}...")
        with open(path) as f:
            layer = json.load(f)
        if not isinstance(layer, dict):
            raise ValueError(f"Config file {path} must hold a JSON object")
        config.update(validate_json_config(layer))

    if float(config["C0"]) < 4 * float(config["C2"]):
        raise ValueError(
            f"Merged config has C0={config['C0']} below 4*C2={4 * float(config['C2'])}"
        )
    return config
