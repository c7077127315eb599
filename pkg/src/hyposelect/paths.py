"""Where hyposelect keeps config, logs, run reports and bench CSVs.

Locations follow XDG and are resolved once at import, so tests point
``XDG_CONFIG_HOME``/``XDG_DATA_HOME`` elsewhere before importing the package.
"""

import os
from pathlib import Path

APP_NAME = "hyposelect"


def _xdg_home(env_var: str, fallback: str) -> Path:
    value = os.environ.get(env_var)
    return Path(value) if value else Path(fallback).expanduser()


CONFIG_DIR = _xdg_home("XDG_CONFIG_HOME", "~/.config") / APP_NAME
CONFIG_FILE = CONFIG_DIR / "config.json"

DATA_DIR = _xdg_home("XDG_DATA_HOME", "~/.local/share") / APP_NAME
LOG_DIR = DATA_DIR / "logs"
LOG_FILE = LOG_DIR / f"{APP_NAME}.log"
REPORT_DIR = DATA_DIR / "reports"
RESULTS_DIR = DATA_DIR / "results"

# Lowest-precedence file layer; read only, never created by us.
SYSTEM_CONFIG_FILE = Path("/etc") / APP_NAME / "config.json"


def ensure_user_directories() -> None:
    for directory in (CONFIG_DIR, LOG_DIR, REPORT_DIR, RESULTS_DIR):
        directory.mkdir(parents=True, exist_ok=True)


def default_bench_csv(results_dir: str | Path, seed: int) -> Path:
    """CSV path ``bench`` writes to when ``--out`` is not given."""
    return Path(results_dir) / f"bench_seed{seed}.csv"


def get_config_files() -> list[Path]:
    """Existing file layers, system before user.

    ``--config`` is not listed; ``load_app_config`` puts it on top.
    """
    return [path for path in (SYSTEM_CONFIG_FILE, CONFIG_FILE) if path.exists()]
