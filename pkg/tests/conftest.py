"""Shared pytest fixtures.

This module MUST set XDG_* environment variables BEFORE any hyposelect module
is imported, because hyposelect.paths resolves its directory constants at
import time from those env vars.
"""

import atexit
import os
import shutil
import tempfile

# Session-wide temp dir for the XDG paths. Must run before any
# `import hyposelect.*` in this process.
_SESSION_TMP = tempfile.mkdtemp(prefix="hyposelect-tests-")
os.environ["XDG_CONFIG_HOME"] = os.path.join(_SESSION_TMP, "config")
os.environ["XDG_DATA_HOME"] = os.path.join(_SESSION_TMP, "data")
for _path in (
    os.environ["XDG_CONFIG_HOME"],
    os.environ["XDG_DATA_HOME"],
):
    os.makedirs(_path, exist_ok=True)


@atexit.register
def _cleanup_session_tmp() -> None:
    shutil.rmtree(_SESSION_TMP, ignore_errors=True)


import numpy as np  # noqa: E402
import pytest  # noqa: E402

# ---------------------------------------------------------------------------
# Slow test opt-in
# ---------------------------------------------------------------------------
#
# Tests marked @pytest.mark.slow run the selectors at acceptance scale
# (many trials, sampled oracles). Skipped by default; run them with:
#
#     uv run pytest --run-slow


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="Run acceptance-scale selector tests.",
    )


def pytest_collection_modifyitems(config: pytest.Config, items: list[pytest.Item]) -> None:
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def clean_config_file():
    """Remove the hyposelect config file before and after the test."""
    from hyposelect.paths import CONFIG_FILE

    if CONFIG_FILE.exists():
        CONFIG_FILE.unlink()
    yield CONFIG_FILE
    if CONFIG_FILE.exists():
        CONFIG_FILE.unlink()


@pytest.fixture
def three_point_class():
    """The three-hypothesis instance over a three-element domain used in many tests.

    q_0 = (1, 0, 0), q_1 = (0, 1, 0), q_2 = (½, ½, 0); target p = (0.6, 0.4, 0).
    """
    from hyposelect.distributions import Distribution, HypothesisClass

    Q = HypothesisClass.from_rows([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.5, 0.5, 0.0]])
    return Q, Distribution([0.6, 0.4, 0.0])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
