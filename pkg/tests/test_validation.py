"""Tests for hyposelect.validation: config layers and user-supplied paths."""

import pytest

from hyposelect.validation import (
    PathValidationError,
    validate_file_path,
    validate_json_config,
)

# ---------------------------------------------------------------------------
# validate_json_config
# ---------------------------------------------------------------------------


def test_validate_empty_config_ok():
    assert validate_json_config({}) == {}


def test_validate_accepts_a_full_layer():
    layer = {
        "C0": 512,
        "C1": 64,
        "C2": 40,
        "eps": 0.1,
        "delta": 0.05,
        "restart_cap": 10,
        "trials": 3,
        "domain_size": 2,
        "record_wall_time": False,
        "solver": "mirror",
        "instance_kind": "adversarial-corners",
        "oracle_mode": "exact",
        "algorithms": ["basic", "refined"],
    }
    assert validate_json_config(dict(layer)) == layer


@pytest.mark.parametrize(
    "layer",
    [
        {"eps": 0},
        {"eps": 1},
        {"delta": 1.5},
        {"eps": True},
        {"eps": "small"},
        {"C2": 32},
        {"C0": 100},
        {"C1": 4},
        {"lp_tol": 0.0},
    ],
)
def test_validate_rejects_numeric_values(layer):
    with pytest.raises(ValueError):
        validate_json_config(layer)


def test_validate_cross_checks_constants():
    with pytest.raises(ValueError, match="4\\*C2"):
        validate_json_config({"C0": 200, "C2": 60})


@pytest.mark.parametrize("value", [0, -3, 1.5, True, "4"])
def test_validate_rejects_bad_counts(value):
    with pytest.raises(ValueError):
        validate_json_config({"trials": value})


def test_validate_rejects_tiny_domains():
    with pytest.raises(ValueError):
        validate_json_config({"domain_size": 1})


def test_validate_rejects_non_bool_flags():
    with pytest.raises(ValueError):
        validate_json_config({"record_wall_time": "yes"})


@pytest.mark.parametrize(
    "layer",
    [
        {"solver": "simplex"},
        {"instance_kind": "gaussian"},
        {"oracle_mode": "streaming"},
        {"algorithms": []},
        {"algorithms": "basic"},
        {"algorithms": ["basic", "scheffe"]},
    ],
)
def test_validate_rejects_unknown_choices(layer):
    with pytest.raises(ValueError):
        validate_json_config(layer)


def test_validate_resolves_results_dir(tmp_path):
    cfg = validate_json_config({"results_dir": str(tmp_path / "out")})
    assert cfg["results_dir"] == str((tmp_path / "out").resolve())


# ---------------------------------------------------------------------------
# validate_file_path
# ---------------------------------------------------------------------------


def test_path_traversal_rejected():
    with pytest.raises(PathValidationError):
        validate_file_path("../secrets.json")


def test_symlink_rejected(tmp_path):
    target = tmp_path / "real.json"
    target.write_text("{}")
    link = tmp_path / "link.json"
    link.symlink_to(target)
    with pytest.raises(PathValidationError):
        validate_file_path(link)
    assert validate_file_path(link, allow_symlinks=True) == target.resolve()


def test_must_exist(tmp_path):
    with pytest.raises(FileNotFoundError):
        validate_file_path(tmp_path / "missing.json", must_exist=True)


def test_returns_resolved_path(tmp_path):
    path = tmp_path / "config.json"
    assert validate_file_path(path) == path.resolve()
