"""Tests for hyposelect.instances: generators, opt and instance files."""

import json

import numpy as np
import pytest

from hyposelect.distributions import tv_distance
from hyposelect.instances import (
    CORNER_SPREAD,
    NEAR_REALIZABLE_RADIUS,
    InstanceKind,
    brute_force_opt,
    generate_instance,
    load_instance,
    save_instance,
)


def test_generation_is_deterministic():
    Q1, p1 = generate_instance(42, 4, 6)
    Q2, p2 = generate_instance(42, 4, 6)
    np.testing.assert_array_equal(Q1.matrix, Q2.matrix)
    np.testing.assert_array_equal(p1.probs, p2.probs)


def test_different_seeds_differ():
    Q1, _ = generate_instance(1, 4, 6)
    Q2, _ = generate_instance(2, 4, 6)
    assert not np.array_equal(Q1.matrix, Q2.matrix)


@pytest.mark.parametrize("kind", list(InstanceKind))
def test_every_kind_has_the_requested_shape(kind):
    Q, p = generate_instance(0, 5, 7, kind)
    assert Q.n == 5
    assert Q.domain_size == 7
    assert p.domain_size == 7


def test_kind_accepts_its_string_value():
    Q, _ = generate_instance(0, 3, 4, "adversarial-corners")
    assert Q.n == 3


def test_corner_hypotheses_peak():
    Q, _ = generate_instance(3, 4, 6, InstanceKind.ADVERSARIAL_CORNERS)
    for i, q in enumerate(Q):
        assert q.probs[i] >= 1 - CORNER_SPREAD


def test_near_realizable_targets_are_close():
    for seed in range(10):
        Q, p = generate_instance(seed, 4, 6, InstanceKind.NEAR_REALIZABLE)
        assert brute_force_opt(p, Q) <= NEAR_REALIZABLE_RADIUS + 1e-12


@pytest.mark.parametrize("n, size", [(0, 4), (3, 1)])
def test_generation_rejects_bad_sizes(n, size):
    with pytest.raises(ValueError):
        generate_instance(0, n, size)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        generate_instance(0, 3, 4, "gaussian")


def test_brute_force_opt(three_point_class):
    Q, p = three_point_class
    assert brute_force_opt(p, Q) == pytest.approx(0.1)
    assert brute_force_opt(p, Q) == min(tv_distance(p, q) for q in Q)


# ---------------------------------------------------------------------------
# Instance files
# ---------------------------------------------------------------------------


def test_instance_file_round_trip(tmp_path):
    Q, p = generate_instance(9, 3, 5)
    path = tmp_path / "instance.json"
    save_instance(path, Q, p)
    Q2, p2 = load_instance(path)
    np.testing.assert_array_equal(Q.matrix, Q2.matrix)
    np.testing.assert_array_equal(p.probs, p2.probs)


def test_load_rejects_missing_keys(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{}")
    with pytest.raises(ValueError, match="Malformed"):
        load_instance(path)


def test_load_rejects_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{ not json")
    with pytest.raises(ValueError):
        load_instance(path)


def test_load_rejects_size_mismatch(tmp_path):
    path = tmp_path / "bad.json"
    payload = {"domain_size": 3, "hypotheses": [[0.5, 0.5]], "target": [0.5, 0.5]}
    path.write_text(json.dumps(payload))
    with pytest.raises(ValueError, match="declares domain_size 3"):
        load_instance(path)


def test_load_rejects_unnormalized_rows(tmp_path):
    path = tmp_path / "bad.json"
    payload = {"domain_size": 2, "hypotheses": [[0.5, 0.6]], "target": [0.5, 0.5]}
    path.write_text(json.dumps(payload))
    with pytest.raises(ValueError):
        load_instance(path)
