"""Tests for hyposelect.distributions: value types, TV, entropy and KL."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyposelect.distributions import (
    DistanceVector,
    Distribution,
    DomainMismatchError,
    HypothesisClass,
    InvalidDistributionError,
    TestDirection,
    clean_simplex_vector,
    distance_vector,
    entropy,
    kl_divergence,
    l1_distance,
    opt_index,
    tv_distance,
)


def simplex_vectors(size: int):
    return st.lists(
        st.floats(min_value=0.01, max_value=1.0), min_size=size, max_size=size
    ).map(lambda xs: np.asarray(xs) / sum(xs))


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def test_distribution_rejects_bad_sum():
    with pytest.raises(InvalidDistributionError):
        Distribution([0.5, 0.4])


def test_distribution_rejects_negative_entry():
    with pytest.raises(InvalidDistributionError):
        Distribution([1.2, -0.2])


def test_distribution_rejects_nan():
    with pytest.raises(InvalidDistributionError):
        Distribution([float("nan"), 1.0])


def test_distribution_is_read_only():
    p = Distribution([0.25, 0.75])
    with pytest.raises(ValueError):
        p.probs[0] = 0.5


def test_distribution_copies_input():
    raw = np.array([0.5, 0.5])
    p = Distribution(raw)
    raw[0] = 0.9
    assert p.probs[0] == 0.5


def test_hypothesis_class_rejects_mixed_domains():
    with pytest.raises(DomainMismatchError):
        HypothesisClass([Distribution([1.0, 0.0]), Distribution([1.0, 0.0, 0.0])])


def test_hypothesis_class_rejects_empty():
    with pytest.raises(InvalidDistributionError):
        HypothesisClass([])


def test_hypothesis_class_shape(three_point_class):
    Q, _ = three_point_class
    assert Q.n == 3
    assert len(Q) == 3
    assert Q.domain_size == 3
    assert Q.matrix.shape == (3, 3)
    np.testing.assert_array_equal(Q[2].probs, [0.5, 0.5, 0.0])


def test_distance_vector_clips_rounding_noise():
    v = DistanceVector([1.0 + 1e-12, -1e-12])
    np.testing.assert_array_equal(v.values, [1.0, 0.0])


def test_distance_vector_rejects_out_of_range():
    with pytest.raises(InvalidDistributionError):
        DistanceVector([0.5, 1.5])


def test_test_direction_helpers():
    np.testing.assert_allclose(TestDirection.uniform(4).weights, [0.25] * 4)
    np.testing.assert_array_equal(TestDirection.vertex(3, 1).weights, [0.0, 1.0, 0.0])


def test_clean_simplex_vector_fixes_noise():
    cleaned = clean_simplex_vector([0.5 + 1e-8, 0.5, -1e-9])
    assert cleaned.min() >= 0
    assert math.isclose(cleaned.sum(), 1.0)


def test_clean_simplex_vector_refuses_far_points():
    with pytest.raises(InvalidDistributionError):
        clean_simplex_vector([0.6, 0.6])


# ---------------------------------------------------------------------------
# Total variation
# ---------------------------------------------------------------------------


def test_tv_distance_known_values():
    assert tv_distance(Distribution([1, 0]), Distribution([0, 1])) == 1.0
    assert math.isclose(tv_distance(Distribution([0.6, 0.4]), Distribution([0.5, 0.5])), 0.1)


def test_tv_distance_domain_mismatch():
    with pytest.raises(DomainMismatchError):
        tv_distance(Distribution([1.0]), Distribution([0.5, 0.5]))


def test_distance_vector_of_three_point_class(three_point_class):
    Q, p = three_point_class
    np.testing.assert_allclose(distance_vector(p, Q).values, [0.4, 0.6, 0.1])


def test_opt_index_breaks_ties_low():
    Q = HypothesisClass.from_rows([[1.0, 0.0], [0.0, 1.0]])
    index, value = opt_index(Distribution([0.5, 0.5]), Q)
    assert index == 0
    assert math.isclose(value, 0.5)


@settings(max_examples=50, deadline=None)
@given(simplex_vectors(5), simplex_vectors(5), simplex_vectors(5))
def test_tv_is_a_metric(a, b, c):
    pa, pb, pc = Distribution(a), Distribution(b), Distribution(c)
    assert tv_distance(pa, pa) == 0.0
    assert math.isclose(tv_distance(pa, pb), tv_distance(pb, pa), abs_tol=1e-12)
    assert tv_distance(pa, pc) <= tv_distance(pa, pb) + tv_distance(pb, pc) + 1e-12
    assert 0.0 <= tv_distance(pa, pb) <= 1.0


# ---------------------------------------------------------------------------
# Entropy and KL
# ---------------------------------------------------------------------------


def test_entropy_of_uniform_is_log_n():
    assert math.isclose(entropy(TestDirection.uniform(8)), math.log(8))


def test_entropy_of_vertex_is_zero():
    assert entropy(TestDirection.vertex(5, 2)) == 0.0


def test_kl_is_infinite_off_support():
    a = TestDirection([0.5, 0.5])
    b = TestDirection([1.0, 0.0])
    assert math.isinf(kl_divergence(a, b))


def test_kl_dimension_mismatch():
    with pytest.raises(DomainMismatchError):
        kl_divergence(TestDirection.uniform(2), TestDirection.uniform(3))


@settings(max_examples=50, deadline=None)
@given(simplex_vectors(4), simplex_vectors(4))
def test_pinsker_and_uniform_identity(a, b):
    ha, hb = TestDirection(a), TestDirection(b)
    assert kl_divergence(ha, hb) >= 0.5 * l1_distance(ha, hb) ** 2 - 1e-12
    identity = math.log(4) - kl_divergence(ha, TestDirection.uniform(4))
    assert math.isclose(entropy(ha), identity, abs_tol=1e-9)
