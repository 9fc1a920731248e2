import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from alignscope.errors import DimensionMismatch, EmptyMatrix, ZeroVector
from alignscope.kernels import cosine, euclidean, mean_pool, metric_fn

from oracles import hp_cosine, hp_euclidean, hp_mean_pool

finite_vec = lambda n: arrays(
    np.float64, n, elements=st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
)


def test_cosine_identity_direction():
    assert cosine([1, 0], [1, 0]) == 1.0


def test_cosine_orthogonal():
    assert cosine([1, 0], [0, 1]) == 0.0


def test_cosine_hand_value():
    # 24/25, cross-checked with the high-precision oracle
    got = cosine([3, 4], [4, 3])
    assert got == pytest.approx(0.96, abs=0)
    assert got == pytest.approx(hp_cosine([3, 4], [4, 3]), abs=1e-15)


def test_cosine_zero_vector():
    with pytest.raises(ZeroVector):
        cosine([0, 0], [1, 0])
    with pytest.raises(ZeroVector):
        cosine([1, 0], [0, 0])


def test_cosine_clamped_to_legal_range(rng):
    for _ in range(200):
        x = rng.standard_normal(8)
        assert -1.0 <= cosine(x, x * rng.uniform(0.1, 10)) <= 1.0


def test_euclidean_self_distance(rng):
    v = rng.standard_normal(5)
    assert euclidean(v, v) == 0.0


def test_euclidean_hand_value():
    assert euclidean([0, 0], [3, 4]) == 5.0


def test_euclidean_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        euclidean([1], [1, 2])


def test_mean_pool_hand_average():
    np.testing.assert_array_equal(mean_pool([[1, 2], [3, 4]]), [2.0, 3.0])


def test_mean_pool_single_row():
    np.testing.assert_array_equal(mean_pool([[7, 7]]), [7.0, 7.0])


def test_mean_pool_zeros():
    np.testing.assert_array_equal(mean_pool(np.zeros((3, 2))), [0.0, 0.0])


def test_mean_pool_empty():
    with pytest.raises(EmptyMatrix):
        mean_pool(np.zeros((0, 3)))


def test_metric_fn_rejects_unknown():
    with pytest.raises(ValueError):
        metric_fn("manhattan")


@given(finite_vec(6))
def test_cosine_self_is_one(x):
    if np.linalg.norm(x) > 0:
        assert cosine(x, x) == 1.0


@given(finite_vec(5), st.integers(-20, 20))
def test_cosine_scaling_sign(x, k):
    # exact powers of two keep the scaled vector exactly parallel
    if np.linalg.norm(x) == 0 or k == 0:
        return
    alpha = 2.0 ** k
    assert cosine(x, alpha * x) == pytest.approx(1.0, abs=1e-12)
    assert cosine(x, -alpha * x) == pytest.approx(-1.0, abs=1e-12)


@given(finite_vec(4), finite_vec(4))
def test_symmetry(x, y):
    if np.linalg.norm(x) > 0 and np.linalg.norm(y) > 0:
        assert cosine(x, y) == cosine(y, x)
    assert euclidean(x, y) == euclidean(y, x)


@given(finite_vec(4), finite_vec(4), finite_vec(4))
def test_triangle_inequality(x, y, z):
    assert euclidean(x, z) <= euclidean(x, y) + euclidean(y, z) + 1e-9


# squared differences below ~1e-154 underflow to zero, so keep magnitudes
# either exactly 0 or comfortably above that when testing the iff direction
no_underflow_vec = lambda n: arrays(
    np.float64,
    n,
    elements=st.floats(-1e6, 1e6, allow_nan=False).map(
        lambda v: 0.0 if abs(v) < 1e-100 else v
    ),
)


@given(no_underflow_vec(4), no_underflow_vec(4))
def test_euclidean_zero_iff_equal(x, y):
    if euclidean(x, y) == 0.0:
        np.testing.assert_array_equal(x, y)
    if np.array_equal(x, y):
        assert euclidean(x, y) == 0.0


@settings(max_examples=50)
@given(
    arrays(np.float64, (3, 4), elements=st.floats(-1e3, 1e3, allow_nan=False)),
    arrays(np.float64, (3, 4), elements=st.floats(-1e3, 1e3, allow_nan=False)),
)
def test_mean_pool_linearity(a, b):
    np.testing.assert_allclose(
        mean_pool(a + b), mean_pool(a) + mean_pool(b), atol=1e-9
    )


def test_kernels_match_high_precision_oracle(rng):
    for _ in range(100):
        d = int(rng.integers(1, 33))
        x = rng.standard_normal(d)
        y = rng.standard_normal(d)
        assert cosine(x, y) == pytest.approx(hp_cosine(x, y), rel=1e-13)
        assert euclidean(x, y) == pytest.approx(hp_euclidean(x, y), rel=1e-13)
        np.testing.assert_allclose(
            mean_pool(np.stack([x, y])), hp_mean_pool([x, y]), rtol=1e-13
        )
