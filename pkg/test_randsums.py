import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from summa.errors import DegenerateInputError
from summa.randsums import (
    M1,
    RandomPlan,
    gaussian_moment,
    gaussian_norm_samples,
    gaussian_rademacher_ratio,
    haar_orthogonal,
    kahane_ratio,
    khintchine_ratio,
    rademacher_moment,
)
from summa.sequences import VectorFamily


def test_rademacher_moment_examples():
    assert rademacher_moment(VectorFamily.basis(6, "inf"), 2) == pytest.approx(1.0)
    assert rademacher_moment(VectorFamily.of([[1.0], [1.0]], p=1), 1) == pytest.approx(1.0)


def test_rademacher_moment_rejects_small_exponent():
    with pytest.raises(DegenerateInputError):
        rademacher_moment(VectorFamily.basis(2), 0.5)


def test_khintchine_examples():
    assert khintchine_ratio(np.array([1.0]), 3).ratio == pytest.approx(1.0)
    assert khintchine_ratio(np.array([1.0, 1.0]), 1).ratio == pytest.approx(1 / math.sqrt(2))
    assert khintchine_ratio(np.array([1.0, 1.0]), 2).ratio == pytest.approx(1.0)


def test_khintchine_zero_vector():
    with pytest.raises(DegenerateInputError):
        khintchine_ratio(np.zeros(3), 2)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(min_value=-5, max_value=5, allow_nan=False), min_size=1, max_size=8),
    st.floats(min_value=1, max_value=6),
)
def test_khintchine_one_sided_bounds(coeffs, p):
    a = np.array(coeffs)
    if not np.any(np.abs(a) > 1e-6):
        return
    report = khintchine_ratio(a, p)
    assert report.ok


def test_gaussian_moment_exact_paths():
    one = gaussian_moment(VectorFamily.basis(1, 1), RandomPlan(moment_p=2))
    assert one.kind == "exact"
    assert one.value == pytest.approx(1.0)

    hilbert = gaussian_moment(VectorFamily.of([[3.0, 0.0], [0.0, 4.0]], p=2), RandomPlan(moment_p=2))
    assert hilbert.kind == "exact"
    assert hilbert.value == pytest.approx(5.0)

    zero = gaussian_moment(VectorFamily.of(np.zeros((2, 3)), p=1), RandomPlan())
    assert zero.value == 0.0


def test_gaussian_moment_l1_basis():
    est = gaussian_moment(VectorFamily.basis(2, 1), RandomPlan(seed=42, samples=100_000, moment_p=1))
    assert est.kind == "montecarlo"
    assert abs(est.value - 2 * M1) <= 4 * est.stderr


def test_gaussian_samples_do_not_depend_on_workers():
    fam = VectorFamily.of(np.random.default_rng(0).standard_normal((4, 3)), p=3)
    plan = RandomPlan(seed=9, samples=1000)
    serial = gaussian_norm_samples(fam, plan, block_size=128, workers=1)
    threaded = gaussian_norm_samples(fam, plan, block_size=128, workers=4)
    assert serial.shape == (1000,)
    assert np.array_equal(serial, threaded)


def test_plan_is_reproducible():
    fam = VectorFamily.of(np.random.default_rng(1).standard_normal((3, 3)), p="inf")
    plan = RandomPlan(seed=123, samples=5000)
    assert gaussian_moment(fam, plan) == gaussian_moment(fam, plan)
    assert plan.derived(1) == plan.derived(1)
    assert plan.derived(1).seed != plan.derived(2).seed
    assert plan.derived(1).samples == plan.samples


def test_kahane_examples():
    single = VectorFamily.of([[1.0, -2.0, 0.5]], p=1)
    assert kahane_ratio(single, 1, 4).value == pytest.approx(1.0)
    assert kahane_ratio(VectorFamily.basis(2, 2), 2, 2).value == pytest.approx(1.0)


def test_kahane_gaussian_is_montecarlo():
    fam = VectorFamily.of(np.random.default_rng(4).standard_normal((3, 2)), p=1)
    est = kahane_ratio(fam, 1, 3, RandomPlan(samples=20_000), method="gaussian")
    assert est.kind == "montecarlo"
    # Lyapunov: higher moments dominate
    assert est.value + 4 * est.stderr >= 1.0


def test_kahane_zero_family():
    with pytest.raises(DegenerateInputError):
        kahane_ratio(VectorFamily.of(np.zeros((2, 2)), p=2), 1, 2)


def test_gaussian_rademacher_floor():
    rng = np.random.default_rng(7)
    for i, host in enumerate(["1", "2", "inf", "3"]):
        fam = VectorFamily.of(rng.standard_normal((4, 3)), p=host)
        report = gaussian_rademacher_ratio(fam, RandomPlan(seed=i, samples=20_000))
        assert report.floor_ok
        assert report.floor == pytest.approx(M1)


def test_haar_orthogonal():
    q = haar_orthogonal(5, RandomPlan(seed=3))
    assert np.allclose(q.T @ q, np.eye(5), atol=1e-10)

    plan = RandomPlan(seed=17)
    draws = np.array([haar_orthogonal(3, plan.derived(i))[0, 0] for i in range(10_000)])
    stderr = float(np.std(draws, ddof=1)) / math.sqrt(draws.size)
    assert abs(float(np.mean(draws))) <= 4 * stderr


def test_haar_rejects_empty_dimension():
    with pytest.raises(DegenerateInputError):
        haar_orthogonal(0, RandomPlan())


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=0, max_value=10_000),
    st.sampled_from(["1", "2", "3", "inf"]),
    st.floats(min_value=1, max_value=4),
)
def test_rademacher_moment_grows_with_partial_sums(seed, host, p):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((int(rng.integers(2, 7)), 3))
    moments = [rademacher_moment(VectorFamily.of(x[:k], p=host), p) for k in range(1, x.shape[0] + 1)]
    for a, b in zip(moments, moments[1:]):
        assert a <= b * (1 + 1e-12) + 1e-12


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=0, max_value=10_000),
    st.sampled_from(["1", "2", "3", "inf"]),
    st.floats(min_value=1, max_value=4),
)
def test_rademacher_moment_invariant_under_permutation_and_signs(seed, host, p):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((int(rng.integers(1, 7)), 3))
    shuffled = rng.permutation(x) * rng.choice([-1.0, 1.0], size=(x.shape[0], 1))
    a = rademacher_moment(VectorFamily.of(x, p=host), p)
    b = rademacher_moment(VectorFamily.of(shuffled, p=host), p)
    assert a == pytest.approx(b, rel=1e-10)
