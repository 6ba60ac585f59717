import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from summa.errors import DegenerateInputError, EnumerationCapError
from summa.grothendieck import (
    KG_SANITY,
    bilinear_hilbert_sup,
    grothendieck_ratio,
    little_grothendieck_check,
    norm_inf_to_1,
)
from summa.linalg import Operator
from summa.summing import SearchBudget

HAD2 = [[1.0, 1.0], [1.0, -1.0]]
SMALL = SearchBudget(restarts=8, refine_steps=40)


def test_norm_inf_to_1_examples():
    assert norm_inf_to_1([[1.0]]) == 1.0
    assert norm_inf_to_1(HAD2) == pytest.approx(2.0)
    assert norm_inf_to_1(np.eye(2)) == pytest.approx(2.0)


def test_norm_inf_to_1_is_symmetric():
    a = np.random.default_rng(0).standard_normal((3, 7))
    assert norm_inf_to_1(a) == pytest.approx(norm_inf_to_1(a.T))


def test_norm_inf_to_1_cap():
    with pytest.raises(EnumerationCapError):
        norm_inf_to_1(np.ones((12, 12)))
    assert norm_inf_to_1(np.ones((12, 12)), cap=24) == pytest.approx(144.0)


def test_norm_inf_to_1_rejects_empty():
    with pytest.raises(DegenerateInputError):
        norm_inf_to_1(np.zeros((0, 2)))


def test_bilinear_hilbert_sup_examples():
    one = bilinear_hilbert_sup([[1.0]], SMALL)
    assert one.kind == "lower"
    assert one.value == pytest.approx(1.0)
    assert bilinear_hilbert_sup(HAD2, SMALL).value == pytest.approx(2 * math.sqrt(2), abs=1e-6)
    assert bilinear_hilbert_sup(np.zeros((2, 3)), SMALL).value == 0.0


def test_grothendieck_ratio_hadamard():
    report = grothendieck_ratio(HAD2, SMALL)
    assert report.inf_to_1.kind == "exact"
    assert report.ratio.kind == "lower"
    assert report.ratio.value == pytest.approx(math.sqrt(2), abs=1e-5)
    assert report.within_sanity
    assert report.sanity_bound == KG_SANITY


def test_grothendieck_ratio_of_zero_matrix():
    with pytest.raises(DegenerateInputError):
        grothendieck_ratio(np.zeros((2, 2)))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_grothendieck_ratio_bounds(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 6)), int(rng.integers(1, 6))
    a = rng.choice([-1.0, 1.0], size=(m, n))
    report = grothendieck_ratio(a, SearchBudget(restarts=4))
    # the sign-optimal start attains the inf->1 norm
    assert report.ratio.value >= 1 - 1e-8
    assert report.ratio.value <= KG_SANITY


def test_little_grothendieck():
    rng = np.random.default_rng(1)
    for _ in range(3):
        report = little_grothendieck_check(Operator.from_matrix(rng.standard_normal((4, 4)), p=1, q=2), SMALL)
        assert report.passed
        assert report.op_norm.kind == "exact"
        assert report.ratio.kind == "lower"
        assert report.ratio.value <= KG_SANITY


def test_little_grothendieck_zero_and_wrong_spaces():
    zero = little_grothendieck_check(Operator.from_matrix(np.zeros((2, 2)), p=1, q=2))
    assert zero.passed
    assert zero.ratio is None
    with pytest.raises(DegenerateInputError):
        little_grothendieck_check(Operator.from_matrix(np.eye(2)))


def _shuffle(a, rng):
    rows = rng.permutation(a.shape[0])
    cols = rng.permutation(a.shape[1])
    flips_r = rng.choice([-1.0, 1.0], size=(a.shape[0], 1))
    flips_c = rng.choice([-1.0, 1.0], size=(1, a.shape[1]))
    return a[rows][:, cols] * flips_r * flips_c


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_inf_to_1_norm_invariant_under_permutation_and_signs(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((int(rng.integers(1, 6)), int(rng.integers(1, 6))))
    assert norm_inf_to_1(_shuffle(a, rng)) == pytest.approx(norm_inf_to_1(a), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_hilbert_sup_invariant_under_permutation_and_signs(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((int(rng.integers(1, 5)), int(rng.integers(1, 5))))
    first = bilinear_hilbert_sup(a, SMALL).value
    second = bilinear_hilbert_sup(_shuffle(a, rng), SMALL).value
    assert second == pytest.approx(first, rel=1e-5)
