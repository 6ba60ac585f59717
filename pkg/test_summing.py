import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from summa import config
from summa.errors import NotHilbertError
from summa.linalg import Operator
from summa.pietsch import pi_2_upper
from summa.randsums import M1, RandomPlan
from summa.summing import (
    SearchBudget,
    approximation_numbers,
    gamma_norm_hilbert_domain,
    gamma_summing_lower,
    hs_identities,
    hs_norm,
    nuclear_bound_gap,
    pi_p_lower,
    r_summing_lower,
    weak_star_nuclear_rep,
)

SMALL = SearchBudget(restarts=8, refine_steps=40, search_samples=2000)


def test_hs_norm_examples():
    assert hs_norm(Operator.from_matrix(np.eye(4))) == pytest.approx(2.0)
    assert hs_norm(Operator.from_matrix([[1, 2], [3, 4]])) == pytest.approx(math.sqrt(30))
    tau = np.array([0.5, 2.0, 1.0])
    assert hs_norm(Operator.from_matrix(np.diag(tau))) == pytest.approx(float(np.linalg.norm(tau)))


def test_hs_norm_needs_hilbert_spaces():
    with pytest.raises(NotHilbertError):
        hs_norm(Operator.from_matrix(np.eye(2), p=1, q=2))


def test_approximation_numbers_are_singular_values():
    a = np.random.default_rng(4).standard_normal((4, 3))
    assert np.allclose(approximation_numbers(Operator.from_matrix(a)), np.linalg.svd(a, compute_uv=False))


def test_hs_identities_agree():
    a = np.random.default_rng(6).standard_normal((3, 5))
    report = hs_identities(Operator.from_matrix(a), RandomPlan(seed=1))
    assert report.consistent
    assert report.max_relative_gap <= 1e-10
    assert report.basis_sum == pytest.approx(float(np.sum(a * a)))


def test_pi_p_lower_examples():
    assert pi_p_lower(Operator.from_matrix(np.eye(2)), 2, SMALL).value >= math.sqrt(2) - 1e-6
    assert pi_p_lower(Operator.from_matrix(np.eye(2), p="inf", q=2), 2, SMALL).value >= math.sqrt(2) - 1e-6
    zero = pi_p_lower(Operator.from_matrix(np.zeros((2, 2))), 2, SMALL)
    assert zero.kind == "lower"
    assert zero.value == 0.0


def test_pi_p_lower_below_hilbert_schmidt():
    u = Operator.from_matrix(np.random.default_rng(9).standard_normal((3, 3)))
    est = pi_p_lower(u, 2, SMALL)
    assert est.kind == "lower"
    assert est.value <= hs_norm(u) * (1 + 1e-9)


def test_witness_search_does_not_depend_on_workers(monkeypatch):
    u = Operator.from_matrix(np.random.default_rng(3).standard_normal((3, 3)), p=1, q=2)
    monkeypatch.setenv("SUMMA_WORKERS", "1")
    config.get_limits.cache_clear()
    serial = pi_p_lower(u, 1, SMALL)
    monkeypatch.setenv("SUMMA_WORKERS", "4")
    config.get_limits.cache_clear()
    try:
        threaded = pi_p_lower(u, 1, SMALL)
    finally:
        config.get_limits.cache_clear()
    assert serial == threaded


def test_gamma_norm_hilbert_domain_examples():
    exact = gamma_norm_hilbert_domain(Operator.from_matrix(np.eye(2)))
    assert exact.kind == "exact"
    assert exact.value == pytest.approx(math.sqrt(2))

    assert gamma_norm_hilbert_domain(Operator.from_matrix(np.zeros((2, 2)))).value == 0.0

    est = gamma_norm_hilbert_domain(Operator.from_matrix(np.eye(2), p=2, q=1), RandomPlan(seed=42, samples=100_000))
    assert est.kind == "montecarlo"
    # E(|g1| + |g2|)^2 = 2 + 2 m_1^2
    assert abs(est.value - math.sqrt(2 + 2 * M1**2)) <= 4 * est.stderr


def test_gamma_norm_equals_hs_on_hilbert_spaces():
    u = Operator.from_matrix(np.random.default_rng(12).standard_normal((4, 3)))
    assert gamma_norm_hilbert_domain(u).value == pytest.approx(hs_norm(u))


def test_gamma_norm_needs_hilbert_domain():
    with pytest.raises(NotHilbertError):
        gamma_norm_hilbert_domain(Operator.from_matrix(np.eye(2), p=1, q=2))


def test_gamma_summing_lower_examples():
    ident = gamma_summing_lower(Operator.from_matrix(np.eye(2)), SMALL)
    assert ident.kind == "lower"
    assert ident.value >= math.sqrt(2) - 1e-9

    diag = gamma_summing_lower(Operator.from_matrix(np.diag([1.0, 0.5])), SMALL)
    assert diag.value >= math.sqrt(5) / 2 - 1e-9

    assert gamma_summing_lower(Operator.from_matrix(np.zeros((2, 2))), SMALL).value == 0.0


def test_gamma_summing_lower_is_montecarlo_off_hilbert():
    u = Operator.from_matrix(np.eye(2), p=2, q=1)
    est = gamma_summing_lower(u, SMALL, RandomPlan(samples=20_000))
    assert est.kind == "montecarlo"
    assert est.stderr > 0


def test_gamma_summing_below_two_summing_on_hilbert_domain():
    u = Operator.from_matrix(np.random.default_rng(14).standard_normal((3, 3)))
    gamma = gamma_summing_lower(u, SMALL)
    upper, _ = pi_2_upper(u)
    assert gamma.value <= 1.1 * upper.value


def test_r_summing_lower_examples():
    assert r_summing_lower(Operator.from_matrix(np.eye(2)), SMALL).value >= math.sqrt(2) - 1e-6
    assert r_summing_lower(Operator.from_matrix(np.zeros((2, 2))), SMALL).value == 0.0
    # c_0 basis witness
    assert r_summing_lower(Operator.from_matrix(np.eye(4), p=2, q="inf"), SMALL).value >= 1 - 1e-9


def test_nuclear_rep_examples():
    rep = weak_star_nuclear_rep(Operator.from_matrix(np.diag([0.6, 0.8])))
    assert rep.size == 2
    assert rep.tau_l2.kind == "exact"
    assert rep.weak_l1.kind == "exact"
    assert rep.weak_l1.value == pytest.approx(1.0)
    assert rep.tau_l2.value == pytest.approx(1.0)
    assert rep.max_vector_norm.value == pytest.approx(1.0)

    zero = weak_star_nuclear_rep(Operator.from_matrix(np.zeros((2, 3))))
    assert zero.size == 0
    assert zero.weak_l1.value == 0.0

    rank_one = weak_star_nuclear_rep(Operator.from_matrix([[1.0, 0.0], [0.0, 0.0]]))
    assert rank_one.size == 1
    assert rank_one.weak_l1.value == pytest.approx(1.0)


def test_nuclear_rep_closed_form_above_the_cap():
    a = np.random.default_rng(15).standard_normal((5, 5))
    rep = weak_star_nuclear_rep(Operator.from_matrix(a), cap=3)
    assert rep.weak_l1.meta.startswith("orthogonal functionals")
    assert rep.weak_l1.value == pytest.approx(hs_norm(Operator.from_matrix(a)))


def test_nuclear_rep_needs_hilbert_spaces():
    with pytest.raises(NotHilbertError):
        weak_star_nuclear_rep(Operator.from_matrix(np.eye(2), p=2, q="inf"))


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_nuclear_bound_holds(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 5)), int(rng.integers(1, 5))
    rep = weak_star_nuclear_rep(Operator.from_matrix(rng.standard_normal((m, n))))
    assert rep.reconstruction_error <= 1e-10 * max(1.0, rep.tau_l2.value)
    assert nuclear_bound_gap(rep, rng.standard_normal(n)) >= -1e-10


def test_pi_1_on_a_host_above_the_sign_cap():
    # l_1^24 has more dual sign vectors than the enumeration cap allows
    est = pi_p_lower(Operator.from_matrix(np.eye(24), p=1, q=2), 1, SearchBudget(restarts=0, refine_steps=0))
    assert est.kind == "lower"
    assert 1 - 1e-9 <= est.value <= 1.8
