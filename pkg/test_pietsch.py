import math

import numpy as np
import pytest

from summa.errors import DegenerateInputError, InvalidCertificateError, NoCertificateError
from summa.linalg import Operator, op_norm_upper
from summa.pietsch import (
    PietschCertificate,
    aligned_net,
    codomain_factor,
    default_dual_set,
    domination_slack,
    pi_2_upper,
    pietsch_factorize,
    verify_certificate,
)
from summa.sequences import sphere_net
from summa.summing import SearchBudget, hs_norm, pi_p_lower

SMALL = SearchBudget(restarts=8, refine_steps=40)


def _linf_identity(n: int) -> Operator:
    return Operator.from_matrix(np.eye(n), p="inf", q=2)


def test_identity_linf_to_l2_uniform_certificate():
    u = _linf_identity(2)
    points = np.vstack([np.eye(2), -np.eye(2)])
    est, cert = pi_2_upper(u, points)
    assert est.kind == "upper"
    assert est.value == pytest.approx(math.sqrt(2), abs=1e-9)
    assert np.allclose(cert.weights, 0.25, atol=1e-9)
    assert cert.extreme_exact
    assert "extreme_exact=True" in est.meta


def test_default_dual_set_uses_extreme_points():
    u = _linf_identity(3)
    points = default_dual_set(u)
    assert points.shape == (6, 3)
    est, cert = pi_2_upper(u)
    assert cert.extreme_exact
    assert est.value == pytest.approx(math.sqrt(3), abs=1e-6)


def test_zero_operator():
    u = Operator.from_matrix(np.zeros((2, 3)), p="inf", q=2)
    est, cert = pi_2_upper(u)
    assert est.value == 0.0
    assert cert.constant == 0.0
    fact = pietsch_factorize(u, cert)
    assert np.allclose(fact.u_hat, 0.0)
    assert fact.residual == 0.0


def test_hilbert_identity_on_a_sphere_net():
    u = Operator.from_matrix(np.eye(2))
    est, cert = pi_2_upper(u, sphere_net(2, 64, seed=0))
    assert not cert.extreme_exact
    assert math.sqrt(2) - 1e-9 <= est.value <= math.sqrt(2) * 1.05


def test_aligned_net_collapses_to_hilbert_schmidt():
    a = np.random.default_rng(21).standard_normal((3, 3))
    u = Operator.from_matrix(a)
    est, _ = pi_2_upper(u, aligned_net(u))
    assert est.value == pytest.approx(hs_norm(u), rel=1e-6)


def test_certificate_dominates():
    a = np.random.default_rng(5).standard_normal((3, 4))
    u = Operator.from_matrix(a, p=1, q=2)
    _, cert = pi_2_upper(u)
    assert domination_slack(u, cert) >= -1e-8 * cert.constant**2
    verify_certificate(u, cert)


def test_tampered_certificate_is_rejected():
    u = _linf_identity(2)
    _, cert = pi_2_upper(u)
    shrunk = cert.model_copy(update={"constant": cert.constant * 0.9})
    with pytest.raises(InvalidCertificateError):
        verify_certificate(u, shrunk)
    with pytest.raises(InvalidCertificateError):
        pietsch_factorize(u, shrunk)


def test_certificate_dimension_mismatch():
    _, cert = pi_2_upper(_linf_identity(2))
    with pytest.raises(InvalidCertificateError):
        verify_certificate(_linf_identity(3), cert)


def test_certificate_weights_must_be_a_distribution():
    with pytest.raises(ValueError):
        PietschCertificate(points=np.eye(2), weights=[0.7, 0.7], constant=1.0)


def test_certificate_json_is_reusable():
    u = Operator.from_matrix(np.random.default_rng(8).standard_normal((2, 3)), p="inf", q=2)
    _, cert = pi_2_upper(u)
    loaded = PietschCertificate.model_validate_json(cert.model_dump_json())
    verify_certificate(u, loaded)
    assert loaded.constant == cert.constant


def test_no_certificate_when_dual_set_misses_the_row_space():
    u = Operator.from_matrix(np.eye(2))
    with pytest.raises(NoCertificateError):
        pi_2_upper(u, np.array([[1.0, 0.0], [-1.0, 0.0]]))


def test_dual_set_must_lie_in_the_dual_ball():
    u = Operator.from_matrix(np.eye(2))
    with pytest.raises(DegenerateInputError):
        pi_2_upper(u, np.array([[2.0, 0.0], [0.0, 1.0]]))


def test_factorization_of_the_identity():
    u = _linf_identity(2)
    _, cert = pi_2_upper(u, np.vstack([np.eye(2), -np.eye(2)]))
    fact = pietsch_factorize(u, cert)
    assert fact.residual <= 1e-10
    assert fact.u_hat_norm == pytest.approx(math.sqrt(2), abs=1e-9)
    assert np.allclose(fact.u_hat @ fact.j_matrix, u.matrix)


def test_factorization_of_a_random_operator():
    a = np.random.default_rng(13).standard_normal((3, 3))
    u = Operator.from_matrix(a)
    _, cert = pi_2_upper(u, net_size=256)
    fact = pietsch_factorize(u, cert)
    assert fact.residual <= 1e-8
    assert fact.u_hat_norm <= cert.constant * (1 + 1e-6) + 1e-12


def test_codomain_factor():
    assert codomain_factor(Operator.from_matrix(np.eye(3), p=2, q=1)) == pytest.approx(math.sqrt(3))
    assert codomain_factor(Operator.from_matrix(np.eye(3), p=2, q="inf")) == 1.0
    est, cert = pi_2_upper(Operator.from_matrix(np.eye(3), p="inf", q=1))
    assert est.value == pytest.approx(cert.bound)
    assert cert.codomain_factor == pytest.approx(math.sqrt(3))


def test_two_summing_bracket_and_pinch():
    for n in (1, 2, 4):
        u = _linf_identity(n)
        lower = pi_p_lower(u, 2, SMALL)
        upper, _ = pi_2_upper(u)
        assert lower.value <= upper.value + 1e-8
        assert lower.value == pytest.approx(math.sqrt(n), abs=1e-4)
        assert upper.value == pytest.approx(math.sqrt(n), abs=1e-4)


def test_ideal_property():
    rng = np.random.default_rng(31)
    u = Operator.from_matrix(rng.standard_normal((3, 3)), p="inf", q=2)
    upper, cert = pi_2_upper(u)
    assert cert.extreme_exact
    for _ in range(5):
        v = rng.standard_normal((3, 3))
        v /= op_norm_upper(Operator.from_matrix(v, p="inf", q="inf")).value
        w = rng.standard_normal((3, 3))
        w /= op_norm_upper(Operator.from_matrix(w)).value
        composed = Operator.from_matrix(w @ u.matrix @ v, p="inf", q=2)
        assert pi_p_lower(composed, 2, SMALL).value <= upper.value + 1e-8


def test_monotonicity_in_p():
    u = Operator.from_matrix(np.random.default_rng(2).standard_normal((3, 3)), p="inf", q=2)
    upper, _ = pi_2_upper(u)
    for q in (2, 3, 6):
        assert pi_p_lower(u, q, SMALL).value <= upper.value + 1e-8
