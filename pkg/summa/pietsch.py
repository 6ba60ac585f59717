import logging
import math
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator
from scipy import linalg as sla

from summa.errors import DegenerateInputError, EnumerationCapError, InvalidCertificateError, NoCertificateError, NumericalCheckError
from summa.linalg import NormEstimate, Operator, row_norms, svd
from summa.sequences import dual_extreme_points, sphere_net

logger = logging.getLogger(__name__)

# Regularisation added to G(μ) before every generalised eigen-solve.
GRAM_RIDGE = 1e-12
# Accepted domination slack, relative to c².
SLACK_TOL = 1e-8


# =========================
# Models
# =========================


class PietschCertificate(BaseModel):
    """Probability weights μ on dual-ball points x*_k and a constant c with

        uᵀu ⪯ c² Σ_k μ_k x*_k (x*_k)ᵀ.

    For a codomain other than ℓ_2 the domination is for u viewed into ℓ_2^m;
    `codomain_factor` is the constant of ‖·‖_q ≤ κ‖·‖_2 and the 2-summing
    bound is κ·c.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    points: np.ndarray = Field(..., description="K x n, one dual-ball point per row")
    weights: np.ndarray = Field(..., description="Probability vector of length K")
    constant: float = Field(..., ge=0)
    extreme_exact: bool = Field(False, description="points contain every extreme point of the dual ball")
    codomain_factor: float = Field(1.0, ge=1.0)

    @field_validator("points", "weights", mode="before")
    @classmethod
    def _as_array(cls, v: Any) -> np.ndarray:
        return np.array(v, dtype=float)

    @model_validator(mode="after")
    def _check(self) -> "PietschCertificate":
        if self.points.ndim != 2 or self.points.shape[0] == 0:
            raise ValueError("points must be a non-empty 2-d array")
        if self.weights.shape != (self.points.shape[0],):
            raise ValueError("weights must have one entry per point")
        if np.any(self.weights < -1e-15) or abs(float(np.sum(self.weights)) - 1.0) > 1e-9:
            raise ValueError("weights must be a probability vector")
        return self

    @field_serializer("points", "weights")
    def _dump(self, v: np.ndarray) -> list:
        return v.tolist()

    @property
    def bound(self) -> float:
        return self.codomain_factor * self.constant

    def gram(self) -> np.ndarray:
        return self.points.T @ (self.weights[:, None] * self.points)


class PietschFactorization(BaseModel):
    """u = û ∘ j through L_2(μ): j x = (⟨x, x*_k⟩)_k, û acts on L_2(μ) coordinates."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    j_matrix: np.ndarray = Field(..., description="K x n")
    u_hat: np.ndarray = Field(..., description="m x K")
    u_hat_norm: float = Field(..., description="‖û‖ from L_2(μ) into ℓ_2^m")
    residual: float = Field(..., description="‖û j − u‖ in Frobenius norm")

    @field_serializer("j_matrix", "u_hat")
    def _dump(self, v: np.ndarray) -> list:
        return v.tolist()


# =========================
# Dual sets
# =========================


def aligned_net(u: Operator) -> np.ndarray:
    """±right singular vectors of u, scaled into the dual unit ball of the domain."""
    v = svd(u).right_t
    norms = row_norms(v, u.domain.exp.dual())
    v = v / np.where(norms > 0, norms, 1.0)[:, None]
    return np.vstack([v, -v])


def default_dual_set(u: Operator, *, cap: Optional[int] = None, net_size: Optional[int] = None, seed: int = 0) -> np.ndarray:
    """Extreme points of the dual ball when finite, otherwise a sphere net plus the aligned net."""
    ext = dual_extreme_points(u.domain, cap=cap)
    if ext is not None:
        return ext
    net = sphere_net(u.domain.dim, net_size, seed=seed, p=u.domain.exp.dual())
    return np.vstack([aligned_net(u), net])


def covers_extreme_points(points: np.ndarray, u: Operator, *, cap: Optional[int] = None) -> bool:
    """True when every extreme point of the dual ball appears in `points` up to sign."""
    try:
        ext = dual_extreme_points(u.domain, cap=cap)
    except EnumerationCapError:
        return False
    if ext is None:
        return False
    for e in ext:
        dist = np.minimum(np.max(np.abs(points - e), axis=1), np.max(np.abs(points + e), axis=1))
        if float(np.min(dist)) > 1e-12:
            return False
    return True


# =========================
# Pietsch program
# =========================


def codomain_factor(u: Operator) -> float:
    """κ with ‖y‖_q ≤ κ‖y‖_2 on the codomain."""
    q = u.codomain.exp
    if q.is_inf or q.value >= 2:
        return 1.0
    return float(u.codomain.dim ** (1.0 / q.value - 0.5))


def _gram(points: np.ndarray, mu: np.ndarray) -> np.ndarray:
    return points.T @ (mu[:, None] * points)


def pencil_constant(m: np.ndarray, points: np.ndarray, mu: np.ndarray) -> float:
    """Smallest c² with M ⪯ c²(G(μ) + ridge·I)."""
    g = _gram(points, mu) + GRAM_RIDGE * np.eye(m.shape[0])
    return max(float(sla.eigh(m, g, eigvals_only=True)[-1]), 0.0)


def _min_eig_and_supergradient(t: float, m: np.ndarray, points: np.ndarray, mu: np.ndarray) -> tuple[float, np.ndarray]:
    w, v = np.linalg.eigh(t * _gram(points, mu) - m)
    lam = float(w[0])
    near = w <= lam + max(1e-12, 1e-6 * (abs(lam) + float(w[-1] - w[0])))
    proj = points @ v[:, near]
    return lam, t * np.sum(proj * proj, axis=1) / int(np.count_nonzero(near))


def maximize_min_eig(
    t: float,
    m: np.ndarray,
    points: np.ndarray,
    mu0: np.ndarray,
    *,
    max_iter: int = 500,
    improve_tol: float = 1e-10,
) -> tuple[np.ndarray, float]:
    """Exponentiated supergradient ascent of λ_min(t·G(μ) − M) over the simplex.

    Stops as soon as λ_min ≥ 0, when an accepted step improves λ_min by less
    than `improve_tol`, or when the step size collapses.
    """
    mu = mu0.copy()
    lam, g = _min_eig_and_supergradient(t, m, points, mu)
    eta = 1.0
    for _ in range(max_iter):
        if lam >= 0:
            break
        scale = float(np.max(np.abs(g))) or 1.0
        cand = mu * np.exp(eta * (g - float(np.max(g))) / scale)
        cand /= float(np.sum(cand))
        lam_c, g_c = _min_eig_and_supergradient(t, m, points, cand)
        if lam_c > lam:
            gain = lam_c - lam
            mu, lam, g = cand, lam_c, g_c
            eta = min(eta * 1.5, 64.0)
            if gain < improve_tol:
                break
        else:
            eta *= 0.5
            if eta < 1e-9:
                break
    return mu, lam


def domination_slack(u: Operator, cert: PietschCertificate) -> float:
    """λ_min(c² G(μ) − uᵀu); the certificate is valid when this is ≥ −1e−8·c²."""
    a = u.matrix
    return float(np.linalg.eigvalsh(cert.constant**2 * cert.gram() - a.T @ a)[0])


def verify_certificate(u: Operator, cert: PietschCertificate) -> None:
    if cert.points.shape[1] != u.domain.dim:
        raise InvalidCertificateError(f"certificate points have dimension {cert.points.shape[1]}, domain is {u.domain.label()}")
    dual_norms = row_norms(cert.points, u.domain.exp.dual())
    if float(np.max(dual_norms)) > 1 + 1e-9:
        raise InvalidCertificateError(f"certificate point outside the dual unit ball (norm {float(np.max(dual_norms)):.6g})")
    slack = domination_slack(u, cert)
    if slack < -SLACK_TOL * max(cert.constant**2, 1e-300) and not (u.is_zero and slack >= -1e-300):
        raise InvalidCertificateError(f"domination fails: min eigenvalue {slack:.3e}")


def pi_2_upper(
    u: Operator,
    points: Optional[np.ndarray] = None,
    *,
    rel_tol: float = 1e-6,
    max_bisections: int = 200,
    max_inner: int = 500,
    cap: Optional[int] = None,
    net_size: Optional[int] = None,
    seed: int = 0,
) -> tuple[NormEstimate, PietschCertificate]:
    """Certified upper bound for π₂(u) with a Pietsch certificate on the dual set `points`.

    Bisection on c², each step maximising λ_min(c²G(μ) − uᵀu) over the simplex
    from the best weights so far (uniform or energy weights at the start). The reported constant
    is the exact pencil value of the best weights found, so any returned
    certificate is valid whether or not `points` is normant.
    """
    if points is None:
        points = default_dual_set(u, cap=cap, net_size=net_size, seed=seed)
    points = np.array(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0 or points.shape[1] != u.domain.dim:
        raise DegenerateInputError(f"dual set must be a non-empty K x {u.domain.dim} array")
    if float(np.max(row_norms(points, u.domain.exp.dual()))) > 1 + 1e-9:
        raise DegenerateInputError("dual set leaves the dual unit ball")

    exact_set = covers_extreme_points(points, u, cap=cap)
    kappa = codomain_factor(u)
    k = points.shape[0]
    mu = np.full(k, 1.0 / k)

    if u.is_zero:
        cert = PietschCertificate(points=points, weights=mu, constant=0.0, extreme_exact=exact_set, codomain_factor=kappa)
        return NormEstimate.upper(0.0, meta="zero operator"), cert

    a = u.matrix
    m = a.T @ a
    g0 = _gram(points, mu)
    w, v = np.linalg.eigh(g0)
    null = v[:, w <= 1e-12 * max(float(w[-1]), 1e-300)]
    if null.shape[1] and float(np.linalg.norm(a @ null)) > 1e-10 * max(float(np.linalg.norm(a)), 1.0):
        raise NoCertificateError("the dual set does not span the row space of u")

    hi = pencil_constant(m, points, mu)
    best = mu
    # Energy weights μ_k ∝ ‖u x*_k‖² are optimal on aligned and coordinate sets.
    energy = np.sum((points @ a.T) ** 2, axis=1)
    if float(np.sum(energy)) > 0:
        weighted = energy / float(np.sum(energy))
        c2 = pencil_constant(m, points, weighted)
        if c2 < hi:
            hi, best = c2, weighted
    lo = float(np.linalg.eigvalsh(m)[-1]) / max(float(np.max(np.sum(points * points, axis=1))), 1e-300)
    steps = 0
    while steps < max_bisections and math.sqrt(hi) - math.sqrt(max(lo, 0.0)) > rel_tol * math.sqrt(hi):
        steps += 1
        t = 0.5 * (lo + hi)
        cand, lam = maximize_min_eig(t, m, points, best, max_iter=max_inner)
        c2 = pencil_constant(m, points, cand)
        if c2 < hi:
            hi, best = c2, cand
        if c2 > t:
            lo = t
        logger.debug("pietsch bisection step=%s t=%.12g lam=%.3e hi=%.12g", steps, t, lam, hi)

    constant = math.sqrt(hi)
    cert = PietschCertificate(points=points, weights=best, constant=constant, extreme_exact=exact_set, codomain_factor=kappa)
    logger.info("pi_2 upper %s K=%s value=%.10g steps=%s extreme_exact=%s", u.label(), k, kappa * constant, steps, exact_set)
    return NormEstimate.upper(kappa * constant, meta=f"pietsch K={k} extreme_exact={exact_set} bisections={steps}"), cert


def pietsch_factorize(u: Operator, cert: PietschCertificate) -> PietschFactorization:
    """Factor u through L_2(μ) as û∘j with ‖û‖ ≤ c (ℓ_2 codomain norm)."""
    verify_certificate(u, cert)
    a = u.matrix
    root = np.sqrt(np.clip(cert.weights, 0.0, None))
    jw = root[:, None] * cert.points
    # Minimum-norm V with V·jw = a; its norm is the pencil constant of μ.
    v_t, *_ = sla.lstsq(jw.T, a.T)
    v = v_t.T
    u_hat = v * root[None, :]
    residual = float(np.linalg.norm(u_hat @ cert.points - a))
    u_hat_norm = float(sla.svdvals(v)[0]) if v.size else 0.0
    scale = max(1.0, float(np.linalg.norm(a)))
    if residual > 1e-8 * scale:
        raise NumericalCheckError(f"factorisation residual {residual:.3e} exceeds 1e-8")
    if u_hat_norm > cert.constant * (1 + 1e-6) + 1e-12:
        logger.warning("factor norm %.12g exceeds certificate constant %.12g", u_hat_norm, cert.constant)
    return PietschFactorization(j_matrix=cert.points, u_hat=u_hat, u_hat_norm=u_hat_norm, residual=residual)
