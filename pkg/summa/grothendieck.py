import logging
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, Field

from summa.config import get_limits
from summa.errors import DegenerateInputError, EnumerationCapError
from summa.linalg import NormEstimate, Operator, max_over_signs, op_norm, quotient
from summa.summing import SearchBudget, pi_p_lower

logger = logging.getLogger(__name__)

# Upper sanity margin for Grothendieck-type ratios. It reflects the known size
# of the real Grothendieck constant (about 1.78), not a derived bound.
KG_SANITY = 1.8


class GrothendieckReport(BaseModel):
    inf_to_1: NormEstimate = Field(..., description="max over sign vectors of s^T A t, exact")
    hilbert_sup: NormEstimate = Field(..., description="sup over unit vectors of Σ a_ij <x_i, y_j>, lower")
    ratio: NormEstimate = Field(..., description="hilbert_sup / inf_to_1, a lower bound on K_G")
    sanity_bound: float = Field(KG_SANITY, description="sanity bound, not a derived constant")
    within_sanity: bool


class LittleGrothendieckReport(BaseModel):
    pi1_lower: NormEstimate
    op_norm: NormEstimate
    ratio: Optional[NormEstimate] = Field(None, description="pi1_lower / op_norm; None for the zero operator")
    sanity_bound: float = KG_SANITY
    passed: bool


def _as_matrix(a: Any) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or 0 in a.shape:
        raise DegenerateInputError(f"expected a non-empty matrix, got shape {a.shape}")
    return a


def norm_inf_to_1(a: Any, *, cap: Optional[int] = None) -> float:
    """max_{s,t ∈ {±1}} s^T A t, enumerating only the smaller side.

    For fixed t the best s is sign(A t), so the value is max_t ‖A t‖₁.
    """
    a = _as_matrix(a)
    m, n = a.shape
    cap = get_limits().bilinear_cap if cap is None else cap
    if m + n > cap:
        raise EnumerationCapError(m + n, cap, what="norm_inf_to_1")
    if n <= m:
        value, _ = max_over_signs(a, 1, cap=cap)
    else:
        value, _ = max_over_signs(a.T, 1, cap=cap)
    return value


def _normalize_rows(z: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(z, axis=1)
    out = fallback.copy()
    ok = norms > 1e-300
    out[ok] = z[ok] / norms[ok, None]
    return out


def _alternate(a: np.ndarray, y: np.ndarray, iterations: int, tol: float) -> tuple[float, np.ndarray, np.ndarray]:
    x = _normalize_rows(a @ y, np.eye(a.shape[0], y.shape[1]))
    value = float(np.sum(x * (a @ y)))
    for _ in range(iterations):
        y = _normalize_rows(a.T @ x, y)
        x = _normalize_rows(a @ y, x)
        new = float(np.sum(x * (a @ y)))
        if new - value <= tol * max(abs(new), 1.0):
            value = max(value, new)
            break
        value = new
    return value, x, y


def bilinear_hilbert_sup(
    a: Any,
    budget: Optional[SearchBudget] = None,
    *,
    iterations: int = 2000,
    tol: float = 1e-14,
    cap: Optional[int] = None,
) -> NormEstimate:
    """sup Σ a_ij ⟨x_i, y_j⟩ over unit vectors in R^{m+n}, by alternating block ascent.

    Each half-step sets one side to its exact best response, so the objective
    never decreases. Starts are the sign-optimal rank-one point (when the
    enumeration fits) and `budget.restarts` Gaussian points. Every value is
    attained, hence a lower bound.
    """
    a = _as_matrix(a)
    budget = budget or SearchBudget()
    if not np.any(a):
        return NormEstimate.lower(0.0, meta="zero matrix")
    m, n = a.shape
    d = m + n
    rng = np.random.default_rng(budget.seed)
    starts = []
    cap = get_limits().bilinear_cap if cap is None else cap
    if n <= cap:
        _, t = max_over_signs(a, 1, cap=cap)
        y0 = np.zeros((n, d))
        y0[:, 0] = t
        starts.append(y0)
    for _ in range(max(budget.restarts, 1)):
        starts.append(_normalize_rows(rng.standard_normal((n, d)), np.eye(n, d)))
    best = 0.0
    for y in starts:
        value, _, _ = _alternate(a, y, iterations, tol)
        best = max(best, value)
    logger.debug("bilinear sup %sx%s starts=%s value=%.12g", m, n, len(starts), best)
    return NormEstimate.lower(best, meta=f"alternating ascent rank={d} starts={len(starts)}")


def grothendieck_ratio(a: Any, budget: Optional[SearchBudget] = None, *, cap: Optional[int] = None) -> GrothendieckReport:
    """Hilbertian sup over the ∞→1 norm, an empirical lower bound on K_G."""
    a = _as_matrix(a)
    den = norm_inf_to_1(a, cap=cap)
    if den <= 0:
        raise DegenerateInputError("grothendieck_ratio of a zero matrix")
    sup = bilinear_hilbert_sup(a, budget, cap=cap)
    exact = NormEstimate.exact(den, meta="sign enumeration")
    ratio = quotient(sup, exact, meta="hilbert sup over inf->1 norm")
    return GrothendieckReport(
        inf_to_1=exact,
        hilbert_sup=sup,
        ratio=ratio,
        within_sanity=1.0 - 1e-8 <= ratio.value <= KG_SANITY,
    )


def little_grothendieck_check(u: Operator, budget: Optional[SearchBudget] = None, *, cap: Optional[int] = None) -> LittleGrothendieckReport:
    """π₁-lower against the exact ℓ_1 → ℓ_2 norm (max column 2-norm)."""
    if u.domain.exp.value != 1 or not u.codomain.is_hilbert:
        raise DegenerateInputError(f"little_grothendieck_check needs l_1 -> l_2, got {u.label()}")
    norm = op_norm(u, cap=cap)
    if u.is_zero:
        return LittleGrothendieckReport(pi1_lower=NormEstimate.lower(0.0, meta="zero operator"), op_norm=norm, passed=True)
    lower = pi_p_lower(u, 1, budget, cap=cap)
    ratio = quotient(lower, norm, meta="pi_1 lower over operator norm")
    return LittleGrothendieckReport(pi1_lower=lower, op_norm=norm, ratio=ratio, passed=ratio.value <= KG_SANITY)
