import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer

from summa.config import get_limits, resolve_cap
from summa.errors import NotHilbertError, NumericalCheckError
from summa.linalg import Exponent, NormEstimate, Operator, svd
from summa.randsums import RandomPlan, gaussian_moment, haar_orthogonal, rademacher_moment
from summa.sequences import VectorFamily, sign_sup_norm, strong_lp_norm, weak_lp_upper

logger = logging.getLogger(__name__)


class SearchBudget(BaseModel):
    """How hard a witness search looks before it reports its best ratio."""

    model_config = ConfigDict(frozen=True)

    restarts: int = Field(32, ge=0, description="Random candidate families")
    refine_steps: int = Field(200, ge=0, description="Perturbation steps on the best candidate")
    max_size: Optional[int] = Field(None, ge=1, description="Largest family size; default min(2*dim, max(dim, 12))")
    draws: int = Field(64, ge=0, description="Random contraction pairs (pre-Hilbert-Schmidt search)")
    search_samples: int = Field(4096, ge=1, description="Monte Carlo samples per candidate during the search")
    seed: int = Field(0, ge=0)

    def family_cap(self, dim: int) -> int:
        return self.max_size if self.max_size is not None else min(2 * dim, max(dim, 12))


class NuclearRep(BaseModel):
    """u = Σ_n y_n ⊗ x*_n (rows of `functionals` and `vectors`)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    functionals: np.ndarray = Field(..., description="N x n, x*_n = τ_n e_n")
    vectors: np.ndarray = Field(..., description="N x m, y_n = f_n")
    tau_l2: NormEstimate = Field(..., description="‖τ‖₂, the Hilbert-Schmidt norm")
    weak_l1: NormEstimate = Field(..., description="weak-ℓ1 norm of (x*_n)")
    max_vector_norm: NormEstimate = Field(..., description="max ‖y_n‖₂")
    reconstruction_error: float

    @field_serializer("functionals", "vectors")
    def _dump(self, v: np.ndarray) -> list:
        return v.tolist()

    @property
    def size(self) -> int:
        return self.functionals.shape[0]


class HsIdentities(BaseModel):
    """Squared Hilbert-Schmidt norm computed five ways."""

    basis_sum: float = Field(..., description="Σ‖u e_i‖² over the standard basis")
    rotated_basis_sum: float = Field(..., description="Σ‖u g_i‖² over a Haar-random orthonormal basis")
    singular_sum: float = Field(..., description="Σ a_n(u)²")
    tau_sum: float = Field(..., description="Σ‖x*_n‖² of the nuclear representation")
    double_basis_sum: float = Field(..., description="Σ⟨u g_i, h_j⟩² over Haar bases of both spaces")
    max_relative_gap: float
    consistent: bool


def _require_hilbert(u: Operator, what: str) -> None:
    if not (u.domain.is_hilbert and u.codomain.is_hilbert):
        raise NotHilbertError(f"{what} needs l_2 domain and codomain, got {u.label()}")


# =========================
# Hilbert-Schmidt
# =========================


def hs_norm(u: Operator) -> float:
    """Frobenius norm, cross-checked against the singular values."""
    _require_hilbert(u, "hs_norm")
    frob = float(np.linalg.norm(u.matrix, "fro"))
    sv = float(np.linalg.norm(svd(u).sigma))
    if abs(frob - sv) > 1e-10 * max(1.0, frob):
        raise NumericalCheckError(f"Frobenius {frob!r} and singular-value norm {sv!r} disagree")
    return frob


def approximation_numbers(u: Operator) -> np.ndarray:
    """a_n(u) = inf{‖u − v‖ : rank v < n}, which on ℓ_2 are the singular values."""
    _require_hilbert(u, "approximation_numbers")
    s = svd(u)
    a = u.matrix
    tol = 1e-10 * max(float(s.sigma[0]), 1.0)
    for k in range(s.sigma.size):
        trunc = (s.left[:, :k] * s.sigma[:k]) @ s.right_t[:k]
        err = float(np.linalg.norm(a - trunc, 2))
        if abs(err - float(s.sigma[k])) > tol:
            raise NumericalCheckError(f"rank-{k} truncation error {err!r} differs from sigma_{k + 1} = {float(s.sigma[k])!r}")
    return s.sigma.copy()


def hs_identities(u: Operator, plan: Optional[RandomPlan] = None) -> HsIdentities:
    _require_hilbert(u, "hs_identities")
    plan = plan or RandomPlan()
    a = u.matrix
    m, n = a.shape
    g = haar_orthogonal(n, plan)
    h = haar_orthogonal(m, plan.derived(1))
    values = {
        "basis_sum": float(np.sum(a * a)),
        "rotated_basis_sum": float(np.sum((a @ g) ** 2)),
        "singular_sum": float(np.sum(approximation_numbers(u) ** 2)),
        "tau_sum": float(np.sum(weak_star_nuclear_rep(u).functionals ** 2)),
        "double_basis_sum": float(np.sum((h.T @ a @ g) ** 2)),
    }
    ref = values["basis_sum"]
    gap = max(abs(v - ref) for v in values.values()) / max(ref, 1e-300) if ref > 0 else max(values.values())
    return HsIdentities(**values, max_relative_gap=gap, consistent=gap <= 1e-10)


# =========================
# Witness search
# =========================


def _candidates(u: Operator, budget: SearchBudget) -> list[np.ndarray]:
    n = u.domain.dim
    size_cap = budget.family_cap(n)
    rng = np.random.default_rng(budget.seed)
    cands = [np.eye(n)[:size_cap], svd(u).right_t[:size_cap], np.ones((1, n))]
    for _ in range(budget.restarts):
        size = int(rng.integers(1, size_cap + 1))
        cands.append(rng.standard_normal((size, n)))
    return cands


def witness_search(
    u: Operator,
    ratio: Callable[[np.ndarray], float],
    budget: SearchBudget,
    what: str,
) -> tuple[float, np.ndarray]:
    """Maximise `ratio` over families in u's domain (rows of an N×n array).

    Candidates are the standard basis, the right singular vectors, the
    all-ones vector and `budget.restarts` Gaussian families; the best one is
    then perturbed for `budget.refine_steps` steps, keeping improvements only.
    Every candidate is evaluated in a fixed order, so the result does not
    depend on the number of workers.
    """
    cands = _candidates(u, budget)
    workers = get_limits().workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(ratio, cands))
    else:
        scores = [ratio(c) for c in cands]
    k = int(np.argmax(scores))
    best, best_x = float(scores[k]), cands[k]
    logger.debug("%s seed search best=%.12g candidate=%s of %s", what, best, k, len(cands))

    rng = np.random.default_rng([budget.seed, 1])
    step = 0.3
    for _ in range(budget.refine_steps):
        scale = float(np.max(np.abs(best_x))) or 1.0
        trial = best_x + step * scale * rng.standard_normal(best_x.shape)
        r = ratio(trial)
        if r > best:
            best, best_x = r, trial
        step *= 0.98
    logger.debug("%s refined best=%.12g size=%s", what, best, best_x.shape[0])
    return best, best_x


def _ratio_fn(u: Operator, score: Callable[[VectorFamily], float], weak_p: Exponent, cap: Optional[int]) -> Callable[[np.ndarray], float]:
    def ratio(x: np.ndarray) -> float:
        fam = VectorFamily(space=u.domain, vectors=x)
        den = weak_lp_upper(fam, weak_p, cap=cap).value
        if den <= 0:
            return 0.0
        return score(fam.mapped(u)) / den

    return ratio


def pi_p_lower(u: Operator, p: "Exponent | float | str", budget: Optional[SearchBudget] = None, *, cap: Optional[int] = None) -> NormEstimate:
    """Best witness ratio ‖(u x_n)‖_{ℓ_p} / ‖(x_n)‖_{weak ℓ_p}, a sound lower bound for π_p(u).

    The denominator is the exact or certified-upper weak norm, so every
    reported ratio is attained.
    """
    p = Exponent.of(p)
    if u.is_zero:
        return NormEstimate.lower(0.0, meta="zero operator")
    budget = budget or SearchBudget()
    ratio = _ratio_fn(u, lambda images: strong_lp_norm(images, p), p, cap)
    value, x = witness_search(u, ratio, budget, what=f"pi_{p.label()}")
    return NormEstimate.lower(value, meta=f"witness family size={x.shape[0]}")


def gamma_norm_hilbert_domain(u: Operator, plan: Optional[RandomPlan] = None) -> NormEstimate:
    """(𝔼‖Σ_k γ_k u e_k‖²)^{1/2}: the γ-radonifying norm of u on ℓ_2^n."""
    if not u.domain.is_hilbert:
        raise NotHilbertError(f"gamma_norm_hilbert_domain needs an l_2 domain, got {u.label()}")
    plan = (plan or RandomPlan()).model_copy(update={"moment_p": 2.0})
    columns = VectorFamily(space=u.codomain, vectors=u.matrix.T)
    return gaussian_moment(columns, plan)


def gamma_summing_lower(
    u: Operator,
    budget: Optional[SearchBudget] = None,
    plan: Optional[RandomPlan] = None,
    *,
    cap: Optional[int] = None,
) -> NormEstimate:
    """Witness lower bound for the γ-summing norm.

    Candidates are scored with `budget.search_samples` common-random-number
    samples; the winner is re-estimated with an independent seed and the full
    sample count. Kind is lower when the Gaussian moment is exact (ℓ_2
    codomain), montecarlo otherwise.
    """
    budget = budget or SearchBudget()
    plan = (plan or RandomPlan()).model_copy(update={"moment_p": 2.0})
    if u.is_zero:
        return NormEstimate.lower(0.0, meta="zero operator")
    search_plan = plan.model_copy(update={"samples": min(plan.samples, budget.search_samples)})
    two = Exponent.of(2)
    ratio = _ratio_fn(u, lambda images: gaussian_moment(images, search_plan).value, two, cap)
    _, x = witness_search(u, ratio, budget, what="gamma")

    fam = VectorFamily(space=u.domain, vectors=x)
    den = weak_lp_upper(fam, two, cap=cap).value
    final = gaussian_moment(fam.mapped(u), plan.derived(1))
    meta = f"witness family size={x.shape[0]}"
    if final.kind == "exact":
        return NormEstimate.lower(final.value / den, meta=meta)
    return NormEstimate.montecarlo(final.value / den, final.stderr / den, meta=f"{meta} {final.meta}")


def r_summing_lower(u: Operator, budget: Optional[SearchBudget] = None, *, cap: Optional[int] = None) -> NormEstimate:
    """Witness lower bound for the Rademacher-summing norm (exact moments)."""
    budget = budget or SearchBudget()
    if u.is_zero:
        return NormEstimate.lower(0.0, meta="zero operator")
    cap = resolve_cap(cap)
    budget = budget.model_copy(update={"max_size": min(budget.family_cap(u.domain.dim), cap)})
    ratio = _ratio_fn(u, lambda images: rademacher_moment(images, 2, cap=cap), Exponent.of(2), cap)
    value, x = witness_search(u, ratio, budget, what="rademacher")
    return NormEstimate.lower(value, meta=f"witness family size={x.shape[0]}")


# =========================
# Weak*-1-nuclear representation
# =========================


def weak_star_nuclear_rep(u: Operator, *, cap: Optional[int] = None) -> NuclearRep:
    """u = Σ τ_n ⟨·, e_n⟩ f_n from the SVD, with x*_n = τ_n e_n and y_n = f_n.

    The weak-ℓ1 norm of (x*_n) is sup_{‖x‖₂≤1} Σ|τ_n⟨x, e_n⟩| = ‖τ‖₂; it is
    computed by sign enumeration when N is under the cap and certified from
    the closed form otherwise.
    """
    _require_hilbert(u, "weak_star_nuclear_rep")
    m, n = u.shape
    s = svd(u)
    top = float(s.sigma[0])
    keep = s.sigma > 1e-12 * top if top > 0 else np.zeros(s.sigma.size, dtype=bool)
    tau = s.sigma[keep]
    functionals = tau[:, None] * s.right_t[keep]
    vectors = s.left[:, keep].T
    tau_l2 = float(np.linalg.norm(tau))
    recon = float(np.linalg.norm(vectors.T @ functionals - u.matrix, "fro"))
    if recon > 1e-10 * max(1.0, tau_l2):
        raise NumericalCheckError(f"nuclear representation reconstruction error {recon:.3e}")

    cap = resolve_cap(cap)
    if tau.size == 0:
        weak = NormEstimate.exact(0.0, meta="empty representation")
    elif tau.size <= cap:
        weak = NormEstimate.exact(sign_sup_norm(VectorFamily(space=u.domain, vectors=functionals), cap=cap), meta="sign enumeration")
        if weak.value > tau_l2 * (1 + 1e-10) + 1e-12:
            raise NumericalCheckError(f"weak-l1 norm {weak.value!r} exceeds ||tau||_2 = {tau_l2!r}")
    else:
        weak = NormEstimate.exact(tau_l2, meta="orthogonal functionals, closed form")
    max_y = float(np.max(np.linalg.norm(vectors, axis=1))) if tau.size else 0.0
    logger.debug("nuclear rep %s terms=%s tau_l2=%.12g weak_l1=%.12g", u.label(), tau.size, tau_l2, weak.value)
    return NuclearRep(
        functionals=functionals,
        vectors=vectors,
        tau_l2=NormEstimate.exact(tau_l2, meta="singular values"),
        weak_l1=weak,
        max_vector_norm=NormEstimate.exact(max_y, meta="left singular vectors"),
        reconstruction_error=recon,
    )


def nuclear_bound_gap(rep: NuclearRep, x: np.ndarray) -> float:
    """‖x‖₂·‖τ‖₂ − Σ_n |⟨x*_n, x⟩|, nonnegative by Cauchy-Schwarz."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x)) * rep.tau_l2.value - float(np.sum(np.abs(rep.functionals @ x)))
