import logging
import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, model_validator

from summa.config import resolve_cap
from summa.errors import DegenerateInputError, NotHilbertError, UnsupportedRegimeError
from summa.grothendieck import KG_SANITY
from summa.linalg import Exponent, Kind, NormEstimate, Operator, SpaceSpec, op_norm, op_norm_upper, quotient, svd
from summa.pietsch import pi_2_upper
from summa.randsums import RandomPlan, gaussian_moment, rademacher_moment
from summa.sequences import VectorFamily, strong_lp_norm
from summa.summing import SearchBudget, gamma_norm_hilbert_domain, gamma_summing_lower, hs_norm, pi_p_lower, witness_search

logger = logging.getLogger(__name__)

Sums = Literal["rademacher", "gaussian"]
Table = Literal["gamma", "phs"]

# Growth-slope thresholds for the diagonal experiments.
MEMBERSHIP_SLOPE = 0.02
DIVERGENCE_SLOPE = 0.05


# =========================
# Type and cotype
# =========================


def _second_moment(fam: VectorFamily, sums: Sums, plan: RandomPlan, cap: Optional[int]) -> NormEstimate:
    if sums == "rademacher":
        return NormEstimate.exact(rademacher_moment(fam, 2, cap=cap), meta="sign enumeration")
    return gaussian_moment(fam, plan.model_copy(update={"moment_p": 2.0}))


def _space_search(space: SpaceSpec, ratio, budget: SearchBudget, sums: Sums, cap: Optional[int], what: str) -> np.ndarray:
    identity = Operator(matrix=np.eye(space.dim), domain=space, codomain=space)
    if sums == "rademacher":
        size = budget.max_size or max(space.dim, min(2 * space.dim, 12))
        budget = budget.model_copy(update={"max_size": min(size, resolve_cap(cap))})
    _, x = witness_search(identity, ratio, budget, what=what)
    return x


def type_constant_lower(
    space: SpaceSpec,
    p: float,
    budget: Optional[SearchBudget] = None,
    plan: Optional[RandomPlan] = None,
    *,
    sums: Sums = "rademacher",
    cap: Optional[int] = None,
) -> NormEstimate:
    """Best witness ratio (𝔼‖Σ ε_n x_n‖²)^{1/2} / (Σ‖x_n‖^p)^{1/p}, a lower bound for the type-p constant."""
    if not 1 <= p <= 2:
        raise DegenerateInputError(f"type exponent must lie in [1, 2], got {p}")
    budget = budget or SearchBudget()
    plan = plan or RandomPlan(samples=budget.search_samples)
    search_plan = plan.model_copy(update={"samples": min(plan.samples, budget.search_samples)})

    def ratio(x: np.ndarray) -> float:
        fam = VectorFamily(space=space, vectors=x)
        den = strong_lp_norm(fam, p)
        return _second_moment(fam, sums, search_plan, cap).value / den if den > 0 else 0.0

    x = _space_search(space, ratio, budget, sums, cap, what=f"type {p:g}")
    fam = VectorFamily(space=space, vectors=x)
    den = strong_lp_norm(fam, p)
    num = _second_moment(fam, sums, plan.derived(1), cap)
    meta = f"{sums} witness size={x.shape[0]}"
    if num.kind == "montecarlo":
        return NormEstimate.montecarlo(num.value / den, num.stderr / den, meta=meta)
    return NormEstimate.lower(num.value / den, meta=meta)


def cotype_constant_lower(
    space: SpaceSpec,
    q: "float | str",
    budget: Optional[SearchBudget] = None,
    plan: Optional[RandomPlan] = None,
    *,
    sums: Sums = "rademacher",
    cap: Optional[int] = None,
) -> NormEstimate:
    """Best witness ratio (Σ‖x_n‖^q)^{1/q} / (𝔼‖Σ ε_n x_n‖²)^{1/2}, a lower bound for the cotype-q constant."""
    q = Exponent.of(q)
    if q.value < 2:
        raise DegenerateInputError(f"cotype exponent must be >= 2, got {q.label()}")
    budget = budget or SearchBudget()
    plan = plan or RandomPlan(samples=budget.search_samples)
    search_plan = plan.model_copy(update={"samples": min(plan.samples, budget.search_samples)})

    def ratio(x: np.ndarray) -> float:
        fam = VectorFamily(space=space, vectors=x)
        den = _second_moment(fam, sums, search_plan, cap).value
        return strong_lp_norm(fam, q) / den if den > 0 else 0.0

    x = _space_search(space, ratio, budget, sums, cap, what=f"cotype {q.label()}")
    fam = VectorFamily(space=space, vectors=x)
    num = strong_lp_norm(fam, q)
    den = _second_moment(fam, sums, plan.derived(1), cap)
    meta = f"{sums} witness size={x.shape[0]}"
    if den.value <= 0:
        return NormEstimate.lower(0.0, meta=meta)
    value = num / den.value
    if den.kind == "montecarlo":
        return NormEstimate.montecarlo(value, value * den.stderr / den.value, meta=meta)
    return NormEstimate.lower(value, meta=meta)


# =========================
# Diagonal operators
# =========================


class DiagonalSpec(BaseModel):
    """u_σ: ℓ_p → ℓ_q, (x_n) ↦ (σ_n x_n), with σ_n = n^{−alpha} or an explicit finite list."""

    model_config = ConfigDict(frozen=True)

    p: Exponent
    q: Exponent
    alpha: Optional[float] = Field(None, description="Power law σ_n = n^{-alpha}")
    sigma: Optional[list[float]] = Field(None, description="Explicit σ_1, σ_2, ... (zero afterwards)")

    @model_validator(mode="after")
    def _one_rule(self) -> "DiagonalSpec":
        if (self.alpha is None) == (self.sigma is None):
            raise ValueError("give exactly one of alpha or sigma")
        if self.sigma is not None and not all(math.isfinite(s) for s in self.sigma):
            raise ValueError("sigma entries must be finite")
        return self

    @classmethod
    def power(cls, p: "Exponent | float | str", q: "Exponent | float | str", alpha: float) -> "DiagonalSpec":
        return cls(p=Exponent.of(p), q=Exponent.of(q), alpha=alpha)

    @classmethod
    def explicit(cls, p: "Exponent | float | str", q: "Exponent | float | str", sigma: list[float]) -> "DiagonalSpec":
        return cls(p=Exponent.of(p), q=Exponent.of(q), sigma=list(sigma))

    def values(self, n: int) -> np.ndarray:
        if self.alpha is not None:
            return np.arange(1, n + 1, dtype=float) ** (-self.alpha)
        out = np.zeros(n)
        head = np.asarray(self.sigma[:n], dtype=float)
        out[: head.size] = head
        return out

    def operator(self, n: int) -> Operator:
        """The n-dimensional truncation ℓ_p^n → ℓ_q^n."""
        return Operator(matrix=np.diag(self.values(n)), domain=SpaceSpec(dim=n, exp=self.p), codomain=SpaceSpec(dim=n, exp=self.q))

    def label(self) -> str:
        rule = f"n^-{self.alpha:g}" if self.alpha is not None else f"explicit[{len(self.sigma)}]"
        return f"diag({rule}): l_{self.p.label()} -> l_{self.q.label()}"


class ClassificationVerdict(BaseModel):
    predicted_class: Literal["gamma-radonifying", "not"]
    table: Table
    row: int = Field(..., ge=1, le=3)
    r: float = Field(..., description="σ must lie in ℓ_r (inf for ℓ_∞)")
    criterion: str
    numeric_evidence: list[tuple[int, float]] = Field(default_factory=list, description="(N, Σ_{n≤N} σ_n^r) or (N, max σ_n)")

    @field_serializer("r")
    def _dump_r(self, v: float) -> float | str:
        return "inf" if math.isinf(v) else v


def table_row(p: Exponent, q: Exponent, table: Table = "gamma") -> tuple[int, float]:
    """Row of the diagonal classification table and the exponent r it requires."""
    if p.is_inf or q.is_inf:
        raise UnsupportedRegimeError("the diagonal tables cover finite p and q only")
    pv, qv = p.value, q.value
    if pv < 2:
        threshold = 2 * pv / (2 - pv)
        if qv < threshold:
            return 1, 1.0 / (0.5 - 1.0 / pv + 1.0 / qv)
        return 2, math.inf
    if table == "phs" and qv < 2:
        raise UnsupportedRegimeError(f"the pre-Hilbert-Schmidt table does not cover p={pv:g}, q={qv:g} < 2")
    return 3, qv


def _membership(spec: DiagonalSpec, r: float, horizon: int = 1024) -> tuple[bool, list[tuple[int, float]]]:
    checkpoints = [2**k for k in range(int(math.log2(horizon)) + 1)]
    sig = np.abs(spec.values(horizon))
    if math.isinf(r):
        evidence = [(n, float(np.max(sig[:n]))) for n in checkpoints]
    else:
        partial = np.cumsum(sig**r)
        evidence = [(n, float(partial[n - 1])) for n in checkpoints]
    if spec.sigma is not None:
        return True, evidence
    alpha = spec.alpha
    member = alpha >= 0 if math.isinf(r) else alpha * r > 1
    return member, evidence


def diag_classify(spec: DiagonalSpec, *, table: Table = "gamma") -> ClassificationVerdict:
    """Apply the diagonal table: γ-radonifying (or pre-Hilbert-Schmidt) iff σ ∈ ℓ_r.

    A finite explicit list lies in every ℓ_r; a power law n^{−α} lies in ℓ_r
    iff α·r > 1 (α ≥ 0 for r = ∞).
    """
    row, r = table_row(spec.p, spec.q, table)
    member, evidence = _membership(spec, r)
    r_text = "inf" if math.isinf(r) else f"{r:g}"
    criterion = f"{table} table row {row}: sigma in l_{r_text}"
    if row == 1:
        criterion += f", 1/r = 1/2 - 1/{spec.p.label()} + 1/{spec.q.label()}"
    return ClassificationVerdict(
        predicted_class="gamma-radonifying" if member else "not",
        table=table,
        row=row,
        r=r,
        criterion=criterion,
        numeric_evidence=evidence,
    )


class GrowthRow(BaseModel):
    dim: int
    estimate: NormEstimate


class SlopeEstimate(BaseModel):
    """A fitted slope. Exact only when every fitted value is; an estimate otherwise."""

    model_config = ConfigDict(frozen=True)

    value: float
    kind: Kind
    stderr: float = Field(0.0, ge=0)


class GrowthTable(BaseModel):
    spec: DiagonalSpec
    rows: list[GrowthRow]
    r: float
    value_slope: SlopeEstimate = Field(..., description="Least-squares slope of log v against log n")
    growth_slope: SlopeEstimate = Field(..., description="Slope of log(Δ(v^r)/Δlog n) against log n")
    corroborates: Literal["membership", "divergence", "inconclusive"]

    @field_serializer("r")
    def _dump_r(self, v: float) -> float | str:
        return "inf" if math.isinf(v) else v


def _fit_slope(x: np.ndarray, y: np.ndarray) -> float:
    if x.size < 2 or np.ptp(x) == 0:
        return 0.0
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def growth_slopes(dims: list[int], values: list[float], r: float) -> tuple[float, float]:
    """(value slope, growth slope) of a γ-norm sequence along increasing truncations.

    The growth slope measures how the ℓ_r mass added per octave of n scales:
    it is negative when the mass converges and positive when it diverges.
    For r = ∞ it is the value slope.
    """
    n = np.asarray(dims, dtype=float)
    v = np.asarray(values, dtype=float)
    pos = v > 0
    value_slope = _fit_slope(np.log(n[pos]), np.log(v[pos]))
    if math.isinf(r):
        return value_slope, value_slope
    mass = v**r
    dens = np.diff(mass) / np.diff(np.log(n))
    mid = 0.5 * (np.log(n[1:]) + np.log(n[:-1]))
    ok = dens > 0
    return value_slope, _fit_slope(mid[ok], np.log(dens[ok]))


def _tagged_slopes(dims: list[int], rows: list[GrowthRow], r: float) -> tuple[SlopeEstimate, SlopeEstimate]:
    """growth_slopes with kinds; Monte Carlo errors pushed through by central differences."""
    values = np.array([row.estimate.value for row in rows])
    errors = np.array([row.estimate.stderr for row in rows])
    slopes = np.array(growth_slopes(dims, values.tolist(), r))
    if all(row.estimate.kind == "exact" for row in rows):
        return SlopeEstimate(value=slopes[0], kind="exact"), SlopeEstimate(value=slopes[1], kind="exact")
    var = np.zeros(2)
    for i in np.flatnonzero(errors > 0):
        h = max(1e-6 * values[i], 1e-12)
        up, down = values.copy(), values.copy()
        up[i] += h
        down[i] = max(down[i] - h, 0.0)
        jac = (np.array(growth_slopes(dims, up.tolist(), r)) - np.array(growth_slopes(dims, down.tolist(), r))) / (up[i] - down[i])
        var += (jac * errors[i]) ** 2
    se = np.sqrt(var)
    return (
        SlopeEstimate(value=slopes[0], kind="montecarlo", stderr=se[0]),
        SlopeEstimate(value=slopes[1], kind="montecarlo", stderr=se[1]),
    )


def diag_growth_experiment(
    spec: DiagonalSpec,
    dims: Optional[list[int]] = None,
    plan: Optional[RandomPlan] = None,
    budget: Optional[SearchBudget] = None,
    *,
    membership_slope: float = MEMBERSHIP_SLOPE,
    divergence_slope: float = DIVERGENCE_SLOPE,
) -> GrowthTable:
    """γ-norm estimates of the truncations u_σ: ℓ_p^n → ℓ_q^n and their growth slopes.

    p = 2 uses the Hilbert-domain γ-norm (exact for q = 2); other domains use
    the γ-summing witness search.
    """
    dims = list(dims or [2, 4, 8, 16, 32, 64])
    if any(b <= a for a, b in zip(dims, dims[1:])) or dims[0] < 1 or dims[-1] > 128:
        raise DegenerateInputError(f"dims must be increasing within [1, 128], got {dims}")
    plan = plan or RandomPlan()
    _, r = table_row(spec.p, spec.q)
    rows = []
    for n in dims:
        u = spec.operator(n)
        if spec.p.value == 2:
            est = gamma_norm_hilbert_domain(u, plan)
        else:
            est = gamma_summing_lower(u, budget, plan)
        rows.append(GrowthRow(dim=n, estimate=est))
        logger.debug("diag growth %s n=%s value=%.12g kind=%s", spec.label(), n, est.value, est.kind)
    value_slope, growth = _tagged_slopes(dims, rows, r)
    if growth.value <= membership_slope or not any(row.estimate.value > 0 for row in rows):
        verdict = "membership"
    elif growth.value >= divergence_slope:
        verdict = "divergence"
    else:
        verdict = "inconclusive"
    return GrowthTable(spec=spec, rows=rows, r=r, value_slope=value_slope, growth_slope=growth, corroborates=verdict)


# =========================
# Pre-Hilbert-Schmidt
# =========================


def _contraction(mat: np.ndarray, domain: SpaceSpec, codomain: SpaceSpec, cap: Optional[int]) -> Optional[np.ndarray]:
    norm = op_norm_upper(Operator(matrix=mat, domain=domain, codomain=codomain), cap=cap).value
    return mat / norm if norm > 0 else None


def _embedding(rows: int, cols: int, basis: np.ndarray) -> np.ndarray:
    """rows x cols matrix whose leading columns are those of `basis`, zero elsewhere."""
    out = np.zeros((rows, cols))
    k = min(cols, basis.shape[1])
    out[:, :k] = basis[:, :k]
    return out


def _phs_at(u: Operator, k: int, m: int, budget: SearchBudget, cap: Optional[int]) -> float:
    n, mm = u.domain.dim, u.codomain.dim
    a = u.matrix
    hk, hm = SpaceSpec.lp(k, 2), SpaceSpec.lp(m, 2)
    s = svd(u)

    def score(v: Optional[np.ndarray], w: Optional[np.ndarray]) -> float:
        if v is None or w is None:
            return 0.0
        return float(np.linalg.norm(w @ a @ v, "fro"))

    def as_v(mat: np.ndarray) -> Optional[np.ndarray]:
        return _contraction(mat, hk, u.domain, cap)

    def as_w(mat: np.ndarray) -> Optional[np.ndarray]:
        return _contraction(mat, u.codomain, hm, cap)

    vs = [as_v(_embedding(n, k, np.eye(n))), as_v(_embedding(n, k, s.right_t.T))]
    vs += [as_v(_embedding(n, k, np.eye(n)[:, [j]])) for j in range(n)]
    vs.append(as_v(_embedding(n, k, s.right_t[:1].T)))
    ws = [as_w(_embedding(mm, m, np.eye(mm)).T), as_w(_embedding(mm, m, s.left).T)]
    best, best_v, best_w = 0.0, None, None
    for v in vs:
        for w in ws:
            val = score(v, w)
            if val > best:
                best, best_v, best_w = val, v, w

    for i in range(budget.draws):
        rng = np.random.default_rng([budget.seed, k, m, i])
        v = as_v(rng.standard_normal((n, k)))
        w = as_w(rng.standard_normal((m, mm)))
        best = max(best, score(v, w))

    if best_v is None:
        return best
    rng = np.random.default_rng([budget.seed, k, m, 1 << 20])
    step = 0.3
    cur, cur_v, cur_w = score(best_v, best_w), best_v, best_w
    for _ in range(budget.refine_steps):
        v = as_v(cur_v + step * rng.standard_normal(cur_v.shape) * (float(np.max(np.abs(cur_v))) or 1.0))
        w = as_w(cur_w + step * rng.standard_normal(cur_w.shape) * (float(np.max(np.abs(cur_w))) or 1.0))
        val = score(v, w)
        if val > cur:
            cur, cur_v, cur_w = val, v, w
        step *= 0.98
    return max(best, cur)


def phs_lower(
    u: Operator,
    k: int,
    m: int,
    budget: Optional[SearchBudget] = None,
    plan: Optional[RandomPlan] = None,
    *,
    cap: Optional[int] = None,
) -> NormEstimate:
    """sup of ‖w∘u∘v‖_HS over contractions v: ℓ_2^k → domain and w: codomain → ℓ_2^m.

    Contractions are normalised by certified operator-norm upper bounds, so
    every candidate is admissible. The result is the maximum over all
    truncations k' ≤ k, m' ≤ m, each searched with its own seeds: structured
    candidates (coordinate and singular-vector embeddings), `budget.draws`
    Gaussian pairs and a perturbation chain from the best structured pair.
    """
    if k < 1 or m < 1:
        raise DegenerateInputError(f"truncation sizes must be >= 1, got k={k} m={m}")
    if u.is_zero:
        return NormEstimate.lower(0.0, meta="zero operator")
    budget = budget or SearchBudget()
    best = 0.0
    for kk in range(1, k + 1):
        for mm in range(1, m + 1):
            best = max(best, _phs_at(u, kk, mm, budget, cap))
    logger.debug("phs lower %s k=%s m=%s value=%.12g", u.label(), k, m, best)
    return NormEstimate.lower(best, meta=f"contraction search k={k} m={m} draws={budget.draws}")


class PhsPi2Report(BaseModel):
    phs_lower: NormEstimate
    pi2_lower: NormEstimate
    pi2_upper: NormEstimate
    pinch_ratio: Optional[NormEstimate] = Field(None, description="phs_lower / pi2_upper")
    bound_ok: bool = Field(..., description="phs_lower <= pi2_upper + 1e-8")


def phs_vs_pi2_report(
    u: Operator,
    budget: Optional[SearchBudget] = None,
    *,
    k: Optional[int] = None,
    m: Optional[int] = None,
    cap: Optional[int] = None,
) -> PhsPi2Report:
    """Pre-Hilbert-Schmidt lower bound against the 2-summing bracket, Hilbert codomain."""
    if not u.codomain.is_hilbert:
        raise NotHilbertError(f"phs_vs_pi2_report needs an l_2 codomain, got {u.label()}")
    budget = budget or SearchBudget()
    k = k or u.domain.dim
    m = m or u.codomain.dim
    phs = phs_lower(u, k, m, budget, cap=cap)
    lower = pi_p_lower(u, 2, budget, cap=cap)
    upper, _ = pi_2_upper(u, cap=cap, seed=budget.seed)
    pinch = quotient(phs, upper, meta="phs lower over pi_2 upper")
    report = PhsPi2Report(
        phs_lower=phs,
        pi2_lower=lower,
        pi2_upper=upper,
        pinch_ratio=pinch,
        bound_ok=phs.value <= upper.value + 1e-8,
    )
    logger.info("phs vs pi2 %s phs=%.10g pi2=[%.10g, %.10g]", u.label(), phs.value, lower.value, upper.value)
    return report


class PhsGammaRow(BaseModel):
    size: int
    phs_lower: NormEstimate
    ratio: Optional[NormEstimate] = Field(None, description="phs_lower / gamma_lower")


class PhsGammaReport(BaseModel):
    gamma_lower: NormEstimate
    rows: list[PhsGammaRow]


def phs_vs_gamma_report(
    u: Operator,
    budget: Optional[SearchBudget] = None,
    plan: Optional[RandomPlan] = None,
    *,
    sizes: Optional[list[int]] = None,
    cap: Optional[int] = None,
) -> PhsGammaReport:
    """phs_lower at truncations k = m = s against the γ-summing lower bound; nothing is asserted."""
    if u.codomain.exp.value < 2:
        raise UnsupportedRegimeError(f"phs_vs_gamma_report needs a codomain exponent >= 2, got {u.label()}")
    budget = budget or SearchBudget()
    gamma = gamma_summing_lower(u, budget, plan, cap=cap)
    sizes = sizes or list(range(1, max(u.domain.dim, u.codomain.dim) + 1))
    rows = []
    for s in sizes:
        phs = phs_lower(u, s, s, budget, cap=cap)
        ratio = quotient(phs, gamma, meta="phs lower over gamma-summing lower")
        rows.append(PhsGammaRow(size=s, phs_lower=phs, ratio=ratio))
        logger.info("phs vs gamma %s size=%s phs=%.10g gamma=%.10g ratio=%s", u.label(), s, phs.value, gamma.value, ratio and ratio.value)
    return PhsGammaReport(gamma_lower=gamma, rows=rows)


# =========================
# Type 2 and cotype 2 experiments
# =========================


class Cotype2Report(BaseModel):
    pi2_lower: NormEstimate
    gamma_lower: NormEstimate
    cotype2_witness: NormEstimate
    ratio: Optional[NormEstimate] = Field(None, description="pi2_lower / gamma_lower")


def cotype2_report(
    u: Operator,
    budget: Optional[SearchBudget] = None,
    plan: Optional[RandomPlan] = None,
    *,
    cap: Optional[int] = None,
) -> Cotype2Report:
    """For u on ℓ_2^n: 2-summing against γ-summing next to the codomain's cotype-2 witness."""
    if not u.domain.is_hilbert:
        raise NotHilbertError(f"cotype2_report needs an l_2 domain, got {u.label()}")
    budget = budget or SearchBudget()
    lower = pi_p_lower(u, 2, budget, cap=cap)
    gamma = gamma_summing_lower(u, budget, plan, cap=cap)
    witness = cotype_constant_lower(u.codomain, 2, budget, plan, cap=cap)
    ratio = quotient(lower, gamma, meta="pi_2 lower over gamma-summing lower")
    logger.info("cotype2 %s pi2=%.10g gamma=%.10g C2>=%.10g ratio=%s", u.label(), lower.value, gamma.value, witness.value, ratio and ratio.value)
    return Cotype2Report(pi2_lower=lower, gamma_lower=gamma, cotype2_witness=witness, ratio=ratio)


class Type2L1Report(BaseModel):
    gamma_lower: NormEstimate
    op_norm: NormEstimate
    ratio: Optional[NormEstimate] = Field(None, description="gamma_lower / ‖u‖")
    type2_witness: NormEstimate
    threshold: float = Field(..., description="type-2 witness x 1.8 + Monte Carlo margin")
    flagged: bool


def type2_l1_report(
    u: Operator,
    budget: Optional[SearchBudget] = None,
    plan: Optional[RandomPlan] = None,
    *,
    cap: Optional[int] = None,
) -> Type2L1Report:
    """For u: ℓ_1^n → ℓ_q^m with q ≥ 2, γ-summing growth against the codomain's type-2 witness."""
    if u.domain.exp.value != 1 or u.codomain.exp.value < 2:
        raise UnsupportedRegimeError(f"type2_l1_report needs l_1 -> l_q with q >= 2, got {u.label()}")
    budget = budget or SearchBudget()
    norm = op_norm(u, cap=cap)
    gamma = gamma_summing_lower(u, budget, plan, cap=cap)
    witness = type_constant_lower(u.codomain, 2, budget, plan, cap=cap)
    if norm.value <= 0:
        return Type2L1Report(gamma_lower=gamma, op_norm=norm, type2_witness=witness, threshold=0.0, flagged=False)
    ratio = quotient(gamma, norm, meta="gamma-summing lower over operator norm")
    threshold = witness.value * KG_SANITY + 4.0 * ratio.stderr
    flagged = ratio.value > threshold
    if flagged:
        logger.warning("type2 l1 %s ratio %.6g above threshold %.6g", u.label(), ratio.value, threshold)
    return Type2L1Report(gamma_lower=gamma, op_norm=norm, ratio=ratio, type2_witness=witness, threshold=threshold, flagged=flagged)


def hilbert_pinch(u: Operator, budget: Optional[SearchBudget] = None) -> float:
    """Largest relative gap between phs_lower, pi2 bounds and the HS norm on ℓ_2 → ℓ_2."""
    ref = hs_norm(u)
    if ref == 0:
        return 0.0
    report = phs_vs_pi2_report(u, budget)
    vals = [report.phs_lower.value, report.pi2_lower.value, report.pi2_upper.value]
    return max(abs(v - ref) for v in vals) / ref
