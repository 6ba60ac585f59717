import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import linalg as sla
from scipy.special import gammaln

from summa.config import get_limits
from summa.errors import DegenerateInputError, NumericalCheckError
from summa.linalg import Exponent, NormEstimate, p_norm, quotient, row_norms, sign_blocks
from summa.sequences import VectorFamily

logger = logging.getLogger(__name__)

# 𝔼|γ| for a standard Gaussian γ.
M1 = math.sqrt(2.0 / math.pi)


class RandomPlan(BaseModel):
    """Seed, sample count and moment for one Monte Carlo estimate.

    Variates come from numpy's PCG64 generator (`default_rng`) and its
    ziggurat standard-normal transform. Sample i belongs to block
    i // block_size; block b draws from the b-th child of
    SeedSequence(seed), so a plan reproduces bit-identical estimates for a
    fixed block size, whatever the number of worker threads.
    """

    model_config = ConfigDict(frozen=True)

    seed: int = Field(42, ge=0, le=2**64 - 1, description="64-bit seed")
    samples: int = Field(100_000, ge=1, description="Monte Carlo samples")
    moment_p: float = Field(2.0, ge=1, description="Moment exponent p")

    def derived(self, index: int) -> "RandomPlan":
        """An independent plan for re-estimation (same samples and moment)."""
        state = np.random.SeedSequence([self.seed, 0x5EED, index]).generate_state(1, dtype=np.uint64)[0]
        return self.model_copy(update={"seed": int(state)})


class KhintchineReport(BaseModel):
    p: float
    moment: float = Field(..., description="(𝔼|Σ a_n r_n|^p)^{1/p}, exact")
    l2_norm: float
    ratio: float
    violates_upper: bool = Field(..., description="ratio > 1 with p <= 2")
    violates_lower: bool = Field(..., description="ratio < 1 with p >= 2")

    @property
    def ok(self) -> bool:
        return not (self.violates_upper or self.violates_lower)


class ComparisonReport(BaseModel):
    gaussian: NormEstimate
    rademacher: NormEstimate
    ratio: NormEstimate
    floor: float = Field(M1, description="m_1 = sqrt(2/pi), forced by the contraction principle")
    floor_ok: bool


# =========================
# Rademacher sums
# =========================


def rademacher_moment(fam: VectorFamily, p: float, *, cap: Optional[int] = None) -> float:
    """(𝔼‖Σ r_n x_n‖^p)^{1/p}, averaged over all 2^N sign patterns."""
    if p < 1:
        raise DegenerateInputError(f"moment exponent must be >= 1, got {p}")
    if fam.size == 0:
        return 0.0
    total = 0.0
    count = 0
    for signs in sign_blocks(fam.size, cap=cap, fix_first=True):
        norms = row_norms(signs @ fam.vectors, fam.space.exp)
        total += float(np.sum(norms**p))
        count += signs.shape[0]
    return (total / count) ** (1.0 / p)


def khintchine_ratio(a: np.ndarray, p: float, *, cap: Optional[int] = None) -> KhintchineReport:
    """(𝔼|Σ a_n r_n|^p)^{1/p} / ‖a‖₂ by enumeration, with the forced one-sided checks."""
    a = np.asarray(a, dtype=float).ravel()
    l2 = p_norm(a, 2)
    if l2 == 0:
        raise DegenerateInputError("khintchine_ratio needs a nonzero coefficient vector")
    moment = rademacher_moment(VectorFamily.of(a[:, None], p=2, dim=1), p, cap=cap)
    ratio = moment / l2
    return KhintchineReport(
        p=p,
        moment=moment,
        l2_norm=l2,
        ratio=ratio,
        violates_upper=p <= 2 and ratio > 1 + 1e-12,
        violates_lower=p >= 2 and ratio < 1 - 1e-12,
    )


# =========================
# Gaussian sums
# =========================


def _gaussian_abs_moment(p: float) -> float:
    """(𝔼|γ|^p)^{1/p} for a standard Gaussian γ."""
    return math.exp((0.5 * p * math.log(2.0) + gammaln((p + 1.0) / 2.0) - 0.5 * math.log(math.pi)) / p)


def gaussian_norm_samples(
    fam: VectorFamily,
    plan: RandomPlan,
    *,
    block_size: Optional[int] = None,
    workers: Optional[int] = None,
) -> np.ndarray:
    """plan.samples independent draws of ‖Σ γ_n x_n‖, in block order."""
    limits = get_limits()
    block_size = limits.block_size if block_size is None else block_size
    workers = limits.workers if workers is None else workers
    nblocks = -(-plan.samples // block_size)
    children = np.random.SeedSequence(plan.seed).spawn(nblocks)
    x = fam.vectors
    exp = fam.space.exp

    def run_block(b: int) -> np.ndarray:
        size = min(block_size, plan.samples - b * block_size)
        g = np.random.default_rng(children[b]).standard_normal((size, fam.size))
        return row_norms(g @ x, exp)

    if workers > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run_block, range(nblocks)))
    else:
        blocks = [run_block(b) for b in range(nblocks)]
    return np.concatenate(blocks)


def _moment_with_stderr(norms: np.ndarray, p: float) -> tuple[float, float]:
    """p-th moment root of the sample and its delta-method standard error."""
    powers = norms**p
    n = powers.size
    mean = float(np.mean(powers))
    if mean <= 0:
        return 0.0, 0.0
    var = float(np.var(powers, ddof=1)) if n > 1 else 0.0
    value = mean ** (1.0 / p)
    stderr = value / (p * mean) * math.sqrt(var / n)
    return value, stderr


def gaussian_moment(fam: VectorFamily, plan: RandomPlan, **kwargs) -> NormEstimate:
    """(𝔼‖Σ γ_n x_n‖^p)^{1/p} with p = plan.moment_p.

    Exact for an ℓ_2 host with p = 2 (the strong ℓ_2 norm of the family) and
    for one-dimensional hosts (a centred Gaussian with variance Σx_n²);
    Monte Carlo otherwise.
    """
    p = plan.moment_p
    if fam.size == 0 or not np.any(fam.vectors):
        return NormEstimate.exact(0.0, meta="zero family")
    if fam.space.is_hilbert and p == 2:
        return NormEstimate.exact(float(np.linalg.norm(fam.vectors)), meta="gaussian orthonormality")
    if fam.space.dim == 1:
        sigma = float(np.linalg.norm(fam.vectors))
        return NormEstimate.exact(sigma * _gaussian_abs_moment(p), meta="one-dimensional gaussian")
    norms = gaussian_norm_samples(fam, plan, **kwargs)
    value, stderr = _moment_with_stderr(norms, p)
    return NormEstimate.montecarlo(value, stderr, meta=f"seed={plan.seed} samples={plan.samples}")


def kahane_ratio(
    fam: VectorFamily,
    p: float,
    q: float,
    plan: Optional[RandomPlan] = None,
    *,
    method: Literal["rademacher", "gaussian"] = "rademacher",
    cap: Optional[int] = None,
) -> NormEstimate:
    """(𝔼‖Σ εx‖^q)^{1/q} / (𝔼‖Σ εx‖^p)^{1/p} for Rademacher (exact) or Gaussian (MC) ε."""
    if p < 1 or q < 1:
        raise DegenerateInputError(f"moment exponents must be >= 1, got p={p} q={q}")
    if method == "rademacher":
        den = rademacher_moment(fam, p, cap=cap)
        if den == 0:
            raise DegenerateInputError("kahane_ratio of a zero family")
        return NormEstimate.exact(rademacher_moment(fam, q, cap=cap) / den, meta="sign enumeration")

    plan = plan or RandomPlan()
    if fam.size == 0 or not np.any(fam.vectors):
        raise DegenerateInputError("kahane_ratio of a zero family")
    norms = gaussian_norm_samples(fam, plan)
    num, se_num = _moment_with_stderr(norms, q)
    den, se_den = _moment_with_stderr(norms, p)
    ratio = num / den
    # quadrature of relative errors; both moments come from the same samples
    stderr = ratio * math.hypot(se_num / num, se_den / den)
    return NormEstimate.montecarlo(ratio, stderr, meta=f"seed={plan.seed} samples={plan.samples}")


def gaussian_rademacher_ratio(fam: VectorFamily, plan: RandomPlan, *, cap: Optional[int] = None) -> ComparisonReport:
    """Gaussian over Rademacher p-th moment; never below m_1 by the contraction principle."""
    gauss = gaussian_moment(fam, plan)
    rad = rademacher_moment(fam, plan.moment_p, cap=cap)
    if rad == 0:
        raise DegenerateInputError("gaussian_rademacher_ratio of a zero family")
    exact = NormEstimate.exact(rad, meta="sign enumeration")
    ratio = quotient(gauss, exact, meta="gaussian over rademacher moment")
    return ComparisonReport(gaussian=gauss, rademacher=exact, ratio=ratio, floor_ok=ratio.value + 4.0 * ratio.stderr >= M1 - 1e-12)


# =========================
# Haar measure
# =========================


def haar_orthogonal(n: int, plan: RandomPlan) -> np.ndarray:
    """Haar-distributed orthogonal n×n matrix: QR of a Gaussian matrix, diag(R) made positive."""
    if n < 1:
        raise DegenerateInputError(f"dimension must be >= 1, got {n}")
    z = np.random.default_rng(plan.seed).standard_normal((n, n))
    q, r = sla.qr(z)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    q = q * d
    err = float(np.max(np.abs(q.T @ q - np.eye(n))))
    if err > 1e-10:
        raise NumericalCheckError(f"Q^T Q deviates from I by {err:.3e}")
    return q
