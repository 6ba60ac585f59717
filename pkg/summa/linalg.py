import logging
import math
from typing import Any, Iterator, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator
from scipy import linalg as sla

from summa.config import resolve_cap
from summa.errors import DegenerateInputError, EnumerationCapError, NumericalCheckError

logger = logging.getLogger(__name__)

# =========================
# Models
# =========================


class Exponent(BaseModel):
    """An extended real p in [1, ∞]."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(..., description="Exponent p >= 1, or inf")

    @field_validator("value", mode="before")
    @classmethod
    def _parse(cls, v: Any) -> Any:
        if isinstance(v, str):
            s = v.strip().lower()
            if s in ("inf", "infinity", "∞", "+inf"):
                return math.inf
            return float(s)
        return v

    @field_validator("value")
    @classmethod
    def _check(cls, v: float) -> float:
        if math.isnan(v) or v < 1:
            raise ValueError(f"exponent must be >= 1 or inf, got {v}")
        return float(v)

    @field_serializer("value")
    def _dump(self, v: float) -> float | str:
        return "inf" if math.isinf(v) else v

    @classmethod
    def of(cls, p: "Exponent | float | int | str") -> "Exponent":
        return p if isinstance(p, Exponent) else cls(value=p)

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.value)

    def dual(self) -> "Exponent":
        if self.value == 1:
            return Exponent(value=math.inf)
        if self.is_inf:
            return Exponent(value=1.0)
        return Exponent(value=self.value / (self.value - 1.0))

    def numpy_ord(self) -> float:
        return np.inf if self.is_inf else self.value

    def label(self) -> str:
        return "inf" if self.is_inf else f"{self.value:g}"

    def __float__(self) -> float:
        return self.value


class SpaceSpec(BaseModel):
    """Finite-dimensional sequence space ℓ_p^dim."""

    model_config = ConfigDict(frozen=True)

    dim: int = Field(..., ge=1, description="Dimension")
    exp: Exponent = Field(..., description="Norm exponent")

    @classmethod
    def lp(cls, dim: int, p: "Exponent | float | str") -> "SpaceSpec":
        return cls(dim=dim, exp=Exponent.of(p))

    def dual(self) -> "SpaceSpec":
        return SpaceSpec(dim=self.dim, exp=self.exp.dual())

    @property
    def is_hilbert(self) -> bool:
        return self.exp.value == 2

    def label(self) -> str:
        return f"l_{self.exp.label()}^{self.dim}"


class Operator(BaseModel):
    """Dense real matrix u: domain -> codomain (shape codomain.dim x domain.dim)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray
    domain: SpaceSpec
    codomain: SpaceSpec

    @field_validator("matrix", mode="before")
    @classmethod
    def _as_array(cls, v: Any) -> np.ndarray:
        a = np.array(v, dtype=float)
        if a.ndim != 2:
            raise ValueError(f"operator matrix must be 2-dimensional, got ndim={a.ndim}")
        if 0 in a.shape:
            raise ValueError(f"operator matrix must be non-empty, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("operator matrix has non-finite entries")
        a.setflags(write=False)
        return a

    @model_validator(mode="after")
    def _shapes(self) -> "Operator":
        m, n = self.matrix.shape
        if (m, n) != (self.codomain.dim, self.domain.dim):
            raise ValueError(
                f"matrix shape {(m, n)} does not match {self.domain.label()} -> {self.codomain.label()}"
            )
        return self

    @classmethod
    def from_matrix(cls, matrix: Any, p: "Exponent | float | str" = 2, q: "Exponent | float | str" = 2) -> "Operator":
        a = np.array(matrix, dtype=float)
        if a.ndim != 2 or 0 in a.shape:
            raise DegenerateInputError(f"operator matrix must be a non-empty 2-d array, got shape {a.shape}")
        m, n = a.shape
        return cls(matrix=a, domain=SpaceSpec.lp(n, p), codomain=SpaceSpec.lp(m, q))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def is_zero(self) -> bool:
        return not np.any(self.matrix)

    def transpose(self) -> "Operator":
        """Adjoint u*: codomain* -> domain*."""
        return Operator(matrix=self.matrix.T, domain=self.codomain.dual(), codomain=self.domain.dual())

    def label(self) -> str:
        return f"{self.domain.label()} -> {self.codomain.label()}"


Kind = Literal["exact", "lower", "upper", "montecarlo"]


class NormEstimate(BaseModel):
    """A value tagged with how far it can be trusted."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(..., ge=0, description="Estimated value")
    kind: Kind = Field(..., description="exact, certified lower/upper bound, or Monte Carlo")
    stderr: float = Field(0.0, ge=0, description="Standard error, Monte Carlo only")
    meta: str = Field("", description="Provenance")

    @model_validator(mode="after")
    def _stderr_only_for_mc(self) -> "NormEstimate":
        if self.kind != "montecarlo" and self.stderr != 0:
            raise ValueError(f"stderr must be 0 for kind={self.kind}")
        return self

    @classmethod
    def exact(cls, value: float, meta: str = "") -> "NormEstimate":
        return cls(value=max(float(value), 0.0), kind="exact", meta=meta)

    @classmethod
    def lower(cls, value: float, meta: str = "") -> "NormEstimate":
        return cls(value=max(float(value), 0.0), kind="lower", meta=meta)

    @classmethod
    def upper(cls, value: float, meta: str = "") -> "NormEstimate":
        return cls(value=max(float(value), 0.0), kind="upper", meta=meta)

    @classmethod
    def montecarlo(cls, value: float, stderr: float, meta: str = "") -> "NormEstimate":
        return cls(value=max(float(value), 0.0), kind="montecarlo", stderr=float(stderr), meta=meta)

    @property
    def is_certified_upper(self) -> bool:
        return self.kind in ("exact", "upper")

    @property
    def is_certified_lower(self) -> bool:
        return self.kind in ("exact", "lower")

    @property
    def relative_stderr(self) -> float:
        return self.stderr / self.value if self.value > 0 else 0.0


def quotient(num: NormEstimate, den: NormEstimate, meta: str = "") -> Optional[NormEstimate]:
    """num / den, tagged by what the two inputs certify; None when den is 0.

    exact/exact is exact, a certified lower over a certified upper is lower,
    and the reverse is upper. Anything else (a Monte Carlo input, or two
    bounds pointing the same way) is an estimate: kind montecarlo with the
    relative standard errors added in quadrature.
    """
    if den.value <= 0:
        return None
    ratio = num.value / den.value
    if num.kind == "exact" and den.kind == "exact":
        return NormEstimate.exact(ratio, meta=meta)
    if num.is_certified_lower and den.is_certified_upper:
        return NormEstimate.lower(ratio, meta=meta)
    if num.is_certified_upper and den.is_certified_lower:
        return NormEstimate.upper(ratio, meta=meta)
    if num.value > 0:
        stderr = ratio * math.hypot(num.relative_stderr, den.relative_stderr)
    else:
        stderr = num.stderr / den.value
    return NormEstimate.montecarlo(ratio, stderr, meta=meta or f"{num.kind}/{den.kind}")


class SvdResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sigma: np.ndarray = Field(..., description="Singular values, nonincreasing")
    left: np.ndarray = Field(..., description="m x r orthonormal columns")
    right_t: np.ndarray = Field(..., description="r x n orthonormal rows")
    reconstruction_error: float


# =========================
# Norms
# =========================


def p_norm(x: Any, p: "Exponent | float | str") -> float:
    """(Σ|x_i|^p)^{1/p}, max|x_i| for p = ∞, 0 for the empty vector."""
    v = np.asarray(x, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    return float(np.linalg.norm(v, ord=Exponent.of(p).numpy_ord()))


def row_norms(a: np.ndarray, p: "Exponent | float | str") -> np.ndarray:
    """p-norm of every row of a 2-d array."""
    a = np.asarray(a, dtype=float)
    if a.shape[1] == 0:
        return np.zeros(a.shape[0])
    return np.linalg.norm(a, ord=Exponent.of(p).numpy_ord(), axis=1)


def sign_blocks(n: int, *, cap: Optional[int] = None, fix_first: bool = False, block: int = 4096) -> Iterator[np.ndarray]:
    """Yield every ε in {−1,1}^n in a fixed order, in blocks of rows.

    With fix_first=True only patterns with ε_1 = +1 are produced; callers use
    that when the objective is even in ε.
    """
    cap = resolve_cap(cap)
    if n > cap:
        raise EnumerationCapError(n, cap)
    if n == 0:
        yield np.ones((1, 0))
        return
    free = n - 1 if fix_first else n
    total = 1 << free
    shifts = np.arange(free, dtype=np.int64)
    for start in range(0, total, block):
        idx = np.arange(start, min(start + block, total), dtype=np.int64)
        signs = 1.0 - 2.0 * ((idx[:, None] >> shifts) & 1)
        if fix_first:
            signs = np.hstack([np.ones((idx.size, 1)), signs])
        yield signs


def max_over_signs(a: np.ndarray, q: "Exponent | float | str", *, cap: Optional[int] = None) -> tuple[float, np.ndarray]:
    """max over t in {−1,1}^n of ‖a t‖_q, with the first maximiser found."""
    a = np.asarray(a, dtype=float)
    q = Exponent.of(q)
    best, best_t = -1.0, np.ones(a.shape[1])
    for signs in sign_blocks(a.shape[1], cap=cap, fix_first=True):
        vals = row_norms(signs @ a.T, q)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_t = float(vals[k]), signs[k].copy()
    return best, best_t


def svd(u: Operator) -> SvdResult:
    """Thin SVD with a reconstruction check (≤ 1e−10·σ₁ in Frobenius norm)."""
    a = u.matrix
    for driver in ("gesdd", "gesvd"):
        left, sigma, right_t = sla.svd(a, full_matrices=False, lapack_driver=driver)
        err = float(np.linalg.norm((left * sigma) @ right_t - a, "fro"))
        scale = float(sigma[0]) if sigma.size else 0.0
        if err <= 1e-10 * scale or (scale == 0.0 and err == 0.0):
            return SvdResult(sigma=sigma, left=left, right_t=right_t, reconstruction_error=err)
        logger.warning("svd driver=%s reconstruction error %.3e above tolerance, retrying", driver, err)
    raise NumericalCheckError(f"SVD reconstruction error {err:.3e} exceeds 1e-10 * sigma_1")


# =========================
# Operator norms
# =========================


def _exact_rule(a: np.ndarray, p: Exponent, q: Exponent, cap: Optional[int]) -> Optional[NormEstimate]:
    if p.value == 1:
        return NormEstimate.exact(float(np.max(row_norms(a.T, q))), meta="max column q-norm")
    if q.is_inf:
        return NormEstimate.exact(float(np.max(row_norms(a, p.dual()))), meta="max row p*-norm")
    if p.value == 2 and q.value == 2:
        sigma = sla.svdvals(a)
        return NormEstimate.exact(float(sigma[0]), meta="largest singular value")
    if p.is_inf and q.value == 1:
        value, _ = max_over_signs(a, 1, cap=cap)
        return NormEstimate.exact(value, meta="sign enumeration")
    return None


def _norm_gradient(y: np.ndarray, q: Exponent) -> np.ndarray:
    """Column-wise (sub)gradient of ‖·‖_q at the columns of y."""
    if q.is_inf:
        g = np.zeros_like(y)
        k = np.argmax(np.abs(y), axis=0)
        cols = np.arange(y.shape[1])
        g[k, cols] = np.sign(y[k, cols])
        return g
    if q.value == 1:
        return np.sign(y)
    norms = np.linalg.norm(y, ord=q.value, axis=0)
    norms = np.where(norms > 0, norms, 1.0)
    return np.sign(y) * (np.abs(y) / norms) ** (q.value - 1.0)


def _retract(x: np.ndarray, p: Exponent) -> np.ndarray:
    if p.is_inf:
        x = np.clip(x, -1.0, 1.0)
    norms = np.linalg.norm(x, ord=p.numpy_ord(), axis=0)
    return x / np.where(norms > 0, norms, 1.0)


def ascent_p_to_q(
    a: np.ndarray,
    p: Exponent,
    q: Exponent,
    *,
    restarts: int = 32,
    iterations: int = 500,
    tol: float = 1e-9,
    step: float = 1.0,
    decay: float = 0.99,
    seed: int = 0,
    extra_starts: Optional[np.ndarray] = None,
) -> tuple[float, np.ndarray]:
    """Multistart projected-gradient ascent of ‖a x‖_q over the unit p-sphere.

    The start set is fixed: `extra_starts` (columns), the standard basis, the
    all-ones vector and `restarts` Gaussian vectors from `seed`. Returns the best value and its x;
    every reported value is attained at a feasible x, so it is a lower bound.
    """
    m, n = a.shape
    rng = np.random.default_rng(seed)
    starts = np.hstack([np.eye(n), np.ones((n, 1)), rng.standard_normal((n, restarts))])
    if extra_starts is not None:
        starts = np.hstack([np.asarray(extra_starts, dtype=float).reshape(n, -1), starts])
    x = _retract(starts, p)
    vals = np.linalg.norm(a @ x, ord=q.numpy_ord(), axis=0)
    best_vals = vals.copy()
    best_x = x.copy()
    stale = 0
    for _ in range(iterations):
        grad = a.T @ _norm_gradient(a @ x, q)
        x = _retract(x + step * grad, p)
        vals = np.linalg.norm(a @ x, ord=q.numpy_ord(), axis=0)
        improved = vals > best_vals + tol
        better = vals > best_vals
        best_vals = np.where(better, vals, best_vals)
        best_x[:, better] = x[:, better]
        step *= decay
        stale = 0 if improved.any() else stale + 1
        if stale >= 25:
            break
    k = int(np.argmax(best_vals))
    return float(best_vals[k]), best_x[:, k]


def op_norm(
    u: Operator,
    *,
    restarts: int = 32,
    iterations: int = 500,
    tol: float = 1e-9,
    cap: Optional[int] = None,
    seed: int = 0,
) -> NormEstimate:
    """The ℓ_p → ℓ_q operator norm.

    Exact for p = 1, q = ∞, p = q = 2 and (p, q) = (∞, 1) under the
    enumeration cap; a certified lower bound from multistart ascent otherwise.
    """
    if u.is_zero:
        return NormEstimate.exact(0.0, meta="zero operator")
    p, q = u.domain.exp, u.codomain.exp
    exact = _exact_rule(u.matrix, p, q, cap)
    if exact is not None:
        return exact
    value, _ = ascent_p_to_q(u.matrix, p, q, restarts=restarts, iterations=iterations, tol=tol, seed=seed)
    logger.debug("op_norm ascent %s value=%.12g", u.label(), value)
    return NormEstimate.lower(value, meta=f"multistart ascent restarts={restarts} iterations={iterations}")


def op_norm_upper(u: Operator, *, cap: Optional[int] = None) -> NormEstimate:
    """Certified upper side of op_norm: exact where possible, else the best available bound."""
    if u.is_zero:
        return NormEstimate.exact(0.0, meta="zero operator")
    a = u.matrix
    m, n = a.shape
    p, q = u.domain.exp, u.codomain.exp
    cap = resolve_cap(cap)
    exact = None if (p.is_inf and q.value == 1 and n > cap) else _exact_rule(a, p, q, cap)
    if exact is not None:
        return exact
    if p.is_inf and n <= cap:
        value, _ = max_over_signs(a, q, cap=cap)
        return NormEstimate.exact(value, meta="sign enumeration over the l_inf domain")
    if q.value == 1 and m <= cap:
        value, _ = max_over_signs(a.T, p.dual(), cap=cap)
        return NormEstimate.exact(value, meta="sign enumeration of the adjoint")
    holder = p_norm(row_norms(a.T, q), p.dual())
    sigma1 = float(sla.svdvals(a)[0])
    inv_p = 0.0 if p.is_inf else 1.0 / p.value
    inv_q = 0.0 if q.is_inf else 1.0 / q.value
    comparison = sigma1 * m ** max(0.0, inv_q - 0.5) * n ** max(0.0, 0.5 - inv_p)
    if holder <= comparison:
        return NormEstimate.upper(holder, meta="column Hoelder bound")
    return NormEstimate.upper(comparison, meta="l_2 comparison bound")
