import logging
import math
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import stats
from scipy.stats import qmc

from summa.config import get_limits, resolve_cap
from summa.errors import DegenerateInputError, EnumerationCapError
from summa.linalg import (
    Exponent,
    NormEstimate,
    Operator,
    SpaceSpec,
    ascent_p_to_q,
    max_over_signs,
    op_norm_upper,
    p_norm,
    row_norms,
    sign_blocks,
)

logger = logging.getLogger(__name__)


class VectorFamily(BaseModel):
    """Ordered family x_1, …, x_N in a finite-dimensional ℓ_p space (rows of `vectors`)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    space: SpaceSpec
    vectors: np.ndarray

    @model_validator(mode="before")
    @classmethod
    def _as_array(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        space = data.get("space")
        dim = space.dim if isinstance(space, SpaceSpec) else (space or {}).get("dim")
        v = np.array(data.get("vectors", []), dtype=float)
        if v.ndim == 1 and dim is not None and v.size % dim == 0:
            v = v.reshape(-1, dim)
        return {**data, "vectors": v}

    @model_validator(mode="after")
    def _shape(self) -> "VectorFamily":
        v = self.vectors
        if v.ndim != 2 or v.shape[1] != self.space.dim:
            raise ValueError(f"vectors must have shape (N, {self.space.dim}), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("family has non-finite entries")
        return self

    @classmethod
    def of(cls, vectors: Any, p: "Exponent | float | str" = 2, dim: Optional[int] = None) -> "VectorFamily":
        v = np.array(vectors, dtype=float)
        if v.ndim == 1:
            v = v.reshape(0, dim) if v.size == 0 else v.reshape(1, -1)
        d = dim if dim is not None else v.shape[1]
        return cls(space=SpaceSpec.lp(d, p), vectors=v)

    @classmethod
    def basis(cls, dim: int, p: "Exponent | float | str" = 2, count: Optional[int] = None) -> "VectorFamily":
        """The first `count` unit vectors e_1, …, e_count of ℓ_p^dim."""
        count = dim if count is None else count
        return cls(space=SpaceSpec.lp(dim, p), vectors=np.eye(dim)[:count])

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    def mapped(self, u: Operator) -> "VectorFamily":
        """The image family (u x_n) in u's codomain."""
        if u.domain.dim != self.space.dim:
            raise DegenerateInputError(f"family lives in dimension {self.space.dim}, operator domain is {u.domain.label()}")
        return VectorFamily(space=u.codomain, vectors=self.vectors @ u.matrix.T)

    def evaluation_operator(self, p: "Exponent | float | str") -> Operator:
        """x* ↦ (⟨x_n, x*⟩)_n as an operator from the dual space into ℓ_p^N."""
        return Operator(matrix=self.vectors, domain=self.space.dual(), codomain=SpaceSpec.lp(self.size, p))


# =========================
# Normant sets
# =========================


def sphere_net(dim: int, size: Optional[int] = None, *, seed: int = 0, p: "Exponent | float | str" = 2) -> np.ndarray:
    """Quasi-Monte-Carlo net on the unit p-sphere of R^dim (rows).

    Scrambled Sobol points pushed through the inverse normal CDF, then
    normalised; the ℓ_2 directions are close to uniform.
    """
    size = get_limits().net_size if size is None else int(size)
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    pts = sampler.random_base2(m=max(1, math.ceil(math.log2(size))))[:size]
    z = stats.norm.ppf(np.clip(pts, 1e-12, 1 - 1e-12))
    norms = row_norms(z, p)
    return z / np.where(norms > 0, norms, 1.0)[:, None]


def dual_extreme_points(space: SpaceSpec, *, cap: Optional[int] = None) -> Optional[np.ndarray]:
    """Extreme points of the dual unit ball of `space` when they are finitely many.

    ℓ_∞ spaces: ±e_k. ℓ_1 spaces: all sign vectors (under the cap).
    Anything else: None.
    """
    d = space.dim
    if space.exp.is_inf:
        eye = np.eye(d)
        return np.vstack([eye, -eye])
    if space.exp.value == 1:
        cap = resolve_cap(cap)
        if d > cap:
            raise EnumerationCapError(d, cap, what="dual extreme points")
        return np.vstack(list(sign_blocks(d, cap=cap)))
    return None


# =========================
# Norms of families
# =========================


def strong_lp_norm(fam: VectorFamily, p: "Exponent | float | str") -> float:
    """(Σ_n ‖x_n‖^p)^{1/p} in the family's space norm."""
    if fam.size == 0:
        return 0.0
    return p_norm(row_norms(fam.vectors, fam.space.exp), p)


def weak_lp_norm(
    fam: VectorFamily,
    p: "Exponent | float | str",
    *,
    cap: Optional[int] = None,
    net_size: Optional[int] = None,
    restarts: int = 32,
    seed: int = 0,
) -> NormEstimate:
    """sup over the dual unit ball of (Σ_n |⟨x_n, x*⟩|^p)^{1/p}.

    Exact when the dual ball has finitely many extreme points (ℓ_1 and ℓ_∞
    hosts) or for p = 2 in ℓ_2; otherwise a certified lower bound from a
    sphere net refined by ascent.
    """
    p = Exponent.of(p)
    if fam.size == 0:
        return NormEstimate.exact(0.0, meta="empty family")
    x = fam.vectors
    s = fam.space.exp
    if s.value == 1:
        value, _ = max_over_signs(x, p, cap=cap)
        return NormEstimate.exact(value, meta="dual sign vectors")
    if s.is_inf:
        return NormEstimate.exact(float(np.max(row_norms(x.T, p))), meta="dual coordinate functionals")
    if s.value == 2 and p.value == 2:
        return NormEstimate.exact(float(np.linalg.svd(x, compute_uv=False)[0]), meta="largest singular value")

    dual = s.dual()
    net = sphere_net(fam.space.dim, net_size, seed=seed, p=dual)
    vals = row_norms(net @ x.T, p)
    top = np.argsort(-vals, kind="stable")[:8]
    value, _ = ascent_p_to_q(x, dual, p, restarts=restarts, seed=seed, extra_starts=net[top].T)
    value = max(value, float(vals[top[0]]))
    logger.debug("weak_lp_norm net=%s p=%s host=%s value=%.12g", net.shape[0], p.label(), fam.space.label(), value)
    return NormEstimate.lower(value, meta=f"sphere net {net.shape[0]} + ascent")


def weak_lp_upper(fam: VectorFamily, p: "Exponent | float | str", *, cap: Optional[int] = None) -> NormEstimate:
    """Certified upper side of weak_lp_norm."""
    p = Exponent.of(p)
    if fam.size == 0:
        return NormEstimate.exact(0.0, meta="empty family")
    s = fam.space.exp
    if s.value == 1 and fam.space.dim > resolve_cap(cap):
        # host signs out of reach; bound the evaluation operator instead
        return op_norm_upper(fam.evaluation_operator(p), cap=cap)
    if s.value == 1 or s.is_inf or (s.value == 2 and p.value == 2):
        return weak_lp_norm(fam, p, cap=cap)
    return op_norm_upper(fam.evaluation_operator(p), cap=cap)


def sign_sup_norm(fam: VectorFamily, *, cap: Optional[int] = None) -> float:
    """max over ε in {−1,1}^N of ‖Σ ε_n x_n‖, by exhaustive enumeration."""
    if fam.size == 0:
        return 0.0
    value, _ = max_over_signs(fam.vectors.T, fam.space.exp, cap=cap)
    return value
