import logging
import os
from functools import lru_cache

from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

VERSION = "0.1.0"


class Limits(BaseModel):
    """Process-wide limits for enumerations, nets and parallel loops."""

    enum_cap: int = Field(20, ge=1, le=30, description="Max bits of one sign enumeration")
    bilinear_cap: int = Field(22, ge=2, le=40, description="Max rows+cols for the ∞→1 enumeration")
    net_size: int = Field(4096, ge=8, description="Quasi-Monte-Carlo sphere-net size")
    workers: int = Field(1, ge=1, description="Threads for blocked Monte Carlo and multistart")
    block_size: int = Field(8192, ge=64, description="Monte Carlo block size")


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("ignoring non-integer %s=%r, using %s", name, raw, default)
        return default


@lru_cache(maxsize=1)
def get_limits() -> Limits:
    """Build and cache the limits from SUMMA_* environment variables.

    Call `get_limits.cache_clear()` after changing the environment.
    """
    limits = Limits(
        enum_cap=_env_int("SUMMA_ENUM_CAP", 20),
        bilinear_cap=_env_int("SUMMA_BILINEAR_CAP", 22),
        net_size=_env_int("SUMMA_NET_SIZE", 4096),
        workers=_env_int("SUMMA_WORKERS", 1),
        block_size=_env_int("SUMMA_BLOCK_SIZE", 8192),
    )
    logger.debug("limits %s", limits.model_dump())
    return limits


def resolve_cap(cap: int | None) -> int:
    return get_limits().enum_cap if cap is None else int(cap)
