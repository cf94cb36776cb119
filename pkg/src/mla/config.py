"""Blocking and scheduling parameters.

Cache blocking defaults follow the usual five-loop shapes for double
precision; environment variables MLA_MC/MLA_KC/MLA_NC/MLA_MR/MLA_NR
override them, MLA_THREADS overrides the pool size.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

VARIANTS = ("lu", "lu_la", "lu_ws_static", "lu_mb", "lu_et")

_ENV_FIELDS = {
    "m_c": "MLA_MC",
    "k_c": "MLA_KC",
    "n_c": "MLA_NC",
    "m_r": "MLA_MR",
    "n_r": "MLA_NR",
}


@dataclass(frozen=True)
class CacheConfig:
    """Tile sizes for the packed matrix-multiply kernels.

    m_c/k_c/n_c are the cache block extents, m_r/n_r the register tile.
    m_c is rounded down to a multiple of m_r, n_c to a multiple of n_r,
    so packed slabs always hold whole register tiles.
    """

    m_c: int = 256
    k_c: int = 256
    n_c: int = 4096
    m_r: int = 8
    n_r: int = 4

    def __post_init__(self) -> None:
        for name in ("m_c", "k_c", "n_c", "m_r", "n_r"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        object.__setattr__(self, "m_c", max(self.m_r, self.m_c - self.m_c % self.m_r))
        object.__setattr__(self, "n_c", max(self.n_r, self.n_c - self.n_c % self.n_r))

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None, **overrides: int) -> "CacheConfig":
        """Build a config from MLA_* variables, keyword overrides winning."""
        env = os.environ if env is None else env
        kwargs: dict[str, int] = {}
        for field, var in _ENV_FIELDS.items():
            if var in env:
                kwargs[field] = int(env[var])
        kwargs.update(overrides)
        return cls(**kwargs)


@dataclass(frozen=True)
class BlockConfig:
    """Outer (panel) and inner (panel-of-panel) block widths."""

    b_outer: int
    b_inner: int

    def __post_init__(self) -> None:
        if not 1 <= self.b_inner <= self.b_outer:
            raise ValueError("need 1 <= b_inner <= b_outer")


@dataclass(frozen=True)
class Policy:
    """Which factorization variant runs and how the pool is split."""

    variant: str
    b: BlockConfig
    t_pf: int = 1
    q: int = 4

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.t_pf < 1:
            raise ValueError("t_pf must be >= 1")
        if self.q < 1:
            raise ValueError("q must be >= 1")


def threads_from_env(default: int | None = None) -> int:
    """Pool size: MLA_THREADS if set, else `default`, else the CPU count."""
    raw = os.environ.get("MLA_THREADS", "").strip()
    if raw:
        t = int(raw)
        if t < 1:
            raise ValueError("MLA_THREADS must be >= 1")
        return t
    if default is not None:
        return default
    return os.cpu_count() or 1
