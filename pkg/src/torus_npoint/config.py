"""Run configuration with environment-variable overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

from .series import DEFAULT_TRUNC
from .elliptic import DEFAULT_ZORDER
from .matchings import DEFAULT_CAP, HARD_CAP
from .oracle import DEFAULT_WEIGHT_CAP

ENV_PREFIX = "TORUS_NPOINT_"


@dataclass(frozen=True)
class RunConfig:
    trunc: int = DEFAULT_TRUNC
    zorder: int = DEFAULT_ZORDER
    tolerance: float = 1e-10
    involution_cap: int = DEFAULT_CAP
    weight_cap: int = DEFAULT_WEIGHT_CAP
    threads: int = 1
    output_format: str = "json"
    seed: int = 0

    def __post_init__(self):
        if self.trunc < 1:
            raise ValueError("trunc must be at least 1")
        if self.zorder < 1:
            raise ValueError("zorder must be at least 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not 1 <= self.involution_cap <= HARD_CAP:
            raise ValueError(f"involution cap must lie in 1..{HARD_CAP}")
        if self.weight_cap < 1 or self.threads < 1:
            raise ValueError("caps and thread count must be at least 1")
        if self.output_format not in ("json", "pretty"):
            raise ValueError("output format must be 'json' or 'pretty'")

    @classmethod
    def from_env(cls, env=None, **overrides) -> "RunConfig":
        env = os.environ if env is None else env
        casts = {
            "trunc": int,
            "zorder": int,
            "tolerance": float,
            "involution_cap": int,
            "weight_cap": int,
            "threads": int,
            "output_format": str,
            "seed": int,
        }
        values = {}
        for name, cast in casts.items():
            raw = env.get(ENV_PREFIX + name.upper())
            if raw is not None:
                values[name] = cast(raw)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return replace(cls(), **values)
