"""Run configuration: tolerances and sampling depth.

Defaults target desk-scale dense matrices (n <= 64) with moderate
conditioning and exact rational diagonal data.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from fractions import Fraction

DEPTH_ENV_VAR = "AGD_DEPTH"


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds used by the matrix engine and verifiers.

    res:      relative residual bound for operator identities.
    clust:    eigenvalue clustering radius, relative to the matrix norm.
    rank:     singular value threshold for rank decisions, relative to
              the matrix norm.
    idem:     absolute bound on ``||p^2 - p||`` scaled by ``1 + ||p||^2``.
    sep:      minimal eigenvalue separation between the two sides of a
              spectral split.
    gap_rel:  required clearance of a cut circle, relative to its radius.
    eq:       absolute tolerance for approximate scalar equality.
    """

    res: float = 1e-10
    clust: float = 1e-8
    rank: float = 1e-10
    idem: float = 1e-10
    sep: float = 1e-6
    gap_rel: Fraction = Fraction(1, 10**8)
    eq: float = 1e-12

    def __post_init__(self) -> None:
        for name in ("res", "clust", "rank", "idem", "sep", "eq"):
            if getattr(self, name) <= 0:
                raise ValueError(f"tolerance {name} must be positive")
        if self.gap_rel <= 0:
            raise ValueError("gap_rel must be positive")


DEFAULT_TOLERANCES = Tolerances()


def _default_depth() -> int:
    raw = os.environ.get(DEPTH_ENV_VAR)
    if raw is None:
        return 1000
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"{DEPTH_ENV_VAR} must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    """Full configuration for one batch run."""

    tolerances: Tolerances = field(default_factory=Tolerances)
    depth: int = field(default_factory=_default_depth)
    output: str = "text"

    def __post_init__(self) -> None:
        if self.depth < 10:
            raise ValueError("sampling depth must be at least 10")
        if self.output not in ("text", "machine"):
            raise ValueError("output must be 'text' or 'machine'")

    def with_tolerances(self, **kwargs) -> "RunConfig":
        return replace(self, tolerances=replace(self.tolerances, **kwargs))


DEFAULT_CONFIG = RunConfig()
