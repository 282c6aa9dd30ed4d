"""Run configuration shared by the CLI and the experiment scripts."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .certify import Tolerances
from .numrank import RANK_TOL
from .solve import ACCEPT_TOL, MATCH_TOL

DEFAULT_SEED = 0xF4C701D
MIN_RESTARTS = 10


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    rank_tol: float = RANK_TOL
    accept_tol: float = ACCEPT_TOL
    match_tol: float = MATCH_TOL
    restarts: int = 20
    batch: int | None = None
    out: str | None = None
    format: str = "text"

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.format not in ("text", "json"):
            raise ValueError("format must be text or json")
        for name in ("rank_tol", "accept_tol", "match_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def tolerances(self) -> Tolerances:
        return Tolerances(self.rank_tol, self.accept_tol, self.match_tol)

    def to_dict(self) -> dict:
        # the output path is excluded so reports do not depend on where they are written
        d = asdict(self)
        d.pop("out")
        return d
