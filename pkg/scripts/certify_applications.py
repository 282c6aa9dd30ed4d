"""Run the uniqueness checklist over a grid of source models and compare the
certified maximum R with the closed-form bound of each family."""

import argparse
from dataclasses import dataclass, field

from genuniq.apps.sources import example_model, exp_poly_model, rational_model
from genuniq.certify import certify_generic_uniqueness
from genuniq.config import DEFAULT_SEED


@dataclass
class GridConfig:
    seed: int = DEFAULT_SEED
    exp_poly: list = field(default_factory=lambda: [(1, (0,), 8), (1, (1,), 10), (2, (0, 0), 12), (2, (1, 0), 12)])
    rational: list = field(default_factory=lambda: [(1, 1, 10), (0, 1, 8), (2, 1, 10), (1, 2, 10)])
    example_sizes: tuple = (10, 20)


def _row(label, model, bound, seed):
    rep = certify_generic_uniqueness(model.with_dims(K=max(model.K, bound + 3), R=bound), seed)
    status = "ok" if rep.certified_max_r == bound else "differs"
    print(f"{label:<34} N_hat={rep.n_hat!s:>3} l_hat={rep.l_hat!s:>3} "
          f"certified={rep.certified_max_r!s:>3} bound={bound:>3}  {rep.verdict:<16}{status}")
    return rep.certified_max_r == bound


def run(cfg: GridConfig) -> bool:
    ok = True
    for F, degrees, N in cfg.exp_poly:
        model, bound = exp_poly_model(F, degrees, N)
        ok &= _row(f"exp-poly F={F} d={degrees} N={N}", model, bound, cfg.seed)
    for p, q, N in cfg.rational:
        model, bound = rational_model(p, q, N)
        ok &= _row(f"rational p={p} q={q} N={N}", model, bound, cfg.seed)
    for N in cfg.example_sizes:
        model, bound = example_model(N)
        ok &= _row(f"mixed example N={N}", model, bound, cfg.seed)
    return ok


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)
    args = parser.parse_args()
    raise SystemExit(0 if run(GridConfig(seed=args.seed)) else 1)
