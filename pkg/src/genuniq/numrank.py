"""Seeded Monte Carlo estimates of generic ranks and span dimensions.

Every estimate is computed twice, from two independent seed streams
(``seed`` and ``seed + 2**32``), and accepted only when both agree.
Per-trial generators are keyed by ``(seed, trial)`` so results never depend
on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PoleError, SamplingExhausted
from .model import ColumnModel, ExpressionA, FactorModel, GenericDense

RANK_TOL = 1e-9
SECOND_STREAM = 2**32


@dataclass
class RankEvidence:
    estimate: int
    gap: float  # sigma_{k+1} / sigma_1 at the accepted rank k (0 when k is full)
    samples: int
    seed: int
    agreement: bool
    details: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.agreement

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "gap": self.gap,
            "samples": self.samples,
            "seed": self.seed,
            "agreement": self.agreement,
            **self.details,
        }


def singular_values(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return np.zeros(0)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return np.linalg.svd(M, compute_uv=False)


def numeric_rank(M, tol: float = RANK_TOL) -> int:
    """Number of singular values above ``tol * sigma_1`` (0 for the zero matrix)."""
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    s = singular_values(M)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def _gap(s: np.ndarray, k: int) -> float:
    if s.size == 0 or s[0] == 0 or k >= s.size:
        return 0.0
    return float(s[k] / s[0])


def gaussian(rng: np.random.Generator, shape, domain: str = "complex") -> np.ndarray:
    """Standard (circular, when complex) Gaussian draws."""
    if domain == "real":
        return rng.standard_normal(shape).astype(complex)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def sample_points(cm: ColumnModel, rng: np.random.Generator, count: int, jac: bool = False):
    """Draw ``count`` pole-free complex Gaussian points; returns (X, values, jac)."""
    X_ok, V_ok, J_ok = [], [], []
    have = drawn = 0
    limit = 10 * count
    while have < count:
        if drawn >= limit:
            raise SamplingExhausted(f"{drawn - have} of {drawn} draws hit poles")
        X = gaussian(rng, (count, cm.l))
        drawn += count
        V, J, bad = cm.evaluate(X, jac=jac)
        ok = ~bad.any(axis=1)
        X_ok.append(X[ok])
        V_ok.append(V[ok])
        if jac:
            J_ok.append(J[ok])
        have += int(ok.sum())
    X = np.concatenate(X_ok)[:count]
    V = np.concatenate(V_ok)[:count]
    J = np.concatenate(J_ok)[:count] if jac else None
    return X, V, J


def _span_batch(cm: ColumnModel, seed: int, batch: int, tol: float):
    rng = np.random.default_rng([seed])
    _, V, _ = sample_points(cm, rng, batch)
    # unit columns keep the estimate insensitive to wildly different sample magnitudes
    norms = np.linalg.norm(V, axis=1)
    V = V[norms > 0] / norms[norms > 0, None]
    M = V.T
    s = singular_values(M)
    k = numeric_rank(M, tol) if M.size else 0
    return k, _gap(s, k)


def span_dimension(cm: ColumnModel, seed: int, batch: int | None = None, tol: float = RANK_TOL) -> RankEvidence:
    """Dimension of span{r(x)} estimated from ``batch`` random complex points (twice)."""
    batch = cm.N + 32 if batch is None else batch
    if batch < cm.N + 10:
        raise ValueError(f"batch must be at least N + 10 = {cm.N + 10}")
    k1, g1 = _span_batch(cm, seed, batch, tol)
    k2, g2 = _span_batch(cm, seed + SECOND_STREAM, batch, tol)
    return RankEvidence(
        estimate=min(k1, k2),
        gap=max(g1, g2),
        samples=2 * batch,
        seed=seed,
        agreement=k1 == k2,
        details={"batch_estimates": [k1, k2], "rank_tol": tol},
    )


def _trial_point(cm: ColumnModel, seed: int, trial: int):
    rng = np.random.default_rng([seed, trial])
    _, _, J = sample_points(cm, rng, 1, jac=True)
    return J[0]


def generic_jacobian_rank(cm: ColumnModel, seed: int, trials: int = 8, tol: float = RANK_TOL) -> RankEvidence:
    """Maximum numeric rank of J(r, x) over random complex points, from two seed streams."""
    if trials < 5:
        raise ValueError("trials must be >= 5")
    streams = []
    gaps = []
    for base in (seed, seed + SECOND_STREAM):
        ranks = []
        for t in range(trials):
            J = _trial_point(cm, base, t)
            k = numeric_rank(J, tol)
            ranks.append(k)
            gaps.append(_gap(singular_values(J), k))
        streams.append(ranks)
    best = [max(r) for r in streams]
    return RankEvidence(
        estimate=min(best),
        gap=max(gaps),
        samples=2 * trials,
        seed=seed,
        agreement=best[0] == best[1],
        details={"trial_ranks": streams, "rank_tol": tol},
    )


def random_a(model: FactorModel, rng: np.random.Generator) -> np.ndarray:
    """A random instance of the model's A factor."""
    if isinstance(model.a_spec, ExpressionA):
        return model.a_spec.evaluate(gaussian(rng, model.a_spec.m, model.domain))
    return gaussian(rng, (model.K, model.R), model.domain)


def a_full_rank_probe(model: FactorModel, seed: int, trials: int = 3, tol: float = RANK_TOL) -> RankEvidence:
    """Generic rank of A(z) at random parameters; passes when it equals R."""
    if trials < 3:
        raise ValueError("trials must be >= 3")
    streams = []
    for base in (seed, seed + SECOND_STREAM):
        ranks = []
        for t in range(trials):
            try:
                ranks.append(numeric_rank(random_a(model, np.random.default_rng([base, t])), tol))
            except PoleError:
                ranks.append(0)
        streams.append(ranks)
    best = [max(r) for r in streams]
    details = {"trial_ranks": streams, "required": model.R, "rank_tol": tol}
    if isinstance(model.a_spec, GenericDense):
        details["generic_dense"] = True
    return RankEvidence(
        estimate=min(best), gap=0.0, samples=2 * trials, seed=seed, agreement=best[0] == best[1], details=details
    )
