"""Generic-uniqueness checklist for Y = A(z) B(z)^T.

The six checks are: A generically of full column rank; analytic coordinate
transforms; a point where det J(f) is nonzero; span dimension N_hat of
Range(r); generic Jacobian rank l_hat; and R <= N_hat - l_hat (or one less
when Range(r) is not closed under scaling).  Each check reports
pass / fail / inconclusive with its numeric evidence.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import PoleError, SamplingExhausted, TransformSingular
from .model import ColumnModel, FactorModel, GenericDense, jacobian_f
from .numrank import (
    RANK_TOL,
    RankEvidence,
    a_full_rank_probe,
    gaussian,
    generic_jacobian_rank,
    sample_points,
    span_dimension,
)
from .solve import ACCEPT_TOL, MATCH_TOL, project_onto_range

SCHEMA_VERSION = 1
PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
STUCK_RESIDUAL = 1e-3


@dataclass(frozen=True)
class Tolerances:
    rank_tol: float = RANK_TOL
    accept_tol: float = ACCEPT_TOL
    match_tol: float = MATCH_TOL


@dataclass
class AssumptionEntry:
    verdict: str
    evidence: dict = field(default_factory=dict)


@dataclass
class ChecklistReport:
    assumptions: dict  # 1..6 -> AssumptionEntry
    n_hat: int | None
    l_hat: int | None
    scaling_invariant: str  # true | false | inconclusive
    scaling_source: str  # declared | probed
    certified_max_r: int | None
    verdict: str  # pass | fail-bound | fail-assumption | inconclusive
    R: int
    K: int
    seed: int
    tolerances: Tolerances
    scaling_evidence: dict = field(default_factory=dict)

    @property
    def unique(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return jsonable({
            "schema_version": SCHEMA_VERSION,
            "assumptions": {str(k): asdict(v) for k, v in sorted(self.assumptions.items())},
            "n_hat": self.n_hat,
            "l_hat": self.l_hat,
            "scaling_invariant": {
                "value": self.scaling_invariant,
                "source": self.scaling_source,
                "evidence": self.scaling_evidence,
            },
            "certified_max_r": self.certified_max_r,
            "R": self.R,
            "K": self.K,
            "verdict": self.verdict,
            "seed": self.seed,
            "tolerances": asdict(self.tolerances),
        })


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples into JSON-native types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(obj.real), jsonable(obj.imag)]
    return obj


# -- individual checks --------------------------------------------------------

def _rank_entry(ev: RankEvidence, ok: bool) -> AssumptionEntry:
    if not ev.agreement:
        return AssumptionEntry(INCONCLUSIVE, {**ev.to_dict(), "note": "independent batches disagree"})
    return AssumptionEntry(PASS if ok else FAIL, ev.to_dict())


def check_a_rank(model: FactorModel, seed: int, tol: float) -> AssumptionEntry:
    ev = a_full_rank_probe(model, seed, tol=tol)
    if isinstance(model.a_spec, GenericDense):
        # a generic dense K x R matrix has full column rank exactly when K >= R
        verdict = PASS if model.K >= model.R else FAIL
        return AssumptionEntry(verdict, {**ev.to_dict(), "rule": "generic dense: K >= R"})
    return _rank_entry(ev, ev.estimate == model.R)


def check_analytic(cm: ColumnModel) -> AssumptionEntry:
    return AssumptionEntry(PASS, {
        "primitives": [p.text() for p in cm.transform.prims],
        "rule": "every shipped primitive is entire or a ratio of entire functions",
    })


def check_transform_jacobian(cm: ColumnModel, seed: int, attempts: int = 10) -> AssumptionEntry:
    for attempt in range(attempts):
        zeta = gaussian(np.random.default_rng([seed, 3, attempt]), cm.l)
        try:
            d = np.diag(jacobian_f(cm.transform, zeta))
        except TransformSingular:
            continue
        if np.min(np.abs(d)) > 1e-12:
            return AssumptionEntry(PASS, {
                "attempts": attempt + 1,
                "abs_det": float(np.prod(np.abs(d))),
                "min_abs_diagonal": float(np.min(np.abs(d))),
            })
    return AssumptionEntry(FAIL, {"attempts": attempts, "note": "det J(f) vanished at every draw"})


def scaling_probe(
    cm: ColumnModel,
    seed: int,
    trials: int = 5,
    starts: int = 8,
    accept_tol: float = ACCEPT_TOL,
) -> tuple[str, dict]:
    """Numerically test lambda * Range(r) within Range(r): invariant | not-invariant | inconclusive."""
    if trials < 5:
        raise ValueError("trials must be >= 5")
    records = []
    stuck = False
    for t in range(trials):
        rng = np.random.default_rng([seed, 6, t])
        try:
            _, V, _ = sample_points(cm, rng, 1)
        except SamplingExhausted:
            records.append({"trial": t, "residual": None})
            continue
        lam = complex(gaussian(rng, 1)[0])
        proj = project_onto_range(cm, lam * V[0], seed=seed + 7919 * (t + 1), starts=starts, use_transform=False)
        records.append({"trial": t, "lambda": lam, "residual": proj.residual, "all_converged": proj.all_converged})
        if proj.residual > STUCK_RESIDUAL and proj.all_converged:
            stuck = True
    residuals = [r["residual"] for r in records]
    if all(r is not None and r < accept_tol for r in residuals):
        status = "invariant"
    elif stuck:
        status = "not-invariant"
    else:
        status = INCONCLUSIVE
    return status, {"trials": records, "accept_tol": accept_tol, "stuck_threshold": STUCK_RESIDUAL}


def bound_from(n_hat: int, l_hat: int, K: int, invariant: bool) -> int:
    return min(K, n_hat - l_hat - (0 if invariant else 1))


# -- checklist ----------------------------------------------------------------

def certify_generic_uniqueness(
    model: FactorModel,
    seed: int,
    tol: Tolerances = Tolerances(),
    batch: int | None = None,
    trials: int = 8,
    scaling_trials: int = 5,
) -> ChecklistReport:
    """Run all six checks and combine them into a certified maximum R and a verdict."""
    cm = model.column
    entries: dict[int, AssumptionEntry] = {}
    entries[1] = check_a_rank(model, seed, tol.rank_tol)
    entries[2] = check_analytic(cm)
    entries[3] = check_transform_jacobian(cm, seed)

    n_hat = l_hat = None
    try:
        ev = span_dimension(cm, seed, batch, tol.rank_tol)
        entries[4] = _rank_entry(ev, ev.estimate >= 1)
        n_hat = ev.estimate if ev.agreement else None
    except SamplingExhausted as exc:
        entries[4] = AssumptionEntry(INCONCLUSIVE, {"error": str(exc)})
    try:
        ev = generic_jacobian_rank(cm, seed, trials, tol.rank_tol)
        entries[5] = _rank_entry(ev, True)
        l_hat = ev.estimate if ev.agreement else None
    except SamplingExhausted as exc:
        entries[5] = AssumptionEntry(INCONCLUSIVE, {"error": str(exc)})

    if model.scaling_invariant in ("true", "false"):
        scaling, source, scaling_ev = model.scaling_invariant, "declared", {}
    else:
        status, scaling_ev = scaling_probe(cm, seed, scaling_trials, accept_tol=tol.accept_tol)
        scaling = {"invariant": "true", "not-invariant": "false"}.get(status, INCONCLUSIVE)
        source = "probed"

    certified = None
    first_five = [entries[k].verdict for k in range(1, 6)]
    if n_hat is not None and l_hat is not None:
        strict = bound_from(n_hat, l_hat, model.K, invariant=False)
        loose = bound_from(n_hat, l_hat, model.K, invariant=True)
        # an undecided scaling status falls back to the bound that holds either way
        usable = loose if scaling == "true" else strict
        evidence = {
            "n_hat": n_hat, "l_hat": l_hat, "K": model.K, "R": model.R,
            "bound_if_invariant": loose, "bound_if_not_invariant": strict, "bound_used": usable,
        }
        if model.R <= usable:
            entries[6] = AssumptionEntry(PASS, evidence)
        elif scaling == INCONCLUSIVE and model.R <= loose:
            entries[6] = AssumptionEntry(INCONCLUSIVE, {**evidence, "note": "depends on undecided scaling invariance"})
        else:
            entries[6] = AssumptionEntry(FAIL, evidence)
        if all(v == PASS for v in first_five):
            certified = usable
    else:
        entries[6] = AssumptionEntry(INCONCLUSIVE, {"note": "N_hat or l_hat unavailable"})

    if FAIL in first_five:
        verdict = "fail-assumption"
    elif INCONCLUSIVE in first_five:
        verdict = INCONCLUSIVE
    elif entries[6].verdict == PASS:
        verdict = "pass"
    elif entries[6].verdict == FAIL:
        verdict = "fail-bound"
    else:
        verdict = INCONCLUSIVE
    return ChecklistReport(
        assumptions=entries, n_hat=n_hat, l_hat=l_hat,
        scaling_invariant=scaling, scaling_source=source, certified_max_r=certified,
        verdict=verdict, R=model.R, K=model.K, seed=seed, tolerances=tol, scaling_evidence=scaling_ev,
    )


# -- deterministic condition falsifier ---------------------------------------

@dataclass
class Condition2Probe:
    trials: list
    violation_found: bool
    note: str = "a clean probe is evidence, not proof"

    def to_dict(self) -> dict:
        return jsonable(asdict(self))


def condition2_falsifier(
    b_points,
    cm: ColumnModel,
    seed: int,
    trials: int = 50,
    starts: int = 8,
    accept_tol: float = ACCEPT_TOL,
    match_tol: float = MATCH_TOL,
    domain: str = "complex",
    lambdas=None,
) -> Condition2Probe:
    """Search for combinations sum lambda_r b_r (>= 2 nonzero lambdas) that land back in Range(b).

    Random trials pick k in 2..R nonzeros uniformly; ``lambdas`` appends explicit
    coefficient vectors, each of which must have at least two nonzeros.
    """
    Bm = np.asarray(b_points, dtype=complex)
    if Bm.ndim != 2 or Bm.shape[1] < 2:
        raise ValueError("need an N x R matrix of columns with R >= 2")
    N, R = Bm.shape
    if N != cm.N:
        raise ValueError("column length does not match the model")
    plan = []
    for t in range(trials):
        rng = np.random.default_rng([seed, 8, t])
        k = int(rng.integers(2, R + 1))
        support = rng.choice(R, size=k, replace=False)
        lam = np.zeros(R, dtype=complex)
        lam[support] = gaussian(rng, k, domain)
        plan.append(lam)
    for lam in lambdas or []:
        lam = np.asarray(lam, dtype=complex)
        if lam.shape != (R,) or np.count_nonzero(lam) < 2:
            raise ValueError("each lambda needs length R and at least two nonzero entries")
        plan.append(lam)

    records = []
    violation = False
    for t, lam in enumerate(plan):
        v = Bm @ lam
        proj = project_onto_range(cm, v, seed=seed + 104729 * (t + 1), starts=starts, domain=domain)
        hit = False
        if proj.zeta is not None and proj.residual < accept_tol:
            try:
                matched_pt = cm.evaluate_b(proj.zeta[None, :])[0][0]
            except PoleError:  # pragma: no cover
                matched_pt = None
            scale = np.linalg.norm(v) or 1.0
            single = matched_pt is not None and any(
                np.linalg.norm(matched_pt - lam[r] * Bm[:, r]) <= match_tol * scale for r in range(R) if lam[r] != 0
            )
            hit = not single
        violation |= hit
        records.append({
            "lambda": lam,
            "nonzeros": int(np.count_nonzero(lam)),
            "residual": proj.residual,
            "converged": proj.all_converged,
            "violation": hit,
        })
    return Condition2Probe(records, violation)
