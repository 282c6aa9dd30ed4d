"""Damped Gauss-Newton machinery for structured factorizations.

Complex parameters are optimized as paired real coordinates ``[Re, Im]``;
in the real domain only the real halves are free.  Every model map is
holomorphic, so the real Jacobian is assembled from the complex one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import PoleError
from .model import ColumnModel, FactorModel
from .numrank import RANK_TOL, gaussian, numeric_rank, random_a

ACCEPT_TOL = 1e-8
MATCH_TOL = 1e-6
MAX_ITER = 200
GTOL = 1e-10


# -- Levenberg-Marquardt ------------------------------------------------------

@dataclass
class LMResult:
    x: np.ndarray
    cost: float  # 0.5 * ||r||^2
    iterations: int
    converged: bool
    grad_norm: float
    diverged: bool = False
    costs: list = field(default_factory=list)  # accepted costs, non-increasing


def levenberg_marquardt(fun, x0, max_iter: int = MAX_ITER, gtol: float = GTOL) -> LMResult:
    """Minimize 0.5 ||r(x)||^2 given ``fun(x) -> (r, J)`` (real arrays).

    Damping starts at 1e-3 * trace(J^T J) / dim, doubles on a rejected step and
    shrinks by 3 on an accepted one.  The gradient test is scale-free,
    ||J^T r|| <= gtol * ||J|| * ||r||, so zero-residual problems run on to
    machine precision instead of stopping once the residual is merely small.
    ``fun`` may raise :class:`PoleError`, which counts as a rejected step.
    """
    x = np.asarray(x0, dtype=float).copy()
    try:
        r, J = fun(x)
    except PoleError:
        return LMResult(x, np.inf, 0, False, np.inf, diverged=True)
    cost = 0.5 * float(r @ r)
    g = J.T @ r
    H = J.T @ J
    mu = 1e-3 * np.trace(H) / max(x.size, 1) or 1e-3
    costs = [cost]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= gtol * np.linalg.norm(J) * np.sqrt(2 * cost) or cost < 1e-30:
            converged = True
            break
        try:
            step = np.linalg.solve(H + mu * np.eye(x.size), -g)
        except np.linalg.LinAlgError:
            mu *= 2
            continue
        if np.linalg.norm(step) <= 1e-15 * (1 + np.linalg.norm(x)):
            converged = mu < 1e10
            break
        x_new = x + step
        try:
            # overflow just means a rejected step
            with np.errstate(over="ignore", invalid="ignore"):
                r_new, J_new = fun(x_new)
                cost_new = 0.5 * float(r_new @ r_new)
        except PoleError:
            cost_new = np.inf
        if np.isfinite(cost_new) and cost_new < cost:
            x, r, J, cost = x_new, r_new, J_new, cost_new
            g = J.T @ r
            H = J.T @ J
            mu /= 3
            costs.append(cost)
        else:
            mu *= 2
            if mu > 1e30:
                break
    return LMResult(x, cost, it, converged, float(np.linalg.norm(g)), costs=costs)


def _pack(Z: np.ndarray, domain: str) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex).ravel()
    return Z.real.copy() if domain == "real" else np.concatenate([Z.real, Z.imag])


def _unpack(theta: np.ndarray, shape, domain: str) -> np.ndarray:
    if domain == "real":
        return theta.astype(complex).reshape(shape)
    p = theta.size // 2
    return (theta[:p] + 1j * theta[p:]).reshape(shape)


def _realify(res: np.ndarray, Jc: np.ndarray, domain: str):
    """Real residual and Jacobian w.r.t. the packed real parameters."""
    r = np.concatenate([res.real, res.imag])
    if domain == "real":
        J = np.vstack([Jc.real, Jc.imag])
    else:
        J = np.block([[Jc.real, -Jc.imag], [Jc.imag, Jc.real]])
    return r, J


# -- projection onto Range(b) -------------------------------------------------

@dataclass
class ProjectionResult:
    zeta: np.ndarray | None
    residual: float  # ||v - b(zeta)|| / ||v||
    residuals: list
    converged: list
    diverged: bool = False

    @property
    def all_converged(self) -> bool:
        return all(self.converged)


def _column_eval(cm: ColumnModel, Z, use_transform: bool, jac: bool):
    return cm.evaluate_b(Z, jac) if use_transform else cm.evaluate(Z, jac)


def project_onto_range(
    cm: ColumnModel,
    v,
    seed: int,
    starts: int = 8,
    domain: str = "complex",
    use_transform: bool = True,
    max_iter: int = MAX_ITER,
) -> ProjectionResult:
    """Best of ``starts`` LM runs for min ||v - b(zeta)||; ``use_transform=False`` projects onto Range(r)."""
    if starts < 1:
        raise ValueError("starts must be >= 1")
    v = np.asarray(v, dtype=complex)
    if not np.all(np.isfinite(v)):
        raise ValueError("target must be finite")
    scale = float(np.linalg.norm(v)) or 1.0

    def fun(theta):
        Z = _unpack(theta, (1, cm.l), domain)
        values, J, bad = _column_eval(cm, Z, use_transform, True)
        if bad.any():
            raise PoleError(int(np.flatnonzero(bad[0])[0]) + 1)
        return _realify((values[0] - v) / scale, J[0] / scale, domain)

    best = None
    residuals, converged = [], []
    for s in range(starts):
        rng = np.random.default_rng([seed, s])
        res = levenberg_marquardt(fun, _pack(gaussian(rng, cm.l, domain), domain), max_iter)
        rel = np.sqrt(2 * res.cost) if not res.diverged else np.inf
        residuals.append(float(rel))
        converged.append(bool(res.converged))
        if not res.diverged and (best is None or rel < best[0]):
            best = (rel, _unpack(res.x, (cm.l,), domain))
    if best is None:
        return ProjectionResult(None, np.inf, residuals, converged, diverged=True)
    return ProjectionResult(best[1], float(best[0]), residuals, converged)


# -- variable projection ------------------------------------------------------

@dataclass
class Decomposition:
    A: np.ndarray  # K x R
    zetas: np.ndarray  # R x l
    B: np.ndarray  # N x R, columns b(zeta_r)
    residual: float  # ||Y - A B^T||_F / ||Y||_F
    rank_deficient: bool = False
    diverged: bool = False
    iterations: int = 0

    @property
    def R(self) -> int:
        return self.A.shape[1]

    def terms(self) -> list[np.ndarray]:
        return [np.outer(self.A[:, r], self.B[:, r]) for r in range(self.R)]

    def reconstruct(self) -> np.ndarray:
        return self.A @ self.B.T


def build_b(cm: ColumnModel, zetas) -> np.ndarray:
    """N x R matrix with columns b(zeta_r); raises PoleError on a pole."""
    values, _, bad = cm.evaluate_b(np.atleast_2d(zetas))
    if bad.any():
        raise PoleError(int(np.flatnonzero(bad.any(axis=0))[0]) + 1)
    return values.T


def varpro_residual(Y, B) -> float:
    """||Y - Y (B^T)^+ B^T||_F / ||Y||_F."""
    Y = np.asarray(Y, dtype=complex)
    Bt = np.asarray(B).T
    return float(np.linalg.norm(Y - Y @ np.linalg.pinv(Bt, rtol=RANK_TOL) @ Bt) / np.linalg.norm(Y))


def varpro_fit(
    Y,
    model: FactorModel,
    seed: int,
    starts: int = 20,
    init=None,
    first_start: int = 0,
    max_iter: int = MAX_ITER,
) -> Decomposition:
    """Fit Y ~ A B(zeta)^T with A eliminated by least squares at every iterate.

    Start ``s`` draws its initial zetas from ``default_rng([seed, 1, s])``;
    ``init`` (a list of R x l arrays) replaces the random draws.
    """
    Y = np.asarray(Y, dtype=complex)
    K, N, R, l = model.K, model.N, model.R, model.l
    if R > K:
        raise ValueError(f"R={R} exceeds K={K}; only the overdetermined case is supported")
    if Y.shape != (K, N):
        raise ValueError(f"Y must be {K} x {N}")
    cm, domain = model.column, model.domain
    Yt = Y.T
    scale = float(np.linalg.norm(Y)) or 1.0

    def fun(theta):
        Z = _unpack(theta, (R, l), domain)
        V, J, bad = cm.evaluate_b(Z, jac=True)
        if bad.any():
            raise PoleError(int(np.flatnonzero(bad.any(axis=0))[0]) + 1)
        B = V.T
        Bp = np.linalg.pinv(B, rtol=RANK_TOL)
        At = Bp @ Yt
        Pperp = np.eye(N) - B @ Bp
        res = (Yt - B @ At) / scale
        # Kaufman's approximation: d res / d zeta_rj = -(I - P_B) db_r/dzeta_j a_r^T
        PJ = np.einsum("nm,rmj->rnj", Pperp, J)
        Jc = -np.einsum("rnj,rk->nkrj", PJ, At).reshape(N * K, R * l) / scale
        return _realify(res.ravel(), Jc, domain)

    inits = list(init) if init is not None else []
    n_starts = len(inits) if inits else starts
    if n_starts < 1:
        raise ValueError("need at least one start")
    candidates = []
    for s in range(n_starts):
        if inits:
            Z0 = np.asarray(inits[s], dtype=complex).reshape(R, l)
        else:
            Z0 = gaussian(np.random.default_rng([seed, 1, first_start + s]), (R, l), domain)
        res = levenberg_marquardt(fun, _pack(Z0, domain), max_iter)
        Z = _unpack(res.x, (R, l), domain)
        try:
            B = build_b(cm, Z)
        except PoleError:
            candidates.append((np.inf, s, None))
            continue
        A = (np.linalg.pinv(B, rtol=RANK_TOL) @ Yt).T
        resid = float(np.linalg.norm(Y - A @ B.T) / scale)
        deficient = numeric_rank(B) < R
        d = Decomposition(A, Z, B, resid, rank_deficient=deficient, diverged=res.diverged, iterations=res.iterations)
        candidates.append((resid, s, d))
    usable = [c for c in candidates if c[2] is not None and not c[2].rank_deficient]
    pool = usable or [c for c in candidates if c[2] is not None]
    if not pool:
        nan = np.full((K, R), np.nan, dtype=complex)
        return Decomposition(nan, np.full((R, l), np.nan, dtype=complex), np.full((N, R), np.nan), np.inf, diverged=True)
    return min(pool, key=lambda c: (c[0], c[1]))[2]


# -- matching -----------------------------------------------------------------

@dataclass
class MatchResult:
    matched: bool
    permutation: tuple  # permutation[r] = index in d2 of d1's term r
    scales: tuple  # b2[perm[r]] = scale[r] * b1[r]
    discrepancy: float

    def __bool__(self):
        return self.matched


def term_discrepancies(d1: Decomposition, d2: Decomposition) -> np.ndarray:
    """C[r, s] = ||T1_r - T2_s|| / max(||T1_r||, ||T2_s||) over rank-1 terms."""
    T1, T2 = d1.terms(), d2.terms()
    n1 = [np.linalg.norm(t) for t in T1]
    n2 = [np.linalg.norm(t) for t in T2]
    C = np.empty((len(T1), len(T2)))
    for r, t1 in enumerate(T1):
        for s, t2 in enumerate(T2):
            denom = max(n1[r], n2[s])
            C[r, s] = np.linalg.norm(t1 - t2) / denom if denom > 0 else 0.0
    return C


def _greedy(C: np.ndarray) -> list[int]:
    R = C.shape[0]
    perm = [-1] * R
    used_r, used_s = set(), set()
    for flat in np.argsort(C, axis=None, kind="stable"):
        r, s = divmod(int(flat), C.shape[1])
        if r in used_r or s in used_s:
            continue
        perm[r] = s
        used_r.add(r)
        used_s.add(s)
        if len(used_r) == R:
            break
    return perm


def match_decompositions(d1: Decomposition, d2: Decomposition, tol: float = MATCH_TOL) -> MatchResult:
    """Pair rank-1 terms up to permutation and reciprocal scaling."""
    if d1.A.shape != d2.A.shape or d1.B.shape != d2.B.shape:
        raise ValueError("decompositions have different (K, N, R)")
    if not (np.all(np.isfinite(d1.A)) and np.all(np.isfinite(d2.A))):
        return MatchResult(False, (), (), np.inf)
    C = term_discrepancies(d1, d2)
    perm = _greedy(C)
    worst = max(C[r, s] for r, s in enumerate(perm))
    if worst >= tol:
        rows, cols = linear_sum_assignment(C)
        exact = [int(c) for _, c in sorted(zip(rows, cols))]
        exact_worst = max(C[r, s] for r, s in enumerate(exact))
        if exact_worst < worst:
            perm, worst = exact, exact_worst
    scales = []
    for r, s in enumerate(perm):
        b1, b2 = d1.B[:, r], d2.B[:, s]
        denom = np.vdot(b1, b1)
        scales.append(complex(np.vdot(b1, b2) / denom) if denom != 0 else complex("nan"))
    return MatchResult(bool(worst < tol), tuple(perm), tuple(scales), float(worst))


# -- empirical uniqueness -----------------------------------------------------

@dataclass
class EmpiricalReport:
    verdict: str  # consistent | counterexample | inconclusive
    restarts: int
    converged: int
    matched: int
    degenerate: bool
    reason: str
    fits: list  # per restart: residual, converged, matched, discrepancy, rank_deficient
    truth_residual: float

    @property
    def match_fraction(self) -> float:
        return self.matched / self.converged if self.converged else 0.0

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "restarts": self.restarts,
            "converged": self.converged,
            "matched": self.matched,
            "match_fraction": self.match_fraction,
            "degenerate": self.degenerate,
            "reason": self.reason,
            "fits": self.fits,
        }


def random_truth(model: FactorModel, rng: np.random.Generator, attempts: int = 20) -> Decomposition:
    """Random ground truth (A, zetas) with a pole-free B."""
    for _ in range(attempts):
        A = random_a(model, rng)
        Z = gaussian(rng, (model.R, model.l), model.domain)
        try:
            B = build_b(model.column, Z)
        except PoleError:
            continue
        return Decomposition(A, Z, B, 0.0, rank_deficient=numeric_rank(B) < model.R)
    raise PoleError(0)


def empirical_uniqueness_test(
    model: FactorModel,
    seed: int,
    restarts: int = 20,
    accept_tol: float = ACCEPT_TOL,
    match_tol: float = MATCH_TOL,
    truth: Decomposition | None = None,
    min_restarts: int = 10,
) -> EmpiricalReport:
    """Fit a random noise-free instance from independent starts and compare every converged fit with the truth."""
    if truth is None:
        truth = random_truth(model, np.random.default_rng([seed, 0]))
    Y = truth.reconstruct()
    if restarts < min_restarts:
        return EmpiricalReport("inconclusive", restarts, 0, 0, False,
                               f"restarts={restarts} is below the minimum {min_restarts}", [], 0.0)
    degenerate = truth.rank_deficient or numeric_rank(truth.A) < model.R
    fits = []
    n_conv = n_match = 0
    counterexample = False
    for i in range(restarts):
        d = varpro_fit(Y, model, seed, starts=1, first_start=i)
        conv = bool(d.residual < accept_tol and not d.rank_deficient)
        m = match_decompositions(truth, d, match_tol) if np.isfinite(d.residual) else MatchResult(False, (), (), np.inf)
        n_conv += conv
        n_match += conv and m.matched
        counterexample |= conv and not m.matched
        fits.append({
            "restart": i,
            "residual": d.residual,
            "converged": conv,
            "matched": bool(m.matched),
            "discrepancy": m.discrepancy,
            "rank_deficient": bool(d.rank_deficient),
        })
    if degenerate:
        verdict, reason = "inconclusive", "ground truth is degenerate (rank-deficient factor)"
    elif n_conv < 3:
        verdict, reason = "inconclusive", f"only {n_conv} fits converged"
    elif counterexample:
        verdict, reason = "counterexample", "a converged fit differs from the ground truth"
    else:
        verdict, reason = "consistent", "every converged fit matches the ground truth"
    return EmpiricalReport(verdict, restarts, n_conv, n_match, degenerate, reason, fits, truth.residual)
