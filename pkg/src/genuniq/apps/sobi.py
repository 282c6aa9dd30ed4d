"""Second-order blind identification (SOBI) recast as a structured factorization.

Lagged covariances C_p = M D_p M^H are split into Hermitian and skew parts,
vectorized, and stacked into Y = A B^T with A = [Re D; Im D] (2P x R) and
B columns conj(m_r) kron m_r (I^2 x R).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ModelError
from ..expr import Const, Var, add, mul, sub
from ..model import ColumnModel, ExpressionA, FactorModel
from ..numrank import gaussian


@dataclass(frozen=True)
class SobiInstance:
    M: np.ndarray  # I x R mixing matrix
    D: np.ndarray  # P x R, row p holds diag(D_p)
    tau1_zero: bool = False

    def __post_init__(self):
        if self.M.ndim != 2 or self.D.ndim != 2 or self.M.shape[1] != self.D.shape[1]:
            raise ModelError("M must be I x R and D must be P x R")
        if self.tau1_zero and np.any(np.imag(self.D[0]) != 0):
            raise ModelError("tau1_zero instances need a real first row of D")

    @property
    def I(self) -> int:
        return self.M.shape[0]

    @property
    def P(self) -> int:
        return self.D.shape[0]

    @property
    def R(self) -> int:
        return self.M.shape[1]


def random_sobi_instance(I: int, P: int, R: int, rng: np.random.Generator, tau1_zero: bool = False) -> SobiInstance:
    M = gaussian(rng, (I, R))
    D = gaussian(rng, (P, R))
    if tau1_zero:
        D[0] = rng.standard_normal(R)
    return SobiInstance(M, D, tau1_zero)


def sobi_build(inst: SobiInstance) -> list[np.ndarray]:
    """Noise-free covariances C_p = M diag(D[p]) M^H."""
    Mh = inst.M.conj().T
    return [(inst.M * inst.D[p]) @ Mh for p in range(inst.P)]


def vec(X: np.ndarray) -> np.ndarray:
    """Column-major vectorization."""
    return np.asarray(X).reshape(-1, order="F")


def sobi_reformulate(C_list) -> np.ndarray:
    """Stack vec of the Hermitian parts, then of the skew parts over 2i, as rows of Y (2P x I^2)."""
    C_list = [np.asarray(C, dtype=complex) for C in C_list]
    if not C_list:
        raise ModelError("need at least one covariance matrix")
    I = C_list[0].shape[0]
    if any(C.shape != (I, I) for C in C_list):
        raise ModelError("covariance matrices must all be square of the same size")
    herm = [vec((C + C.conj().T) / 2) for C in C_list]
    skew = [vec((C - C.conj().T) / 2j) for C in C_list]
    return np.array(herm + skew)


def sobi_factors(inst: SobiInstance) -> tuple[np.ndarray, np.ndarray]:
    """The factors of the reformulation: A = [(D+D*)/2; (D-D*)/2i], B = [conj(m_r) kron m_r]."""
    D = inst.D
    A = np.vstack([(D + D.conj()) / 2, (D - D.conj()) / 2j])
    B = np.column_stack([np.kron(m.conj(), m) for m in inst.M.T])
    return A, B


def sobi_column(I: int) -> ColumnModel:
    """Rows of (u - i v) kron (u + i v) with u = x1..xI, v = x(I+1)..x(2I)."""
    if I < 1:
        raise ModelError("I must be positive")
    rows = []
    for a in range(I):
        left = sub(Var(a + 1), mul(Const(1j), Var(I + a + 1)))
        for b in range(I):
            right = add(Var(b + 1), mul(Const(1j), Var(I + b + 1)))
            rows.append(mul(left, right))
    return ColumnModel.from_rows(rows, 2 * I)


def sobi_a_spec(P: int, R: int, tau1_zero: bool = False) -> ExpressionA:
    """Real structured A: top block Re D, bottom block Im D (row P+1 zero when tau1_zero)."""
    entries = []
    idx = 0
    for block in range(2):
        for p in range(P):
            row = []
            for r in range(R):
                if block == 1 and p == 0 and tau1_zero:
                    row.append(Const(0))
                else:
                    idx += 1
                    row.append(Var(idx))
            entries.append(tuple(row))
    return ExpressionA(tuple(entries), idx)


def sobi_model(I: int, P: int, R: int | None = None, tau1_zero: bool = False) -> FactorModel:
    """FactorModel with K = 2P, N = I^2, l = 2I over the reals."""
    if I < 2 or P < 1:
        raise ModelError("need I >= 2 and P >= 1")
    R = sobi_bound(I, P, tau1_zero) if R is None else R
    return FactorModel(
        K=2 * P, N=I * I, R=R, l=2 * I,
        column=sobi_column(I), a_spec=sobi_a_spec(P, R, tau1_zero),
        domain="real", scaling_invariant="true",
    )


def sobi_bound(I: int, P: int, tau1_zero: bool = False) -> int:
    """min(2P, (I-1)^2), or min(2P-1, (I-1)^2) when the first lag is zero."""
    if I < 2 or P < 1:
        raise ModelError("need I >= 2 and P >= 1")
    return min(2 * P - (1 if tau1_zero else 0), (I - 1) ** 2)


def sobium_comparison_bound(I: int) -> int:
    """Largest R with R(R-1) <= I^2 (I-1)^2 / 2."""
    limit = I * I * (I - 1) ** 2  # compare 2R(R-1) <= limit in integers
    R = 0
    while 2 * (R + 1) * R <= limit:
        R += 1
    return R


def symmetric_comparison_bound(I: int) -> int:
    return (I * I - I) // 2


TABLE_SIZES = tuple(range(3, 10))
TABLE_EXPECTED = {
    "thm2": (4, 9, 16, 25, 36, 49, 64),
    "sobium": (4, 9, 14, 21, 30, 40, 51),
    "algGeom": (3, 6, 10, 15, 21, 28, 36),
}
TABLE_LABELS = {
    "thm2": "checklist bound (F=C)",
    "sobium": "SOBIUM condition (F=C)",
    "algGeom": "symmetric condition (F=R)",
}


def sobi_table() -> dict[str, tuple[int, ...]]:
    """Bounds on R for I = 3..9 under R <= P: ours, the SOBIUM condition, the symmetric condition."""
    return {
        "thm2": tuple((I - 1) ** 2 for I in TABLE_SIZES),
        "sobium": tuple(sobium_comparison_bound(I) for I in TABLE_SIZES),
        "algGeom": tuple(symmetric_comparison_bound(I) for I in TABLE_SIZES),
    }


def format_table(table: dict[str, tuple[int, ...]]) -> str:
    width = max(len(v) for v in TABLE_LABELS.values())
    lines = [f"{'I':<{width}} " + " ".join(f"{I:>4}" for I in TABLE_SIZES)]
    for key, label in TABLE_LABELS.items():
        lines.append(f"{label:<{width}} " + " ".join(f"{v:>4}" for v in table[key]))
    return "\n".join(lines)
