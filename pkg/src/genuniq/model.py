"""Structured column models b(zeta) = r(f(zeta)) and full factorization instances.

``r`` is a vector of N rational rows in ``x1..xl``; ``f`` applies one analytic
primitive per coordinate.  All arithmetic is complex.  Evaluation is batched
over points and differentiated in forward mode with :class:`~genuniq.dual.Dual`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

import numpy as np

from .dual import Dual
from .errors import ModelError, PoleError, TransformSingular
from .expr import Expr, evaluate, expand_row, is_pure, variables

POLE_EPS = 1e-12
_SINGULAR_TOL = 1e-12


# -- coordinate transforms ----------------------------------------------------

PRIMITIVES = ("id", "exp", "tan_half", "cos", "sin", "affine")


@dataclass(frozen=True)
class Primitive:
    name: str
    params: tuple[complex, ...] = ()

    def __post_init__(self):
        if self.name not in PRIMITIVES:
            raise ModelError(f"unknown primitive {self.name!r}")
        expected = {"id": (0,), "exp": (0, 1), "tan_half": (0,), "cos": (0,), "sin": (0,), "affine": (2,)}
        if len(self.params) not in expected[self.name]:
            raise ModelError(f"{self.name} takes {expected[self.name]} parameters")
        if self.name == "affine" and self.params[1] == 0:
            raise ModelError("affine(a, b) needs b != 0 to be non-constant")
        if self.name == "exp" and self.params and self.params[0] == 0:
            raise ModelError("exp(k) needs k != 0 to be non-constant")

    def apply(self, z: np.ndarray):
        """Return ``(f(z), f'(z), singular_mask)`` elementwise."""
        z = np.asarray(z, dtype=complex)
        sing = np.zeros(z.shape, dtype=bool)
        if self.name == "id":
            return z, np.ones_like(z), sing
        if self.name == "exp":
            k = self.params[0] if self.params else 1.0
            with np.errstate(over="ignore", invalid="ignore"):
                v = np.exp(k * z)
                return v, k * v, sing
        if self.name == "cos":
            return np.cos(z), -np.sin(z), sing
        if self.name == "sin":
            return np.sin(z), np.cos(z), sing
        if self.name == "affine":
            a, b = self.params
            return a + b * z, np.full_like(z, b), sing
        c = np.cos(z / 2)
        sing = np.abs(c) < _SINGULAR_TOL
        with np.errstate(all="ignore"):
            return np.tan(z / 2), 0.5 / c**2, sing

    def text(self) -> str:
        from .expr import _fmt_const

        if not self.params:
            return self.name
        return f"{self.name}({', '.join(_fmt_const(p)[0] for p in self.params)})"


def parse_primitive(text: str, line: int = 0, col: int = 0) -> Primitive:
    from .parser import const_value, parse_expr

    m = re.fullmatch(r"\s*([A-Za-z_]+)\s*(?:\((.*)\))?\s*", text)
    if not m:
        raise ModelError(f"malformed transform {text!r}")
    name = m.group(1)
    if name not in PRIMITIVES:
        raise ModelError(f"unknown primitive {name!r}")
    params: tuple[complex, ...] = ()
    if m.group(2) is not None:
        params = tuple(const_value(parse_expr(part, line, col)) for part in m.group(2).split(","))
    return Primitive(name, params)


@dataclass(frozen=True)
class Transform:
    """Entrywise map f(zeta) = (f_1(zeta_1), ..., f_l(zeta_l))."""

    prims: tuple[Primitive, ...]

    @classmethod
    def identity(cls, l: int) -> "Transform":
        return cls(tuple(Primitive("id") for _ in range(l)))

    @classmethod
    def from_mapping(cls, prims: dict, l: int) -> "Transform":
        return cls(tuple(prims.get(j, Primitive("id")) for j in range(1, l + 1)))

    @classmethod
    def of(cls, *names) -> "Transform":
        return cls(tuple(p if isinstance(p, Primitive) else Primitive(p) for p in names))

    @property
    def l(self) -> int:
        return len(self.prims)

    @property
    def is_identity(self) -> bool:
        return all(p.name == "id" for p in self.prims)

    def apply(self, Z: np.ndarray):
        """Batched transform of ``Z`` (shape ``(B, l)``): values, derivatives, singular mask."""
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        F = np.empty_like(Z)
        dF = np.empty_like(Z)
        S = np.zeros(Z.shape, dtype=bool)
        for j, p in enumerate(self.prims):
            F[:, j], dF[:, j], S[:, j] = p.apply(Z[:, j])
        return F, dF, S


# -- column model -------------------------------------------------------------

@dataclass(frozen=True)
class ColumnModel:
    """N rational rows over ``x1..xl`` plus a coordinate transform.

    ``templates`` holds ``(label, expr)`` pairs: label ``None`` is the row
    template ``b_n`` and an integer ``k`` pins row ``k`` explicitly.
    """

    N: int
    l: int
    templates: tuple
    transform: Transform = None
    pole_eps: float = POLE_EPS
    rows: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.N < 1 or self.l < 1:
            raise ModelError("N and l must be positive")
        if self.transform is None:
            object.__setattr__(self, "transform", Transform.identity(self.l))
        if self.transform.l != self.l:
            raise ModelError(f"transform has {self.transform.l} coordinates, expected l={self.l}")
        template = None
        explicit: dict[int, Expr] = {}
        for label, e in self.templates:
            if label is None:
                template = e
            else:
                if not 1 <= label <= self.N:
                    raise ModelError(f"row b_{label} outside 1..N={self.N}")
                explicit[label] = e
            over = [j for j in variables(e) if j > self.l]
            if over:
                raise ModelError(f"variable x{max(over)} exceeds l={self.l}")
        rows = []
        for k in range(1, self.N + 1):
            e = explicit.get(k, template)
            if e is None:
                raise ModelError(f"row {k} has no expression (no b_n template)")
            row = expand_row(e, k)
            assert is_pure(row)
            rows.append(row)
        object.__setattr__(self, "rows", tuple(rows))
        self._check_denominators()

    @classmethod
    def from_rows(cls, rows, l: int, transform: Transform | None = None) -> "ColumnModel":
        return cls(N=len(rows), l=l, templates=tuple((k, e) for k, e in enumerate(rows, 1)), transform=transform)

    @classmethod
    def from_template(cls, template: Expr, N: int, l: int, transform: Transform | None = None) -> "ColumnModel":
        return cls(N=N, l=l, templates=((None, template),), transform=transform)

    def _check_denominators(self):
        rng = np.random.default_rng(0x5EED)
        X = (rng.standard_normal((8, self.l)) + 1j * rng.standard_normal((8, self.l))) / np.sqrt(2)
        _, _, bad = self.evaluate(X)
        dead = np.flatnonzero(bad.all(axis=0))
        if dead.size:
            raise ModelError(f"row {dead[0] + 1} has an identically vanishing denominator")

    def with_transform(self, transform: Transform) -> "ColumnModel":
        return replace(self, transform=transform)

    def evaluate(self, X, jac: bool = False):
        """Batched r(x).

        Returns ``(values, jacobian, bad)`` with shapes ``(B, N)``,
        ``(B, N, l)`` (or ``None``) and ``(B, N)``; ``bad`` marks pole-guard
        failures and non-finite results.
        """
        X = np.atleast_2d(np.asarray(X, dtype=complex))
        B = X.shape[0]
        env = Dual.variables(X) if jac else [X[:, j] for j in range(self.l)]
        values = np.empty((B, self.N), dtype=complex)
        J = np.empty((B, self.N, self.l), dtype=complex) if jac else None
        bad = np.zeros((B, self.N), dtype=bool)
        for i, row in enumerate(self.rows):
            v, b = evaluate(row, env, self.pole_eps, B)
            if isinstance(v, Dual):
                values[:, i] = v.value
                J[:, i, :] = v.partials
            else:
                values[:, i] = v
                if jac:
                    J[:, i, :] = 0.0
            bad[:, i] = b
        with np.errstate(invalid="ignore"):
            bad |= ~np.isfinite(values)
            if jac:
                bad |= ~np.isfinite(J).all(axis=2)
        return values, J, bad

    def evaluate_b(self, Z, jac: bool = False):
        """Batched b(zeta) = r(f(zeta)); singular transforms are folded into ``bad``."""
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        F, dF, S = self.transform.apply(Z)
        values, J, bad = self.evaluate(np.where(S, 0.0, F), jac)
        bad |= S.any(axis=1)[:, None]
        if jac:
            J = J * dF[:, None, :]
        return values, J, bad


# -- A factor -----------------------------------------------------------------

@dataclass(frozen=True)
class GenericDense:
    """A is a free K x R matrix (every entry its own parameter)."""


@dataclass(frozen=True)
class ExpressionA:
    """A is a K x R matrix of expressions in its own parameters ``x1..xm``."""

    entries: tuple  # tuple of K tuples of R expressions
    m: int

    def __post_init__(self):
        for row in self.entries:
            for e in row:
                if not is_pure(e):
                    raise ModelError("A entries may not use the row token or builtins")
                if any(j > self.m for j in variables(e)):
                    raise ModelError("A entry refers to a parameter beyond m")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0]) if self.entries else 0

    def evaluate(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=complex)
        env = [params[j : j + 1] for j in range(self.m)]
        K, R = self.shape
        out = np.empty((K, R), dtype=complex)
        for k in range(K):
            for r in range(R):
                v, bad = evaluate(self.entries[k][r], env)
                if bad.any():
                    raise PoleError(k + 1)
                out[k, r] = np.asarray(v).reshape(-1)[0] if np.ndim(v) else v
        return out


@dataclass(frozen=True)
class FactorModel:
    K: int
    N: int
    R: int
    l: int
    column: ColumnModel
    a_spec: object = GenericDense()
    domain: str = "complex"
    scaling_invariant: str = "unknown"

    def __post_init__(self):
        for name in ("K", "N", "R", "l"):
            if getattr(self, name) < 1:
                raise ModelError(f"{name} must be >= 1")
        if self.column.N != self.N or self.column.l != self.l:
            raise ModelError(
                f"column model is {self.column.N} rows x {self.column.l} params, dims say N={self.N} l={self.l}"
            )
        if self.domain not in ("real", "complex"):
            raise ModelError("domain must be 'real' or 'complex'")
        if self.scaling_invariant not in ("true", "false", "unknown"):
            raise ModelError("scaling_invariant must be 'true', 'false' or 'unknown'")
        if isinstance(self.a_spec, ExpressionA) and self.a_spec.shape != (self.K, self.R):
            raise ModelError(f"A expression matrix is {self.a_spec.shape}, expected {(self.K, self.R)}")

    @property
    def m(self) -> int:
        """Number of A parameters (free entries for a generic dense A)."""
        if isinstance(self.a_spec, ExpressionA):
            return self.a_spec.m
        return self.K * self.R

    @property
    def n_params(self) -> int:
        return self.m + self.R * self.l

    def with_dims(self, **kw) -> "FactorModel":
        return replace(self, **kw)


# -- single-point operations ----------------------------------------------------

def _first_bad(bad_row: np.ndarray) -> int:
    return int(np.flatnonzero(bad_row)[0]) + 1


def eval_r(cm: ColumnModel, x) -> np.ndarray:
    """r(x) = [p_1/q_1, ..., p_N/q_N](x); raises PoleError at the first guarded row."""
    values, _, bad = cm.evaluate(np.asarray(x, dtype=complex).reshape(1, -1))
    if bad[0].any():
        raise PoleError(_first_bad(bad[0]))
    return values[0]


def _check_transform(t: Transform, zeta):
    F, dF, S = t.apply(np.asarray(zeta, dtype=complex).reshape(1, -1))
    if S[0].any():
        raise TransformSingular(int(np.flatnonzero(S[0])[0]) + 1)
    return F[0], dF[0]


def apply_transform(t: Transform, zeta) -> np.ndarray:
    return _check_transform(t, zeta)[0]


def eval_b(cm: ColumnModel, zeta) -> np.ndarray:
    """b(zeta) = r(f(zeta))."""
    F, _ = _check_transform(cm.transform, zeta)
    return eval_r(cm, F)


def jacobian_r(cm: ColumnModel, x) -> np.ndarray:
    """N x l matrix of d(p_i/q_i)/dx_j by forward-mode AD."""
    _, J, bad = cm.evaluate(np.asarray(x, dtype=complex).reshape(1, -1), jac=True)
    if bad[0].any():
        raise PoleError(_first_bad(bad[0]))
    return J[0]


def jacobian_f(t: Transform, zeta) -> np.ndarray:
    """Diagonal l x l Jacobian of the entrywise transform."""
    _, dF = _check_transform(t, zeta)
    return np.diag(dF)


def jacobian_b(cm: ColumnModel, zeta) -> np.ndarray:
    F, dF = _check_transform(cm.transform, zeta)
    return jacobian_r(cm, F) * dF[None, :]
