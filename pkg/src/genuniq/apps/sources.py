"""Source-signal column models: exponential polynomials, rational functions,
the six-parameter mixed example, and sampled complex exponentials."""

from __future__ import annotations

from ..errors import ModelError
from ..expr import Const, Pow, Row, Var, add, div, mul
from ..model import ColumnModel, FactorModel, Primitive, Transform
from ..parser import parse_expr


def _poly_in_n(first_var: int, degree: int):
    """x_{first} + x_{first+1} n + ... + x_{first+degree} n^degree."""
    e = Var(first_var)
    for k in range(1, degree + 1):
        e = add(e, mul(Var(first_var + k), Row() if k == 1 else Pow(Row(), Const(k))))
    return e


def exp_poly_column(degrees, N: int) -> ColumnModel:
    """Rows s(n) = sum_f (p_0f + p_1f n + ... ) a_f^n with zeta = [a_1 p_01 .. p_d1 1, a_2 ...]."""
    template = None
    offset = 1
    for d in degrees:
        if d < 0:
            raise ModelError("degrees must be non-negative")
        term = mul(_poly_in_n(offset + 1, d), Pow(Var(offset), Row()))
        template = term if template is None else add(template, term)
        offset += d + 2
    return ColumnModel.from_template(template, N, offset - 1)


def exp_poly_model(F: int, degrees, N: int, K: int | None = None, R: int | None = None, domain: str = "complex"):
    """Exponential-polynomial sources; returns ``(model, bound)`` with bound N - (sum d_f + 2F)."""
    degrees = list(degrees)
    if F < 1 or len(degrees) != F:
        raise ModelError("need one degree per exponential term")
    bound = N - (sum(degrees) + 2 * F)
    if bound <= 0:
        raise ModelError(f"N={N} leaves no room for sources (bound {bound})")
    cm = exp_poly_column(degrees, N)
    R = bound if R is None else R
    K = max(R, 1) if K is None else K
    model = FactorModel(K=K, N=N, R=R, l=cm.l, column=cm, domain=domain, scaling_invariant="true")
    return model, bound


def rational_column(p: int, q: int, N: int) -> ColumnModel:
    """Rows (a_0 + ... + a_p n^p) / (b_0 + ... + b_q n^q) with zeta = [a_0..a_p b_0..b_q]."""
    if p < 0 or q < 0:
        raise ModelError("degrees must be non-negative")
    template = div(_poly_in_n(1, p), _poly_in_n(p + 2, q))
    return ColumnModel.from_template(template, N, p + q + 2)


def rational_model(p: int, q: int, N: int, K: int | None = None, R: int | None = None, domain: str = "complex"):
    """Rational sources; returns ``(model, bound)`` with bound N - (p + q + 1)."""
    if q < 1:
        raise ModelError("rational sources need a denominator degree q >= 1")
    bound = N - (p + q + 1)
    if bound <= 0:
        raise ModelError(f"N={N} leaves no room for sources (bound {bound})")
    cm = rational_column(p, q, N)
    R = bound if R is None else R
    K = max(R, 1) if K is None else K
    model = FactorModel(K=K, N=N, R=R, l=cm.l, column=cm, domain=domain, scaling_invariant="true")
    return model, bound


EXAMPLE_TEMPLATE = (
    "x1^n/n + (x2 + n)/(x3 + n)*(tanQ(n, x4)*(1 - x5^2)/(1 + x5^2)"
    " - tanR(n, x4)*2*x5/(1 + x5^2)) + chebP(n, x6)"
)
EXAMPLE_TRANSFORM = ("id", "id", "id", "tan_half", "tan_half", "cos")


def example_column(N: int) -> ColumnModel:
    """s(n) = z1^n/n + (z2+n)/(z3+n) cos(z4 n + z5) + cos(z6 n), rationalized in tan(z/2) and cos z."""
    return ColumnModel.from_template(parse_expr(EXAMPLE_TEMPLATE), N, 6, Transform.of(*EXAMPLE_TRANSFORM))


def example_model(N: int, K: int | None = None, R: int | None = None, domain: str = "real"):
    """Six-parameter mixed source model; returns ``(model, bound)`` with bound N - 6."""
    if N <= 6:
        raise ModelError("example model needs N > 6")
    bound = N - 6
    cm = example_column(N)
    R = bound if R is None else R
    K = max(R, 1) if K is None else K
    model = FactorModel(K=K, N=N, R=R, l=6, column=cm, domain=domain, scaling_invariant="true")
    return model, bound


def vandermonde_column(N: int, unit_circle: bool = True) -> ColumnModel:
    """Columns [1, w, ..., w^(N-1)] with w = exp(i zeta) (or w = zeta when not on the unit circle)."""
    template = Pow(Var(1), add(Row(), Const(-1)))
    transform = Transform((Primitive("exp", (1j,)),)) if unit_circle else None
    return ColumnModel.from_template(template, N, 1, transform)
