"""Exact integer polynomials behind cos(n z) = P_n(cos z) = Q_n(tan(z/2)) and
sin(n z) = R_n(tan(z/2)).

Coefficient lists are ascending (index k holds the coefficient of t^k).
Evaluation goes through exact rationals so the only rounding is the final
conversion to float.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

MAX_DEGREE = 64
_INT128 = 1 << 127


def _guard(n: int, minimum: int = 0):
    if n < minimum:
        raise ValueError(f"n must be >= {minimum}")
    if n > MAX_DEGREE:
        raise OverflowError(f"n={n} exceeds the supported maximum {MAX_DEGREE}")


def _check_width(coeffs: list[int]) -> list[int]:
    if any(abs(c) >= _INT128 for c in coeffs):
        raise OverflowError("coefficient exceeds 128-bit range")
    return coeffs


def _trim(p: list[int]) -> list[int]:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def poly_add(a: list[int], b: list[int]) -> list[int]:
    out = [0] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += c
    return _trim(out)


def poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def poly_pow(a: list[int], k: int) -> list[int]:
    out = [1]
    for _ in range(k):
        out = poly_mul(out, a)
    return out


def poly_scale(a: list[int], c: int) -> list[int]:
    return _trim([c * x for x in a])


def cheb_P(n: int) -> list[int]:
    """Coefficients of P_n from sum_k C(n, 2k) (x^2 - 1)^k x^(n - 2k)."""
    _guard(n)
    total = [0]
    for k in range(n // 2 + 1):
        term = poly_mul(poly_pow([-1, 0, 1], k), [0] * (n - 2 * k) + [1])
        total = poly_add(total, poly_scale(term, comb(n, 2 * k)))
    return _check_width(total)


@dataclass(frozen=True)
class TrigRational:
    """numerator(t) / denominator(t) with denominator (1 + t^2)^n."""

    n: int
    numerator: tuple[int, ...]
    denominator: tuple[int, ...]

    def exact(self, t) -> Fraction:
        t = Fraction(t)
        return eval_exact(self.numerator, t) / eval_exact(self.denominator, t)

    def __call__(self, t: float) -> float:
        return float(self.exact(t))


def eval_exact(coeffs, x) -> Fraction:
    """Horner evaluation in exact rational arithmetic."""
    x = Fraction(x)
    num, den = x.numerator, x.denominator
    # homogeneous Horner on integers: sum c_k num^k den^(d-k), then one division
    d = len(coeffs) - 1
    acc = 0
    den_pow = 1
    for c in reversed(coeffs):
        acc = acc * num + c * den_pow
        den_pow *= den
    return Fraction(acc, den ** d) if d > 0 else Fraction(coeffs[0])


def tan_half_QR(n: int) -> tuple[TrigRational, TrigRational]:
    """Q_n, R_n from the real and imaginary parts of ((1 - t^2) + 2it)^n over (1 + t^2)^n."""
    _guard(n, 1)
    # Gaussian-integer polynomial: pairs (real coeffs, imag coeffs)
    base_re, base_im = [1, 0, -1], [0, 2]
    re, im = [1], [0]
    for _ in range(n):
        re, im = (
            poly_add(poly_mul(re, base_re), poly_scale(poly_mul(im, base_im), -1)),
            poly_add(poly_mul(re, base_im), poly_mul(im, base_re)),
        )
    den = poly_pow([1, 0, 1], n)
    _check_width(re), _check_width(im), _check_width(den)
    return TrigRational(n, tuple(re), tuple(den)), TrigRational(n, tuple(im), tuple(den))


def poly_to_text(coeffs, var: str = "t") -> str:
    terms = []
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if mono and abs(c) == 1:
            body = mono
        else:
            body = f"{abs(c)}{mono}"
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def rational_to_text(r: TrigRational) -> str:
    return f"({poly_to_text(r.numerator)})/({poly_to_text(r.denominator)})"
