import math
from fractions import Fraction

import numpy as np
import pytest

from genuniq.apps.trig import (
    MAX_DEGREE,
    cheb_P,
    eval_exact,
    poly_add,
    poly_mul,
    poly_to_text,
    rational_to_text,
    tan_half_QR,
)
from oracles import chebyshev_recurrence


def test_cheb_small_cases():
    assert cheb_P(0) == [1]
    assert cheb_P(1) == [0, 1]
    assert cheb_P(2) == [-1, 0, 2]
    assert cheb_P(5) == [0, 5, 0, -20, 0, 16]


@pytest.mark.parametrize("n", [2, 5])
def test_cheb_numeric(n):
    P = cheb_P(n)
    for z in np.random.default_rng(n).uniform(-math.pi, math.pi, 100):
        assert abs(math.cos(n * z) - float(eval_exact(P, math.cos(z)))) < 1e-12


def test_cheb_recurrence_exact():
    for n in range(1, 33):
        nxt = poly_add(poly_mul([0, 2], cheb_P(n)), [-c for c in cheb_P(n - 1)])
        assert nxt == cheb_P(n + 1)
        assert cheb_P(n) == chebyshev_recurrence(n)


def test_half_angle_first_forms():
    Q, R = tan_half_QR(1)
    assert rational_to_text(Q) == "(1 - t^2)/(1 + t^2)"
    assert rational_to_text(R) == "(2t)/(1 + t^2)"
    Q2, _ = tan_half_QR(2)
    assert list(Q2.numerator) == [1, 0, -6, 0, 1]
    assert list(Q2.denominator) == [1, 0, 2, 0, 1]


def test_half_angle_numeric_sweep():
    rng = np.random.default_rng(0)
    worst = 0.0
    for n in range(1, 21):
        Q, R = tan_half_QR(n)
        for z in rng.uniform(-math.pi, math.pi, 100):
            t = math.tan(z / 2)
            worst = max(worst, abs(math.cos(n * z) - Q(t)), abs(math.sin(n * z) - R(t)))
    assert worst < 1e-9


def test_pythagorean_identity_exact():
    for n in range(1, MAX_DEGREE + 1):
        Q, R = tan_half_QR(n)
        lhs = poly_add(poly_mul(list(Q.numerator), list(Q.numerator)), poly_mul(list(R.numerator), list(R.numerator)))
        assert lhs == poly_mul(list(Q.denominator), list(Q.denominator))


def test_exact_evaluation():
    assert eval_exact([1, 2, 3], Fraction(1, 2)) == Fraction(11, 4)
    assert eval_exact([5], Fraction(7, 3)) == 5
    Q, _ = tan_half_QR(3)
    assert isinstance(Q.exact(0.25), Fraction)


def test_degree_guards():
    with pytest.raises(OverflowError):
        cheb_P(MAX_DEGREE + 1)
    with pytest.raises(OverflowError):
        tan_half_QR(100)
    with pytest.raises(ValueError):
        tan_half_QR(0)


def test_poly_text():
    assert poly_to_text([0, -1, 0, 3]) == "-t + 3t^3"
    assert poly_to_text([0]) == "0"
