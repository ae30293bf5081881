from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from sicforge.hpnum import workdps
from sicforge.lattice import lll, minimal_polynomial, poly_eval, recover_minimal_polynomial


def gram_schmidt(rows):
    B, out = [], []
    for r in rows:
        v = [Fraction(x) for x in r]
        for b in B:
            mu = sum(x * y for x, y in zip(r, b)) / sum(y * y for y in b)
            v = [x - mu * y for x, y in zip(v, b)]
        B.append(v)
        out.append(sum(x * x for x in v))
    return B, out


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2 ** 32 - 1))
def test_lll_properties(n, seed):
    rng = __import__("random").Random(seed)
    rows = [[rng.randint(-50, 50) for _ in range(n)] for _ in range(n)]
    M = sympy.Matrix(rows)
    if M.det() == 0:
        return
    red = lll(rows)
    assert abs(sympy.Matrix(red).det()) == abs(M.det())
    # same lattice: each reduced row is an integer combination of the input
    coeffs = sympy.Matrix(red) * M.inv()
    assert all(c.is_integer for c in coeffs)
    Bs, norms = gram_schmidt(red)
    for k in range(1, n):
        mu = sum(Fraction(x) * y for x, y in zip(red[k], Bs[k - 1])) / norms[k - 1]
        assert norms[k] >= (Fraction(99, 100) - mu * mu) * norms[k - 1]


def test_lll_finds_short_vector():
    red = lll([[1, 0, 0, 1345], [0, 1, 0, 35], [0, 0, 1, 154]])
    assert min(sum(x * x for x in r) for r in red) < 1345 ** 2


def test_poly_eval_ascending():
    assert poly_eval([1, 2, 3], 2) == 17


@pytest.mark.parametrize("make,expected", [
    (lambda: mpmath.sqrt(2), [-2, 0, 1]),
    (lambda: (1 + mpmath.sqrt(5)) / 2, [-1, -1, 1]),
    (lambda: mpmath.expjpi(mpmath.mpf(2) / 5), [1, 1, 1, 1, 1]),
    (lambda: mpmath.mpc(mpmath.sqrt(2), mpmath.sqrt(3)), [25, 0, 2, 0, 1]),
    (lambda: mpmath.cos(2 * mpmath.pi / 5), [-1, 2, 4]),
])
def test_minimal_polynomial_examples(make, expected):
    with workdps(60):
        x = make()
        assert minimal_polynomial(x, digits=60) == expected


@pytest.mark.parametrize("make", [lambda: mpmath.sqrt(2) + mpmath.sqrt(3),
                                  lambda: mpmath.cbrt(2) + 1,
                                  lambda: mpmath.cos(2 * mpmath.pi / 7)])
def test_minimal_polynomial_agrees_with_pslq(make):
    with workdps(80):
        x = make()
        ours = minimal_polynomial(x, digits=80)
        ref = mpmath.findpoly(x, 8, maxcoeff=10 ** 6)
    # findpoly returns descending coefficients, sign not normalized
    ref = list(reversed([int(c) for c in ref]))
    assert ours in (ref, [-c for c in ref])
    assert sympy.Poly(list(reversed(ours)), sympy.Symbol("x")).is_irreducible


def test_low_precision_relations_are_not_trusted():
    with workdps(30):
        x = mpmath.sqrt(2) + mpmath.sqrt(3) + mpmath.sqrt(5)
        assert minimal_polynomial(x, digits=30) is None


def test_transcendental_gives_none():
    with workdps(60):
        assert minimal_polynomial(mpmath.pi, max_degree=4, max_height=1000, digits=60) is None


def test_recover_doubles_precision():
    calls = []

    def producer(digits):
        calls.append(digits)
        with workdps(digits):
            return mpmath.sqrt(2) + mpmath.sqrt(3) + mpmath.sqrt(5)

    poly, used = recover_minimal_polynomial(producer, 30)
    assert poly == [576, 0, -960, 0, 352, 0, -40, 0, 1]
    assert used == calls[-1] > 30
    assert calls[0] == 30 and all(b == 2 * a for a, b in zip(calls, calls[1:]))
