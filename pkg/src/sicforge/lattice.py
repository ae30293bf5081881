"""Exact LLL reduction and integer-relation search for minimal polynomials."""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import sympy

from .hpnum import workdps

DELTA = Fraction(99, 100)
SIGNIFICANCE_MARGIN = 10


def lll(rows, delta: Fraction = DELTA) -> list[list[int]]:
    """LLL-reduce a basis of linearly independent integer row vectors.

    Rational Gram-Schmidt data (mu, B) is kept exact and updated in place on
    size reductions and swaps.
    """
    b = [[int(x) for x in r] for r in rows]
    n = len(b)
    if n == 0:
        return []
    mu = [[Fraction(0)] * n for _ in range(n)]
    B = [Fraction(0)] * n
    star = []
    for i in range(n):
        v = [Fraction(x) for x in b[i]]
        for j in range(i):
            mu[i][j] = sum(Fraction(x) * y for x, y in zip(b[i], star[j])) / B[j]
            v = [x - mu[i][j] * y for x, y in zip(v, star[j])]
        star.append(v)
        B[i] = sum(x * x for x in v)
        if B[i] == 0:
            raise ValueError("basis rows are linearly dependent")

    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                for t in range(j):
                    mu[k][t] -= q * mu[j][t]
                mu[k][j] -= q
        if B[k] >= (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            k += 1
            continue
        b[k], b[k - 1] = b[k - 1], b[k]
        m = mu[k][k - 1]
        Bn = B[k] + m * m * B[k - 1]
        mu[k][k - 1] = m * B[k - 1] / Bn
        B[k] = B[k - 1] * B[k] / Bn
        B[k - 1] = Bn
        for j in range(k - 1):
            mu[k - 1][j], mu[k][j] = mu[k][j], mu[k - 1][j]
        for i in range(k + 1, n):
            t = mu[i][k]
            mu[i][k] = mu[i][k - 1] - m * t
            mu[i][k - 1] = t + mu[k][k - 1] * mu[i][k]
        k = max(k - 1, 1)
    return b


def poly_eval(coeffs, x):
    """Horner evaluation of an ascending coefficient list."""
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _normalize(coeffs: list[int]) -> list[int]:
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    g = 0
    for c in coeffs:
        g = sympy.igcd(g, c)
    coeffs = [c // g for c in coeffs] if g else coeffs
    if coeffs[-1] < 0:
        coeffs = [-c for c in coeffs]
    return coeffs


def _irreducible_factor(coeffs: list[int], x, digits: int) -> list[int]:
    """The irreducible factor of the polynomial that annihilates x."""
    z = sympy.Symbol("z")
    poly = sympy.Poly(list(reversed(coeffs)), z)
    _, factors = sympy.factor_list(poly)
    if len(factors) == 1 and factors[0][1] == 1:
        return coeffs
    with workdps(digits):
        best = min(factors, key=lambda f: abs(poly_eval([int(c) for c in reversed(f[0].all_coeffs())], x)))
    return _normalize([int(c) for c in reversed(best[0].all_coeffs())])


def minimal_polynomial(x, max_degree: int = 16, max_height: int = 10 ** 8,
                       digits: int | None = None) -> list[int] | None:
    """Integer minimal polynomial of x (ascending coefficients), or None.

    For k = 1..max_degree, LLL-reduces the lattice spanned by the rows
    (e_i, S Re x^i, S Im x^i), i = 0..k, with S = 10^(digits-10). The first short
    vector whose polynomial has height <= max_height and |P(x)| < 10^(20-digits)
    is factored and the factor vanishing at x returned.

    A relation is only trusted when its k+1 coefficients carry clearly fewer digits
    than the data: (k+1) log10(height) <= available - SIGNIFICANCE_MARGIN, where the
    available digits are digits-10, doubled for non-real x.
    """
    digits = mpmath.mp.dps if digits is None else digits
    with workdps(digits + 10):
        x = mpmath.mpc(x)
        is_real = abs(x.imag) < mpmath.mpf(10) ** (-(digits - 5))
        scale = mpmath.mpf(10) ** (digits - 10)
        powers = [mpmath.mpc(1)]
        for _ in range(max_degree):
            powers.append(powers[-1] * x)
        tol = mpmath.mpf(10) ** (20 - digits)
        available = (digits - 10) * (1 if is_real else 2) - SIGNIFICANCE_MARGIN
        for k in range(1, max_degree + 1):
            rows = []
            for i in range(k + 1):
                row = [int(i == j) for j in range(k + 1)]
                row.append(int(mpmath.nint(scale * powers[i].real)))
                if not is_real:
                    row.append(int(mpmath.nint(scale * powers[i].imag)))
                rows.append(row)
            for r in lll(rows):
                coeffs = r[:k + 1]
                if coeffs[k] == 0 or max(abs(c) for c in coeffs) > max_height:
                    continue
                if abs(poly_eval(coeffs, x)) < tol:
                    if (k + 1) * math.log10(max(abs(c) for c in coeffs) + 1) > available:
                        return None
                    return _irreducible_factor(_normalize(coeffs), x, digits)
    return None


def recover_minimal_polynomial(producer, digits: int, attempts: int = 4, **kwargs):
    """Call ``producer(digits)`` for x, doubling the precision after each failed attempt."""
    for _ in range(attempts):
        poly = minimal_polynomial(producer(digits), digits=digits, **kwargs)
        if poly is not None:
            return poly, digits
        digits *= 2
    return None, digits // 2
