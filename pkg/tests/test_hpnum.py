import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sicforge.hpnum import (ComplexVector, PrecisionError, check_digits, dft, exact_str, nullspace,
                            root_of_unity, to_mpc, workdps)


def _vec(values, digits=60):
    return ComplexVector(tuple(to_mpc(complex(v), digits) for v in values), digits)


def test_dft_of_delta_is_flat():
    v = _vec([1, 0, 0, 0])
    out = dft(v)
    with workdps(60):
        assert max(abs(x - mpmath.mpf(1) / 2) for x in out) < mpmath.mpf(10) ** -58


def test_dft_of_flat_is_delta():
    with workdps(60):
        s = 1 / mpmath.sqrt(3)
        v = ComplexVector((mpmath.mpc(s),) * 3, 60)
        out = dft(v)
        assert abs(out[0] - 1) < mpmath.mpf(10) ** -55
        assert abs(out[1]) < mpmath.mpf(10) ** -55 and abs(out[2]) < mpmath.mpf(10) ** -55


def test_dft_sign_convention_matches_exponent_plus():
    # (F v)_k = d^-1/2 sum_j e(jk/d) v_j, compared with a dense mpmath product
    d = 5
    v = _vec(np.arange(1, 6) + 1j * np.arange(5) ** 2)
    out = dft(v)
    with workdps(60):
        for k in range(d):
            ref = mpmath.fsum(mpmath.expjpi(mpmath.mpf(2 * j * k) / d) * v[j] for j in range(d)) / mpmath.sqrt(d)
            assert abs(out[k] - ref) < mpmath.mpf(10) ** -55


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 64), st.integers(0, 2 ** 32 - 1))
def test_parseval_and_inverse(d, seed):
    rng = np.random.default_rng(seed)
    v = _vec(rng.standard_normal(d) + 1j * rng.standard_normal(d), 40)
    f = dft(v)
    back = dft(f, inverse=True)
    tol = mpmath.mpf(10) ** (6 - 40)
    with workdps(40):
        assert abs(f.norm() - v.norm()) < tol
        assert back.max_abs_diff(v) < tol


def test_dft_refuses_unreachable_tolerance():
    v = _vec([1, 2, 3], 40)
    with pytest.raises(PrecisionError):
        dft(v, tol_digits=39)
    dft(v, tol_digits=30)


def test_root_of_unity_examples():
    with workdps(60):
        assert root_of_unity(1, 0) == 1
        assert root_of_unity(4, 1) == mpmath.mpc(0, 1)
        z = root_of_unity(12, 1)
        assert abs(z - mpmath.mpc(mpmath.sqrt(3) / 2, mpmath.mpf(1) / 2)) < mpmath.mpf(10) ** -58


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 200), st.integers(-500, 500), st.integers(-500, 500))
def test_root_of_unity_properties(n, k, m):
    with workdps(60):
        z = root_of_unity(n, k)
        tol = mpmath.mpf(10) ** -57
        assert abs(abs(z) - 1) < tol
        assert abs(z * root_of_unity(n, m) - root_of_unity(n, k + m)) < tol
        assert abs(z ** n - 1) < mpmath.mpf(10) ** -55


def test_doubling_precision_keeps_leading_digits():
    rng = np.random.default_rng(3)
    vals = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    lo = dft(_vec(vals, 40))
    hi = dft(_vec(vals, 80))
    for a, b in zip(lo, hi):
        for x, y in ((a.real, b.real), (a.imag, b.imag)):
            with workdps(80):
                assert abs(x - y) < mpmath.mpf(10) ** (-(40 - 10))


def test_mixed_precision_rounds_to_minimum():
    a = _vec([1, 2], 40)
    b = _vec([3, 4], 70)
    assert (a + b).digits == 40
    assert (b - a).digits == 40


def test_minimum_precision_enforced():
    with pytest.raises(ValueError):
        check_digits(20)
    with pytest.raises(ValueError):
        ComplexVector((mpmath.mpc(1),), 10)


def test_exact_str_roundtrip():
    with workdps(50):
        x = mpmath.pi / 7
        s = exact_str(x, 50)
        assert mpmath.mpf(s) == x


def test_nullspace_exact_zero_one():
    rows = [[1, -1, 0], [0, 1, -1]]
    basis = nullspace(rows, 3, 40)
    assert len(basis) == 1
    assert [int(x) for x in basis[0]] == [1, 1, 1]
