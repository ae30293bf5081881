import math
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from oracles import analytic_class_number, brute_force_unit
from sicforge.quadfield import (QuadElem, class_number, dimension_form, fundamental_unit, magical_D,
                                narrow_class_number, primitive_root, primitive_roots,
                                ray_class_group_order, ray_class_order, split_dimension,
                                squarefree_part)

SQUAREFREE = [D for D in range(2, 100) if sympy.factorint(D) and max(sympy.factorint(D).values()) == 1]


def test_squarefree_examples():
    assert squarefree_part(1) == 1
    assert squarefree_part(12) == 3
    assert squarefree_part(320) == 5


@pytest.mark.parametrize("d,D", [(4, 5), (5, 3), (7, 2), (19, 5)])
def test_magical_examples(d, D):
    assert magical_D(d) == D


@pytest.mark.parametrize("d", [1, 2, 3])
def test_magical_degenerate(d):
    with pytest.raises(ValueError, match="degenerate"):
        magical_D(d)


def test_dimension_form_examples():
    f7 = dimension_form(7)
    assert f7.is_form and f7.n == 2 and f7.prime_case and 7 % 3 == 1
    f12 = dimension_form(12)
    assert f12.n == 3 and (f12.e0, f12.e1) == (1, 1) and f12.primes == {}
    assert f12.factorization() == "4·3"
    assert not dimension_form(10).is_form


def test_quadelem_arithmetic():
    r2 = QuadElem(0, 1, 2)
    assert (1 + r2) * (1 - r2) == QuadElem(-1, 0, 2)
    assert (1 + r2) ** -1 == QuadElem(-1, 1, 2)
    assert (1 + r2).norm() == -1 and (1 + r2).trace() == 2
    golden = QuadElem(Fraction(1, 2), Fraction(1, 2), 5)
    assert golden.is_integral() and str(golden) == "(1+√5)/2"
    assert not QuadElem(Fraction(1, 2), 0, 5).is_integral()
    assert not QuadElem(Fraction(1, 2), Fraction(1, 2), 3).is_integral()
    assert str(1 + r2) == "1+√2"
    with pytest.raises(ValueError):
        QuadElem(1, 1, 4)


def test_sign_at_places():
    x = QuadElem(1, -1, 2)  # 1 - sqrt2 < 0, conjugate 1 + sqrt2 > 0
    assert x.sign(1) == -1 and x.sign(2) == 1


@pytest.mark.parametrize("D,unit,norm", [(2, QuadElem(1, 1, 2), -1),
                                         (5, QuadElem(Fraction(1, 2), Fraction(1, 2), 5), -1),
                                         (3, QuadElem(2, 1, 3), 1)])
def test_fundamental_unit_examples(D, unit, norm):
    assert fundamental_unit(D) == (unit, norm)


@pytest.mark.parametrize("D", SQUAREFREE)
def test_fundamental_unit_matches_brute_force(D):
    eps, norm = fundamental_unit(D)
    ref, t, y, ref_norm = brute_force_unit(D)
    assert norm == ref_norm == eps.norm()
    # eps = (t + y sqrt(Delta))/2 with Delta = D or 4D
    disc = D if D % 4 == 1 else 4 * D
    s = math.isqrt(disc // D)
    assert eps == QuadElem(Fraction(t, 2), Fraction(y * s, 2), D)


def test_fundamental_unit_rejects_nonsquarefree():
    with pytest.raises(ValueError):
        fundamental_unit(12)


@pytest.mark.parametrize("D,h", [(2, 1), (5, 1), (10, 2)])
def test_class_number_examples(D, h):
    assert class_number(D) == h


@pytest.mark.parametrize("D", SQUAREFREE)
def test_class_number_matches_analytic_formula(D):
    h = analytic_class_number(D)
    assert abs(h - round(h)) < mpmath.mpf(10) ** -20
    assert class_number(D) == int(round(h))


def test_narrow_class_number_doubles_for_positive_norm():
    for D in SQUAREFREE:
        ratio = narrow_class_number(D) // class_number(D)
        assert ratio == (1 if fundamental_unit(D)[1] == -1 else 2)


def test_primes_of_dimension_form():
    bad = []
    for n in range(1, 2001):
        for p in sympy.factorint(n * n + 3):
            if p > 3 and p % 3 != 1:
                bad.append((n, p))
    assert bad == []


def test_negative_norm_units_in_range():
    bad = [n for n in range(1, 54) if fundamental_unit(magical_D(n * n + 3))[1] != -1]
    assert bad == []


@pytest.mark.parametrize("n", range(1, 54))
def test_split_identity(n):
    d = n * n + 3
    outer, inner = split_dimension(d)
    assert outer.generator * inner.generator == QuadElem(d, 0, magical_D(d))
    assert outer.generator.is_integral() and inner.generator.is_integral()
    # conjugation swaps the factors up to sign
    assert outer.generator.conj() == -inner.generator


@pytest.mark.parametrize("d,D,f", [(4, 5, 1), (7, 2, 2), (19, 5, 2)])
def test_split_examples(d, D, f):
    outer, inner = split_dimension(d)
    assert outer.generator == QuadElem(1, f, D) and inner.generator == QuadElem(-1, f, D)


def test_split_rejects():
    with pytest.raises(ValueError):
        split_dimension(10)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SQUAREFREE), st.integers(0, 10))
def test_unit_power_norm(D, k):
    eps, norm = fundamental_unit(D)
    assert (eps ** k).norm() == norm ** k
    assert (eps ** k).is_integral()


def brute_ray_order(d):
    """|F_p^x x {+-1}| / |<image(-1), image(eps)>| with sqrt D sent to the root killed by the split factor."""
    D = magical_D(d)
    f = math.isqrt((d + 1) // D)
    r = next(x for x in range(d) if (x * x - D) % d == 0 and (f * x + 1) % d == 0)
    eps, _ = fundamental_unit(D)
    e_res = int((eps.a + eps.b * r) * 2) * pow(2, -1, d) % d if eps.a.denominator == 2 else int(eps.a + eps.b * r) % d
    e_sign = 1 if eps.to_mp(30) > 0 else -1
    gens = [(d - 1, -1), (e_res, e_sign)]
    group = {(1, 1)}
    while True:
        new = {((a * g) % d, s * t) for a, s in group for g, t in gens} | group
        if new == group:
            break
        group = new
    return class_number(D) * (d - 1) * 2 // len(group)


def test_ray_class_d7():
    desc = ray_class_order(7)
    assert desc.order == 2 == brute_ray_order(7)
    assert desc.ell == 1 and desc.ell_is_integer
    assert desc.modulus_tag == "∂,[1]"


@pytest.mark.parametrize("d", [7, 19, 67, 103, 199])
def test_ray_class_integer_ell(d):
    desc = ray_class_order(d)
    assert desc.ell_is_integer
    assert (desc.h * (d - 1) * 2) % desc.order == 0
    assert desc.order == brute_ray_order(d)


def test_ray_class_other_moduli_divide():
    for mod in ("∂̄", "d"):
        desc = ray_class_order(19, mod)
        assert (desc.h * desc.residue_order * 2 ** len(desc.places)) % desc.order == 0


def test_trivial_ray_gives_class_number():
    assert ray_class_group_order(3, 12, 1, 24) == 3
    assert ray_class_group_order(1, 1, 0, 1) == 1


def test_ray_class_rejects_composite():
    with pytest.raises(ValueError):
        ray_class_order(12)


@pytest.mark.parametrize("p,g", [(5, 2), (7, 3), (3, 2)])
def test_primitive_root_examples(p, g):
    assert primitive_root(p) == g


@pytest.mark.parametrize("p", [5, 7, 11, 13, 19, 67])
def test_primitive_roots_complete(p):
    roots = primitive_roots(p)
    brute = [g for g in range(1, p) if len({pow(g, k, p) for k in range(p - 1)}) == p - 1]
    assert roots == brute
    assert len(roots) == sympy.totient(p - 1)


def test_primitive_root_rejects_composite():
    with pytest.raises(ValueError):
        primitive_root(9)
