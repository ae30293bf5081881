import mpmath
import numpy as np
import pytest

from conftest import hesse
from oracles import covariance_residual, random_sl2, unitarity_residual
from sicforge.heisenberg import FiducialVector, apply_displacement
from sicforge.hpnum import dft_matrix, workdps
from sicforge.symplectic import (SymplecticMatrix, apply_operator, detect_symmetries,
                                 fixed_subspace, multiplicative_order, permutation_cycles,
                                 permutation_of_diagonal, weil_unitary)


def test_matrix_validation():
    with pytest.raises(ValueError):
        SymplecticMatrix(1, 1, 1, 1, 5)
    J = SymplecticMatrix.conjugation_flip(5)
    assert J.antiunitary and J.det == 4
    assert not SymplecticMatrix.identity(5).antiunitary


def test_identity_unitary():
    U = weil_unitary(SymplecticMatrix.identity(5), digits=40)
    with workdps(40):
        ph = U[0][0]
        assert abs(abs(ph) - 1) < mpmath.mpf(10) ** -35
        for r in range(5):
            for c in range(5):
                assert abs(U[r][c] - (ph if r == c else 0)) < mpmath.mpf(10) ** -35


def test_diagonal_is_exact_permutation_fixing_zero():
    d, theta = 7, 3
    F = SymplecticMatrix.diagonal(theta, d)
    U = weil_unitary(F, digits=40)
    for j in range(d):
        for k in range(d):
            assert U[j][k] == (1 if k == theta * j % d else 0)
    assert permutation_cycles(permutation_of_diagonal(theta, d)) == [(0,), (1, 3, 2, 6, 4, 5)]


@pytest.mark.parametrize("d", [5, 7, 9, 11])
def test_all_diagonals_are_zero_one(d):
    for theta in range(1, d):
        if np.gcd(theta, d) != 1:
            continue
        U = weil_unitary(SymplecticMatrix.diagonal(theta, d), digits=30)
        assert all(x in (0, 1) for row in U for x in row)


def test_fourier_element_is_dft():
    d = 5
    U = weil_unitary(SymplecticMatrix(0, -1, 1, 0, d), digits=40)
    Fm = dft_matrix(d, 40)
    with workdps(40):
        ph = U[0][0] / Fm[0][0]
        assert abs(abs(ph) - 1) < mpmath.mpf(10) ** -35
        assert max(abs(U[r][c] - ph * Fm[r][c]) for r in range(d) for c in range(d)) < mpmath.mpf(10) ** -35


@pytest.mark.parametrize("d", [3, 5, 7, 9, 15])
def test_covariance_random(d):
    rng = np.random.default_rng(d)
    for _ in range(5):
        F = random_sl2(d, rng)
        U = weil_unitary(SymplecticMatrix(*F, d), digits=40)
        assert unitarity_residual(U, 40) < mpmath.mpf(10) ** -30
        assert covariance_residual(U, F, d, 40) < mpmath.mpf(10) ** (20 - 40)


def test_homomorphism_up_to_phase():
    d = 7
    rng = np.random.default_rng(11)
    for _ in range(5):
        F, G = (SymplecticMatrix(*random_sl2(d, rng), d) for _ in range(2))
        with workdps(40):
            UF, UG, UFG = (mpmath.matrix(weil_unitary(M, digits=40)) for M in (F, G, F @ G))
            P = UF * UG
            r, c = max(((r, c) for r in range(d) for c in range(d)), key=lambda t: abs(UFG[t]))
            ph = P[r, c] / UFG[r, c]
            assert abs(abs(ph) - 1) < mpmath.mpf(10) ** -30
            assert mpmath.mnorm(P - ph * UFG, "inf") < mpmath.mpf(10) ** -30


def test_even_dimension_rejected():
    with pytest.raises(ValueError):
        weil_unitary(SymplecticMatrix(0, 1, 3, 0, 4))


def test_permutation_examples():
    assert permutation_of_diagonal(1, 9) == tuple(range(9))
    assert multiplicative_order(3, 7) == 6
    assert multiplicative_order(2, 7) == 3
    with pytest.raises(ValueError):
        permutation_of_diagonal(3, 9)


def test_hesse_stabilizer_divisible_by_three():
    rep = detect_symmetries(hesse())
    assert rep.exhaustive
    assert rep.order % 3 == 0
    for g in rep.generators:
        assert rep.order % g.order() == 0


def test_random_vector_trivial_stabilizer():
    rng = np.random.default_rng(5)
    v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    rep = detect_symmetries(FiducialVector.from_entries([complex(x) for x in v], 40))
    assert rep.order == 1
    assert rep.elements[0].matrix == SymplecticMatrix.identity(5)


def test_real_d7_fiducial_has_antiunitary(real_fiducial_7):
    rep = detect_symmetries(real_fiducial_7)
    assert rep.has_antiunitary
    assert rep.zauner_divisible


def test_stabilizer_order_invariant_under_displacement(real_fiducial_7):
    base = detect_symmetries(real_fiducial_7)
    moved = FiducialVector(apply_displacement((2, 5), real_fiducial_7.vector), "standard", True)
    rep = detect_symmetries(moved)
    assert rep.order == base.order
    assert rep.unitary_order == base.unitary_order


def test_elements_fix_the_fiducial(real_fiducial_7):
    rep = detect_symmetries(real_fiducial_7)
    v = real_fiducial_7.vector
    with workdps(v.digits):
        for e in rep.elements:
            w = e.apply(v)
            k = max(range(7), key=lambda i: abs(v[i]))
            ph = w[k] / v[k]
            assert max(abs(a - ph * b) for a, b in zip(w, v)) < mpmath.mpf(10) ** (15 - v.digits)


def test_fixed_subspace_vectors_are_fixed():
    d = 7
    ops = (SymplecticMatrix.diagonal(2, d), SymplecticMatrix.conjugation_flip(d))
    basis = fixed_subspace(ops, d, 40)
    assert len(basis) == 3  # index 0 plus the two cosets of <2> in Z_7^x, real entries
    for b in basis:
        with workdps(40):
            v = FiducialVector.from_entries([mpmath.mpc(b[k], b[d + k]) for k in range(d)], 40)
            for G in ops:
                w = apply_operator(G, v.vector)
                assert w.max_abs_diff(v.vector) < mpmath.mpf(10) ** -35
