import mpmath
import numpy as np
import pytest

from sicforge.fingerprint import (FingerprintError, almost_flat_from_fourier, extract_phases,
                                  fingerprint, is_algebraic_unit, minpoly_residual, orbit_structure,
                                  to_almost_flat, unit_check, unit_circle_conjugates)
from sicforge.heisenberg import FiducialVector
from sicforge.hpnum import ComplexVector, workdps
from sicforge.verifier import verify_sic

D7_MINPOLY = [1, -2, 1, -2, 1]


@pytest.fixture(scope="module")
def report7(zauner_fiducial_7):
    return fingerprint(zauner_fiducial_7, theta=3)


def test_unit_checks():
    assert is_algebraic_unit(D7_MINPOLY)
    assert is_algebraic_unit([-1, 1])
    assert not is_algebraic_unit([2, 0, 1])
    assert not is_algebraic_unit([1, 0, 2])
    ok, why = unit_check([3, 0, 3])  # content 3 removed: 1 + x^2
    assert ok, why


def test_circle_roots_of_x2_plus_1():
    roots = unit_circle_conjugates([1, 0, 1], digits=40)
    with workdps(40):
        assert len(roots) == 2
        assert abs(roots[0] + 1j) < mpmath.mpf(10) ** -35 and abs(roots[1] - 1j) < mpmath.mpf(10) ** -35


def test_circle_roots_none_off_circle():
    assert unit_circle_conjugates([1, -3, 1], digits=40) == []


def test_circle_roots_d7_polynomial():
    roots = unit_circle_conjugates(D7_MINPOLY, digits=60)
    assert len(roots) == 2
    with workdps(60):
        for r in roots:
            assert abs(abs(r) - 1) < mpmath.mpf(10) ** -50
            assert abs(r.real - mpmath.mpf("-0.2071")) < 1e-4
        assert abs(roots[0] - mpmath.conj(roots[1])) < mpmath.mpf(10) ** -50


def _synthetic(d, theta, period, digits=40):
    """Phases u_{theta^r} = e(r mod period / period + 1/7), indexed by j."""
    with workdps(digits):
        phases = [None] * (d - 1)
        for r in range(d - 1):
            phases[pow(theta, r, d) - 1] = mpmath.expjpi(2 * mpmath.mpf(r % period) / period + mpmath.mpf(2) / 7)
    return phases


@pytest.mark.parametrize("d,theta,period", [(7, 3, 2), (7, 3, 1), (19, 2, 3), (19, 2, 6), (13, 2, 4)])
def test_orbit_structure_recovers_injected_period(d, theta, period):
    assert orbit_structure(_synthetic(d, theta, period), theta, d) == period


def test_orbit_structure_generic_is_full():
    rng = np.random.default_rng(0)
    with workdps(40):
        phases = [mpmath.expj(float(t)) for t in rng.uniform(0, 6, 12)]
    assert orbit_structure(phases, 2, 13) == 12


def test_random_vector_is_not_almost_flat():
    rng = np.random.default_rng(7)
    v = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    afv = to_almost_flat(FiducialVector.from_entries([complex(x) for x in v], 40))
    assert afv.flatness_residual > 1e-3


def test_rejects_other_dimensions():
    with pytest.raises((ValueError, FingerprintError)):
        to_almost_flat(FiducialVector.from_entries([1, 0, 0, 0, 0], 40))


def test_almost_flat_residuals_and_ratio(zauner_fiducial_7):
    afv = to_almost_flat(zauner_fiducial_7)
    assert afv.flatness_residual < mpmath.mpf(10) ** -20
    assert afv.ratio_residual < mpmath.mpf(10) ** -20
    with workdps(100):
        c = 2 + mpmath.sqrt(8)
        assert abs(afv.a0 + c) < mpmath.mpf(10) ** -80
        for a in afv.tail:
            assert abs(abs(a) ** 2 - c) < mpmath.mpf(10) ** -20


def test_almost_flat_is_idempotent(zauner_fiducial_7):
    afv = to_almost_flat(zauner_fiducial_7)
    again = to_almost_flat(afv.to_fiducial())
    assert again.shift == (0, 0)
    with workdps(100):
        assert max(abs(x - y) for x, y in zip(afv.entries, again.entries)) < mpmath.mpf(10) ** -80


def test_exact_input_is_identity(zauner_fiducial_7):
    afv = to_almost_flat(zauner_fiducial_7)
    v = ComplexVector(afv.entries, afv.digits)
    back = almost_flat_from_fourier(v)
    with workdps(100):
        assert max(abs(x - y) for x, y in zip(afv.entries, back.entries)) < mpmath.mpf(10) ** -80


def test_reconstructed_fourier_vector_is_a_sic(zauner_fiducial_7):
    cert = verify_sic(to_almost_flat(zauner_fiducial_7).to_fiducial())
    assert cert.passed


def test_phases_unit_modulus(report7):
    assert report7.phase_deviation < mpmath.mpf(10) ** -25
    assert len(report7.phases) == 6


def test_d7_pipeline(report7):
    assert report7.m == 2
    assert report7.minpoly == D7_MINPOLY
    assert report7.is_unit and report7.degree == 4
    for u in report7.phases:
        assert minpoly_residual(D7_MINPOLY, u, 100) < mpmath.mpf(10) ** -60


def test_phases_are_circle_roots(report7):
    roots = unit_circle_conjugates(report7.minpoly, digits=100)
    with workdps(100):
        for u in report7.phases:
            assert min(abs(u - r) for r in roots) < mpmath.mpf(10) ** -60


def test_conjugate_fiducial_conjugates_phases(zauner_fiducial_7, report7):
    conj = FiducialVector(zauner_fiducial_7.vector.conj(), "standard", True)
    rep = extract_phases(to_almost_flat(conj))
    with workdps(100):
        want = sorted((complex(mpmath.conj(u)) for u in report7.phases), key=lambda z: (round(z.real, 12), z.imag))
        got = sorted((complex(u) for u in rep.phases), key=lambda z: (round(z.real, 12), z.imag))
    assert np.allclose(want, got, atol=1e-30)


def test_summary_keys(report7):
    keys = report7.summary()
    assert keys["fingerprint_theta"] == 3
    assert all(k.startswith("fingerprint_") for k in keys)
