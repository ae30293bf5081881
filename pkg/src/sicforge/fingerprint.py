"""From a numerical fiducial to algebraic data.

A fiducial in dimension d = n^2 + 3 with the right symmetry has an almost flat
Fourier transform: one component a_0 with |a_0| = 2 + sqrt(d+1) and all others of
modulus sqrt(2 + sqrt(d+1)). The tail then encodes unit-circle phases
u_j = a_j^2 / (-2 - sqrt(d+1)), whose minimal polynomials are recovered by
lattice reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath
import numpy as np
import sympy

from .heisenberg import FiducialVector, apply_displacement, orbit_numpy
from .hpnum import ComplexVector, dft, fmt, workdps
from .lattice import minimal_polynomial, poly_eval
from .quadfield import dimension_form, primitive_root

# float screen: frames whose flatness is within this of the best are "equally flat"
FLAT_SCREEN = 1e-9
COSET_SCREEN = 1e-8


class FingerprintError(ValueError):
    """A pipeline stage refused its input; the message carries the residual."""


@dataclass(frozen=True)
class AlmostFlatVector:
    d: int
    a0: mpmath.mpc
    tail: tuple
    flatness_residual: mpmath.mpf
    ratio_residual: mpmath.mpf
    digits: int
    shift: tuple[int, int] = (0, 0)

    @property
    def entries(self) -> tuple:
        return (self.a0,) + tuple(self.tail)

    def to_fiducial(self) -> FiducialVector:
        """Normalized Fourier-basis fiducial."""
        return FiducialVector(ComplexVector(self.entries, self.digits).normalized(), "fourier", True)


def _root_term(d: int):
    return 2 + mpmath.sqrt(d + 1)


def _order3(d: int) -> int | None:
    if d < 7 or not sympy.isprime(d) or (d - 1) % 3:
        return None
    return pow(primitive_root(d), (d - 1) // 3, d)


def almost_flat_from_fourier(v: ComplexVector, shift=(0, 0)) -> AlmostFlatVector:
    """Rescale a Fourier vector so a_0 = -(2+sqrt(d+1)) and measure its flatness."""
    d, digits = v.dim, v.digits
    with workdps(digits):
        c = _root_term(d)
        a0 = v[0]
        if a0 == 0:
            raise FingerprintError("distinguished component is zero")
        v = v.scaled(-c * mpmath.conj(a0) / abs(a0) ** 2)
        mods = [abs(x) for x in v]
        flat = max(abs(m - mods[1]) for m in mods[1:])
        ratio = abs(mods[0] ** 2 - c * mods[1] ** 2)
        return AlmostFlatVector(d, v[0], tuple(v[1:]), flat, ratio, digits, tuple(shift))


def to_almost_flat(fid: FiducialVector) -> AlmostFlatVector:
    """Search the d^2 frames D_p psi for the one whose DFT is almost flat with a_0 distinguished.

    Translations change only the Fourier moduli by a cyclic shift, so several frames
    tie on flatness; ties are broken by preferring a tail constant on the cosets of
    the order-3 subgroup of Z_d^x (prime d), then by index order.
    """
    if not fid.normalized:
        raise ValueError("fiducial must be normalized")
    fid = fid.to_standard()
    d = fid.dim
    form = dimension_form(d) if d >= 4 else None
    if form is None or not form.is_form:
        raise ValueError(f"d={d} is not of the form n^2 + 3")
    psi = fid.to_numpy()
    four = np.fft.ifft(orbit_numpy(psi), axis=2) * np.sqrt(d)
    mods = np.abs(four)
    flat = np.max(np.abs(mods[:, :, 1:] - mods[:, :, 1:2]), axis=2)
    # the distinguished entry must be the big one
    flat = np.where(mods[:, :, 0] > mods[:, :, 1], flat, np.inf)
    best = float(flat.min())
    h = _order3(d)
    ks = np.arange(d)
    choices = []
    for i in range(d):
        for j in range(d):
            if flat[i, j] > best + FLAT_SCREEN:
                continue
            coset = 0.0 if h is None else float(np.max(np.abs(four[i, j, (h * ks) % d] - four[i, j])))
            regular = coset < COSET_SCREEN
            choices.append((not regular, 0.0 if regular else coset, i, j))
    _, _, i, j = min(choices)
    v = dft(apply_displacement((i, j), fid.vector))
    return almost_flat_from_fourier(v, (i, j))


@dataclass
class FingerprintReport:
    d: int
    phases: tuple
    digits: int
    phase_deviation: mpmath.mpf
    flatness_residual: mpmath.mpf | None = None
    ratio_residual: mpmath.mpf | None = None
    m: int | None = None
    theta: int | None = None
    minpolys: list = field(default_factory=list)
    is_unit: bool | None = None
    degree: int | None = None

    @property
    def minpoly(self):
        return self.minpolys[0] if self.minpolys else None

    def phase(self, j: int):
        """u_j for j = 1..d-1."""
        j %= self.d
        if j == 0:
            raise IndexError("u_0 is not defined; a_0 is the distinguished component")
        return self.phases[j - 1]

    def ordered(self, theta: int | None = None) -> list:
        """[u_{theta^r}] for r = 0..p-2."""
        theta = self.theta if theta is None else theta
        return [self.phase(pow(theta, r, self.d)) for r in range(self.d - 1)]

    def independent(self) -> list:
        if self.m is None or self.theta is None:
            raise ValueError("orbit structure not computed")
        return self.ordered()[:self.m]

    def summary(self) -> dict:
        out = {"fingerprint_phase_deviation": fmt(self.phase_deviation)}
        if self.flatness_residual is not None:
            out["fingerprint_flatness_residual"] = fmt(self.flatness_residual)
            out["fingerprint_ratio_residual"] = fmt(self.ratio_residual)
        if self.theta is not None:
            out["fingerprint_theta"] = self.theta
        if self.m is not None:
            out["fingerprint_independent"] = self.m
        if self.minpolys:
            out["fingerprint_minpoly"] = "; ".join(
                "-" if p is None else ",".join(map(str, p)) for p in self.minpolys)
            out["fingerprint_degree"] = self.degree
            out["fingerprint_unit"] = "yes" if self.is_unit else "no"
        return out


def extract_phases(afv: AlmostFlatVector, flat_tol_digits: int | None = None,
                   phase_tol_digits: int | None = None) -> FingerprintReport:
    """u_j = a_j^2 / (-2 - sqrt(d+1)) in the frame scaled so a_0 = -(2 + sqrt(d+1)).

    Only the global scale is fixed, so the reported deviation max ||u_j| - 1|
    measures how far each |a_j|^2 is from 2 + sqrt(d+1). Defaults: flatness and ratio residuals below 1e-(digits/5), phase moduli within
    1e-(digits/4) of 1.
    """
    digits = afv.digits
    flat_tol_digits = digits // 5 if flat_tol_digits is None else flat_tol_digits
    phase_tol_digits = digits // 4 if phase_tol_digits is None else phase_tol_digits
    with workdps(digits):
        tol = mpmath.mpf(10) ** (-flat_tol_digits)
        worst = max(afv.flatness_residual, afv.ratio_residual)
        if worst > tol:
            raise FingerprintError(
                f"vector is not almost flat: flatness {fmt(afv.flatness_residual)}, "
                f"ratio {fmt(afv.ratio_residual)} (threshold 1e-{flat_tol_digits})")
        c = _root_term(afv.d)
        phases = [a * a / (-c) for a in afv.tail]
        dev = max(abs(abs(u) - 1) for u in phases)
        if dev > mpmath.mpf(10) ** (-phase_tol_digits):
            raise FingerprintError(f"phases are off the unit circle by {fmt(dev)}")
    return FingerprintReport(afv.d, tuple(phases), digits, dev,
                             afv.flatness_residual, afv.ratio_residual)


def orbit_structure(phases, theta: int, d: int, tol=None) -> int:
    """Smallest period t | p-1 of r -> u_{theta^r}; p-1 if none is shorter.

    ``phases`` is indexed by j = 1..d-1 (so phases[j-1] = u_j).
    """
    if not sympy.isprime(d):
        raise ValueError(f"d={d} must be prime")
    if sympy.n_order(theta, d) != d - 1:
        raise ValueError(f"{theta} is not a primitive root mod {d}")
    seq = [phases[pow(theta, r, d) - 1] for r in range(d - 1)]
    if tol is None:
        tol = mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))
    for t in sympy.divisors(d - 1):
        if all(abs(seq[(r + t) % (d - 1)] - seq[r]) < tol for r in range(d - 1)):
            return t
    return d - 1


def is_algebraic_unit(poly) -> bool:
    """Monic (after content removal) integer polynomial with constant term +-1."""
    return unit_check(poly)[0]


def unit_check(poly) -> tuple[bool, str]:
    coeffs = [int(c) for c in poly]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    g = 0
    for c in coeffs:
        g = sympy.igcd(g, c)
    if g == 0:
        return False, "zero polynomial"
    coeffs = [c // g for c in coeffs]
    if abs(coeffs[-1]) != 1:
        return False, f"not monic: leading coefficient {coeffs[-1]}"
    if abs(coeffs[0]) != 1:
        return False, f"constant term {coeffs[0]} is not +-1"
    return True, "unit"


def unit_circle_conjugates(poly, digits: int = 60, tol=None) -> list:
    """Roots of an integer polynomial (ascending coefficients) lying on |z| = 1, sorted by argument."""
    coeffs = [int(c) for c in poly]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) - 1 > 64:
        raise ValueError("degree above 64")
    if len(coeffs) < 2:
        return []
    with workdps(digits):
        tol = mpmath.mpf(10) ** (-(digits // 2)) if tol is None else mpmath.mpf(tol)
        try:
            roots = mpmath.polyroots(list(reversed(coeffs)), maxsteps=50 + 20 * len(coeffs),
                                     extraprec=2 * digits)
        except mpmath.NoConvergence as exc:
            raise FingerprintError(
                f"root finder did not converge at {digits} digits; retry with at least "
                f"{2 * digits} digits") from exc
        roots = [mpmath.mpc(r) for r in roots]
        on = [r for r in roots if abs(abs(r) - 1) < tol]
        return sorted(on, key=lambda z: (float(mpmath.arg(z)), float(z.real)))


def fingerprint(fid: FiducialVector, theta: int | None = None, max_degree: int = 16,
                max_height: int = 10 ** 8) -> FingerprintReport:
    """Almost-flat form, phases, orbit structure and minimal polynomials of the independent phases."""
    afv = to_almost_flat(fid)
    report = extract_phases(afv)
    d = report.d
    if not sympy.isprime(d):
        return report
    report.theta = primitive_root(d) if theta is None else theta
    with workdps(report.digits):
        report.m = orbit_structure(report.phases, report.theta, d,
                                   tol=mpmath.mpf(10) ** (-(report.digits // 4)))
        report.minpolys = [minimal_polynomial(u, max_degree, max_height, report.digits)
                           for u in report.independent()]
    found = [p for p in report.minpolys if p is not None]
    report.degree = max((len(p) - 1 for p in found), default=None)
    report.is_unit = bool(found) and len(found) == len(report.minpolys) and all(
        is_algebraic_unit(p) for p in found)
    return report


def minpoly_residual(poly, x, digits: int):
    with workdps(digits):
        return abs(poly_eval([int(c) for c in poly], mpmath.mpc(x)))
